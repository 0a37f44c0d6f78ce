//! The `kset` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | success                                              |
//! | 1    | numerical failure (overflow, curve too close, …)     |
//! | 2    | bad flags or function spec                           |
//! | 3    | file input/output failure                            |
//! | 4    | surgery `gamma` below the feasibility threshold      |
//! | 5    | a surgery verification check failed                  |
//! | 6    | curve refinement cap exceeded (zero on the circle)   |
//!
//! Data goes to stdout unless `--out`/`--report` name a file; human-readable
//! messages go to stderr.

pub mod defaults;
pub mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use crate::catalog::FunctionSpec;
use crate::contour;
use crate::error::{Error, Result};
use crate::orbit::{self, OrbitBudget};
use crate::radial;
use crate::raster::{self, ImageFormat, Window};
use crate::surgery::{self, VerifyOptions};

pub use report::RunReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_GAMMA: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;
pub const EXIT_REFINEMENT: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "kset", version, about = "Bounded-orbit sets and minimum-modulus certificates for entire functions")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render the bounded-orbit set on a pixel grid.
    Render(RenderArgs),
    /// Scan radii for certificates m(r, f) > r.
    Certify(CertifyArgs),
    /// Minimum-modulus growth m(r, f)/r^p and order estimates.
    Scan(ScanArgs),
    /// Winding number of the image of a circle about a point.
    Winding(WindingArgs),
    /// Test whether the image of |z| = r surrounds the closed disc.
    Surround(SurroundArgs),
    /// Build and verify the quasiregular surgery ladder.
    Surgery(SurgeryArgs),
    /// Classify orbits of seed points.
    Orbit(OrbitArgs),
}

#[derive(Debug, Args)]
pub struct FunctionArg {
    /// Function spec, e.g. `quad:-2`, `lambda-exp:0.3`, `prod2n`, `bd:k=1,base=3`.
    #[arg(long = "function", short = 'f')]
    pub function: String,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[arg(long, default_value_t = defaults::MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = defaults::BOUND_RADIUS)]
    pub bound_radius: f64,
    #[arg(long, default_value_t = defaults::ESCAPE_RADIUS)]
    pub escape_radius: f64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub function: FunctionArg,
    /// `x_min,x_max,y_min,y_max`.
    #[arg(long, default_value = defaults::WINDOW, allow_hyphen_values = true)]
    pub window: String,
    /// `WIDTHxHEIGHT` in pixels.
    #[arg(long, default_value = defaults::RES)]
    pub res: String,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Image path; `.png` selects PNG, anything else binary PGM.
    #[arg(long, default_value = defaults::RENDER_OUT)]
    pub out: PathBuf,
    /// JSON statistics path (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub function: FunctionArg,
    #[arg(long)]
    pub r_min: f64,
    #[arg(long)]
    pub r_max: f64,
    #[arg(long, default_value_t = defaults::GRID)]
    pub grid: usize,
    /// Angular samples per circle.
    #[arg(long, default_value_t = defaults::SAMPLES)]
    pub samples: usize,
    /// CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary path (default: stdout when `--out` is given, else stderr).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub function: FunctionArg,
    /// Exponent `p` in m(r, f)/r^p.
    #[arg(long, default_value_t = defaults::POWER)]
    pub power: u32,
    #[arg(long, default_value_t = defaults::SCAN_R_MAX)]
    pub r_max: f64,
    /// Comma-separated radii (> e) for the order estimate.
    #[arg(long)]
    pub radii: Option<String>,
    /// CSV of the growth rows `r,m_est,log_ratio`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WindingArgs {
    #[command(flatten)]
    pub function: FunctionArg,
    #[arg(long)]
    pub radius: f64,
    /// `re,im`.
    #[arg(long, default_value = defaults::POINT, allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
    /// CSV of the traced curve `theta,re,im,log_abs`.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurroundArgs {
    #[command(flatten)]
    pub function: FunctionArg,
    #[arg(long)]
    pub radius: f64,
    #[arg(long, default_value_t = defaults::SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurgeryArgs {
    #[arg(long, default_value_t = defaults::GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = defaults::LEVELS)]
    pub levels: usize,
    /// Samples per seam circle.
    #[arg(long, default_value_t = defaults::SEAM_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = defaults::CHAIN_SAMPLES)]
    pub chain_samples: usize,
    #[arg(long, default_value_t = defaults::DILATATION_POINTS)]
    pub dilatation_points: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub function: FunctionArg,
    /// A single seed `re,im`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "seeds")]
    pub point: Option<String>,
    /// CSV of `re,im` seeds.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Also list the first N iterates of `--point`.
    #[arg(long)]
    pub trace: Option<usize>,
    /// CSV of verdicts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn usage(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

fn parse_floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("{what}: cannot parse {s:?}")))?;
    if v.len() != n {
        return Err(usage(format!("{what}: expected {n} comma-separated numbers, got {s:?}")));
    }
    Ok(v)
}

pub fn parse_window(window: &str, res: &str) -> Result<Window> {
    let w = parse_floats(window, 4, "--window")?;
    let (wx, hx) = res
        .split_once(['x', 'X'])
        .ok_or_else(|| usage(format!("--res: expected WIDTHxHEIGHT, got {res:?}")))?;
    let px = |s: &str| s.trim().parse::<usize>().map_err(|_| usage(format!("--res: bad size {res:?}")));
    Window::new(w[0], w[1], w[2], w[3], px(wx)?, px(hx)?)
}

pub fn parse_point(s: &str) -> Result<Complex64> {
    let v = parse_floats(s, 2, "--point")?;
    Ok(Complex64::new(v[0], v[1]))
}

fn budget(b: &BudgetArgs) -> Result<OrbitBudget> {
    OrbitBudget::new(b.max_iter, b.bound_radius, b.escape_radius)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidSpec(_) | Error::Parse { .. } | Error::InvalidArgument(_) => EXIT_USAGE,
        Error::Io(_) | Error::Csv(_) | Error::Image(_) => EXIT_IO,
        Error::GammaTooSmall { .. } => EXIT_GAMMA,
        Error::RefinementCapExceeded { .. } => EXIT_REFINEMENT,
        _ => EXIT_NUMERIC,
    }
}

/// Where a command's JSON report goes.
enum Sink<'a> {
    File(&'a Path),
    Stdout,
    Stderr,
}

struct Io<'a> {
    stdout: &'a mut (dyn Write + Send),
    stderr: &'a mut (dyn Write + Send),
}

impl Io<'_> {
    fn emit(&mut self, report: &RunReport, sink: Sink) -> Result<()> {
        let text = report.to_json();
        match sink {
            Sink::File(p) => std::fs::write(p, text)?,
            Sink::Stdout => self.stdout.write_all(text.as_bytes())?,
            Sink::Stderr => self.stderr.write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn report_sink(path: &Option<PathBuf>) -> Sink<'_> {
    path.as_deref().map_or(Sink::Stdout, Sink::File)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    if cli.threads == Some(0) {
        let _ = writeln!(stderr, "error: --threads must be positive");
        return EXIT_USAGE;
    }
    let mut io = Io { stdout, stderr };
    let outcome = crate::with_threads(cli.threads, || dispatch(&cli.command, &mut io));
    let code = match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            exit_code(&e)
        }
    };
    let _ = io.stdout.flush();
    code
}

fn dispatch(cmd: &Command, io: &mut Io) -> Result<i32> {
    match cmd {
        Command::Render(a) => cmd_render(a, io),
        Command::Certify(a) => cmd_certify(a, io),
        Command::Scan(a) => cmd_scan(a, io),
        Command::Winding(a) => cmd_winding(a, io),
        Command::Surround(a) => cmd_surround(a, io),
        Command::Surgery(a) => cmd_surgery(a, io),
        Command::Orbit(a) => cmd_orbit(a, io),
    }
}

fn cmd_render(a: &RenderArgs, io: &mut Io) -> Result<i32> {
    let spec = FunctionSpec::parse(&a.function.function)?;
    let window = parse_window(&a.window, &a.res)?;
    let budget = budget(&a.budget)?;
    let grid = raster::render_k_set(&spec, window, budget)?;
    let format = ImageFormat::from_path(&a.out);
    raster::write_image(&grid, &a.out, format)?;

    let mut report = RunReport::new("render", Some(&spec));
    report
        .param("window", window)
        .param("budget", budget)
        .param("out", &a.out)
        .param("format", if format == ImageFormat::Png { "png" } else { "pgm" })
        .disclaim(report::RASTER_DISCLAIMER)
        .disclaim(report::ORBIT_DISCLAIMER);
    report.results = json!({ "stats": raster::stats(&grid) });
    io.emit(&report, report_sink(&a.report))?;
    writeln!(io.stderr, "wrote {}", a.out.display())?;
    Ok(EXIT_OK)
}

fn cmd_certify(a: &CertifyArgs, io: &mut Io) -> Result<i32> {
    let spec = FunctionSpec::parse(&a.function.function)?;
    let rows = radial::spl_certificate_with(&spec, a.r_min, a.r_max, a.grid, a.samples)?;
    match &a.out {
        Some(p) => write_rows(&rows, create(p)?)?,
        None => write_rows(&rows, &mut *io.stdout)?,
    }
    let certified: Vec<f64> = rows.iter().filter(|r| r.certified).map(|r| r.r).collect();
    let mut report = RunReport::new("certify", Some(&spec));
    report
        .param("r_min", a.r_min)
        .param("r_max", a.r_max)
        .param("grid", a.grid)
        .param("samples", a.samples)
        .param("out", &a.out)
        .disclaim(report::CERTIFICATE_DISCLAIMER);
    report.results = json!({
        "radii_scanned": rows.len(),
        "certified_count": certified.len(),
        "certified_radii": certified,
        "summary": if certified.is_empty() {
            "no certified radius in range".to_string()
        } else {
            format!("{} of {} radii certified", certified.len(), rows.len())
        },
    });
    let sink = match (&a.report, &a.out) {
        (Some(p), _) => Sink::File(p),
        (None, Some(_)) => Sink::Stdout,
        (None, None) => Sink::Stderr,
    };
    io.emit(&report, sink)?;
    Ok(EXIT_OK)
}

/// Writes certificate rows as `r,m_est,m_lower,M_est,theta_min,certified`.
pub fn write_rows<W: Write>(rows: &[radial::RadialScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_scan(a: &ScanArgs, io: &mut Io) -> Result<i32> {
    let spec = FunctionSpec::parse(&a.function.function)?;
    let growth = radial::minmod_growth_check(&spec, a.power, a.r_max)?;
    let order = match &a.radii {
        Some(s) => {
            let radii = s
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| usage(format!("--radii: cannot parse {s:?}")))?;
            let profile = radial::order_profile(&spec, &radii)?;
            let estimate = profile.iter().filter_map(|p| p.secant).fold(f64::NEG_INFINITY, f64::max);
            Some(json!({ "estimate": estimate, "profile": profile }))
        }
        None => None,
    };
    if let Some(p) = &a.out {
        let mut w = csv::Writer::from_writer(create(p)?);
        for row in &growth.rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    let mut report = RunReport::new("scan", Some(&spec));
    report
        .param("power", a.power)
        .param("r_max", a.r_max)
        .param("grid", radial::GROWTH_GRID)
        .param("samples", radial::GROWTH_SAMPLES)
        .param("radii", &a.radii);
    report.results = json!({
        "growth": { "r_best": growth.r_best, "ratio_best": growth.ratio_best },
        "order": order,
    });
    io.emit(&report, report_sink(&a.report))?;
    Ok(EXIT_OK)
}

fn cmd_winding(a: &WindingArgs, io: &mut Io) -> Result<i32> {
    let spec = FunctionSpec::parse(&a.function.function)?;
    let w = parse_point(&a.point)?;
    let trace = contour::trace_circle_image(&spec, a.radius, a.tol)?;
    let winding = contour::winding_number(&trace, w)?;
    if let Some(p) = &a.trace_out {
        trace.write_csv(create(p)?)?;
    }
    let surround = contour::surrounds_disc(&spec, a.radius, defaults::SAMPLES)?;
    let mut report = RunReport::new("winding", Some(&spec));
    report
        .param("radius", a.radius)
        .param("point", [w.re, w.im])
        .param("tol", a.tol)
        .disclaim(report::CERTIFICATE_DISCLAIMER);
    report.results = json!({
        "winding": winding,
        "trace_points": trace.points.len(),
        "surround": surround,
    });
    io.emit(&report, report_sink(&a.report))?;
    writeln!(io.stderr, "winding = {winding}")?;
    Ok(EXIT_OK)
}

fn cmd_surround(a: &SurroundArgs, io: &mut Io) -> Result<i32> {
    let spec = FunctionSpec::parse(&a.function.function)?;
    let s = contour::surrounds_disc(&spec, a.radius, a.samples)?;
    let mut report = RunReport::new("surround", Some(&spec));
    report
        .param("radius", a.radius)
        .param("samples", a.samples)
        .param("tol", contour::DEFAULT_TOL)
        .disclaim(report::CERTIFICATE_DISCLAIMER);
    report.results = serde_json::to_value(s).expect("serializable");
    io.emit(&report, report_sink(&a.report))?;
    Ok(EXIT_OK)
}

fn cmd_surgery(a: &SurgeryArgs, io: &mut Io) -> Result<i32> {
    let opts = VerifyOptions {
        samples_per_seam: a.samples,
        chain_samples: a.chain_samples,
        dilatation_points: a.dilatation_points,
        fd_step: surgery::DEFAULT_FD_STEP,
    };
    let result = surgery::verify(a.gamma, a.levels, opts)?;
    let mut report = RunReport::new("surgery", None);
    report
        .param("gamma", a.gamma)
        .param("levels", a.levels)
        .param("options", opts)
        .disclaim(report::tag_disclaimer(crate::catalog::Tag::Quasiregular));
    report.results = serde_json::to_value(&result).expect("serializable");
    io.emit(&report, report_sink(&a.report))?;
    if result.passed {
        writeln!(io.stderr, "all surgery checks passed")?;
        Ok(EXIT_OK)
    } else {
        writeln!(io.stderr, "surgery verification failed")?;
        Ok(EXIT_VERIFY)
    }
}

fn cmd_orbit(a: &OrbitArgs, io: &mut Io) -> Result<i32> {
    let spec = FunctionSpec::parse(&a.function.function)?;
    let budget = budget(&a.budget)?;
    let seeds = match (&a.point, &a.seeds) {
        (Some(p), _) => vec![parse_point(p)?],
        (None, Some(path)) => orbit::read_seeds_csv(File::open(path)?)?,
        (None, None) => return Err(usage("orbit needs --point or --seeds".into())),
    };
    let verdicts = orbit::classify_batch(&spec, &seeds, &budget);
    if let Some(p) = &a.out {
        orbit::write_verdicts_csv(create(p)?, &seeds, &verdicts)?;
    }
    let trace = match (a.trace, seeds.as_slice()) {
        (Some(n), [z0]) => Some(orbit::orbit_trace(&spec, *z0, n)),
        (Some(_), _) => return Err(usage("--trace needs a single --point".into())),
        _ => None,
    };
    let mut report = RunReport::new("orbit", Some(&spec));
    report
        .param("budget", budget)
        .param("seeds", a.seeds.as_ref().map_or_else(
            || json!(seeds.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
            |p| json!(p),
        ))
        .param("trace", a.trace)
        .disclaim(report::ORBIT_DISCLAIMER);
    let listed: Vec<_> = seeds
        .iter()
        .zip(&verdicts)
        .map(|(z, v)| json!({ "seed": [z.re, z.im], "verdict": v }))
        .collect();
    report.results = json!({ "verdicts": listed, "trace": trace });
    io.emit(&report, report_sink(&a.report))?;
    Ok(EXIT_OK)
}
