//! A quasiregular map `g` built by gluing polynomial pieces on a ladder of
//! annuli, with explicit log-linear interpolation across the seams.
//!
//! With `R_0 = 1`, `log R_1 = γ` and `log R_{n+1} = log R_n + γ n!`, each
//! level `n` has radii `P_n < Q_n < R_n < S_n < T_n` spaced by the gap
//! `√(γ n!)` in `log|z|`. The map is
//!
//! * `z² − 2` on `|z| ≤ S_1`,
//! * `a_n z^{n+1}` on `T_n ≤ |z| ≤ P_{n+1}`,
//! * `b_n (z − R_n) z^n` on `Q_n ≤ |z| ≤ S_n` for `n ≥ 2`,
//!
//! and interpolated on `ann(S_n, T_n)` and `ann(P_{n+1}, Q_{n+1})`. All radii
//! are stored as natural logs: `log T_8` is already about `1.4e5` at `γ = 24`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::EvalResult;
use crate::error::{Error, Result};
use crate::logpolar::{ln_1m, wrap_angle, LogPolar, Point};

pub const DEFAULT_GAMMA: f64 = 24.0;
pub const DEFAULT_LEVELS: usize = 8;
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// `C > 1/2` for the inner interpolation, hence `K ≤ 2` there.
pub const C_FLOOR: f64 = 0.5;

/// Radii and coefficients of the ladder, all as natural logs.
#[derive(Clone, Debug, Serialize)]
pub struct SurgeryLadder {
    pub gamma: f64,
    pub n_max: usize,
    /// `log R_n`, `n = 0..=n_max+1`.
    log_r: Vec<f64>,
    /// `√(γ n!)`, `n = 0..=n_max+1` (index 0 unused).
    gap: Vec<f64>,
}

/// One level of the ladder, for reports.
#[derive(Clone, Debug, Serialize)]
pub struct LadderRow {
    pub n: usize,
    pub log_p: f64,
    pub log_q: f64,
    pub log_r: f64,
    pub log_s: f64,
    pub log_t: f64,
    pub log_abs_a: f64,
    pub log_abs_b: f64,
    pub sign_b: i8,
}

/// Pieces of the map that are analytic near a seam.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Piece {
    /// `z² − 2`
    Quadratic,
    /// `a_n z^{n+1}`
    Power(usize),
    /// `b_n (z − R_n) z^n`
    Shifted(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Zone {
    /// `|z| ≤ S_1`
    Core,
    /// `T_n ≤ |z| ≤ P_{n+1}`
    Power(usize),
    /// `Q_n ≤ |z| ≤ S_n`, `n ≥ 2`
    Shifted(usize),
    /// `S_n < |z| < T_n`
    Outer(usize),
    /// `P_{n+1} < |z| < Q_{n+1}`
    Inner(usize),
}

impl Zone {
    pub fn is_interpolated(&self) -> bool {
        matches!(self, Zone::Outer(_) | Zone::Inner(_))
    }
}

/// An interpolation annulus `r1 < |z| < r2` with its boundary pieces.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Annulus {
    pub zone: Zone,
    pub level: usize,
    pub log_r1: f64,
    pub log_r2: f64,
    pub inner: Piece,
    pub outer: Piece,
    /// Winding of both boundary maps around the origin.
    pub degree: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct InterpolationConstants {
    pub delta0: f64,
    pub delta1: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub k: usize,
}

impl InterpolationConstants {
    pub fn dilatation_bound(&self) -> f64 {
        1.0 / self.c
    }
}

/// Boundary constants measured on an interpolation annulus.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeasuredConstants {
    pub annulus: Annulus,
    pub constants: InterpolationConstants,
}

#[derive(Clone, Debug, Serialize)]
pub struct Seam {
    pub name: String,
    pub log_radius: f64,
    pub inside: Zone,
    pub outside: Zone,
    pub max_mismatch: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainCheck {
    pub n: usize,
    pub samples: usize,
    pub holds: bool,
    /// `min log|g| − log S_{n+1}`; positive when the lower inclusion holds.
    pub lower_margin: f64,
    /// `log Q_{n+2} − max log|g|`.
    pub upper_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DilatationSummary {
    pub annulus: Annulus,
    pub points: usize,
    pub max_k: f64,
    pub mean_k: f64,
    /// `1 + 1/n²`
    pub target: f64,
    /// Counts of estimates in `[1, 1.01)`, `[1.01, 1.05)`, `[1.05, 1.1)`,
    /// `[1.1, 1.25)`, `[1.25, 1.5)`, `[1.5, 2)`, `[2, ∞)`.
    pub histogram: [usize; 7],
}

const HISTOGRAM_EDGES: [f64; 6] = [1.01, 1.05, 1.1, 1.25, 1.5, 2.0];

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `−2√(γ(n+1)!) + γ n! − 2√(γ n!)`, i.e. `log(P_{n+1}/T_n)`.
pub fn positivity_margin(gamma: f64, n: usize) -> f64 {
    -2.0 * (gamma * factorial(n + 1)).sqrt() + gamma * factorial(n) - 2.0 * (gamma * factorial(n)).sqrt()
}

impl SurgeryLadder {
    pub fn build(gamma: f64, n_max: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        if n_max < 2 {
            return Err(Error::InvalidArgument(format!("levels must be at least 2, got {n_max}")));
        }
        for n in 1..=n_max {
            let margin = positivity_margin(gamma, n);
            if !(margin > 0.0) {
                return Err(Error::GammaTooSmall {
                    gamma,
                    level: n,
                    margin,
                });
            }
        }
        let mut log_r = vec![0.0, gamma];
        for n in 1..=n_max {
            log_r.push(log_r[n] + gamma * factorial(n));
        }
        let gap = (0..=n_max + 1)
            .map(|n| if n == 0 { f64::NAN } else { (gamma * factorial(n)).sqrt() })
            .collect();
        Ok(SurgeryLadder {
            gamma,
            n_max,
            log_r,
            gap,
        })
    }

    pub fn log_r(&self, n: usize) -> f64 {
        self.log_r[n]
    }

    pub fn gap(&self, n: usize) -> f64 {
        self.gap[n]
    }

    pub fn log_p(&self, n: usize) -> f64 {
        self.log_r[n] - 2.0 * self.gap[n]
    }

    pub fn log_q(&self, n: usize) -> f64 {
        self.log_r[n] - self.gap[n]
    }

    pub fn log_s(&self, n: usize) -> f64 {
        self.log_r[n] + self.gap[n]
    }

    pub fn log_t(&self, n: usize) -> f64 {
        self.log_r[n] + 2.0 * self.gap[n]
    }

    /// `log a_n = −n log R_{n−1}`.
    pub fn log_abs_a(&self, n: usize) -> f64 {
        -(n as f64) * self.log_r[n - 1]
    }

    /// `log|b_n|` with `b_n = −((n+1)²/(n+2)) ((n+1)/n)^n a_n`.
    pub fn log_abs_b(&self, n: usize) -> f64 {
        let m = n as f64;
        2.0 * (m + 1.0).ln() - (m + 2.0).ln() + m * ((m + 1.0) / m).ln() + self.log_abs_a(n)
    }

    pub fn sign_b(&self, _n: usize) -> i8 {
        -1
    }

    pub fn log_t_max(&self) -> f64 {
        self.log_t(self.n_max)
    }

    pub fn table(&self) -> Vec<LadderRow> {
        (1..=self.n_max)
            .map(|n| LadderRow {
                n,
                log_p: self.log_p(n),
                log_q: self.log_q(n),
                log_r: self.log_r(n),
                log_s: self.log_s(n),
                log_t: self.log_t(n),
                log_abs_a: self.log_abs_a(n),
                log_abs_b: self.log_abs_b(n),
                sign_b: self.sign_b(n),
            })
            .collect()
    }

    /// The zone containing `|z| = e^log_abs`.
    pub fn zone(&self, log_abs: f64) -> Result<Zone> {
        if log_abs <= self.log_s(1) {
            return Ok(Zone::Core);
        }
        if log_abs > self.log_t_max() {
            return Err(Error::OutOfLadderRange {
                log_abs,
                log_t_max: self.log_t_max(),
            });
        }
        for n in 1..=self.n_max {
            if log_abs < self.log_t(n) {
                return Ok(Zone::Outer(n));
            }
            if n == self.n_max || log_abs <= self.log_p(n + 1) {
                return Ok(Zone::Power(n));
            }
            if log_abs < self.log_q(n + 1) {
                return Ok(Zone::Inner(n));
            }
            if log_abs <= self.log_s(n + 1) {
                return Ok(Zone::Shifted(n + 1));
            }
        }
        unreachable!("zones cover [S_1, T_max]")
    }

    pub fn annulus(&self, zone: Zone) -> Option<Annulus> {
        match zone {
            Zone::Outer(n) => Some(Annulus {
                zone,
                level: n,
                log_r1: self.log_s(n),
                log_r2: self.log_t(n),
                inner: if n == 1 { Piece::Quadratic } else { Piece::Shifted(n) },
                outer: Piece::Power(n),
                degree: n + 1,
            }),
            Zone::Inner(n) => Some(Annulus {
                zone,
                level: n,
                log_r1: self.log_p(n + 1),
                log_r2: self.log_q(n + 1),
                inner: Piece::Power(n),
                outer: Piece::Shifted(n + 1),
                degree: n + 1,
            }),
            _ => None,
        }
    }

    /// Both interpolation annuli `ann(S_n, T_n)`, `ann(P_{n+1}, Q_{n+1})` of
    /// level `n` that lie inside the ladder.
    pub fn annuli(&self, n: usize) -> Vec<Annulus> {
        let mut v = vec![self.annulus(Zone::Outer(n)).unwrap()];
        if n < self.n_max {
            v.push(self.annulus(Zone::Inner(n)).unwrap());
        }
        v
    }

    /// `(k, log(φ(z)/z^k))` for a piece on `|z| = e^l`, continuous in `θ`;
    /// `k` is the winding of the piece around 0 on that circle.
    fn piece_ratio(&self, piece: Piece, l: f64, theta: f64) -> (usize, Complex64) {
        match piece {
            Piece::Quadratic => {
                let w = LogPolar::new(2.0 * (2f64.ln() / 2.0 - l), -2.0 * theta);
                (2, ln_1m(w.to_complex().unwrap()))
            }
            Piece::Power(n) => (n + 1, Complex64::new(self.log_abs_a(n), 0.0)),
            Piece::Shifted(n) => {
                let lr = self.log_r(n);
                let lb = self.log_abs_b(n);
                if l > lr {
                    // b (1 − R/z) = |b| e^{iπ} (1 − R/z)
                    let w = LogPolar::new(lr - l, -theta).to_complex().unwrap();
                    (n + 1, Complex64::new(lb, PI) + ln_1m(w))
                } else {
                    // b (z − R) = |b| R (1 − z/R)
                    let w = LogPolar::new(l - lr, theta).to_complex().unwrap();
                    (n, Complex64::new(lb + lr, 0.0) + ln_1m(w))
                }
            }
        }
    }

    /// `z d/dz log(φ(z)/z^k)` on `|z| = e^l`.
    fn piece_log_derivative(&self, piece: Piece, l: f64, theta: f64) -> Complex64 {
        match piece {
            Piece::Quadratic => {
                let w = LogPolar::new(2f64.ln() - 2.0 * l, -2.0 * theta).to_complex().unwrap();
                2.0 * w / (1.0 - w)
            }
            Piece::Power(_) => Complex64::new(0.0, 0.0),
            Piece::Shifted(n) => {
                let lr = self.log_r(n);
                if l > lr {
                    let w = LogPolar::new(lr - l, -theta).to_complex().unwrap();
                    w / (1.0 - w)
                } else {
                    let w = LogPolar::new(l - lr, theta).to_complex().unwrap();
                    -w / (1.0 - w)
                }
            }
        }
    }

    fn log_piece(&self, piece: Piece, l: f64, theta: f64) -> Complex64 {
        let (k, ratio) = self.piece_ratio(piece, l, theta);
        k as f64 * Complex64::new(l, theta) + ratio
    }

    /// `log H` on an interpolation annulus:
    /// `k log z + (1 − t) L_1(θ) + t L_2(θ)` with `t = log(r/r1)/log(r2/r1)`.
    fn log_interp(&self, a: &Annulus, l: f64, theta: f64) -> Complex64 {
        let t = (l - a.log_r1) / (a.log_r2 - a.log_r1);
        let (k1, l1) = self.piece_ratio(a.inner, a.log_r1, theta);
        let (k2, l2) = self.piece_ratio(a.outer, a.log_r2, theta);
        debug_assert!(k1 == a.degree && k2 == a.degree);
        a.degree as f64 * Complex64::new(l, theta) + (1.0 - t) * l1 + t * l2
    }

    /// `g` evaluated with the formula of a given zone (which may be extended
    /// slightly past the zone's edges).
    pub fn eval_zone(&self, zone: Zone, l: f64, theta: f64) -> LogPolar {
        match zone {
            Zone::Core => {
                let z = LogPolar::new(l, theta).to_complex().unwrap();
                LogPolar::from_complex(z * z - 2.0)
            }
            Zone::Power(n) => LogPolar::from_ln(self.log_piece(Piece::Power(n), l, theta)),
            Zone::Shifted(n) => {
                let lr = self.log_r(n);
                if l == lr && wrap_angle(theta) == 0.0 {
                    return LogPolar::ZERO;
                }
                LogPolar::from_ln(self.log_piece(Piece::Shifted(n), l, theta))
            }
            Zone::Outer(_) | Zone::Inner(_) => {
                let a = self.annulus(zone).unwrap();
                LogPolar::from_ln(self.log_interp(&a, l, theta))
            }
        }
    }

    pub fn eval_g(&self, z: Point) -> Result<EvalResult> {
        let l = z.log_abs();
        if l <= self.log_s(1) {
            let c = z.to_complex().expect("core points are representable");
            return Ok(EvalResult::from_complex(c * c - 2.0, 0.0));
        }
        let zone = self.zone(l)?;
        let theta = z.to_log_polar().arg;
        Ok(EvalResult::from_log_polar(self.eval_zone(zone, l, theta), 0.0))
    }

    /// Central-difference Wirtinger derivatives `(∂g, ∂̄g)` at `z`.
    ///
    /// In the core zone this is done in Cartesian coordinates with step
    /// `h·max(1, |z|)`. Elsewhere it is done for `log g` against `log z`
    /// with step `h`, and `∂g` is recovered as `(g/z) ∂(log g)/∂(log z)`;
    /// `|∂̄g/∂g|` is the same in both coordinate systems.
    fn wirtinger(&self, z: Point, h: f64) -> Result<(LogPolar, LogPolar)> {
        let l = z.log_abs();
        if l <= self.log_s(1) {
            let c = z.to_complex().expect("core points are representable");
            let step = h * c.norm().max(1.0);
            let g = |w: Complex64| -> Result<Complex64> {
                Ok(self.eval_g(Point::Cartesian(w))?.value.expect("core values are finite"))
            };
            let dx = (g(c + step)? - g(c - step)?) / (2.0 * step);
            let i_step = Complex64::new(0.0, step);
            let dy = (g(c + i_step)? - g(c - i_step)?) / (2.0 * step);
            let i = Complex64::new(0.0, 1.0);
            let dz = 0.5 * (dx - i * dy);
            let dzbar = 0.5 * (dx + i * dy);
            return Ok((LogPolar::from_complex(dz), LogPolar::from_complex(dzbar)));
        }
        let zone = self.zone(l)?;
        let theta = z.to_log_polar().arg;
        let center = self.eval_zone(zone, l, theta);
        let f = |dl: f64, dt: f64| -> Complex64 {
            let v = self.eval_zone(zone, l + dl, theta + dt);
            Complex64::new(v.log_abs - center.log_abs, wrap_angle(v.arg - center.arg))
        };
        let fu = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
        let ft = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
        let i = Complex64::new(0.0, 1.0);
        let dw = 0.5 * (fu - i * ft);
        let dwbar = 0.5 * (fu + i * ft);
        // ∂g = (g/z) ∂_w log g, ∂̄g = (g/z̄) ∂̄_w log g
        let scale = center.log_abs - l;
        let dz = LogPolar::new(scale + dw.norm().ln(), center.arg - theta + dw.arg());
        let dzbar = LogPolar::new(scale + dwbar.norm().ln(), center.arg + theta + dwbar.arg());
        Ok((dz, dzbar))
    }

    /// Finite-difference `∂g`; equals `g'` wherever `g` is analytic.
    pub fn derivative(&self, z: Point) -> Result<EvalResult> {
        let (dz, _) = self.wirtinger(z, DEFAULT_FD_STEP)?;
        Ok(EvalResult::from_log_polar(dz, 0.0))
    }

    /// `K = (|∂g| + |∂̄g|)/(|∂g| − |∂̄g|)` by finite differences.
    pub fn dilatation_estimate(&self, z: Point, h: f64) -> Result<f64> {
        let (dz, dzbar) = self.wirtinger(z, h)?;
        let ratio = (dzbar.log_abs - dz.log_abs).exp();
        if !(ratio < 1.0) {
            return Err(Error::DegenerateJacobian {
                dz: dz.log_abs.exp(),
                dzbar: dzbar.log_abs.exp(),
            });
        }
        Ok((1.0 + ratio) / (1.0 - ratio))
    }

    /// The interpolation constants for `ann(S_1, T_1)`: `δ₀ = 4/e⁴`,
    /// `δ₁ = 4/(e⁴ − 2)`, `k = 2`, `log(T_1/S_1) = √γ`.
    pub fn check_constants(&self) -> InterpolationConstants {
        let e4 = 4f64.exp();
        let delta0 = 4.0 / e4;
        let delta1 = 4.0 / (e4 - 2.0);
        let k = 2;
        let c = 1.0 - (delta0 / self.gap(1) + delta1) / k as f64;
        assert!(c > C_FLOOR, "C = {c} must exceed 1/2 on a valid ladder");
        InterpolationConstants {
            delta0,
            delta1,
            c,
            k,
        }
    }

    /// Sup over the boundary circles of the two interpolation conditions,
    /// sampled at `samples` angles.
    pub fn measure_constants(&self, annulus: &Annulus, samples: usize) -> MeasuredConstants {
        let mut delta0: f64 = 0.0;
        let mut delta1: f64 = 0.0;
        for j in 0..samples {
            let theta = -PI + 2.0 * PI * (j as f64 + 0.5) / samples as f64;
            let (_, l1) = self.piece_ratio(annulus.inner, annulus.log_r1, theta);
            let (_, l2) = self.piece_ratio(annulus.outer, annulus.log_r2, theta);
            // principal log of e^{L2 − L1}
            let d = l2 - l1;
            delta0 = delta0.max(Complex64::new(d.re, wrap_angle(d.im)).norm());
            delta1 = delta1
                .max(self.piece_log_derivative(annulus.inner, annulus.log_r1, theta).norm())
                .max(self.piece_log_derivative(annulus.outer, annulus.log_r2, theta).norm());
        }
        let k = annulus.degree;
        let c = 1.0 - (delta0 / (annulus.log_r2 - annulus.log_r1) + delta1) / k as f64;
        MeasuredConstants {
            annulus: *annulus,
            constants: InterpolationConstants {
                delta0,
                delta1,
                c,
                k,
            },
        }
    }

    pub fn seams(&self) -> Vec<(String, f64, Zone, Zone)> {
        let mut v = vec![("S_1".to_string(), self.log_s(1), Zone::Core, Zone::Outer(1))];
        for n in 1..=self.n_max {
            if n >= 2 {
                v.push((format!("Q_{n}"), self.log_q(n), Zone::Inner(n - 1), Zone::Shifted(n)));
                v.push((format!("S_{n}"), self.log_s(n), Zone::Shifted(n), Zone::Outer(n)));
            }
            v.push((format!("T_{n}"), self.log_t(n), Zone::Outer(n), Zone::Power(n)));
            if n < self.n_max {
                v.push((format!("P_{}", n + 1), self.log_p(n + 1), Zone::Power(n), Zone::Inner(n)));
            }
        }
        v.sort_by(|a, b| a.1.total_cmp(&b.1));
        v
    }

    /// Per-seam `max |g⁻ − g⁺|/|g⁺|`, where `g⁻`, `g⁺` are the limits from the
    /// two adjacent zones, evaluated on the seam circle.
    pub fn seam_report(&self, samples_per_seam: usize) -> Result<Vec<Seam>> {
        if samples_per_seam < 64 {
            return Err(Error::InvalidArgument(format!(
                "samples_per_seam must be at least 64, got {samples_per_seam}"
            )));
        }
        Ok(self
            .seams()
            .into_par_iter()
            .map(|(name, lr, inside, outside)| {
                let max_mismatch = (0..samples_per_seam)
                    .map(|j| {
                        let theta = 2.0 * PI * j as f64 / samples_per_seam as f64;
                        let a = self.eval_zone(inside, lr, theta);
                        let b = self.eval_zone(outside, lr, theta);
                        relative_mismatch(a, b)
                    })
                    .fold(0.0, f64::max);
                Seam {
                    name,
                    log_radius: lr,
                    inside,
                    outside,
                    max_mismatch,
                }
            })
            .collect())
    }

    pub fn verify_seams(&self, samples_per_seam: usize) -> Result<f64> {
        Ok(self
            .seam_report(samples_per_seam)?
            .iter()
            .map(|s| s.max_mismatch)
            .fold(0.0, f64::max))
    }

    /// Checks `g(ann(S_n, Q_{n+1})) ⊂ ann(S_{n+1}, Q_{n+2})` on a grid that
    /// is log-uniform in modulus (endpoints included) and uniform in angle.
    pub fn annulus_chain(&self, n: usize, samples: usize) -> Result<ChainCheck> {
        if n < 1 || n + 2 > self.n_max {
            return Err(Error::OutOfLadderRange {
                log_abs: self.log_q((n + 2).min(self.n_max + 1)),
                log_t_max: self.log_t_max(),
            });
        }
        let n_r = ((samples as f64).sqrt().ceil() as usize).max(2);
        let n_theta = samples.div_ceil(n_r).max(1);
        let (lo, hi) = (self.log_s(n), self.log_q(n + 1));
        let (lo_img, hi_img) = (self.log_s(n + 1), self.log_q(n + 2));
        let (min, max) = (0..n_r)
            .into_par_iter()
            .map(|i| {
                let l = lo + (hi - lo) * i as f64 / (n_r - 1) as f64;
                let zone = self.zone(l).expect("inside the ladder");
                let mut mn = f64::INFINITY;
                let mut mx = f64::NEG_INFINITY;
                for j in 0..n_theta {
                    let theta = -PI + 2.0 * PI * (j as f64 + 0.5) / n_theta as f64;
                    let g = self.eval_zone(zone, l, theta).log_abs;
                    mn = mn.min(g);
                    mx = mx.max(g);
                }
                (mn, mx)
            })
            .reduce(
                || (f64::INFINITY, f64::NEG_INFINITY),
                |a, b| (a.0.min(b.0), a.1.max(b.1)),
            );
        let lower_margin = min - lo_img;
        let upper_margin = hi_img - max;
        Ok(ChainCheck {
            n,
            samples: n_r * n_theta,
            holds: lower_margin > 0.0 && upper_margin > 0.0,
            lower_margin,
            upper_margin,
        })
    }

    pub fn verify_annulus_chain(&self, n: usize, samples: usize) -> Result<bool> {
        Ok(self.annulus_chain(n, samples)?.holds)
    }

    /// Dilatation estimates at `points` interior points of an annulus
    /// (`t ∈ (0, 1)` cell centres times uniform angles).
    pub fn dilatation_survey(&self, annulus: &Annulus, points: usize, h: f64) -> Result<DilatationSummary> {
        let n_t = ((points as f64).sqrt().round() as usize).max(1);
        let n_theta = points.div_ceil(n_t);
        let ks = (0..n_t)
            .into_par_iter()
            .map(|i| {
                let t = (i as f64 + 0.5) / n_t as f64;
                let l = annulus.log_r1 + t * (annulus.log_r2 - annulus.log_r1);
                (0..n_theta)
                    .map(|j| {
                        let theta = -PI + 2.0 * PI * (j as f64 + 0.5) / n_theta as f64;
                        self.dilatation_estimate(Point::on_circle(l, theta), h)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let ks: Vec<f64> = ks.into_iter().flatten().collect();
        let mut histogram = [0usize; 7];
        for &k in &ks {
            let bin = HISTOGRAM_EDGES.iter().position(|&e| k < e).unwrap_or(6);
            histogram[bin] += 1;
        }
        let n = annulus.level as f64;
        Ok(DilatationSummary {
            annulus: *annulus,
            points: ks.len(),
            max_k: ks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_k: ks.iter().sum::<f64>() / ks.len() as f64,
            target: 1.0 + 1.0 / (n * n),
            histogram,
        })
    }
}

/// `|a − b|/|b|` for two numbers in log-polar form.
pub fn relative_mismatch(a: LogPolar, b: LogPolar) -> f64 {
    if a.is_zero() && b.is_zero() {
        return 0.0;
    }
    if b.is_zero() {
        return f64::INFINITY;
    }
    let d = Complex64::new(a.log_abs - b.log_abs, wrap_angle(a.arg - b.arg));
    (d.exp() - 1.0).norm()
}

/// Limits applied by [`verify`].
pub const SEAM_TOLERANCE: f64 = 1e-9;
pub const LADDER_TOLERANCE: f64 = 1e-12;
pub const DILATATION_SLACK: f64 = 0.05;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyOptions {
    pub samples_per_seam: usize,
    pub chain_samples: usize,
    pub dilatation_points: usize,
    pub fd_step: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples_per_seam: 256,
            chain_samples: 10_000,
            dilatation_points: 1000,
            fd_step: DEFAULT_FD_STEP,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnulusDilatation {
    pub summary: DilatationSummary,
    /// `1 + 1/n² + 0.05`.
    pub limit: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurgeryReport {
    pub gamma: f64,
    pub levels: usize,
    pub options: VerifyOptions,
    pub ladder: Vec<LadderRow>,
    /// Largest relative defect of `log R_{n+1} − log R_n = γ n!`.
    pub ladder_defect: f64,
    pub ladder_ordered: bool,
    pub constants: InterpolationConstants,
    pub measured: MeasuredConstants,
    pub seams: Vec<Seam>,
    pub max_seam_mismatch: f64,
    pub chain: Vec<ChainCheck>,
    pub dilatation: Vec<AnnulusDilatation>,
    pub passed: bool,
}

/// Builds the ladder and runs every check: ladder ordering and recurrence,
/// interpolation constants, seam continuity, the annulus chain for
/// `n = 1..=levels − 2`, and dilatation on every interpolation annulus.
pub fn verify(gamma: f64, levels: usize, opts: VerifyOptions) -> Result<SurgeryReport> {
    let ladder = SurgeryLadder::build(gamma, levels)?;
    let mut ladder_defect: f64 = 0.0;
    let mut ladder_ordered = true;
    for n in 1..=levels {
        let step = gamma * factorial(n);
        ladder_defect = ladder_defect.max(((ladder.log_r(n + 1) - ladder.log_r(n)) - step).abs() / step);
        let mut chain = vec![ladder.log_p(n), ladder.log_q(n), ladder.log_r(n), ladder.log_s(n), ladder.log_t(n)];
        if n < levels {
            chain.push(ladder.log_p(n + 1));
        }
        ladder_ordered &= chain.windows(2).all(|w| w[0] < w[1]);
    }
    let constants = ladder.check_constants();
    let measured = ladder.measure_constants(&ladder.annulus(Zone::Outer(1)).unwrap(), opts.samples_per_seam);
    let seams = ladder.seam_report(opts.samples_per_seam)?;
    let max_seam_mismatch = seams.iter().map(|s| s.max_mismatch).fold(0.0, f64::max);
    let chain = (1..=levels.saturating_sub(2))
        .map(|n| ladder.annulus_chain(n, opts.chain_samples))
        .collect::<Result<Vec<_>>>()?;
    let dilatation = (1..=levels)
        .flat_map(|n| ladder.annuli(n))
        .map(|a| {
            let summary = ladder.dilatation_survey(&a, opts.dilatation_points, opts.fd_step)?;
            let n = a.level as f64;
            let limit = 1.0 + 1.0 / (n * n) + DILATATION_SLACK;
            Ok(AnnulusDilatation {
                holds: summary.max_k <= limit,
                summary,
                limit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = ladder_defect <= LADDER_TOLERANCE
        && ladder_ordered
        && constants.c > C_FLOOR
        && measured.constants.delta0 <= constants.delta0 * (1.0 + 1e-9)
        && measured.constants.delta1 <= constants.delta1 * (1.0 + 1e-9)
        && max_seam_mismatch < SEAM_TOLERANCE
        && chain.iter().all(|c| c.holds)
        && dilatation.iter().all(|d| d.holds);
    Ok(SurgeryReport {
        gamma,
        levels,
        options: opts,
        ladder: ladder.table(),
        ladder_defect,
        ladder_ordered,
        constants,
        measured,
        seams,
        max_seam_mismatch,
        chain,
        dilatation,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder() -> SurgeryLadder {
        SurgeryLadder::build(24.0, 8).unwrap()
    }

    #[test]
    fn ladder_example_values() {
        let l = ladder();
        assert!((l.log_r(1) - 24.0).abs() < 1e-12);
        assert!((l.log_r(2) - 48.0).abs() < 1e-12);
        assert!((l.log_s(1) - (24.0 + 24f64.sqrt())).abs() < 1e-12);
        assert!((l.log_s(1) - 28.898_979_485_566_356).abs() < 1e-9);
        assert_eq!(l.log_abs_a(1), 0.0);
    }

    #[test]
    fn gamma_threshold() {
        // −2√(2γ) + γ − 2√γ > 0  ⇔  γ > 12 + 8√2
        let threshold = 12.0 + 8.0 * 2f64.sqrt();
        assert!(positivity_margin(threshold - 1e-6, 1) < 0.0);
        assert!(positivity_margin(threshold + 1e-6, 1) > 0.0);
        assert!(matches!(
            SurgeryLadder::build(2.0, 2),
            Err(Error::GammaTooSmall { level: 1, .. })
        ));
        assert!(SurgeryLadder::build(23.0, 8).is_err());
        assert!(SurgeryLadder::build(24.0, 8).is_ok());
        assert!(matches!(SurgeryLadder::build(24.0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zone_lookup_is_ordered() {
        let l = ladder();
        assert_eq!(l.zone(0.0).unwrap(), Zone::Core);
        assert_eq!(l.zone(l.log_s(1) + 1.0).unwrap(), Zone::Outer(1));
        assert_eq!(l.zone(l.log_t(1) + 0.1).unwrap(), Zone::Power(1));
        assert_eq!(l.zone(l.log_q(2) - 0.1).unwrap(), Zone::Inner(1));
        assert_eq!(l.zone(l.log_r(2)).unwrap(), Zone::Shifted(2));
        assert_eq!(l.zone(l.log_t_max()).unwrap(), Zone::Power(8));
        assert!(l.zone(l.log_t_max() + 1e-6).is_err());
    }

    #[test]
    fn core_and_seam_values() {
        let l = ladder();
        let g = l.eval_g(Point::Cartesian(Complex64::new(0.0, 0.0))).unwrap();
        assert_eq!(g.value.unwrap(), Complex64::new(-2.0, 0.0));

        // H(z) = z² on |z| = T_1
        for &theta in &[0.0, 0.7, -2.0, PI] {
            let v = l.eval_zone(Zone::Outer(1), l.log_t(1), theta);
            let want = LogPolar::new(2.0 * l.log_t(1), 2.0 * theta);
            assert!(relative_mismatch(v, want) < 1e-12);
        }

        // |z| = S_1 at θ = π/2: (iS_1)² − 2 = −S_1² − 2
        let v = l.eval_zone(Zone::Outer(1), l.log_s(1), PI / 2.0);
        let s1 = l.log_s(1).exp();
        let want = LogPolar::from_complex(Complex64::new(-s1 * s1 - 2.0, 0.0));
        assert!(relative_mismatch(v, want) < 1e-12);
    }

    #[test]
    fn shifted_zone_vanishes_at_r_n() {
        let l = ladder();
        let g = l.eval_g(Point::Polar(LogPolar::new(l.log_r(2), 0.0))).unwrap();
        assert_eq!(g.value.unwrap(), Complex64::new(0.0, 0.0));
        let z = Point::Cartesian(Complex64::new(48f64.exp(), 0.0));
        let g = l.eval_g(z).unwrap();
        // relative to |b_2| R_2^3
        assert!(g.log_abs - (l.log_abs_b(2) + 3.0 * 48.0) < -30.0);
    }

    #[test]
    fn constants_match_closed_forms() {
        let c = ladder().check_constants();
        assert!((c.delta0 - 0.073_262_555_554_936_7).abs() < 1e-12);
        assert!((c.delta1 - 0.076_048_302_031_144_4).abs() < 1e-12);
        assert!((c.c - 0.954_498_520_719_348_6).abs() < 1e-12);
        assert_eq!(c.k, 2);
    }

    #[test]
    fn measured_constants_respect_the_closed_form_bounds() {
        let l = ladder();
        let bound = l.check_constants();
        let m = l.measure_constants(&l.annulus(Zone::Outer(1)).unwrap(), 4096);
        assert!(m.constants.delta0 <= bound.delta0);
        assert!(m.constants.delta1 <= bound.delta1);
        assert!(m.constants.c >= bound.c);
    }

    #[test]
    fn chain_range_checked() {
        let l = ladder();
        assert!(l.annulus_chain(7, 100).is_err());
        assert!(l.annulus_chain(0, 100).is_err());
        assert!(l.verify_annulus_chain(6, 400).unwrap());
    }

    #[test]
    fn analytic_zones_are_conformal() {
        let l = ladder();
        let z = Point::on_circle(l.log_t(1) + 0.1, 0.4);
        let k = l.dilatation_estimate(z, 1e-5).unwrap();
        assert!((k - 1.0).abs() < 1e-4);
        let k = l
            .dilatation_estimate(Point::Cartesian(Complex64::new(0.5, 0.3)), 1e-5)
            .unwrap();
        assert!((k - 1.0).abs() < 1e-4);
    }

    #[test]
    fn derivative_in_power_zone() {
        let l = ladder();
        // a_1 = 1 so g = z² on [T_1, P_2] and g' = 2z
        let z = Point::on_circle(l.log_t(1) + 0.1, 0.4);
        let d = l.derivative(z).unwrap();
        let want = LogPolar::new(2f64.ln() + l.log_t(1) + 0.1, 0.4);
        assert!(relative_mismatch(d.log_polar(), want) < 1e-6);
    }
}
