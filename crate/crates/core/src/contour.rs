//! Images of circles under `f`, winding numbers, the surround test and
//! argument-principle preimage counts.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::catalog::FunctionSpec;
use crate::error::{Error, Result};
use crate::logpolar::{wrap_angle, Point};
use crate::radial;

pub const DEFAULT_TOL: f64 = 0.1;
pub const MAX_POINTS: usize = 1 << 20;
pub const INITIAL_INTERVALS: usize = 256;
pub const WINDING_RESIDUAL: f64 = 0.01;
const MIN_INTERVAL: f64 = 1e-15;
/// Beyond this many e-folds above `|w|`, `arg(f − w)` equals `arg f` to
/// double precision.
const ARG_DECOUPLE: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub theta: f64,
    pub log_abs: f64,
    pub arg: f64,
    /// `None` once `|f|` leaves the double range.
    pub value: Option<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveTrace {
    pub log_radius: f64,
    pub radius: f64,
    pub points: Vec<CurvePoint>,
    pub closed: bool,
}

fn segment_ok(a: &CurvePoint, b: &CurvePoint, tol: f64) -> bool {
    wrap_angle(b.arg - a.arg).abs() < tol && (b.log_abs - a.log_abs).abs() < tol
}

fn sample(spec: &FunctionSpec, log_r: f64, theta: f64) -> Result<CurvePoint> {
    let v = spec.eval_point(Point::on_circle(log_r, theta))?;
    if v.log_abs == f64::NEG_INFINITY {
        return Err(Error::RefinementCapExceeded { log_radius: log_r });
    }
    Ok(CurvePoint {
        theta,
        log_abs: v.log_abs,
        arg: v.arg,
        value: v.value,
    })
}

/// Traces `f(r e^{iθ})`, `θ ∈ [0, 2π]`, refining until every segment moves
/// less than `tol` in argument and in `log|f|`.
pub fn trace_circle_image(spec: &FunctionSpec, r: f64, tol: f64) -> Result<CurveTrace> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    trace_circle_image_log(spec, r.ln(), tol)
}

/// As [`trace_circle_image`] for the circle `|z| = e^{log_r}`, which may lie
/// beyond the double range.
pub fn trace_circle_image_log(spec: &FunctionSpec, log_r: f64, tol: f64) -> Result<CurveTrace> {
    if !(tol > 0.0 && tol < PI / 2.0) {
        return Err(Error::InvalidArgument(format!("tol must lie in (0, π/2), got {tol}")));
    }
    if !log_r.is_finite() {
        return Err(Error::InvalidArgument(format!("log radius must be finite, got {log_r}")));
    }
    let cap = Error::RefinementCapExceeded { log_radius: log_r };
    let grid: Vec<CurvePoint> = (0..=INITIAL_INTERVALS)
        .map(|j| sample(spec, log_r, TAU * j as f64 / INITIAL_INTERVALS as f64))
        .collect::<Result<_>>()?;

    let mut points = vec![grid[0]];
    for pair in grid.windows(2) {
        // Depth-first bisection keeps `points` sorted by θ.
        let mut stack = vec![(pair[0], pair[1])];
        while let Some((a, b)) = stack.pop() {
            let mid = sample(spec, log_r, 0.5 * (a.theta + b.theta))?;
            if segment_ok(&a, &b, tol) && segment_ok(&a, &mid, tol) && segment_ok(&mid, &b, tol) {
                points.push(mid);
                points.push(b);
            } else if b.theta - a.theta < MIN_INTERVAL || points.len() + stack.len() >= MAX_POINTS {
                return Err(cap);
            } else {
                stack.push((mid, b));
                stack.push((a, mid));
            }
        }
    }
    if points.len() > MAX_POINTS {
        return Err(cap);
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    let closed = (first.log_abs - last.log_abs).abs() < 1e-9 && wrap_angle(first.arg - last.arg).abs() < 1e-9;
    Ok(CurveTrace {
        log_radius: log_r,
        radius: log_r.exp(),
        points,
        closed,
    })
}

fn arg_about(p: &CurvePoint, w: Complex64, log_w: f64) -> Option<f64> {
    if w == Complex64::new(0.0, 0.0) || p.log_abs > log_w + ARG_DECOUPLE {
        return Some(p.arg);
    }
    p.value.map(|v| (v - w).arg())
}

impl CurveTrace {
    /// Distance from the traced points to `w` (`inf` where `|f|` overflows).
    pub fn min_distance(&self, w: Complex64) -> f64 {
        self.points
            .iter()
            .map(|p| p.value.map_or(f64::INFINITY, |v| (v - w).norm()))
            .fold(f64::INFINITY, f64::min)
    }

    /// The curve `θ ↦ f(θ)·g(θ)` on the union of both θ grids, with `log|·|`
    /// and the unwrapped argument interpolated linearly in θ.
    pub fn pointwise_product(&self, other: &CurveTrace) -> CurveTrace {
        let mut thetas: Vec<f64> = self.points.iter().chain(&other.points).map(|p| p.theta).collect();
        thetas.sort_by(f64::total_cmp);
        thetas.dedup();
        let (la, aa) = unwrapped(self);
        let (lb, ab) = unwrapped(other);
        let points = thetas
            .into_iter()
            .map(|t| {
                let log_abs = interp(&la, t) + interp(&lb, t);
                let arg = wrap_angle(interp(&aa, t) + interp(&ab, t));
                let value = (log_abs < crate::logpolar::LOG_MAX_FINITE)
                    .then(|| Complex64::from_polar(log_abs.exp(), arg));
                CurvePoint { theta: t, log_abs, arg, value }
            })
            .collect();
        CurveTrace {
            log_radius: self.log_radius,
            radius: self.radius,
            points,
            closed: self.closed && other.closed,
        }
    }

    /// CSV with columns `theta,re,im,log_abs`; `re`/`im` are empty where
    /// `|f|` is not representable.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "re", "im", "log_abs"])?;
        for p in &self.points {
            let (re, im) = p
                .value
                .map_or((String::new(), String::new()), |v| (v.re.to_string(), v.im.to_string()));
            w.write_record([p.theta.to_string(), re, im, p.log_abs.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

type Series = Vec<(f64, f64)>;

fn unwrapped(trace: &CurveTrace) -> (Series, Series) {
    let mut logs = Vec::with_capacity(trace.points.len());
    let mut args = Vec::with_capacity(trace.points.len());
    let mut acc = trace.points[0].arg;
    for (i, p) in trace.points.iter().enumerate() {
        if i > 0 {
            acc += wrap_angle(p.arg - trace.points[i - 1].arg);
        }
        logs.push((p.theta, p.log_abs));
        args.push((p.theta, acc));
    }
    (logs, args)
}

fn interp(series: &[(f64, f64)], t: f64) -> f64 {
    let i = series.partition_point(|&(s, _)| s < t);
    if i == 0 {
        return series[0].1;
    }
    if i == series.len() {
        return series[i - 1].1;
    }
    let ((t0, v0), (t1, v1)) = (series[i - 1], series[i]);
    if t1 == t0 {
        v0
    } else {
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// Winding number of a closed trace about `w`.
pub fn winding_number(trace: &CurveTrace, w: Complex64) -> Result<i64> {
    if !trace.closed {
        return Err(Error::InvalidArgument("winding number needs a closed trace".into()));
    }
    let scale = 1f64.max(w.norm());
    let distance = trace.min_distance(w);
    if distance < 1e-12 * scale {
        return Err(Error::CurveTooClose { distance });
    }
    let log_w = w.norm().ln();
    let args = trace
        .points
        .iter()
        .map(|p| arg_about(p, w, log_w))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::InvalidArgument("trace value not representable near w".into()))?;
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for pair in args.windows(2) {
        let step = wrap_angle(pair[1] - pair[0]);
        max_step = max_step.max(step.abs());
        total += step;
    }
    let turns = total / TAU;
    let residual = (turns - turns.round()).abs();
    if max_step >= PI / 2.0 || residual >= WINDING_RESIDUAL {
        return Err(Error::ResidualTooLarge { residual, max_step });
    }
    Ok(turns.round() as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurroundReport {
    pub r: f64,
    pub result: bool,
    pub winding: i64,
    pub m_lower: f64,
    pub trace_points: usize,
}

/// Whether `f(|z| = r)` surrounds the closed disc `|w| ≤ r`: the certified
/// lower bound on `|f|` must exceed `r` and the curve must wind about 0.
pub fn surrounds_disc(spec: &FunctionSpec, r: f64, n_samples_min: usize) -> Result<SurroundReport> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let row = radial::scan_row(spec, r, n_samples_min.max(16))?;
    let trace = trace_circle_image(spec, r, DEFAULT_TOL)?;
    let winding = winding_number(&trace, Complex64::new(0.0, 0.0))?;
    Ok(SurroundReport {
        r,
        result: row.m_lower > r && winding != 0,
        winding,
        m_lower: row.m_lower,
        trace_points: trace.points.len(),
    })
}

/// Number of solutions of `f(z) = w` in `|z| < r`, with multiplicity.
///
/// Retraces with a finer tolerance while the trace is too coarse about `w`.
pub fn count_preimages(spec: &FunctionSpec, r: f64, w: Complex64) -> Result<i64> {
    let mut tol = DEFAULT_TOL;
    loop {
        let trace = trace_circle_image(spec, r, tol)?;
        match winding_number(&trace, w) {
            Err(Error::ResidualTooLarge { .. }) if tol > 1e-4 => tol /= 4.0,
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cube_winds_three_times() {
        let t = trace_circle_image(&FunctionSpec::monomial(3), 1.0, DEFAULT_TOL).unwrap();
        assert!(t.closed);
        assert_eq!(t.points[0].theta, 0.0);
        assert_eq!(t.points.last().unwrap().theta, TAU);
        assert!(t.points.windows(2).all(|w| w[0].theta < w[1].theta));
        assert_eq!(winding_number(&t, c(0.0)).unwrap(), 3);
    }

    #[test]
    fn zero_on_circle_hits_cap() {
        let e = trace_circle_image(&FunctionSpec::prod_pow2(), 2.0, DEFAULT_TOL).unwrap_err();
        assert!(matches!(e, Error::RefinementCapExceeded { .. }));
    }

    #[test]
    fn exponential_trace() {
        let t = trace_circle_image(&FunctionSpec::lambda_exp(1.0), 1.0, DEFAULT_TOL).unwrap();
        let lo = t.points.iter().map(|p| p.log_abs).fold(f64::INFINITY, f64::min);
        let hi = t.points.iter().map(|p| p.log_abs).fold(f64::NEG_INFINITY, f64::max);
        assert!((lo + 1.0).abs() < 1e-3 && (hi - 1.0).abs() < 1e-12);
        assert_eq!(winding_number(&t, c(0.0)).unwrap(), 0);
    }

    #[test]
    fn product_double_zero() {
        let t = trace_circle_image(&FunctionSpec::prod_pow2(), 3.0, DEFAULT_TOL).unwrap();
        assert_eq!(winding_number(&t, c(0.0)).unwrap(), 2);
    }

    #[test]
    fn curve_too_close() {
        let t = trace_circle_image(&FunctionSpec::monomial(1), 1.0, DEFAULT_TOL).unwrap();
        let e = winding_number(&t, c(1.0)).unwrap_err();
        assert!(matches!(e, Error::CurveTooClose { .. }));
    }

    #[test]
    fn surround_examples() {
        let s = surrounds_disc(&FunctionSpec::monomial(2), 2.0, 256).unwrap();
        assert!(s.result && s.winding == 2);
        assert!(s.m_lower <= 4.0 && s.m_lower > 3.5);
        let s = surrounds_disc(&FunctionSpec::lambda_exp(1.0), 5.0, 2048).unwrap();
        assert!(!s.result && s.winding == 0);
        assert!(s.m_lower <= (-5f64).exp() && s.m_lower > 0.9 * (-5f64).exp());
    }

    #[test]
    fn preimage_examples() {
        let f = FunctionSpec::monomial(2);
        assert_eq!(count_preimages(&f, 2.0, c(1.0)).unwrap(), 2);
        assert_eq!(count_preimages(&f, 2.0, c(9.0)).unwrap(), 0);
        assert_eq!(count_preimages(&FunctionSpec::quadratic(c(-2.0)), 3.0, c(0.0)).unwrap(), 2);
    }

    #[test]
    fn huge_circle_in_log_space() {
        let t = trace_circle_image_log(&FunctionSpec::monomial(5), 1e3, DEFAULT_TOL).unwrap();
        assert!(t.points.iter().all(|p| p.value.is_none()));
        assert_eq!(winding_number(&t, c(0.0)).unwrap(), 5);
        assert_eq!(winding_number(&t, c(7.0)).unwrap(), 5);
    }

    #[test]
    fn product_adds_windings() {
        let a = trace_circle_image(&FunctionSpec::monomial(2), 1.5, DEFAULT_TOL).unwrap();
        let b = trace_circle_image(&FunctionSpec::monomial(3), 1.5, DEFAULT_TOL).unwrap();
        let p = a.pointwise_product(&b);
        assert_eq!(winding_number(&p, c(0.0)).unwrap(), 5);
    }

    #[test]
    fn csv_columns() {
        let t = trace_circle_image(&FunctionSpec::monomial(1), 1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("theta,re,im,log_abs\n0,1,0,0\n"));
        assert_eq!(s.lines().count(), t.points.len() + 1);
    }
}
