//! Minimum and maximum modulus on circles, certificates `m(r, f) > r`, and
//! growth estimates.
//!
//! The sampled minimum `m_est` is an upper bound on `m(r, f)`. The lower bound
//! `m_lower` comes from a continuity argument on each coarse sampling
//! interval: with endpoint moduli `a`, `b` and a derivative bound `D`, the
//! modulus on the arc stays above `(a + b)/2 − r D Δθ/2`. `D` is twice the
//! larger sampled `|f'|` at the two endpoints, so the bound is semi-rigorous.

use std::f64::consts::{E, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::FunctionSpec;
use crate::error::{Error, Result};
use crate::logpolar::Point;

pub const DEFAULT_SAMPLES: usize = 2048;
pub const REFINE_WIDTH: f64 = 1e-10;
const REFINE_CANDIDATES: usize = 5;
pub const GROWTH_GRID: usize = 256;
pub const GROWTH_SAMPLES: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extremum {
    /// `|f|` at the extremum (may be `inf` when only the log is finite).
    pub value: f64,
    pub log_value: f64,
    pub theta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialScanRow {
    pub r: f64,
    pub m_est: f64,
    pub m_lower: f64,
    #[serde(rename = "M_est")]
    pub max_est: f64,
    pub theta_min: f64,
    pub certified: bool,
}

fn log_abs_at(spec: &FunctionSpec, log_r: f64, theta: f64) -> Result<f64> {
    Ok(spec.eval_point(Point::on_circle(log_r, theta))?.log_abs)
}

fn check_circle(r: f64, n_samples: usize) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    if n_samples < 16 {
        return Err(Error::InvalidArgument(format!("need at least 16 samples, got {n_samples}")));
    }
    Ok(())
}

fn angles(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| TAU * j as f64 / n as f64)
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, width: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > width {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Refines the smallest local minima of `values` (sampled at `angles(n)`) of
/// `sign · log|f|`.
fn refine(spec: &FunctionSpec, log_r: f64, values: &[f64], sign: f64) -> Result<Extremum> {
    let n = values.len();
    let v = |j: usize| sign * values[j % n];
    let (mut best_j, mut best) = (0, v(0));
    for j in 1..n {
        if v(j) < best {
            best = v(j);
            best_j = j;
        }
    }
    let mut theta_best = TAU * best_j as f64 / n as f64;
    if best == f64::NEG_INFINITY {
        return Ok(extremum(sign * best, theta_best));
    }
    let mut minima: Vec<usize> = (0..n)
        .filter(|&j| v(j) <= v(j + n - 1) && v(j) <= v(j + 1))
        .collect();
    minima.sort_by(|&a, &b| v(a).total_cmp(&v(b)).then(a.cmp(&b)));
    minima.truncate(REFINE_CANDIDATES);
    let step = TAU / n as f64;
    for j in minima {
        let center = TAU * j as f64 / n as f64;
        let (theta, val) = golden_min(
            |t| Ok(sign * log_abs_at(spec, log_r, t)?),
            center - step,
            center + step,
            REFINE_WIDTH,
        )?;
        if val < best {
            best = val;
            theta_best = theta.rem_euclid(TAU);
        }
    }
    Ok(extremum(sign * best, theta_best))
}

fn extremum(log_value: f64, theta: f64) -> Extremum {
    Extremum {
        value: log_value.exp(),
        log_value,
        theta,
    }
}

fn sample(spec: &FunctionSpec, log_r: f64, n: usize) -> Result<Vec<f64>> {
    angles(n).map(|t| log_abs_at(spec, log_r, t)).collect()
}

/// Sampled-and-refined minimum of `|f|` on `|z| = r`.
pub fn min_modulus(spec: &FunctionSpec, r: f64, n_samples: usize) -> Result<Extremum> {
    check_circle(r, n_samples)?;
    let values = sample(spec, r.ln(), n_samples)?;
    refine(spec, r.ln(), &values, 1.0)
}

/// Sampled-and-refined maximum of `|f|` on `|z| = r`.
pub fn max_modulus(spec: &FunctionSpec, r: f64, n_samples: usize) -> Result<Extremum> {
    check_circle(r, n_samples)?;
    let values = sample(spec, r.ln(), n_samples)?;
    refine(spec, r.ln(), &values, -1.0)
}

/// One certificate row at radius `r`.
pub fn scan_row(spec: &FunctionSpec, r: f64, n_samples: usize) -> Result<RadialScanRow> {
    check_circle(r, n_samples)?;
    let log_r = r.ln();
    let values = sample(spec, log_r, n_samples)?;
    let min = refine(spec, log_r, &values, 1.0)?;
    let max = refine(spec, log_r, &values, -1.0)?;
    let derivs: Vec<f64> = angles(n_samples)
        .map(|t| {
            spec.eval_derivative_point(Point::on_circle(log_r, t))
                .map_or(f64::INFINITY, |d| d.abs())
        })
        .collect();

    let dtheta = TAU / n_samples as f64;
    let mut lower = min.value;
    for j in 0..n_samples {
        let k = (j + 1) % n_samples;
        let (a, b) = (values[j].exp(), values[k].exp());
        if !(a.is_finite() && b.is_finite()) {
            continue;
        }
        let d = 2.0 * derivs[j].max(derivs[k]);
        let bound = 0.5 * (a + b) - 0.5 * r * d * dtheta;
        lower = lower.min(if bound.is_nan() { 0.0 } else { bound });
    }
    let m_lower = lower.max(0.0);
    Ok(RadialScanRow {
        r,
        m_est: min.value,
        m_lower,
        max_est: max.value,
        theta_min: min.theta,
        certified: m_lower > r,
    })
}

/// `count` radii log-uniform on `[lo, hi]`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == count => hi,
            _ => (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// Certificate scan over `grid` log-uniform radii in `[r_min, r_max]`.
/// Rows are computed in parallel and returned in radius order.
pub fn spl_certificate(spec: &FunctionSpec, r_min: f64, r_max: f64, grid: usize) -> Result<Vec<RadialScanRow>> {
    spl_certificate_with(spec, r_min, r_max, grid, DEFAULT_SAMPLES)
}

pub fn spl_certificate_with(
    spec: &FunctionSpec,
    r_min: f64,
    r_max: f64,
    grid: usize,
    n_samples: usize,
) -> Result<Vec<RadialScanRow>> {
    if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < r_min < r_max, got {r_min} and {r_max}"
        )));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 radii".into()));
    }
    log_grid(r_min, r_max, grid)
        .into_par_iter()
        .map(|r| scan_row(spec, r, n_samples))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderPoint {
    pub r: f64,
    pub log_max_modulus: f64,
    /// `log log M(r) / log r`.
    pub direct: f64,
    /// Slope of `log log M` against `log r` from the previous radius.
    pub secant: Option<f64>,
}

pub fn order_profile(spec: &FunctionSpec, radii: &[f64]) -> Result<Vec<OrderPoint>> {
    if radii.len() < 3 {
        return Err(Error::InvalidArgument("order estimate needs at least 3 radii".into()));
    }
    if let Some(r) = radii.iter().find(|&&r| !(r > E)) {
        return Err(Error::InvalidArgument(format!("radii must exceed e, got {r}")));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radii must be increasing".into()));
    }
    let logs = radii
        .par_iter()
        .map(|&r| Ok(max_modulus(spec, r, DEFAULT_SAMPLES)?.log_value))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(i) = logs.iter().position(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "M(r) ≤ 1 at r = {}; log log M undefined",
            radii[i]
        )));
    }
    Ok((0..radii.len())
        .map(|i| OrderPoint {
            r: radii[i],
            log_max_modulus: logs[i],
            direct: logs[i].ln() / radii[i].ln(),
            secant: (i > 0).then(|| (logs[i] / logs[i - 1]).ln() / (radii[i] / radii[i - 1]).ln()),
        })
        .collect())
}

/// Finite-radius estimate of the order `limsup log log M(r)/log r`: the
/// largest secant slope of `log log M(r)` against `log r` over consecutive
/// radii.
pub fn order_estimate(spec: &FunctionSpec, radii: &[f64]) -> Result<f64> {
    Ok(order_profile(spec, radii)?
        .iter()
        .filter_map(|p| p.secant)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub r: f64,
    pub m_est: f64,
    pub log_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthCheck {
    pub power: u32,
    pub r_best: f64,
    pub ratio_best: f64,
    pub rows: Vec<GrowthRow>,
}

impl GrowthCheck {
    /// The scanned row closest to `r` (in log scale).
    pub fn row_near(&self, r: f64) -> &GrowthRow {
        self.rows
            .iter()
            .min_by(|a, b| (a.r / r).ln().abs().total_cmp(&(b.r / r).ln().abs()))
            .expect("nonempty scan")
    }
}

/// Scans `m(r, f)/r^power` over log-uniform radii up to `r_max` and reports
/// the maximizing radius.
pub fn minmod_growth_check(spec: &FunctionSpec, power: u32, r_max: f64) -> Result<GrowthCheck> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    let r_min = if r_max > 1.0 { 1.0 } else { r_max / 100.0 };
    let rows = log_grid(r_min, r_max, GROWTH_GRID)
        .into_par_iter()
        .map(|r| {
            let m = min_modulus(spec, r, GROWTH_SAMPLES)?;
            Ok(GrowthRow {
                r,
                m_est: m.value,
                log_ratio: m.log_value - power as f64 * r.ln(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = rows
        .iter()
        .fold(&rows[0], |b, row| if row.log_ratio > b.log_ratio { row } else { b });
    Ok(GrowthCheck {
        power,
        r_best: best.r,
        ratio_best: best.log_ratio.exp(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn min_of_exponential() {
        let m = min_modulus(&FunctionSpec::lambda_exp(1.0), 1.0, DEFAULT_SAMPLES).unwrap();
        assert!((m.value - (-1f64).exp()).abs() < 1e-12);
        assert!((m.theta - PI).abs() < 1e-6);
    }

    #[test]
    fn zero_on_the_circle() {
        let m = min_modulus(&FunctionSpec::prod_pow2(), 2.0, DEFAULT_SAMPLES).unwrap();
        assert!(m.value < 1e-20);
        assert!((m.theta - PI).abs() < 1e-9);
    }

    #[test]
    fn monomial_circles_are_level_sets() {
        let f = FunctionSpec::monomial(2);
        let m = min_modulus(&f, 3.0, 64).unwrap();
        let mx = max_modulus(&f, 3.0, 64).unwrap();
        assert!((m.value - 9.0).abs() < 1e-9 * 9.0);
        assert!((mx.value - 9.0).abs() < 1e-9 * 9.0);
    }

    #[test]
    fn max_examples() {
        let m = max_modulus(&FunctionSpec::lambda_exp(1.0), 2.0, DEFAULT_SAMPLES).unwrap();
        assert!((m.value - 2f64.exp()).abs() < 1e-9);
        // oracle: ∏_{n≤60} (1 + 24/2^n)² evaluated directly
        let oracle: f64 = (1..=60).map(|n| (1.0 + 24.0 / 2f64.powi(n)).powi(2)).product();
        let m = max_modulus(&FunctionSpec::prod_pow2(), 24.0, DEFAULT_SAMPLES).unwrap();
        assert!((m.value - oracle).abs() < 1e-9 * oracle);
        assert!((oracle - 9.7288e6).abs() < 1e3);
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = FunctionSpec::sine();
        assert!(min_modulus(&f, 0.0, 64).is_err());
        assert!(min_modulus(&f, 1.0, 8).is_err());
        assert!(spl_certificate(&f, 2.0, 1.0, 10).is_err());
        assert!(spl_certificate(&f, 1.0, 2.0, 1).is_err());
        assert!(order_estimate(&f, &[10.0, 100.0]).is_err());
        assert!(order_estimate(&f, &[2.0, 100.0, 1000.0]).is_err());
        assert!(order_estimate(&f, &[10.0, 5.0, 1000.0]).is_err());
    }

    #[test]
    fn certificates_for_simple_functions() {
        let rows = spl_certificate(&FunctionSpec::monomial(2), 2.0, 10.0, 10).unwrap();
        assert!(rows.iter().all(|r| r.certified && r.m_lower <= r.m_est));
        let rows = spl_certificate(&FunctionSpec::lambda_exp(1.0), 1.0, 100.0, 50).unwrap();
        assert!(rows.iter().all(|r| !r.certified));
        assert!(rows.windows(2).all(|w| w[0].r < w[1].r));
    }

    #[test]
    fn order_of_exponential_is_one() {
        let rho = order_estimate(&FunctionSpec::lambda_exp(1.0), &[10.0, 100.0, 1000.0]).unwrap();
        assert!((rho - 1.0).abs() < 1e-9);
    }

    #[test]
    fn order_of_square_decreases() {
        let p = order_profile(&FunctionSpec::monomial(2), &[10.0, 100.0, 1000.0]).unwrap();
        // log log r² / log r, and log(log M_2/log M_1)/log(r_2/r_1)
        let direct = |r: f64| (2.0 * r.ln()).ln() / r.ln();
        for q in &p {
            assert!((q.direct - direct(q.r)).abs() < 1e-12);
        }
        assert!((p[1].secant.unwrap() - 2f64.log10()).abs() < 1e-12);
        assert!((p[2].secant.unwrap() - 1.5f64.log10()).abs() < 1e-12);
        assert!(p[2].secant < p[1].secant);
    }

    #[test]
    fn growth_examples() {
        let g = minmod_growth_check(&FunctionSpec::monomial(2), 1, 10.0).unwrap();
        assert_eq!(g.r_best, 10.0);
        assert!((g.ratio_best - 10.0).abs() < 1e-9);
        let g = minmod_growth_check(&FunctionSpec::lambda_exp(1.0), 0, 100.0).unwrap();
        assert_eq!(g.r_best, 1.0);
        assert!((g.ratio_best - (-1f64).exp()).abs() < 1e-12);
    }
}
