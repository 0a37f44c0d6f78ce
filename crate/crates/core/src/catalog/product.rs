//! Canonical products `k ∏ (1 + z/r_n)^2` evaluated as sums of logarithms.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::logpolar::{ln_1p, wrap_angle, LogPolar, Point};

use super::EvalResult;

/// Factors with `log|z/r_n|` above this are taken as `log(z/r_n)` plus a
/// negligible `log(1 + r_n/z)` correction.
const DOMINANT_LOG: f64 = 36.0;

/// How the zeros `-r_n` of a product are laid out.
#[derive(Clone, Debug, PartialEq)]
pub enum LogRadii {
    /// `r_n = 2^n`.
    PowersOfTwo,
    /// `log r_n = base^n` for every `n ≥ 1`.
    Tower { base: f64 },
    /// Finitely many `log r_n`; the product is a polynomial.
    Explicit(Vec<f64>),
}

impl LogRadii {
    pub fn log_radius(&self, n: usize) -> Option<f64> {
        match self {
            LogRadii::PowersOfTwo => Some(n as f64 * LN_2),
            LogRadii::Tower { base } => Some(base.powi(n as i32)),
            LogRadii::Explicit(v) => v.get(n.wrapping_sub(1)).copied(),
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            LogRadii::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    /// True only for an empty explicit list.
    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            LogRadii::PowersOfTwo => Ok(()),
            LogRadii::Tower { base } if *base > 1.0 && base.is_finite() => Ok(()),
            LogRadii::Tower { base } => Err(Error::InvalidSpec(format!(
                "tower base must exceed 1, got {base}"
            ))),
            LogRadii::Explicit(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidSpec("non-finite log radius".into()));
                }
                if v.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidSpec(
                        "log radii must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `z / r_n`, exact for powers of two.
    fn scale(&self, z: Complex64, n: usize, log_r: f64) -> Complex64 {
        match self {
            LogRadii::PowersOfTwo if n < 1000 => z * 2f64.powi(-(n as i32)),
            _ => z * (-log_r).exp(),
        }
    }
}

/// `log` of the tail bound `2 Σ_{n>N} |z|/r_n` for `|z| = e^log_z`, or `None`
/// when the bound's validity condition `|z|/r_{N+1} ≤ 1/2` fails.
fn log_tail_bound(radii: &LogRadii, log_z: f64, n: usize) -> Option<f64> {
    if log_z == f64::NEG_INFINITY {
        return Some(f64::NEG_INFINITY);
    }
    let next = match radii.log_radius(n + 1) {
        Some(l) => l,
        None => return Some(f64::NEG_INFINITY),
    };
    if log_z - next > -LN_2 {
        return None;
    }
    match radii {
        // 2 |z| Σ_{m>N} 2^{-m} = |z| 2^{1-N}
        LogRadii::PowersOfTwo => Some(log_z + (1.0 - n as f64) * LN_2),
        _ => {
            // Terms decay at least geometrically; sum relative to the first.
            let mut sum = 0.0;
            let mut m = n + 1;
            while let Some(l) = radii.log_radius(m) {
                let t = (next - l).exp();
                sum += t;
                if t < 1e-20 * sum || m > n + 10_000 {
                    break;
                }
                m += 1;
            }
            Some(LN_2 + log_z - next + sum.ln())
        }
    }
}

/// Smallest `N` whose tail bound on `|z| ≤ e^log_z` is below `tol`.
pub(crate) fn truncation_index_log(radii: &LogRadii, log_z: f64, tol: f64) -> usize {
    let log_tol = tol.ln();
    let ok = |n: usize| matches!(log_tail_bound(radii, log_z, n), Some(b) if b < log_tol);
    if let Some(len) = radii.len() {
        return (0..=len).find(|&n| ok(n)).unwrap_or(len);
    }
    let mut n = match radii {
        LogRadii::PowersOfTwo if log_z.is_finite() => {
            (1.0 + (log_z - log_tol) / LN_2).floor().max(0.0) as usize
        }
        _ => 0,
    };
    while n > 0 && ok(n - 1) {
        n -= 1;
    }
    while !ok(n) {
        n += 1;
    }
    n
}

pub(crate) fn tail_bound(radii: &LogRadii, log_z: f64, n: usize) -> f64 {
    log_tail_bound(radii, log_z, n).map_or(f64::INFINITY, f64::exp)
}

/// Sum of `Log(1 + z/r_n)` for `n = 1..=N`, or `None` if some factor vanishes.
fn log_factor_sum(radii: &LogRadii, z: Point, n_terms: usize) -> Option<Complex64> {
    let lp = z.to_log_polar();
    let cart = z.to_complex();
    let mut re = 0.0;
    let mut im = 0.0;
    let mut start = 1;

    // Block of factors where |z/2^n| is huge: Σ (log|z| - n log 2) + i n arg z.
    if matches!(radii, LogRadii::PowersOfTwo) && lp.log_abs > DOMINANT_LOG + LN_2 {
        let n0 = (((lp.log_abs - DOMINANT_LOG) / LN_2).floor() as usize).min(n_terms);
        let m = n0 as f64;
        re += m * lp.log_abs - LN_2 * m * (m + 1.0) / 2.0;
        im += wrap_angle(m * lp.arg);
        start = n0 + 1;
    }

    for n in start..=n_terms {
        let log_r = radii.log_radius(n)?;
        let log_w = lp.log_abs - log_r;
        let term = if log_w <= DOMINANT_LOG {
            let w = match cart {
                Some(c) => radii.scale(c, n, log_r),
                None => LogPolar::new(log_w, lp.arg).to_complex()?,
            };
            if w.re == -1.0 && w.im == 0.0 {
                return None;
            }
            ln_1p(w)
        } else {
            let inv_w = LogPolar::new(-log_w, -lp.arg).to_complex().unwrap_or_default();
            Complex64::new(log_w, lp.arg) + ln_1p(inv_w)
        };
        re += term.re;
        im += term.im;
    }
    Some(Complex64::new(re, im))
}

pub(crate) fn eval(radii: &LogRadii, k: f64, tol: f64, z: Point) -> Result<EvalResult> {
    let log_z = z.log_abs();
    let n = truncation_index_log(radii, log_z, tol);
    let tail = tail_bound(radii, log_z, n);
    match log_factor_sum(radii, z, n) {
        None => Ok(EvalResult::zero(tail)),
        Some(s) => {
            let ln = Complex64::new(k.ln(), 0.0) + 2.0 * s;
            if !ln.re.is_finite() {
                return Err(Error::LogOverflow { log_abs_z: log_z });
            }
            Ok(EvalResult::from_ln(ln, tail))
        }
    }
}

/// `f'` via `f'/f = Σ 2/(z + r_n)`.
pub(crate) fn derivative(radii: &LogRadii, k: f64, tol: f64, z: Point) -> Result<EvalResult> {
    let log_z = z.log_abs();
    let n = truncation_index_log(radii, log_z, tol);
    let f = eval(radii, k, tol, z)?;
    let lp = z.to_log_polar();

    if let Some(c) = z.to_complex().filter(|_| log_z < DOMINANT_LOG) {
        let mut s = Complex64::new(0.0, 0.0);
        for m in 1..=n {
            let log_r = radii.log_radius(m).expect("within truncation");
            let w = radii.scale(c, m, log_r);
            let one_plus = Complex64::new(1.0 + w.re, w.im);
            if one_plus.re == 0.0 && one_plus.im == 0.0 {
                return Err(Error::PoleOfLogDerivative { z: c });
            }
            s += 2.0 * (-log_r).exp() / one_plus;
        }
        let ln_s = LogPolar::from_complex(s);
        let ln = f.log_polar().ln() + ln_s.ln();
        return Ok(EvalResult::from_ln(ln, f.tail_bound));
    }

    // z f'/f = Σ 2 w_n / (1 + w_n), each term → 2 as |w_n| → ∞.
    let mut s = Complex64::new(0.0, 0.0);
    for m in 1..=n {
        let log_r = radii.log_radius(m).expect("within truncation");
        let log_w = lp.log_abs - log_r;
        if log_w > DOMINANT_LOG {
            let inv_w = LogPolar::new(-log_w, -lp.arg).to_complex().unwrap_or_default();
            s += 2.0 / (1.0 + inv_w);
        } else {
            let w = LogPolar::new(log_w, lp.arg).to_complex().expect("moderate");
            s += 2.0 * w / (1.0 + w);
        }
    }
    let ln = f.log_polar().ln() + LogPolar::from_complex(s).ln() - lp.ln();
    Ok(EvalResult::from_ln(ln, f.tail_bound))
}
