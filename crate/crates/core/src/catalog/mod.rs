//! The entire functions under study and their evaluation.
//!
//! Every evaluation reports `log|f(z)|` alongside the value, so callers can
//! keep working after `|f(z)|` has left the `f64` range. Products are summed
//! as logarithms with an analytic truncation bound (see [`product`]).

mod grammar;
pub mod product;

use std::f64::consts::{FRAC_PI_2, LN_2};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logpolar::{ln_1m, ln_1p, LogPolar, Point, LOG_POLAR_SWITCH};
use crate::surgery::SurgeryLadder;

pub use product::LogRadii;

pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-12;

/// Beyond this `|Re|`/`|Im|`, exponentials are handled in log form.
const EXP_SAFE: f64 = 700.0;

/// `f(z)` together with `log|f(z)|` and `arg f(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalResult {
    /// Cartesian value; `None` when `|f(z)|` overflows `f64`.
    pub value: Option<Complex64>,
    /// Natural log of `|f(z)|`; `-inf` exactly at zeros.
    pub log_abs: f64,
    pub arg: f64,
    /// Bound on `|log f - log f_N|` for the truncated product; 0 for closed forms.
    pub tail_bound: f64,
}

impl EvalResult {
    pub(crate) fn from_complex(v: Complex64, tail_bound: f64) -> Self {
        let lp = LogPolar::from_complex(v);
        EvalResult {
            value: Some(v),
            log_abs: lp.log_abs,
            arg: lp.arg,
            tail_bound,
        }
    }

    pub(crate) fn from_ln(ln: Complex64, tail_bound: f64) -> Self {
        Self::from_log_polar(LogPolar::from_ln(ln), tail_bound)
    }

    pub(crate) fn from_log_polar(lp: LogPolar, tail_bound: f64) -> Self {
        EvalResult {
            value: lp.to_complex(),
            log_abs: lp.log_abs,
            arg: lp.arg,
            tail_bound,
        }
    }

    pub(crate) fn zero(tail_bound: f64) -> Self {
        Self::from_log_polar(LogPolar::ZERO, tail_bound)
    }

    pub fn log_polar(&self) -> LogPolar {
        LogPolar {
            log_abs: self.log_abs,
            arg: self.arg,
        }
    }

    /// `|f(z)|`, possibly `inf`.
    pub fn abs(&self) -> f64 {
        self.log_abs.exp()
    }

    /// The value as a point to feed back into an evaluation.
    pub fn to_point(&self) -> Point {
        match self.value {
            Some(v) if self.log_abs <= LOG_POLAR_SWITCH => Point::Cartesian(v),
            _ => Point::Polar(self.log_polar()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum FunctionKind {
    /// `λ e^z`.
    LambdaExp { lambda: f64 },
    /// `z + 1 + e^{-z}`.
    Fatou,
    Sine,
    /// `z^2 + c`.
    Quadratic { c: Complex64 },
    /// Coefficients in ascending order of degree.
    MonomialPoly { coeffs: Vec<Complex64> },
    /// `∏ (1 + z/2^n)^2`.
    ProdPow2,
    /// `k ∏ (1 + z/r_n)^2` with caller-supplied constants.
    BdProduct { k: f64, log_radii: LogRadii },
    /// The piecewise quasiregular surgery map.
    SurgeryG(Arc<SurgeryLadder>),
}

/// Qualitative facts about a catalog entry that reports must surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    /// `0 < λ < 1/e`: the origin lies in the immediate basin of an attracting fixed point.
    AttractingBasin,
    /// Known to have a totally disconnected bounded-orbit set.
    TotallyDisconnected,
    /// Constants are illustrative and do not reproduce a specific construction.
    IllustrativeConstants,
    /// Only quasiregular; derivatives are finite differences.
    Quasiregular,
}

#[derive(Clone, Debug)]
pub struct FunctionSpec {
    pub kind: FunctionKind,
    pub truncation_tol: f64,
}

impl FunctionSpec {
    pub fn new(kind: FunctionKind) -> Result<Self> {
        Self::with_tol(kind, DEFAULT_TRUNCATION_TOL)
    }

    pub fn with_tol(kind: FunctionKind, truncation_tol: f64) -> Result<Self> {
        let spec = FunctionSpec {
            kind,
            truncation_tol,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn lambda_exp(lambda: f64) -> Self {
        Self::new(FunctionKind::LambdaExp { lambda }).expect("positive lambda")
    }

    pub fn fatou() -> Self {
        Self::new(FunctionKind::Fatou).unwrap()
    }

    pub fn sine() -> Self {
        Self::new(FunctionKind::Sine).unwrap()
    }

    pub fn quadratic(c: Complex64) -> Self {
        Self::new(FunctionKind::Quadratic { c }).unwrap()
    }

    pub fn poly(coeffs: Vec<Complex64>) -> Self {
        Self::new(FunctionKind::MonomialPoly { coeffs }).unwrap()
    }

    /// `z^d`.
    pub fn monomial(d: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); d + 1];
        coeffs[d] = Complex64::new(1.0, 0.0);
        Self::poly(coeffs)
    }

    pub fn prod_pow2() -> Self {
        Self::new(FunctionKind::ProdPow2).unwrap()
    }

    /// `∏ (1 + z/r_n)^2` with the illustrative default `k = 1`, `log r_n = 3^n`.
    pub fn bd_default() -> Self {
        Self::new(FunctionKind::BdProduct {
            k: 1.0,
            log_radii: LogRadii::Tower { base: 3.0 },
        })
        .unwrap()
    }

    pub fn surgery(ladder: Arc<SurgeryLadder>) -> Self {
        Self::new(FunctionKind::SurgeryG(ladder)).unwrap()
    }

    pub fn parse(s: &str) -> Result<Self> {
        grammar::parse(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_tol > 0.0 && self.truncation_tol.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "truncation_tol must be positive, got {}",
                self.truncation_tol
            )));
        }
        match &self.kind {
            FunctionKind::LambdaExp { lambda } if !(*lambda > 0.0 && lambda.is_finite()) => {
                Err(Error::InvalidSpec(format!("lambda must be positive, got {lambda}")))
            }
            FunctionKind::BdProduct { k, .. } if !(*k > 0.0 && k.is_finite()) => {
                Err(Error::InvalidSpec(format!("k must be positive, got {k}")))
            }
            FunctionKind::BdProduct { log_radii, .. } => log_radii.validate(),
            FunctionKind::MonomialPoly { coeffs } if coeffs.is_empty() => {
                Err(Error::InvalidSpec("polynomial needs a coefficient".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(
            self.kind,
            FunctionKind::ProdPow2 | FunctionKind::BdProduct { .. }
        )
    }

    pub fn tags(&self) -> Vec<Tag> {
        match &self.kind {
            FunctionKind::LambdaExp { lambda } if *lambda < (-1f64).exp() => {
                vec![Tag::AttractingBasin]
            }
            FunctionKind::Fatou | FunctionKind::ProdPow2 => vec![Tag::TotallyDisconnected],
            FunctionKind::BdProduct { .. } => {
                vec![Tag::TotallyDisconnected, Tag::IllustrativeConstants]
            }
            FunctionKind::SurgeryG(_) => vec![Tag::Quasiregular],
            _ => Vec::new(),
        }
    }

    fn product_parts(&self) -> Option<(&LogRadii, f64)> {
        const POW2: LogRadii = LogRadii::PowersOfTwo;
        match &self.kind {
            FunctionKind::ProdPow2 => Some((&POW2, 1.0)),
            FunctionKind::BdProduct { k, log_radii } => Some((log_radii, *k)),
            _ => None,
        }
    }

    /// Smallest number of factors whose tail bound is below `truncation_tol`
    /// on `|z| ≤ radius`. Zero for closed-form kinds.
    pub fn truncation_index(&self, radius: f64) -> usize {
        match self.product_parts() {
            Some((radii, _)) => {
                product::truncation_index_log(radii, radius.ln(), self.truncation_tol)
            }
            None => 0,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<EvalResult> {
        self.eval_point(Point::Cartesian(z))
    }

    pub fn eval_point(&self, z: Point) -> Result<EvalResult> {
        let tol = self.truncation_tol;
        match &self.kind {
            FunctionKind::LambdaExp { lambda } => {
                let c = cartesian(z)?;
                Ok(EvalResult::from_ln(Complex64::new(lambda.ln(), 0.0) + c, 0.0))
            }
            FunctionKind::Fatou => {
                let c = cartesian(z)?;
                if -c.re > EXP_SAFE {
                    // e^{-z} (1 + (z + 1) e^{z})
                    let corr = ln_1p((c + 1.0) * c.exp());
                    Ok(EvalResult::from_ln(-c + corr, 0.0))
                } else {
                    Ok(EvalResult::from_complex(c + 1.0 + (-c).exp(), 0.0))
                }
            }
            FunctionKind::Sine => {
                let c = cartesian(z)?;
                if c.im.abs() > EXP_SAFE {
                    Ok(EvalResult::from_ln(ln_trig_large(c, false), 0.0))
                } else {
                    Ok(EvalResult::from_complex(c.sin(), 0.0))
                }
            }
            FunctionKind::Quadratic { c } => {
                eval_poly(&[*c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], z)
            }
            FunctionKind::MonomialPoly { coeffs } => eval_poly(coeffs, z),
            FunctionKind::ProdPow2 => product::eval(&LogRadii::PowersOfTwo, 1.0, tol, z),
            FunctionKind::BdProduct { k, log_radii } => product::eval(log_radii, *k, tol, z),
            FunctionKind::SurgeryG(ladder) => ladder.eval_g(z),
        }
    }

    pub fn eval_derivative(&self, z: Complex64) -> Result<EvalResult> {
        self.eval_derivative_point(Point::Cartesian(z))
    }

    pub fn eval_derivative_point(&self, z: Point) -> Result<EvalResult> {
        let tol = self.truncation_tol;
        match &self.kind {
            FunctionKind::LambdaExp { .. } => self.eval_point(z),
            FunctionKind::Fatou => {
                let c = cartesian(z)?;
                if -c.re > EXP_SAFE {
                    // 1 - e^{-z} = -e^{-z} (1 - e^{z})
                    let ln = -c + Complex64::new(0.0, std::f64::consts::PI) + ln_1m(c.exp());
                    Ok(EvalResult::from_ln(ln, 0.0))
                } else {
                    Ok(EvalResult::from_complex(1.0 - (-c).exp(), 0.0))
                }
            }
            FunctionKind::Sine => {
                let c = cartesian(z)?;
                if c.im.abs() > EXP_SAFE {
                    Ok(EvalResult::from_ln(ln_trig_large(c, true), 0.0))
                } else {
                    Ok(EvalResult::from_complex(c.cos(), 0.0))
                }
            }
            FunctionKind::Quadratic { .. } => {
                eval_poly(&[Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)], z)
            }
            FunctionKind::MonomialPoly { coeffs } => {
                let d: Vec<Complex64> = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(j, c)| c * j as f64)
                    .collect();
                if d.is_empty() {
                    Ok(EvalResult::zero(0.0))
                } else {
                    eval_poly(&d, z)
                }
            }
            FunctionKind::ProdPow2 => product::derivative(&LogRadii::PowersOfTwo, 1.0, tol, z),
            FunctionKind::BdProduct { k, log_radii } => product::derivative(log_radii, *k, tol, z),
            FunctionKind::SurgeryG(ladder) => ladder.derivative(z),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        grammar::format(self, f)
    }
}

fn cartesian(z: Point) -> Result<Complex64> {
    match z.to_complex() {
        Some(c) if c.re.is_finite() && c.im.is_finite() => Ok(c),
        _ => Err(Error::LogOverflow {
            log_abs_z: z.log_abs(),
        }),
    }
}

/// `log sin z` (or `log cos z`) for `|Im z|` beyond the exponential range.
fn ln_trig_large(z: Complex64, cosine: bool) -> Complex64 {
    let iz = Complex64::new(-z.im, z.re);
    let half = Complex64::new(-LN_2, 0.0);
    if z.im > 0.0 {
        // dominant e^{-iz}
        let small = (2.0 * iz).exp();
        if cosine {
            half - iz + ln_1p(small)
        } else {
            half + Complex64::new(0.0, FRAC_PI_2) - iz + ln_1m(small)
        }
    } else {
        let small = (-2.0 * iz).exp();
        if cosine {
            half + iz + ln_1p(small)
        } else {
            half - Complex64::new(0.0, FRAC_PI_2) + iz + ln_1m(small)
        }
    }
}

fn eval_poly(coeffs: &[Complex64], z: Point) -> Result<EvalResult> {
    let zero = Complex64::new(0.0, 0.0);
    let deg = match coeffs.iter().rposition(|c| *c != zero) {
        Some(d) => d,
        None => return Ok(EvalResult::zero(0.0)),
    };
    let log_z = z.log_abs();
    if let Some(c) = z.to_complex() {
        if deg == 0 || (deg as f64) * log_z.max(0.0) < EXP_SAFE {
            let v = coeffs[..=deg].iter().rev().fold(zero, |acc, a| acc * c + a);
            return Ok(EvalResult::from_complex(v, 0.0));
        }
    }
    // c_d z^d (1 + Σ_{j<d} (c_j/c_d) z^{j-d})
    let lead = coeffs[deg];
    let ln_z = z.to_log_polar().ln();
    let mut rest = zero;
    for (j, cj) in coeffs[..deg].iter().enumerate() {
        if *cj != zero {
            rest += cj / lead * ((j as f64 - deg as f64) * ln_z).exp();
        }
    }
    let ln = LogPolar::from_complex(lead).ln() + deg as f64 * ln_z + ln_1p(rest);
    if !ln.re.is_finite() {
        return Err(Error::LogOverflow { log_abs_z: log_z });
    }
    Ok(EvalResult::from_ln(ln, 0.0))
}
