//! String form of function specs, shared by the CLI and config files.
//!
//! ```text
//! lambda-exp:0.3     fatou      sine       quad:-2+0i     prod2n
//! poly:0,0,1         bd         bd:k=2,base=2.5     bd:logr=3;9;27
//! surgery:gamma=24,levels=8
//! ```
//! Any spec may carry a `@tol=<x>` suffix setting the truncation tolerance.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::{FunctionKind, FunctionSpec, LogRadii, DEFAULT_TRUNCATION_TOL};
use crate::error::{Error, Result};
use crate::surgery::{SurgeryLadder, DEFAULT_GAMMA, DEFAULT_LEVELS};

fn err(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

fn number(input: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| err(input, format!("bad number {s:?}")))
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`).
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re.parse::<f64>().ok()?, im))
}

fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn key_values<'a>(input: &str, body: &'a str) -> Result<Vec<(&'a str, &'a str)>> {
    body.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(input, format!("expected key=value, got {p:?}")))
        })
        .collect()
}

pub(super) fn parse(input: &str) -> Result<FunctionSpec> {
    let (main, tol) = match input.split_once("@tol=") {
        Some((m, t)) => (m, number(input, t)?),
        None => (input, DEFAULT_TRUNCATION_TOL),
    };
    let (name, arg) = match main.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (main.trim(), None),
    };
    let need = |what: &str| arg.ok_or_else(|| err(input, format!("{name} needs {what}")));

    let kind = match name {
        "lambda-exp" => FunctionKind::LambdaExp {
            lambda: number(input, need("a lambda value")?)?,
        },
        "fatou" => FunctionKind::Fatou,
        "sine" | "sin" => FunctionKind::Sine,
        "quad" => FunctionKind::Quadratic {
            c: parse_complex(need("a constant")?)
                .ok_or_else(|| err(input, "bad complex constant"))?,
        },
        "poly" => {
            let coeffs = need("coefficients")?
                .split(',')
                .map(|s| parse_complex(s).ok_or_else(|| err(input, format!("bad coefficient {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            FunctionKind::MonomialPoly { coeffs }
        }
        "prod2n" => FunctionKind::ProdPow2,
        "bd" => {
            let mut k = 1.0;
            let mut log_radii = LogRadii::Tower { base: 3.0 };
            for (key, v) in key_values(input, arg.unwrap_or(""))? {
                match key {
                    "k" => k = number(input, v)?,
                    "base" => log_radii = LogRadii::Tower { base: number(input, v)? },
                    "logr" => {
                        log_radii = LogRadii::Explicit(
                            v.split(';').map(|x| number(input, x)).collect::<Result<_>>()?,
                        )
                    }
                    other => return Err(err(input, format!("unknown bd key {other:?}"))),
                }
            }
            FunctionKind::BdProduct { k, log_radii }
        }
        "surgery" => {
            let mut gamma = DEFAULT_GAMMA;
            let mut levels = DEFAULT_LEVELS;
            for (key, v) in key_values(input, arg.unwrap_or(""))? {
                match key {
                    "gamma" => gamma = number(input, v)?,
                    "levels" => {
                        levels = v.parse().map_err(|_| err(input, format!("bad levels {v:?}")))?
                    }
                    other => return Err(err(input, format!("unknown surgery key {other:?}"))),
                }
            }
            FunctionKind::SurgeryG(Arc::new(SurgeryLadder::build(gamma, levels)?))
        }
        other => return Err(err(input, format!("unknown function {other:?}"))),
    };
    if arg.is_some() && matches!(kind, FunctionKind::Fatou | FunctionKind::Sine | FunctionKind::ProdPow2) {
        return Err(err(input, format!("{name} takes no parameters")));
    }
    FunctionSpec::with_tol(kind, tol)
}

pub(super) fn format(spec: &FunctionSpec, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match &spec.kind {
        FunctionKind::LambdaExp { lambda } => write!(f, "lambda-exp:{lambda}")?,
        FunctionKind::Fatou => write!(f, "fatou")?,
        FunctionKind::Sine => write!(f, "sine")?,
        FunctionKind::Quadratic { c } => write!(f, "quad:{}", format_complex(*c))?,
        FunctionKind::MonomialPoly { coeffs } => {
            let parts: Vec<String> = coeffs.iter().map(|c| format_complex(*c)).collect();
            write!(f, "poly:{}", parts.join(","))?
        }
        FunctionKind::ProdPow2 => write!(f, "prod2n")?,
        FunctionKind::BdProduct { k, log_radii } => match log_radii {
            LogRadii::Tower { base } => write!(f, "bd:k={k},base={base}")?,
            LogRadii::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "bd:k={k},logr={}", parts.join(";"))?
            }
            LogRadii::PowersOfTwo => write!(f, "bd:k={k},logr=pow2")?,
        },
        FunctionKind::SurgeryG(l) => write!(f, "surgery:gamma={},levels={}", l.gamma, l.n_max)?,
    }
    if spec.truncation_tol != DEFAULT_TRUNCATION_TOL {
        write!(f, "@tol={}", spec.truncation_tol)?;
    }
    Ok(())
}
