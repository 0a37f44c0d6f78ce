//! Budgeted classification of orbits `z, f(z), f(f(z)), …`.
//!
//! `Escaped` only means the orbit left the budgeted disc; it is a finite
//! surrogate for membership in the escaping set, not a proof of it.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::FunctionSpec;
use crate::error::{Error, Result};
use crate::logpolar::{LogPolar, Point};

pub const DEFAULT_MAX_ITER: usize = 256;
pub const DEFAULT_BOUND_RADIUS: f64 = 1e3;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitBudget {
    pub max_iter: usize,
    /// Orbits staying within this radius count as bounded.
    pub bound_radius: f64,
    /// Orbits exceeding this radius count as escaped.
    pub escape_radius: f64,
}

impl Default for OrbitBudget {
    fn default() -> Self {
        OrbitBudget {
            max_iter: DEFAULT_MAX_ITER,
            bound_radius: DEFAULT_BOUND_RADIUS,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
        }
    }
}

impl OrbitBudget {
    pub fn new(max_iter: usize, bound_radius: f64, escape_radius: f64) -> Result<Self> {
        let b = OrbitBudget {
            max_iter,
            bound_radius,
            escape_radius,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.bound_radius > 0.0 && self.bound_radius < self.escape_radius) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < bound_radius < escape_radius, got {} and {}",
                self.bound_radius, self.escape_radius
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Bounded,
    Escaped,
    Undetermined,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Bounded => "bounded",
            Status::Escaped => "escaped",
            Status::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitVerdict {
    pub status: Status,
    pub iterations_used: usize,
    pub max_log_abs_reached: f64,
    pub escape_iteration: Option<usize>,
}

/// Classifies the orbit of `z0` (which counts as iterate 0).
pub fn classify_orbit(spec: &FunctionSpec, z0: Complex64, budget: &OrbitBudget) -> OrbitVerdict {
    classify_point(spec, Point::Cartesian(z0), budget)
}

pub fn classify_point(spec: &FunctionSpec, z0: Point, budget: &OrbitBudget) -> OrbitVerdict {
    let log_escape = budget.escape_radius.ln();
    let log_bound = budget.bound_radius.ln();
    let mut log_abs = z0.log_abs();
    let mut max_log = log_abs;
    let mut within = log_abs <= log_bound;
    let escaped = |i: usize, max_log: f64| OrbitVerdict {
        status: Status::Escaped,
        iterations_used: i,
        max_log_abs_reached: max_log,
        escape_iteration: Some(i),
    };
    if log_abs > log_escape {
        return escaped(0, max_log);
    }
    let mut z = z0;
    for i in 1..=budget.max_iter {
        let fz = match spec.eval_point(z) {
            Ok(v) => v,
            Err(Error::LogOverflow { .. }) => return escaped(i, f64::INFINITY),
            Err(_) => {
                return OrbitVerdict {
                    status: Status::Undetermined,
                    iterations_used: i,
                    max_log_abs_reached: max_log,
                    escape_iteration: None,
                }
            }
        };
        log_abs = fz.log_abs;
        if log_abs.is_nan() {
            return OrbitVerdict {
                status: Status::Undetermined,
                iterations_used: i,
                max_log_abs_reached: max_log,
                escape_iteration: None,
            };
        }
        max_log = max_log.max(log_abs);
        if log_abs > log_escape {
            return escaped(i, max_log);
        }
        within &= log_abs <= log_bound;
        z = fz.to_point();
    }
    OrbitVerdict {
        status: if within { Status::Bounded } else { Status::Undetermined },
        iterations_used: budget.max_iter,
        max_log_abs_reached: max_log,
        escape_iteration: None,
    }
}

/// Classifies many seeds in parallel; output is in input order.
pub fn classify_batch(spec: &FunctionSpec, seeds: &[Complex64], budget: &OrbitBudget) -> Vec<OrbitVerdict> {
    seeds
        .par_iter()
        .map(|&z| classify_orbit(spec, z, budget))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitTrace {
    /// `f^1(z0), …` in log-polar form.
    pub points: Vec<LogPolar>,
    /// Set when the orbit stopped early because `log|f^n|` overflowed.
    pub overflowed: bool,
}

pub fn orbit_trace(spec: &FunctionSpec, z0: Complex64, n: usize) -> OrbitTrace {
    let mut points = Vec::with_capacity(n);
    let mut z = Point::Cartesian(z0);
    for _ in 0..n {
        match spec.eval_point(z) {
            Ok(v) if v.log_abs.is_finite() || v.log_abs == f64::NEG_INFINITY => {
                points.push(v.log_polar());
                z = v.to_point();
            }
            _ => {
                return OrbitTrace {
                    points,
                    overflowed: true,
                }
            }
        }
    }
    OrbitTrace {
        points,
        overflowed: false,
    }
}

/// Reads `re,im` seeds, one per line; a non-numeric first line is a header.
pub fn read_seeds_csv<R: Read>(reader: R) -> Result<Vec<Complex64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut seeds = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let parse = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok());
        match (parse(0), parse(1), rec.len()) {
            (Some(re), Some(im), 2) => seeds.push(Complex64::new(re, im)),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "seed line {} is not `re,im`",
                    i + 1
                )))
            }
        }
    }
    Ok(seeds)
}

/// Writes `re,im,status,iterations,escape_iteration,max_log_abs`.
pub fn write_verdicts_csv<W: Write>(writer: W, seeds: &[Complex64], verdicts: &[OrbitVerdict]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["re", "im", "status", "iterations", "escape_iteration", "max_log_abs"])?;
    for (z, v) in seeds.iter().zip(verdicts) {
        w.write_record([
            z.re.to_string(),
            z.im.to_string(),
            v.status.as_str().to_string(),
            v.iterations_used.to_string(),
            v.escape_iteration.map(|e| e.to_string()).unwrap_or_default(),
            v.max_log_abs_reached.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
