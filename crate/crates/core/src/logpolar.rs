//! Complex numbers carried as `(log|z|, arg z)`.
//!
//! Orbits and products in this crate routinely reach moduli like `e^(24·8!)`,
//! far outside `f64`. Everything that can grow is therefore handled as a
//! [`LogPolar`] pair, and converted back to Cartesian form only when the
//! modulus is representable.

use std::f64::consts::{LN_10, PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

/// `|z|` above which orbits switch to log-polar iteration (`1e100`).
pub const LOG_POLAR_SWITCH: f64 = 100.0 * LN_10;

/// Largest `log|z|` whose Cartesian form is finite.
pub const LOG_MAX_FINITE: f64 = 709.0;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = a - TAU * (a / TAU).round();
    if w <= -PI {
        w + TAU
    } else if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Principal `Log(1 + w)`, accurate when `w` is small.
pub fn ln_1p(w: Complex64) -> Complex64 {
    let one_plus = Complex64::new(1.0 + w.re, w.im);
    let re = if w.norm_sqr() < 0.25 {
        0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p()
    } else {
        one_plus.norm().ln()
    };
    Complex64::new(re, one_plus.im.atan2(one_plus.re))
}

/// Principal `Log(1 - w)`.
pub fn ln_1m(w: Complex64) -> Complex64 {
    ln_1p(-w)
}

/// A complex number as `(log|z|, arg z)`; zero has `log_abs = -inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogPolar {
    pub log_abs: f64,
    pub arg: f64,
}

impl LogPolar {
    pub const ZERO: LogPolar = LogPolar {
        log_abs: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub fn new(log_abs: f64, arg: f64) -> Self {
        LogPolar {
            log_abs,
            arg: wrap_angle(arg),
        }
    }

    /// From a complex logarithm `log z = log|z| + i arg z`.
    pub fn from_ln(ln: Complex64) -> Self {
        Self::new(ln.re, ln.im)
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            Self::ZERO
        } else {
            LogPolar {
                log_abs: z.norm().ln(),
                arg: z.im.atan2(z.re),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    /// Cartesian form, or `None` when `|z|` overflows `f64`.
    pub fn to_complex(self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        let m = self.log_abs.exp();
        m.is_finite().then(|| Complex64::from_polar(m, self.arg))
    }

    /// `log z` on the principal branch.
    pub fn ln(self) -> Complex64 {
        Complex64::new(self.log_abs, self.arg)
    }
}

/// A point of the plane in whichever representation keeps it exact enough.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Cartesian(Complex64),
    Polar(LogPolar),
}

impl Point {
    pub fn log_abs(&self) -> f64 {
        match self {
            Point::Cartesian(z) => {
                if z.re == 0.0 && z.im == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    z.norm().ln()
                }
            }
            Point::Polar(lp) => lp.log_abs,
        }
    }

    pub fn to_log_polar(&self) -> LogPolar {
        match *self {
            Point::Cartesian(z) => LogPolar::from_complex(z),
            Point::Polar(lp) => lp,
        }
    }

    pub fn to_complex(&self) -> Option<Complex64> {
        match *self {
            Point::Cartesian(z) => Some(z),
            Point::Polar(lp) => lp.to_complex(),
        }
    }

    /// Point on the circle `|z| = e^log_r` at angle `theta`.
    pub fn on_circle(log_r: f64, theta: f64) -> Point {
        let lp = LogPolar::new(log_r, theta);
        match lp.to_complex() {
            Some(z) if log_r <= LOG_POLAR_SWITCH => Point::Cartesian(z),
            _ => Point::Polar(lp),
        }
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::Cartesian(z)
    }
}

impl From<LogPolar> for Point {
    fn from(lp: LogPolar) -> Self {
        Point::Polar(lp)
    }
}
