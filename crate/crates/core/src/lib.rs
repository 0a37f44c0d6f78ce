//! Numerical tools for the bounded-orbit set `K(f)` of entire functions.
//!
//! * [`catalog`]: the functions under study, evaluated in log space.
//! * [`orbit`]: budgeted orbit classification.
//! * [`radial`]: minimum/maximum modulus scans and certificates `m(r, f) > r`.
//! * [`contour`]: images of circles, winding numbers and the surround test.
//! * [`surgery`]: the quasiregular ladder map and its verification.
//! * [`raster`]: pixel approximations of `K(f)` and component labelling.
//! * [`cli`]: the `kset` command-line front end.

// `!(x > y)` deliberately rejects NaN along with small values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod contour;
pub mod error;
pub mod logpolar;
pub mod orbit;
pub mod radial;
pub mod raster;
pub mod surgery;

pub use catalog::{EvalResult, FunctionKind, FunctionSpec, LogRadii, Tag};
pub use error::{Error, Result};
pub use logpolar::{LogPolar, Point};
pub use num_complex::Complex64;

/// Runs `f` on a dedicated pool of `threads` workers (`None`: all cores).
///
/// Results of every parallel routine in this crate are independent of the
/// pool size.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    pool.install(f)
}
