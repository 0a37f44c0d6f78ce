use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),

    #[error("cannot parse function spec {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `log|f(z)|` left the range of `f64`.
    #[error("log-modulus overflow while evaluating at log|z| = {log_abs_z}")]
    LogOverflow { log_abs_z: f64 },

    #[error("logarithmic derivative has a pole at {z}")]
    PoleOfLogDerivative { z: Complex64 },

    #[error("point with log|z| = {log_abs} lies outside the surgery ladder (log T_max = {log_t_max})")]
    OutOfLadderRange { log_abs: f64, log_t_max: f64 },

    #[error("gamma = {gamma} too small: positivity condition fails at level {level} (margin {margin})")]
    GammaTooSmall { gamma: f64, level: usize, margin: f64 },

    #[error("curve refinement cap exceeded at radius e^{log_radius} (zero on or near the curve?)")]
    RefinementCapExceeded { log_radius: f64 },

    #[error("curve passes within {distance:e} of the query point")]
    CurveTooClose { distance: f64 },

    #[error("winding residual {residual} (max argument step {max_step}); trace too coarse for this point")]
    ResidualTooLarge { residual: f64, max_step: f64 },

    #[error("degenerate jacobian: |dg| = {dz}, |dg/dzbar| = {dzbar}")]
    DegenerateJacobian { dz: f64, dzbar: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
