//! Every command-line default in one place. Reports embed the resolved
//! values, so changing a default never makes an old report ambiguous.
//!
//! | flag                  | commands              | default        |
//! |-----------------------|-----------------------|----------------|
//! | `--window`            | render                | `-2,2,-2,2`    |
//! | `--res`               | render                | `256x256`      |
//! | `--max-iter`          | render, orbit         | 256            |
//! | `--bound-radius`      | render, orbit         | 1e3            |
//! | `--escape-radius`     | render, orbit         | 1e8            |
//! | `--out`               | render                | `kset.pgm`     |
//! | `--grid`              | certify               | 50             |
//! | `--samples`           | certify, surround     | 2048           |
//! | `--power`             | scan                  | 1              |
//! | `--r-max`             | scan                  | 100            |
//! | `--point`             | winding               | `0,0`          |
//! | `--tol`               | winding               | 0.1            |
//! | `--gamma`             | surgery               | 24             |
//! | `--levels`            | surgery               | 8              |
//! | `--samples`           | surgery (per seam)    | 256            |
//! | `--chain-samples`     | surgery               | 10000          |
//! | `--dilatation-points` | surgery               | 1000           |
//! | `--threads`           | all (env `THREADS`)   | all cores      |

pub const WINDOW: &str = "-2,2,-2,2";
pub const RES: &str = "256x256";
pub const MAX_ITER: usize = crate::orbit::DEFAULT_MAX_ITER;
pub const BOUND_RADIUS: f64 = crate::orbit::DEFAULT_BOUND_RADIUS;
pub const ESCAPE_RADIUS: f64 = crate::orbit::DEFAULT_ESCAPE_RADIUS;
pub const RENDER_OUT: &str = "kset.pgm";
pub const GRID: usize = 50;
pub const SAMPLES: usize = crate::radial::DEFAULT_SAMPLES;
pub const POWER: u32 = 1;
pub const SCAN_R_MAX: f64 = 100.0;
pub const POINT: &str = "0,0";
pub const TOL: f64 = crate::contour::DEFAULT_TOL;
pub const GAMMA: f64 = crate::surgery::DEFAULT_GAMMA;
pub const LEVELS: usize = crate::surgery::DEFAULT_LEVELS;
pub const SEAM_SAMPLES: usize = 256;
pub const CHAIN_SAMPLES: usize = 10_000;
pub const DILATATION_POINTS: usize = 1000;
