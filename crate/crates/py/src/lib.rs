//! Python bindings for `kset`.
//!
//! Functions are addressed by the same spec strings as the command line
//! (`"prod2n"`, `"quad:-2"`, `"lambda-exp:0.3"`, ...). Long computations
//! release the GIL.

use std::sync::Arc;

use kset::orbit::{self, OrbitBudget};
use kset::raster::{self, Window};
use kset::surgery::{self, VerifyOptions};
use kset::{contour, radial, Complex64, Error, Point};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidSpec(_) | Error::Parse { .. } | Error::InvalidArgument(_) | Error::GammaTooSmall { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::Io(_) | Error::Csv(_) | Error::Image(_) => PyOSError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

/// An entire (or quasiregular) function from the catalog.
#[pyclass(frozen, name = "FunctionSpec")]
struct PyFunctionSpec {
    inner: kset::FunctionSpec,
}

#[pymethods]
impl PyFunctionSpec {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyFunctionSpec {
            inner: kset::FunctionSpec::parse(spec).map_err(to_py)?,
        })
    }

    /// `f(z)`, or `None` when `|f(z)|` exceeds the double range.
    fn eval(&self, z: Complex64) -> PyResult<Option<Complex64>> {
        Ok(self.inner.eval(z).map_err(to_py)?.value)
    }

    /// `(log|f(z)|, arg f(z))`, finite even where `f(z)` overflows.
    fn eval_log(&self, z: Complex64) -> PyResult<(f64, f64)> {
        let v = self.inner.eval(z).map_err(to_py)?;
        Ok((v.log_abs, v.arg))
    }

    /// `(log|f|, arg f)` at `z = exp(log_abs + i arg)`.
    fn eval_log_polar(&self, log_abs: f64, arg: f64) -> PyResult<(f64, f64)> {
        let v = self
            .inner
            .eval_point(Point::on_circle(log_abs, arg))
            .map_err(to_py)?;
        Ok((v.log_abs, v.arg))
    }

    fn derivative(&self, z: Complex64) -> PyResult<Option<Complex64>> {
        Ok(self.inner.eval_derivative(z).map_err(to_py)?.value)
    }

    fn truncation_index(&self, radius: f64) -> usize {
        self.inner.truncation_index(radius)
    }

    #[getter]
    fn tags(&self) -> Vec<String> {
        self.inner
            .tags()
            .iter()
            .map(|t| serde_json::to_value(t).unwrap().as_str().unwrap().to_string())
            .collect()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("FunctionSpec({:?})", self.inner.to_string())
    }
}

#[pyclass(frozen, get_all, name = "OrbitVerdict")]
struct PyOrbitVerdict {
    status: String,
    iterations_used: usize,
    escape_iteration: Option<usize>,
    max_log_abs_reached: f64,
}

#[pymethods]
impl PyOrbitVerdict {
    fn __repr__(&self) -> String {
        format!(
            "OrbitVerdict(status={:?}, iterations_used={}, escape_iteration={:?})",
            self.status, self.iterations_used, self.escape_iteration
        )
    }
}

#[pyfunction]
#[pyo3(signature = (spec, z, max_iter = orbit::DEFAULT_MAX_ITER, bound_radius = orbit::DEFAULT_BOUND_RADIUS, escape_radius = orbit::DEFAULT_ESCAPE_RADIUS))]
fn classify_orbit(
    spec: &PyFunctionSpec,
    z: Complex64,
    max_iter: usize,
    bound_radius: f64,
    escape_radius: f64,
) -> PyResult<PyOrbitVerdict> {
    let budget = OrbitBudget::new(max_iter, bound_radius, escape_radius).map_err(to_py)?;
    let v = orbit::classify_orbit(&spec.inner, z, &budget);
    Ok(PyOrbitVerdict {
        status: v.status.as_str().to_string(),
        iterations_used: v.iterations_used,
        escape_iteration: v.escape_iteration,
        max_log_abs_reached: v.max_log_abs_reached,
    })
}

/// `(m(r, f), theta)` of the sampled and refined minimum.
#[pyfunction]
#[pyo3(signature = (spec, r, n_samples = radial::DEFAULT_SAMPLES))]
fn min_modulus(spec: &PyFunctionSpec, r: f64, n_samples: usize) -> PyResult<(f64, f64)> {
    let m = radial::min_modulus(&spec.inner, r, n_samples).map_err(to_py)?;
    Ok((m.value, m.theta))
}

#[pyfunction]
#[pyo3(signature = (spec, r, n_samples = radial::DEFAULT_SAMPLES))]
fn max_modulus(spec: &PyFunctionSpec, r: f64, n_samples: usize) -> PyResult<(f64, f64)> {
    let m = radial::max_modulus(&spec.inner, r, n_samples).map_err(to_py)?;
    Ok((m.value, m.theta))
}

#[pyclass(frozen, get_all, name = "ScanRow")]
struct PyScanRow {
    r: f64,
    m_est: f64,
    m_lower: f64,
    max_est: f64,
    theta_min: f64,
    certified: bool,
}

#[pymethods]
impl PyScanRow {
    fn __repr__(&self) -> String {
        format!(
            "ScanRow(r={}, m_est={}, m_lower={}, certified={})",
            self.r,
            self.m_est,
            self.m_lower,
            if self.certified { "True" } else { "False" }
        )
    }
}

/// Certificate rows over `grid` log-uniform radii in `[r_min, r_max]`.
#[pyfunction]
#[pyo3(signature = (spec, r_min, r_max, grid = 50, n_samples = radial::DEFAULT_SAMPLES))]
fn spl_certificate(
    py: Python<'_>,
    spec: &PyFunctionSpec,
    r_min: f64,
    r_max: f64,
    grid: usize,
    n_samples: usize,
) -> PyResult<Vec<PyScanRow>> {
    let rows = py
        .detach(|| radial::spl_certificate_with(&spec.inner, r_min, r_max, grid, n_samples))
        .map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| PyScanRow {
            r: r.r,
            m_est: r.m_est,
            m_lower: r.m_lower,
            max_est: r.max_est,
            theta_min: r.theta_min,
            certified: r.certified,
        })
        .collect())
}

#[pyfunction]
fn order_estimate(spec: &PyFunctionSpec, radii: Vec<f64>) -> PyResult<f64> {
    radial::order_estimate(&spec.inner, &radii).map_err(to_py)
}

/// Winding number of `f(|z| = r)` about `w`.
#[pyfunction]
#[pyo3(signature = (spec, r, w = Complex64::new(0.0, 0.0), tol = contour::DEFAULT_TOL))]
fn winding_number(spec: &PyFunctionSpec, r: f64, w: Complex64, tol: f64) -> PyResult<i64> {
    let trace = contour::trace_circle_image(&spec.inner, r, tol).map_err(to_py)?;
    contour::winding_number(&trace, w).map_err(to_py)
}

/// `(result, winding, m_lower)`.
#[pyfunction]
#[pyo3(signature = (spec, r, n_samples = radial::DEFAULT_SAMPLES))]
fn surrounds_disc(spec: &PyFunctionSpec, r: f64, n_samples: usize) -> PyResult<(bool, i64, f64)> {
    let s = contour::surrounds_disc(&spec.inner, r, n_samples).map_err(to_py)?;
    Ok((s.result, s.winding, s.m_lower))
}

#[pyfunction]
fn count_preimages(spec: &PyFunctionSpec, r: f64, w: Complex64) -> PyResult<i64> {
    contour::count_preimages(&spec.inner, r, w).map_err(to_py)
}

/// The quasiregular ladder map `g`.
#[pyclass(frozen, name = "SurgeryLadder")]
struct PySurgeryLadder {
    inner: Arc<surgery::SurgeryLadder>,
}

#[pymethods]
impl PySurgeryLadder {
    #[new]
    #[pyo3(signature = (gamma = surgery::DEFAULT_GAMMA, levels = surgery::DEFAULT_LEVELS))]
    fn new(gamma: f64, levels: usize) -> PyResult<Self> {
        Ok(PySurgeryLadder {
            inner: Arc::new(surgery::SurgeryLadder::build(gamma, levels).map_err(to_py)?),
        })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn levels(&self) -> usize {
        self.inner.n_max
    }

    /// `(log P_n, log Q_n, log R_n, log S_n, log T_n)`.
    fn log_radii(&self, n: usize) -> PyResult<(f64, f64, f64, f64, f64)> {
        if n < 1 || n > self.inner.n_max {
            return Err(PyValueError::new_err(format!("level must be in 1..={}", self.inner.n_max)));
        }
        let l = &self.inner;
        Ok((l.log_p(n), l.log_q(n), l.log_r(n), l.log_s(n), l.log_t(n)))
    }

    fn eval(&self, z: Complex64) -> PyResult<Option<Complex64>> {
        Ok(self.inner.eval_g(Point::Cartesian(z)).map_err(to_py)?.value)
    }

    fn dilatation(&self, z: Complex64) -> PyResult<f64> {
        self.inner
            .dilatation_estimate(Point::Cartesian(z), surgery::DEFAULT_FD_STEP)
            .map_err(to_py)
    }

    /// The map as a `FunctionSpec`.
    fn function(&self) -> PyFunctionSpec {
        PyFunctionSpec {
            inner: kset::FunctionSpec::surgery(self.inner.clone()),
        }
    }
}

/// Full surgery verification; returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (gamma = surgery::DEFAULT_GAMMA, levels = surgery::DEFAULT_LEVELS))]
fn surgery_report(py: Python<'_>, gamma: f64, levels: usize) -> PyResult<String> {
    let report = py
        .detach(|| surgery::verify(gamma, levels, VerifyOptions::default()))
        .map_err(to_py)?;
    Ok(serde_json::to_string(&report).expect("serializable"))
}

#[pyclass(frozen, name = "PixelGrid")]
struct PyPixelGrid {
    inner: raster::PixelGrid,
}

#[pymethods]
impl PyPixelGrid {
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.window.height_px, self.inner.window.width_px)
    }

    /// Row-major status strings, top row first.
    fn statuses(&self) -> Vec<&'static str> {
        self.inner.verdicts.iter().map(|v| v.status.as_str()).collect()
    }

    /// Binary PGM bytes.
    fn pgm<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &raster::pgm_bytes(&self.inner))
    }

    /// Raster statistics as a JSON string.
    fn stats(&self) -> String {
        serde_json::to_string(&raster::stats(&self.inner)).expect("serializable")
    }
}

/// Renders the bounded-orbit set on `window = (x_min, x_max, y_min, y_max)`.
#[pyfunction]
#[pyo3(signature = (spec, window = (-2.0, 2.0, -2.0, 2.0), res = (256, 256), max_iter = orbit::DEFAULT_MAX_ITER, bound_radius = orbit::DEFAULT_BOUND_RADIUS, escape_radius = orbit::DEFAULT_ESCAPE_RADIUS))]
fn render(
    py: Python<'_>,
    spec: &PyFunctionSpec,
    window: (f64, f64, f64, f64),
    res: (usize, usize),
    max_iter: usize,
    bound_radius: f64,
    escape_radius: f64,
) -> PyResult<PyPixelGrid> {
    let w = Window::new(window.0, window.1, window.2, window.3, res.0, res.1).map_err(to_py)?;
    let budget = OrbitBudget::new(max_iter, bound_radius, escape_radius).map_err(to_py)?;
    let grid = py
        .detach(|| raster::render_k_set(&spec.inner, w, budget))
        .map_err(to_py)?;
    Ok(PyPixelGrid { inner: grid })
}

#[pymodule(name = "kset")]
fn kset_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyFunctionSpec>()?;
    m.add_class::<PyOrbitVerdict>()?;
    m.add_class::<PyScanRow>()?;
    m.add_class::<PySurgeryLadder>()?;
    m.add_class::<PyPixelGrid>()?;
    m.add_function(wrap_pyfunction!(classify_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(min_modulus, m)?)?;
    m.add_function(wrap_pyfunction!(max_modulus, m)?)?;
    m.add_function(wrap_pyfunction!(spl_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(order_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(winding_number, m)?)?;
    m.add_function(wrap_pyfunction!(surrounds_disc, m)?)?;
    m.add_function(wrap_pyfunction!(count_preimages, m)?)?;
    m.add_function(wrap_pyfunction!(surgery_report, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    Ok(())
}
