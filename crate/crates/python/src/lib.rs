//! Python bindings for the leaky-wire spectral solver.
//!
//! Exposes the coupling type, both fiber models, the grating symbol t(z,k2),
//! band sweeps with gap detection, and the verification battery. Spectra are
//! returned as lists of dicts with keys `lambda`, `multiplicity`, `residual`,
//! `near_threshold` and `coeffs` (a list of (n, complex) pairs).

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use leakywire::band_sweep::{self, KSet, SweepConfig};
use leakywire::coupling::CouplingFunction;
use leakywire::fiber_grating::{self, GratingFiberQuery, GratingSymbolContext, PsiMethod};
use leakywire::fiber_line::{self, LineFiberQuery};
use leakywire::specfun;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// 2π-periodic real coupling as a trigonometric polynomial.
#[pyclass(name = "Coupling", from_py_object)]
#[derive(Clone)]
struct PyCoupling {
    inner: CouplingFunction,
}

#[pymethods]
impl PyCoupling {
    /// σ ≡ alpha.
    #[staticmethod]
    fn constant(alpha: f64) -> Self {
        PyCoupling {
            inner: CouplingFunction::constant(alpha),
        }
    }

    /// From a {mode: complex amplitude} map obeying conj-symmetry.
    #[staticmethod]
    fn from_fourier(coeffs: std::collections::HashMap<i32, Complex64>) -> PyResult<Self> {
        Ok(PyCoupling {
            inner: CouplingFunction::from_fourier(coeffs).map_err(value_err)?,
        })
    }

    /// From 2^p >= 8 real samples on the uniform grid over [-pi, pi).
    #[staticmethod]
    fn from_samples(samples: Vec<f64>) -> PyResult<Self> {
        Ok(PyCoupling {
            inner: CouplingFunction::from_samples(&samples).map_err(value_err)?,
        })
    }

    fn evaluate(&self, x: f64) -> PyResult<f64> {
        self.inner.evaluate(x).map_err(value_err)
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    #[getter]
    fn ess_inf(&self) -> f64 {
        self.inner.ess_inf()
    }

    #[getter]
    fn ess_sup(&self) -> f64 {
        self.inner.ess_sup()
    }

    #[getter]
    fn max_index(&self) -> u32 {
        self.inner.max_index()
    }

    fn __repr__(&self) -> String {
        format!(
            "Coupling(mean={:.6}, degree={}, ess=[{:.6}, {:.6}])",
            self.inner.mean(),
            self.inner.max_index(),
            self.inner.ess_inf(),
            self.inner.ess_sup()
        )
    }
}

/// Cached anchor and truncation policy for the grating symbol t(z,k2).
#[pyclass(name = "GratingContext", from_py_object)]
#[derive(Clone)]
struct PyGratingContext {
    inner: GratingSymbolContext,
}

#[pymethods]
impl PyGratingContext {
    #[new]
    #[pyo3(signature = (image_cutoff=256, mode_cutoff=10_000, term_tol=1e-14))]
    fn new(image_cutoff: u32, mode_cutoff: u32, term_tol: f64) -> PyResult<Self> {
        Ok(PyGratingContext {
            inner: GratingSymbolContext::new(image_cutoff, mode_cutoff, term_tol)
                .map_err(value_err)?,
        })
    }

    /// t(-1, 0).
    #[getter]
    fn anchor(&self) -> f64 {
        self.inner.anchor()
    }

    fn __repr__(&self) -> String {
        format!("GratingContext(anchor={:.12})", self.inner.anchor())
    }
}

fn ctx_or_default(ctx: Option<&PyGratingContext>) -> GratingSymbolContext {
    ctx.map(|c| c.inner.clone()).unwrap_or_default()
}

/// Euler-Mascheroni constant.
#[pyfunction]
fn euler_gamma() -> f64 {
    specfun::EULER_GAMMA
}

/// The symbol constant (ln 2 - gamma) / (2 pi).
#[pyfunction]
fn varsigma() -> f64 {
    specfun::VARSIGMA
}

/// Macdonald function K0(x), x > 0.
#[pyfunction]
fn bessel_k0(x: f64) -> PyResult<f64> {
    specfun::bessel_k0(x).map_err(value_err)
}

/// Integral of K0(r)^2 r dr over (0, inf) = 1/2.
#[pyfunction]
fn k0_square_moment() -> f64 {
    specfun::k0_square_moment()
}

/// Constant-coupling eigenvalue parameter xi(alpha) = -4 exp(-4 pi alpha - 2 gamma).
#[pyfunction]
fn xi(alpha: f64) -> f64 {
    fiber_line::xi(alpha)
}

/// Line-model diagonal symbol alpha_n(lambda, k).
#[pyfunction]
fn alpha_line(n: i64, lam: f64, k: f64) -> PyResult<f64> {
    fiber_line::alpha_line(n, lam, k).map_err(value_err)
}

/// Grating symbol t(z,k2) via the image sum (z < 0).
#[pyfunction]
#[pyo3(signature = (z, k2, ctx=None))]
fn t_image(z: f64, k2: f64, ctx: Option<&PyGratingContext>) -> PyResult<f64> {
    fiber_grating::t_image(z, k2, &ctx_or_default(ctx)).map_err(value_err)
}

/// Grating symbol t(z,k2) via the renormalized mode sum (z < k2^2).
#[pyfunction]
#[pyo3(signature = (z, k2, ctx=None))]
fn t_renormalized(z: f64, k2: f64, ctx: Option<&PyGratingContext>) -> PyResult<f64> {
    fiber_grating::t_renormalized(z, k2, &ctx_or_default(ctx)).map_err(value_err)
}

/// Grating symbol with automatic representation choice.
#[pyfunction]
#[pyo3(signature = (z, k2, ctx=None))]
fn t_eval(z: f64, k2: f64, ctx: Option<&PyGratingContext>) -> PyResult<f64> {
    fiber_grating::t_eval(z, k2, &ctx_or_default(ctx)).map_err(value_err)
}

/// The unique root lambda(alpha, k2) of t(., k2) + alpha.
#[pyfunction]
#[pyo3(signature = (alpha, k2, ctx=None))]
fn lambda_const(alpha: f64, k2: f64, ctx: Option<&PyGratingContext>) -> PyResult<f64> {
    fiber_grating::lambda_const(alpha, k2, &ctx_or_default(ctx)).map_err(value_err)
}

/// Grating diagonal symbol alpha_n(lambda, (k1, k2)).
#[pyfunction]
#[pyo3(signature = (n, lam, k1, k2, ctx=None))]
fn alpha_grating(
    n: i64,
    lam: f64,
    k1: f64,
    k2: f64,
    ctx: Option<&PyGratingContext>,
) -> PyResult<f64> {
    fiber_grating::alpha_grating(n, lam, [k1, k2], &ctx_or_default(ctx)).map_err(value_err)
}

/// |grating symbol - line symbol| in the analytically cancelled form.
#[pyfunction]
#[pyo3(signature = (n, lam, k1, k2, ctx=None))]
fn symbol_deviation(
    n: i64,
    lam: f64,
    k1: f64,
    k2: f64,
    ctx: Option<&PyGratingContext>,
) -> PyResult<f64> {
    fiber_grating::symbol_deviation(n, lam, [k1, k2], &ctx_or_default(ctx)).map_err(value_err)
}

/// Inter-wire coupling norm (2 pi)^-1 K0(2 pi j sqrt(-z)).
#[pyfunction]
fn tj_norm(j: u32, z: f64) -> PyResult<f64> {
    fiber_grating::tj_norm(j, z).map_err(value_err)
}

/// Strip point-interaction field psi(x2, y) at spectral point z; method is
/// "mode" or "image".
#[pyfunction]
#[pyo3(signature = (x2, y, z, k2, method="mode", ctx=None))]
fn psi_field(
    x2: f64,
    y: f64,
    z: f64,
    k2: f64,
    method: &str,
    ctx: Option<&PyGratingContext>,
) -> PyResult<Complex64> {
    let m = match method {
        "mode" => PsiMethod::Mode,
        "image" => PsiMethod::Image,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown psi method `{other}`"
            )))
        }
    };
    fiber_grating::psi_field(x2, y, z, k2, &ctx_or_default(ctx), m).map_err(value_err)
}

fn line_mode_dict<'py>(
    py: Python<'py>,
    m: &fiber_line::GuidedMode,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lambda", m.lambda)?;
    d.set_item("multiplicity", m.multiplicity)?;
    d.set_item("residual", m.residual)?;
    d.set_item("near_threshold", m.near_threshold)?;
    d.set_item("open_residual", m.open_residual)?;
    d.set_item("coeffs", m.coeffs.clone())?;
    Ok(d)
}

/// Discrete spectrum of the line fiber operator H(k) below k^2.
#[pyfunction]
#[pyo3(signature = (k, coupling, n_modes=128, lambda_tol=1e-9, threshold_margin=1e-6))]
fn line_spectrum<'py>(
    py: Python<'py>,
    k: f64,
    coupling: &PyCoupling,
    n_modes: usize,
    lambda_tol: f64,
    threshold_margin: f64,
) -> PyResult<Bound<'py, PyList>> {
    let q = LineFiberQuery::new(
        k,
        coupling.inner.clone(),
        n_modes,
        lambda_tol,
        threshold_margin,
    )
    .map_err(value_err)?;
    let modes = fiber_line::discrete_spectrum(&q).map_err(value_err)?;
    let out = PyList::empty(py);
    for m in &modes {
        out.append(line_mode_dict(py, m)?)?;
    }
    Ok(out)
}

/// Embedded kernel points of the line fiber operator in a window above k^2.
#[pyfunction]
#[pyo3(signature = (k, coupling, window, n_modes=128, lambda_tol=1e-9, threshold_margin=1e-6))]
fn embedded_kernel_search<'py>(
    py: Python<'py>,
    k: f64,
    coupling: &PyCoupling,
    window: (f64, f64),
    n_modes: usize,
    lambda_tol: f64,
    threshold_margin: f64,
) -> PyResult<Bound<'py, PyList>> {
    let q = LineFiberQuery::new(
        k,
        coupling.inner.clone(),
        n_modes,
        lambda_tol,
        threshold_margin,
    )
    .map_err(value_err)?;
    let modes = fiber_line::embedded_kernel_search(&q, window).map_err(value_err)?;
    let out = PyList::empty(py);
    for m in &modes {
        out.append(line_mode_dict(py, m)?)?;
    }
    Ok(out)
}

/// Discrete spectrum of the grating fiber operator H(k1, k2) below k1^2 + k2^2.
#[pyfunction]
#[pyo3(signature = (k1, k2, coupling, n_modes=128, lambda_tol=1e-9, threshold_margin=1e-6, ctx=None))]
#[allow(clippy::too_many_arguments)]
fn grating_spectrum<'py>(
    py: Python<'py>,
    k1: f64,
    k2: f64,
    coupling: &PyCoupling,
    n_modes: usize,
    lambda_tol: f64,
    threshold_margin: f64,
    ctx: Option<&PyGratingContext>,
) -> PyResult<Bound<'py, PyList>> {
    let q = GratingFiberQuery::new(
        [k1, k2],
        coupling.inner.clone(),
        n_modes,
        lambda_tol,
        threshold_margin,
    )
    .map_err(value_err)?;
    let modes =
        fiber_grating::discrete_spectrum_grating(&q, &ctx_or_default(ctx)).map_err(value_err)?;
    let out = PyList::empty(py);
    for m in &modes {
        let d = PyDict::new(py);
        d.set_item("lambda", m.lambda)?;
        d.set_item("multiplicity", m.multiplicity)?;
        d.set_item("residual", m.residual)?;
        d.set_item("near_threshold", m.near_threshold)?;
        d.set_item("coeffs", m.coeffs.clone())?;
        out.append(d)?;
    }
    Ok(out)
}

/// Guided-mode field u(x, y) from the mode data returned by line_spectrum.
#[pyfunction]
fn reconstruct_field(
    k: f64,
    lam: f64,
    coeffs: Vec<(i64, Complex64)>,
    grid: Vec<(f64, f64)>,
) -> PyResult<Vec<Complex64>> {
    let mode = fiber_line::GuidedMode {
        lambda: lam,
        k,
        coeffs,
        residual: 0.0,
        multiplicity: 1,
        near_threshold: false,
        open_residual: 0.0,
    };
    fiber_line::reconstruct_field(&mode, &grid).map_err(value_err)
}

/// Both routes of the Hilbert-Schmidt norm identity at spectral point -a.
#[pyfunction]
#[pyo3(signature = (a, k=0.0, n_cut=2000))]
fn hs_norm_identity(a: f64, k: f64, n_cut: usize) -> PyResult<(f64, f64)> {
    let id = fiber_line::hs_norm_identity(a, k, n_cut).map_err(value_err)?;
    Ok((id.closed_form, id.kernel_quadrature))
}

/// Smallest singular values of the complexified boundary matrix at
/// mu = k + i eta for each probe height.
#[pyfunction]
#[pyo3(signature = (lam, k, delta, etas, coupling, n_modes=64))]
fn complexified_bound_probe(
    lam: f64,
    k: f64,
    delta: f64,
    etas: Vec<f64>,
    coupling: &PyCoupling,
    n_modes: usize,
) -> PyResult<Vec<(f64, f64)>> {
    let q = fiber_line::ComplexifiedQuery {
        lambda: lam,
        k,
        delta,
        etas,
    };
    fiber_line::complexified_bound_probe(&q, &coupling.inner, n_modes).map_err(value_err)
}

/// Sweep the line Brillouin zone and report bands and gaps. Returns a dict
/// with keys k, thresholds, spectra, union, gaps, converged.
#[pyfunction]
#[pyo3(signature = (coupling, k_count=201, n_modes=128, refine=false))]
fn line_bands<'py>(
    py: Python<'py>,
    coupling: &PyCoupling,
    k_count: usize,
    n_modes: usize,
    refine: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SweepConfig::line(coupling.inner.clone(), n_modes);
    let ks = band_sweep::line_grid(k_count);
    let swept = band_sweep::sweep(&cfg, &KSet::Line(ks)).map_err(value_err)?;
    let structure = if refine {
        band_sweep::refine(swept).map_err(value_err)?
    } else {
        swept.into_converged()
    };
    let report = band_sweep::detect_gaps(&structure).map_err(value_err)?;
    let d = PyDict::new(py);
    match &structure.kpoints {
        KSet::Line(v) => d.set_item("k", v.clone())?,
        KSet::Grating(_) => unreachable!("line sweep"),
    }
    d.set_item("thresholds", structure.thresholds.clone())?;
    let spectra = PyList::empty(py);
    for ki in 0..structure.kpoints.len() {
        let row: Vec<(f64, usize)> = structure.spectra[ki]
            .iter()
            .map(|p| (p.lambda, p.multiplicity))
            .collect();
        spectra.append(row)?;
    }
    d.set_item("spectra", spectra)?;
    d.set_item("union", report.union)?;
    d.set_item("gaps", report.gaps)?;
    d.set_item("converged", report.converged)?;
    Ok(d)
}

/// Run the numerical verification battery; returns (index, name, passed, detail) tuples.
#[pyfunction]
fn run_verify(py: Python<'_>) -> PyResult<Bound<'_, PyList>> {
    let out = PyList::empty(py);
    for r in leakywire::verify::run_all() {
        out.append((r.index, r.name, r.passed, r.detail))?;
    }
    Ok(out)
}

#[pymodule]
fn leakywire_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoupling>()?;
    m.add_class::<PyGratingContext>()?;
    m.add_function(wrap_pyfunction!(euler_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(varsigma, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k0, m)?)?;
    m.add_function(wrap_pyfunction!(k0_square_moment, m)?)?;
    m.add_function(wrap_pyfunction!(xi, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_line, m)?)?;
    m.add_function(wrap_pyfunction!(t_image, m)?)?;
    m.add_function(wrap_pyfunction!(t_renormalized, m)?)?;
    m.add_function(wrap_pyfunction!(t_eval, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_const, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_grating, m)?)?;
    m.add_function(wrap_pyfunction!(symbol_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(tj_norm, m)?)?;
    m.add_function(wrap_pyfunction!(psi_field, m)?)?;
    m.add_function(wrap_pyfunction!(line_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(embedded_kernel_search, m)?)?;
    m.add_function(wrap_pyfunction!(grating_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_field, m)?)?;
    m.add_function(wrap_pyfunction!(hs_norm_identity, m)?)?;
    m.add_function(wrap_pyfunction!(complexified_bound_probe, m)?)?;
    m.add_function(wrap_pyfunction!(line_bands, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
