//! Python bindings for `expweight-core`.
//!
//! Functions to approximate are passed as Python callables `f(x: float) -> float`.
//! The first exception raised by a callable is re-raised once the Rust call returns.

use std::cell::RefCell;
use std::sync::Arc;

use expweight_core::approx::{best_poly as core_best_poly, Norm, NormGrid};
use expweight_core::harness::{self, ExperimentConfig};
use expweight_core::mrs::MrsTable;
use expweight_core::operators::{self, BasisPoly};
use expweight_core::orthopoly::RecurrenceTable;
use expweight_core::weights::WeightSpec;
use expweight_core::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Adapts a Python callable to `Fn(f64) -> f64`, recording the first error.
struct Callback<'py> {
    f: Bound<'py, PyAny>,
    err: RefCell<Option<PyErr>>,
}

impl<'py> Callback<'py> {
    fn new(f: Bound<'py, PyAny>) -> Self {
        Callback { f, err: RefCell::new(None) }
    }

    fn call(&self, x: f64) -> f64 {
        if self.err.borrow().is_some() {
            return f64::NAN;
        }
        match self.f.call1((x,)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                *self.err.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    }

    fn finish<T>(self, r: expweight_core::Result<T>) -> PyResult<T> {
        if let Some(e) = self.err.into_inner() {
            return Err(e);
        }
        r.map_err(to_py)
    }
}

fn parse_norm(p: &str) -> PyResult<Norm> {
    p.parse().map_err(to_py)
}

/// Weight `w = exp(-Q)` with its MRS table.
#[pyclass(frozen, module = "expweight")]
struct Weight {
    mrs: Arc<MrsTable>,
}

impl Weight {
    fn wrap(spec: WeightSpec) -> Self {
        Weight { mrs: Arc::new(MrsTable::new(spec)) }
    }

    fn spec(&self) -> &WeightSpec {
        self.mrs.weight()
    }
}

#[pymethods]
impl Weight {
    /// `Q(x) = |x|^alpha`.
    #[staticmethod]
    fn freud(alpha: f64) -> PyResult<Self> {
        WeightSpec::freud(alpha).map(Weight::wrap).map_err(to_py)
    }

    /// `Q(x) = exp_l(|x|^alpha) - exp_l(0)` with `exp_0(u) = u` and a shift `u`.
    #[staticmethod]
    #[pyo3(signature = (u=0.0, alpha=2.0, l=1))]
    fn erdos(u: f64, alpha: f64, l: u32) -> PyResult<Self> {
        WeightSpec::erdos(u, alpha, l).map(Weight::wrap).map_err(to_py)
    }

    /// Parses the CLI syntax, e.g. `freud:4` or `erdos:0,2,1`.
    #[staticmethod]
    fn parse(s: &str) -> PyResult<Self> {
        WeightSpec::parse(s).map(Weight::wrap).map_err(to_py)
    }

    #[getter]
    fn label(&self) -> String {
        self.spec().label()
    }

    fn q(&self, x: f64) -> f64 {
        self.spec().q(x)
    }

    fn dq(&self, x: f64) -> f64 {
        self.spec().dq(x)
    }

    fn d2q(&self, x: f64) -> f64 {
        self.spec().d2q(x)
    }

    fn w(&self, x: f64) -> f64 {
        self.spec().w(x)
    }

    /// `T(x) = 1 + x Q''(x) / Q'(x)`.
    fn t(&self, x: f64) -> PyResult<f64> {
        self.spec().t(x).map_err(to_py)
    }

    /// MRS number `a_x`.
    fn a(&self, x: f64) -> PyResult<f64> {
        self.mrs.compute_a(x).map_err(to_py)
    }

    /// `T(a_x)`.
    fn t_at(&self, x: f64) -> PyResult<f64> {
        self.mrs.t_at(x).map_err(to_py)
    }

    /// `delta_x`.
    fn delta(&self, x: f64) -> PyResult<f64> {
        self.mrs.delta(x).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Weight({})", self.label())
    }
}

/// Orthonormal polynomials for `w^2` up to degree `n_max`.
#[pyclass(frozen, module = "expweight")]
struct Recurrence {
    rec: Arc<RecurrenceTable>,
}

#[pymethods]
impl Recurrence {
    #[new]
    #[pyo3(signature = (weight, n_max=40))]
    fn new(py: Python<'_>, weight: &Weight, n_max: usize) -> PyResult<Self> {
        let mrs = weight.mrs.clone();
        let rec = py.detach(|| RecurrenceTable::stieltjes(mrs, n_max)).map_err(to_py)?;
        Ok(Recurrence { rec: Arc::new(rec) })
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.rec.n_max()
    }

    /// `b_k`, with `x p_k = b_{k+1} p_{k+1} + b_k p_{k-1}`.
    fn b(&self, k: usize) -> PyResult<f64> {
        if k == 0 || k > self.rec.n_max() {
            return Err(PyValueError::new_err(format!("k must be in 1..={}", self.rec.n_max())));
        }
        Ok(self.rec.b(k))
    }

    /// `[p_0(x), ..., p_n(x)]`.
    fn eval(&self, n: usize, x: f64) -> PyResult<Vec<f64>> {
        self.check_degree(n)?;
        Ok(self.rec.eval_all(n, x))
    }

    /// `lambda_n(x)`.
    fn christoffel(&self, n: usize, x: f64) -> PyResult<f64> {
        if n == 0 || n > self.rec.n_max() + 1 {
            return Err(PyValueError::new_err(format!("n must be in 1..={}", self.rec.n_max() + 1)));
        }
        Ok(self.rec.christoffel(n, x))
    }

    /// Zeros of `p_n` (descending) and Christoffel numbers.
    fn gauss(&self, n: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let g = self.rec.gauss_data(n).map_err(to_py)?;
        Ok((g.zeros, g.lambdas))
    }

    fn __repr__(&self) -> String {
        format!("Recurrence({}, n_max={})", self.rec.weight().label(), self.rec.n_max())
    }
}

impl Recurrence {
    fn check_degree(&self, n: usize) -> PyResult<()> {
        if n > self.rec.n_max() {
            return Err(PyValueError::new_err(format!("degree {n} above table maximum {}", self.rec.n_max())));
        }
        Ok(())
    }
}

/// `sum_k c_k p_k`.
#[pyclass(frozen, module = "expweight")]
struct Poly {
    inner: BasisPoly,
}

#[pymethods]
impl Poly {
    #[new]
    fn new(rec: &Recurrence, coeffs: Vec<f64>) -> PyResult<Self> {
        BasisPoly::new(rec.rec.clone(), coeffs).map(|inner| Poly { inner }).map_err(to_py)
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    /// `P^(order)(x)`.
    #[pyo3(signature = (x, order=1))]
    fn derivative(&self, x: f64, order: usize) -> f64 {
        self.inner.derivative_at(x, order)
    }

    /// `P(x) w(x)`.
    fn weighted(&self, x: f64) -> f64 {
        self.inner.eval_weighted(x)
    }

    fn __repr__(&self) -> String {
        format!("Poly(degree <= {})", self.inner.degree_bound())
    }
}

/// `s_n(f)`, the partial orthogonal expansion of degree `n - 1`.
#[pyfunction]
fn partial_sum(rec: &Recurrence, f: Bound<'_, PyAny>, n: usize) -> PyResult<Poly> {
    let cb = Callback::new(f);
    let r = operators::partial_sum(&rec.rec, |x| cb.call(x), n);
    cb.finish(r).map(|inner| Poly { inner })
}

/// de la Vallee Poussin mean `v_n(f)` of degree `2n - 1`.
#[pyfunction]
fn vallee_poussin(rec: &Recurrence, f: Bound<'_, PyAny>, n: usize) -> PyResult<Poly> {
    let cb = Callback::new(f);
    let r = operators::vallee_poussin(&rec.rec, |x| cb.call(x), n);
    cb.finish(r).map(|inner| Poly { inner })
}

/// Coefficients of `v_n` from expansion coefficients `b_0..b_{2n-1}`.
#[pyfunction]
fn vp_coeffs(b: Vec<f64>, n: usize) -> PyResult<Vec<f64>> {
    if b.len() < 2 * n {
        return Err(PyValueError::new_err(format!("need {} coefficients, got {}", 2 * n, b.len())));
    }
    Ok(operators::vp_coeffs(&b, n))
}

/// Best approximation of degree `n` in the weighted `p` norm (`"1"`, `"2"` or `"inf"`).
///
/// Returns `(error, poly, info)` with `info` holding the solver flags.
#[pyfunction]
#[pyo3(signature = (rec, f, n, p="2"))]
fn best_poly<'py>(
    py: Python<'py>,
    rec: &Recurrence,
    f: Bound<'py, PyAny>,
    n: usize,
    p: &str,
) -> PyResult<(f64, Poly, Bound<'py, pyo3::types::PyDict>)> {
    let norm = parse_norm(p)?;
    let grid = NormGrid::new(&rec.rec, n).map_err(to_py)?;
    let cb = Callback::new(f);
    let r = core_best_poly(&rec.rec, |x| cb.call(x), norm, n, &grid);
    let b = cb.finish(r)?;
    let info = pyo3::types::PyDict::new(py);
    info.set_item("certificate", b.certificate)?;
    info.set_item("iterations", b.iterations)?;
    info.set_item("exact", b.exact)?;
    info.set_item("tail_flag", b.tail_flag)?;
    info.set_item("noise_limited", b.noise_limited)?;
    info.set_item("polished", b.polished)?;
    Ok((b.error, Poly { inner: b.poly }, info))
}

/// Runs the verification harness on a JSON config (defaults when omitted).
///
/// Returns the report as JSON. Artifacts are written when the config sets `output_dir`.
#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn verify(py: Python<'_>, config_json: Option<&str>) -> PyResult<String> {
    let cfg = match config_json {
        Some(text) => ExperimentConfig::from_json(text).map_err(to_py)?,
        None => ExperimentConfig::default(),
    };
    let (rep, _) = py.detach(|| harness::run_and_write(&cfg)).map_err(to_py)?;
    serde_json::to_string(&rep).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Runs the command line with `args` (without the program name) and returns the exit code.
#[pyfunction]
fn cli_main(py: Python<'_>, args: Vec<String>) -> i32 {
    let argv: Vec<String> = std::iter::once("expweight".to_string()).chain(args).collect();
    py.detach(|| expweight_core::cli::cli_main(argv))
}

#[pymodule]
fn expweight(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CODE_VERSION", harness::CODE_VERSION)?;
    m.add_class::<Weight>()?;
    m.add_class::<Recurrence>()?;
    m.add_class::<Poly>()?;
    m.add_function(wrap_pyfunction!(partial_sum, m)?)?;
    m.add_function(wrap_pyfunction!(vallee_poussin, m)?)?;
    m.add_function(wrap_pyfunction!(vp_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(best_poly, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(cli_main, m)?)?;
    Ok(())
}
