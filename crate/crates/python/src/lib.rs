//! Python bindings: the model, the marginal laws, the processes and the
//! experiment runner of `lrdq`.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyTuple};

use lrdq::cli::{parse_config, simulate_path, RunConfig};
use lrdq::experiments::{self as ex, ExperimentReport};
use lrdq::lrd::{CoefficientSpec, SecondOrder};
use lrdq::marginals as mg;
use lrdq::processes::{self as pr, SampleContext};

fn err(e: lrdq::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Renders a Python value in the `key=value` syntax of the configuration parser.
fn config_value(v: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(b) = v.extract::<bool>() {
        return Ok(b.to_string());
    }
    if v.is_instance_of::<PyList>() || v.is_instance_of::<PyTuple>() {
        let items: Vec<String> = v
            .try_iter()?
            .map(|x| x.and_then(|x| config_value(&x)))
            .collect::<PyResult<_>>()?;
        return Ok(items.join(","));
    }
    Ok(v.str()?.to_string())
}

fn run_config(command: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<RunConfig> {
    let mut pairs = vec![("command".to_string(), command.to_string())];
    if let Some(d) = params {
        for (k, v) in d.iter() {
            pairs.push((k.extract::<String>()?, config_value(&v)?));
        }
    }
    parse_config(&pairs).map_err(err)
}

/// Second-order structure of the linear process with coefficients
/// `c_k = k^{-beta}` (optionally normalised to unit sum of squares).
#[pyclass(name = "LrdModel", frozen)]
struct PyLrdModel {
    inner: SecondOrder,
}

#[pymethods]
impl PyLrdModel {
    #[new]
    #[pyo3(signature = (beta, normalized = true, max_lag = None, innovation_variance = 1.0))]
    fn new(
        beta: f64,
        normalized: bool,
        max_lag: Option<u64>,
        innovation_variance: f64,
    ) -> PyResult<Self> {
        let spec = CoefficientSpec::new(beta)
            .map_err(err)?
            .normalized(normalized)
            .with_max_lag(max_lag);
        Ok(PyLrdModel {
            inner: SecondOrder::from_spec(spec, innovation_variance).map_err(err)?,
        })
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    #[getter]
    fn truncation_k(&self) -> u64 {
        self.inner.sequence().k_max()
    }

    fn coefficient(&self, k: u64) -> f64 {
        self.inner.sequence().value(k)
    }

    fn rho(&self, k: u64) -> f64 {
        self.inner.rho(k)
    }

    fn marginal_variance(&self) -> f64 {
        self.inner.marginal_variance()
    }

    fn sigma2_n1(&self, n: u64) -> f64 {
        self.inner.sigma2_n1(n)
    }

    fn covariance_limit(&self) -> f64 {
        self.inner.covariance_limit()
    }
}

/// A marginal law `F` with density `f` and quantile `Q`.
#[pyclass(name = "Marginal", frozen)]
struct PyMarginal {
    inner: Arc<dyn mg::Marginal>,
}

#[pymethods]
impl PyMarginal {
    #[staticmethod]
    #[pyo3(signature = (variance = 1.0))]
    fn gaussian(variance: f64) -> PyResult<Self> {
        Ok(PyMarginal {
            inner: Arc::new(mg::Gaussian::new(variance).map_err(err)?),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (scale = 1.0))]
    fn logistic(scale: f64) -> PyResult<Self> {
        Ok(PyMarginal {
            inner: Arc::new(mg::Logistic::new(scale).map_err(err)?),
        })
    }

    #[staticmethod]
    fn exponential() -> Self {
        PyMarginal {
            inner: Arc::new(mg::Exponential),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (alpha, width = 1.0))]
    fn pareto(alpha: f64, width: f64) -> PyResult<Self> {
        Ok(PyMarginal {
            inner: Arc::new(mg::SmoothedPareto::new(alpha, width).map_err(err)?),
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x)
    }

    fn quantile(&self, y: f64) -> f64 {
        self.inner.quantile(y)
    }

    fn density_quantile(&self, y: f64) -> f64 {
        self.inner.density_quantile(y)
    }

    fn fprime_at_q(&self, y: f64) -> f64 {
        self.inner.fprime_at_q(y)
    }

    /// `(gamma1, gamma2)` tail exponents of `f(Q(y))`.
    fn tail_exponents(&self) -> (f64, f64) {
        let t = self.inner.tail_exponents();
        (t.gamma1, t.gamma2)
    }

    fn __repr__(&self) -> String {
        format!("Marginal({})", self.inner.name())
    }
}

/// Result of one experiment run.
#[pyclass(name = "Report", frozen)]
struct PyReport {
    inner: ExperimentReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn experiment(&self) -> String {
        self.inner.experiment.clone()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed()
    }

    /// `(name, passed, detail)` for every acceptance check.
    #[getter]
    fn checks(&self) -> Vec<(String, bool, String)> {
        self.inner
            .checks
            .iter()
            .map(|c| (c.name.clone(), c.passed, c.detail.clone()))
            .collect()
    }

    fn rep_values(&self, statistic: &str, n: usize) -> Vec<f64> {
        self.inner.rep_values(statistic, n)
    }

    #[pyo3(signature = (statistic, n = None, label = "median"))]
    fn aggregate(&self, statistic: &str, n: Option<usize>, label: &str) -> Option<f64> {
        self.inner.aggregate(statistic, n, label)
    }

    /// `(slope, intercept, bootstrap_se)` of the log-log fit, if any.
    fn slope(&self, statistic: &str) -> Option<(f64, f64, f64)> {
        self.inner
            .slope(statistic)
            .map(|s| (s.fit.slope, s.fit.intercept, s.fit.bootstrap_se))
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn summary(&self) -> String {
        self.inner.summary()
    }
}

/// Runs a named experiment; keyword arguments use the configuration keys
/// (`beta=0.7, n_grid=[1024, 2048], reps=100, ...`).
#[pyfunction]
#[pyo3(signature = (name, **params))]
fn run_experiment(
    py: Python<'_>,
    name: &str,
    params: Option<&Bound<'_, PyDict>>,
) -> PyResult<PyReport> {
    let run = run_config(name, params)?;
    let report = py
        .detach(|| ex::run_experiment(&run.command, &run.config))
        .map_err(err)?;
    Ok(PyReport { inner: report })
}

/// One path `X_1..X_n`; keyword arguments as for `run_experiment`.
#[pyfunction]
#[pyo3(signature = (n, **params))]
fn simulate(py: Python<'_>, n: usize, params: Option<&Bound<'_, PyDict>>) -> PyResult<Vec<f64>> {
    let run = run_config("simulate", params)?;
    py.detach(|| simulate_path(&run.config, n))
        .map(|p| p.x)
        .map_err(err)
}

/// Sample processes of `x` on the points `ys`, normalised by `sigma`:
/// a dict with keys `u`, `alpha`, `q`, `bk_uniform`, `bk_general`.
#[pyfunction]
fn sample_processes<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    marginal: &PyMarginal,
    sigma: f64,
    ys: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let ctx = SampleContext::new(&x, marginal.inner.as_ref(), sigma).map_err(err)?;
    for &y in &ys {
        if !(y > 0.0 && y <= 1.0) {
            return Err(err(lrdq::Error::QuantileDomain(y)));
        }
    }
    let out = PyDict::new(py);
    let eval = |f: &dyn Fn(f64) -> f64| ys.iter().map(|&y| f(y)).collect::<Vec<f64>>();
    out.set_item("u", eval(&|y| ctx.u(y)))?;
    out.set_item("alpha", eval(&|y| ctx.alpha(y)))?;
    out.set_item("q", eval(&|y| ctx.q(y)))?;
    out.set_item("bk_uniform", eval(&|y| ctx.bk_uniform(y)))?;
    out.set_item("bk_general", eval(&|y| ctx.bk_general(y)))?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (beta, p = 1))]
fn c_beta_p(beta: f64, p: u32) -> PyResult<f64> {
    pr::c_beta_p(beta, p).map_err(err)
}

/// Rate sequences `a_n, b_n, c_n, d_np, b_np, delta_n` for `L = 1`.
#[pyfunction]
#[pyo3(signature = (n, beta, p = 2))]
fn rate_constants<'py>(py: Python<'py>, n: f64, beta: f64, p: u32) -> PyResult<Bound<'py, PyDict>> {
    let r = pr::rate_constants(n, beta, Default::default(), p).map_err(err)?;
    let out = PyDict::new(py);
    for (k, v) in [
        ("a_n", r.a_n),
        ("b_n", r.b_n),
        ("c_n", r.c_n),
        ("d_np", r.d_np),
        ("b_np", r.b_np),
        ("delta_n", r.delta_n),
    ] {
        out.set_item(k, v)?;
    }
    Ok(out)
}

/// `(c_nu, z_alpha)` of the simultaneous quantile band.
#[pyfunction]
fn band_constants(nu: f64, alpha_level: f64) -> PyResult<(f64, f64)> {
    ex::band_constants(nu, alpha_level).map_err(err)
}

/// CDF of `a Z^2` at `t`.
#[pyfunction]
fn weak_limit_cdf(t: f64, a: f64) -> PyResult<f64> {
    ex::weak_limit_cdf(t, a).map_err(err)
}

#[pymodule]
#[pyo3(name = "lrdq")]
fn lrdq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLrdModel>()?;
    m.add_class::<PyMarginal>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sample_processes, m)?)?;
    m.add_function(wrap_pyfunction!(c_beta_p, m)?)?;
    m.add_function(wrap_pyfunction!(rate_constants, m)?)?;
    m.add_function(wrap_pyfunction!(band_constants, m)?)?;
    m.add_function(wrap_pyfunction!(weak_limit_cdf, m)?)?;
    m.add("EXPERIMENTS", ex::EXPERIMENTS.to_vec())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
