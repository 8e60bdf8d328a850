//! Python module `stdw_py`: models, domain generators, schedules and the
//! adaptation methods of the `stdw` crate.

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use stdw::data::{gen_intensity_shift, gen_rotating_moons, DomainSequence};
use stdw::engine::{self, AdaptConfig, AdaptTrace, Method};
use stdw::harness::{self, ExperimentConfig};
use stdw::metrics::evaluate;
use stdw::nn::{init_model, Model};
use stdw::schedule::{build_pair_plan, make_rho_schedule, ScheduleKind};
use stdw::{Error, Tensor2};

fn to_py(err: Error) -> PyErr {
    match err.category() {
        "io" => PyOSError::new_err(err.to_string()),
        "numeric" => PyArithmeticError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn tensor(rows: Vec<Vec<f64>>) -> PyResult<Tensor2> {
    Tensor2::from_rows(&rows).map_err(to_py)
}

fn nested(t: &Tensor2) -> Vec<Vec<f64>> {
    t.iter_rows().map(<[f64]>::to_vec).collect()
}

/// Dense ReLU network with a linear output layer.
#[pyclass(name = "Model", module = "stdw_py")]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    /// `arch` lists the input width then hidden widths; `class_count` is the output width.
    #[new]
    #[pyo3(signature = (arch, class_count, seed = 0))]
    fn new(arch: Vec<usize>, class_count: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: init_model(&arch, class_count, seed).map_err(to_py)?,
        })
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    fn params(&self) -> Vec<f64> {
        self.inner.params()
    }

    /// Logits for a list of feature rows.
    fn forward(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let out = self.inner.forward(&tensor(rows)?).map_err(to_py)?;
        Ok(nested(&out))
    }

    /// Argmax class per row.
    fn predict(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        let (labels, _) =
            stdw::pseudo_label::hard_label(&self.inner, &tensor(rows)?).map_err(to_py)?;
        Ok(labels)
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_bytes())
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self {
            inner: Model::from_bytes(data).map_err(to_py)?,
        })
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: Model::load(path).map_err(to_py)?,
        })
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(input_dim={}, class_count={}, params={})",
            self.inner.input_dim(),
            self.inner.class_count(),
            self.inner.param_count()
        )
    }
}

/// Source domain (labeled), intermediates and target, each with an eval split.
#[pyclass(name = "DomainSequence", module = "stdw_py", frozen)]
struct PySequence {
    inner: DomainSequence,
}

#[pymethods]
impl PySequence {
    /// Index of the target domain.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    fn shift_params(&self) -> Vec<f64> {
        self.inner.shift_params()
    }

    /// Training features of domain `t`.
    fn features(&self, t: usize) -> PyResult<Vec<Vec<f64>>> {
        self.check(t)?;
        Ok(nested(self.inner.domain(t).features()))
    }

    /// Training labels of domain `t` (`None` for unlabeled samples).
    fn labels(&self, t: usize) -> PyResult<Vec<Option<usize>>> {
        self.check(t)?;
        Ok(self
            .inner
            .domain(t)
            .samples()
            .iter()
            .map(|s| s.label)
            .collect())
    }

    /// Eval split of domain `t` as `(features, labels)`.
    fn eval_split(&self, t: usize) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
        self.check(t)?;
        let split = self.inner.eval(t);
        Ok((nested(&split.features), split.labels.clone()))
    }

    fn __len__(&self) -> usize {
        self.inner.n() + 1
    }
}

impl PySequence {
    fn check(&self, t: usize) -> PyResult<()> {
        if t > self.inner.n() {
            return Err(PyValueError::new_err(format!(
                "domain {t} out of range 0..={}",
                self.inner.n()
            )));
        }
        Ok(())
    }
}

/// Per-step losses and per-domain accuracy of one adaptation run.
#[pyclass(name = "Trace", module = "stdw_py", frozen)]
struct PyTrace {
    inner: AdaptTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn domain_accuracy(&self) -> Vec<f64> {
        self.inner.domain_accuracy.clone()
    }

    #[getter]
    fn target_accuracy(&self) -> f64 {
        self.inner.target_accuracy()
    }

    #[getter]
    fn rhos(&self) -> Vec<f64> {
        self.inner.steps.iter().map(|s| s.rho).collect()
    }

    /// `(mixed, left, right)` loss per optimizer step.
    fn losses(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .steps
            .iter()
            .map(|s| (s.loss_mixed, s.loss_left, s.loss_right))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.steps.len()
    }
}

#[pyfunction]
#[pyo3(signature = (n_domains, angle_start, angle_end, samples_per_domain = 500, noise_sd = 0.05, seed = 1))]
fn rotating_moons(
    n_domains: usize,
    angle_start: f64,
    angle_end: f64,
    samples_per_domain: usize,
    noise_sd: f64,
    seed: u64,
) -> PyResult<PySequence> {
    let inner = gen_rotating_moons(
        n_domains,
        angle_start,
        angle_end,
        samples_per_domain,
        noise_sd,
        seed,
    )
    .map_err(to_py)?;
    Ok(PySequence { inner })
}

#[pyfunction]
#[pyo3(signature = (n_domains, offset_start, offset_end, samples_per_domain = 500, seed = 1))]
fn intensity_shift(
    n_domains: usize,
    offset_start: f64,
    offset_end: f64,
    samples_per_domain: usize,
    seed: u64,
) -> PyResult<PySequence> {
    let inner = gen_intensity_shift(
        n_domains,
        offset_start,
        offset_end,
        samples_per_domain,
        seed,
    )
    .map_err(to_py)?;
    Ok(PySequence { inner })
}

/// 1-based `(left, right)` batch indices for `length` matched steps.
#[pyfunction]
fn pair_plan(n: usize, m: usize, length: usize) -> PyResult<Vec<(usize, usize)>> {
    Ok(build_pair_plan(n, m, length).map_err(to_py)?.pairs)
}

/// ρ value for each of the `steps + 1` stages.
#[pyfunction]
#[pyo3(signature = (kind, steps, seed = 0, fixed_value = 0.5))]
fn rho_schedule(kind: &str, steps: usize, seed: u64, fixed_value: f64) -> PyResult<Vec<f64>> {
    let kind: ScheduleKind = kind.parse().map_err(to_py)?;
    Ok(make_rho_schedule(kind, steps, seed, fixed_value)
        .map_err(to_py)?
        .values)
}

/// Pre-trains on the source, then adapts with `method` (stdw, gst or direct).
#[pyfunction]
#[pyo3(signature = (
    method, seq, *, steps = 4, epochs = 2, pretrain_epochs = 40, batch_size = 64,
    hidden = vec![64, 64], learning_rate = 0.005, schedule = "equal", fixed_value = 0.5,
    seed = 1, gst_drop_fraction = 0.1
))]
#[allow(clippy::too_many_arguments)]
fn adapt(
    py: Python<'_>,
    method: &str,
    seq: &PySequence,
    steps: usize,
    epochs: usize,
    pretrain_epochs: usize,
    batch_size: usize,
    hidden: Vec<usize>,
    learning_rate: f64,
    schedule: &str,
    fixed_value: f64,
    seed: u64,
    gst_drop_fraction: f64,
) -> PyResult<(PyModel, PyTrace)> {
    let method: Method = method.parse().map_err(to_py)?;
    let mut cfg = AdaptConfig {
        steps,
        epochs,
        pretrain_epochs,
        batch_size,
        hidden,
        schedule: schedule.parse().map_err(to_py)?,
        fixed_value,
        seed,
        gst_drop_fraction,
        ..AdaptConfig::default()
    };
    cfg.optimizer.learning_rate = learning_rate;
    let (model, trace) = py
        .detach(|| engine::adapt(method, &seq.inner, &cfg))
        .map_err(to_py)?;
    Ok((PyModel { inner: model }, PyTrace { inner: trace }))
}

/// `(accuracy, error_rate)` of `model` on domain `t`'s eval split.
#[pyfunction]
fn evaluate_domain(model: &PyModel, seq: &PySequence, t: usize) -> PyResult<(f64, f64)> {
    seq.check(t)?;
    let acc = evaluate(&model.inner, seq.inner.eval(t)).map_err(to_py)?;
    Ok((acc.accuracy, acc.error_rate))
}

/// `(violations, v_trace)` for gradient descent on a random quadratic.
#[pyfunction]
fn lyapunov_check(
    dim: usize,
    mu: f64,
    l: f64,
    eta: f64,
    steps: usize,
    seed: u64,
) -> PyResult<(usize, Vec<f64>)> {
    let out = engine::lyapunov_check(dim, mu, l, eta, steps, seed).map_err(to_py)?;
    Ok((out.violations, out.v_trace))
}

/// Runs a TOML experiment config and writes its files; returns the report as JSON text.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_toml: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_toml(config_toml).map_err(to_py)?;
    let report = py.detach(|| harness::run_experiment(&cfg)).map_err(to_py)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn stdw_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PySequence>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(rotating_moons, m)?)?;
    m.add_function(wrap_pyfunction!(intensity_shift, m)?)?;
    m.add_function(wrap_pyfunction!(pair_plan, m)?)?;
    m.add_function(wrap_pyfunction!(rho_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(adapt, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_domain, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
