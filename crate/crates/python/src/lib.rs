//! Python bindings. Structured results come back as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use stormctl_core::agents::{offline, AgentConfig};
use stormctl_core::datasets::{bundled_scenario, Dataset, BUNDLED_SCENARIOS};
use stormctl_core::io::write_sim_outputs;
use stormctl_core::metrics;
use stormctl_core::model::{fit_model, PtrModelParams, TracePoint, DEFAULT_STEP_MS};
use stormctl_core::sim::{run_with, RunOptions, Scenario};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(value).map_err(value_err)?)
}

fn points(raw: Vec<(f64, f64)>) -> Vec<TracePoint> {
    raw.into_iter().map(|(t, c)| TracePoint::new(t, c)).collect()
}

fn pairs(points: impl IntoIterator<Item = TracePoint>) -> Vec<(f64, f64)> {
    points.into_iter().map(|p| (p.t, p.count)).collect()
}

/// Growth model `P(t) = a·t + b·t·e^(m·t)` built from `(p_start, p_end, m)`.
#[pyclass(name = "PtrModel", frozen)]
struct PyPtrModel(PtrModelParams);

#[pymethods]
impl PyPtrModel {
    #[new]
    fn new(p_start: f64, p_end: f64, m: f64) -> PyResult<Self> {
        PtrModelParams::new(p_start, p_end, m).map(Self).map_err(value_err)
    }

    #[getter]
    fn p_start(&self) -> f64 {
        self.0.p_start()
    }

    #[getter]
    fn p_end(&self) -> f64 {
        self.0.p_end()
    }

    #[getter]
    fn m(&self) -> f64 {
        self.0.m()
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }

    fn eval(&self, t: f64) -> PyResult<f64> {
        self.0.eval(t).map_err(value_err)
    }

    /// `(t, value)` pairs from `t_start` to `t_end`, clamped at `p_end`.
    #[pyo3(signature = (t_start, t_end, step = DEFAULT_STEP_MS))]
    fn build_array(&self, t_start: f64, t_end: f64, step: f64) -> PyResult<Vec<(f64, f64)>> {
        let array = self.0.build_array(t_start, t_end, step).map_err(value_err)?;
        Ok(pairs(array.points()))
    }

    fn __repr__(&self) -> String {
        format!(
            "PtrModel(p_start={}, p_end={}, m={})",
            self.0.p_start(),
            self.0.p_end(),
            self.0.m()
        )
    }
}

/// Fits the model to the rise of `trace`. Returns `(model, rmse)`.
#[pyfunction]
fn fit(trace: Vec<(f64, f64)>) -> PyResult<(PyPtrModel, f64)> {
    let result = fit_model(&points(trace)).map_err(value_err)?;
    Ok((PyPtrModel(result.params), result.rmse))
}

/// Minimum inter-packet gap in ns at `link_rate` bits per second.
#[pyfunction]
fn min_ipg(link_rate: u64) -> PyResult<f64> {
    metrics::min_ipg(link_rate).map_err(value_err)
}

/// Utilization fraction and band (`idle`, `normal`, `storm`).
#[pyfunction]
fn utilization<'py>(py: Python<'py>, current: f64, max_capacity: f64) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &metrics::utilization(current, max_capacity).map_err(value_err)?)
}

/// IPIDs seen at least `k` times within `window_ms`.
#[pyfunction]
fn detect_ipid_loop(observations: Vec<(u32, f64)>, k: usize, window_ms: f64) -> PyResult<Vec<u32>> {
    Ok(metrics::detect_ipid_loop(&observations, k, window_ms)
        .map_err(value_err)?
        .offenders)
}

/// Bundled dataset as `(t_ms, count)` pairs.
#[pyfunction]
fn dataset(name: &str) -> PyResult<Vec<(f64, f64)>> {
    let d: Dataset = name.parse().map_err(value_err)?;
    Ok(pairs(d.points()))
}

#[pyfunction]
fn scenarios() -> Vec<&'static str> {
    BUNDLED_SCENARIOS.iter().map(|(n, _)| *n).collect()
}

/// Calibrates one agent on `reference` and replays `trace` through it.
#[pyfunction]
#[pyo3(signature = (trace, reference, config_json = None))]
fn detect<'py>(
    py: Python<'py>,
    trace: Vec<(f64, f64)>,
    reference: Vec<(f64, f64)>,
    config_json: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = match config_json {
        Some(text) => serde_json::from_str::<AgentConfig>(text).map_err(value_err)?,
        None => AgentConfig::default(),
    };
    let report = offline::detect(&points(trace), &points(reference), &config).map_err(value_err)?;
    let dict = PyDict::new(py);
    dict.set_item("storm_found", report.storm_found())?;
    dict.set_item("step_ms", report.step)?;
    dict.set_item("comparisons", serialize(py, &report.comparisons)?)?;
    dict.set_item("tickets", serialize(py, &report.tickets)?)?;
    Ok(dict.into_any())
}

/// Runs a scenario (bundled name or JSON text) and returns its summary.
/// With `out_dir` the trace, tickets and summary files are written too.
#[pyfunction]
#[pyo3(signature = (scenario, agents = true, seed = None, out_dir = None, plot = false))]
fn simulate<'py>(
    py: Python<'py>,
    scenario: &str,
    agents: bool,
    seed: Option<u64>,
    out_dir: Option<std::path::PathBuf>,
    plot: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let mut s = match bundled_scenario(scenario) {
        Some(s) => s,
        None => Scenario::from_json(scenario).map_err(value_err)?,
    };
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let options = RunOptions {
        agents,
        ..RunOptions::default()
    };
    let trace = py.detach(|| run_with(&s, options)).map_err(value_err)?;
    if let Some(dir) = out_dir {
        write_sim_outputs(&dir, &trace, plot).map_err(value_err)?;
    }
    serialize(py, &trace.summary())
}

#[pymodule]
fn stormctl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPtrModel>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(min_ipg, m)?)?;
    m.add_function(wrap_pyfunction!(utilization, m)?)?;
    m.add_function(wrap_pyfunction!(detect_ipid_loop, m)?)?;
    m.add_function(wrap_pyfunction!(dataset, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
