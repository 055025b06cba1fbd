//! Python bindings.
//!
//! Structured results (stretch reports, bounds, traces, summaries) cross the
//! boundary as the same JSON documents the CLI writes, decoded into Python
//! dicts and lists.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::de::DeserializeOwned;
use serde::Serialize;

use stretchlab::bounds::{self, BoundInputs, PExpression};
use stretchlab::constructs::{self, ThreePhaseTrace};
use stretchlab::geom::{self, Point, Prop1Regime};
use stretchlab::harness::{self, ExperimentSpec};
use stretchlab::stretch;
use stretchlab::{EmbeddedGraph, Error, ModelParams};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Csv(_) => PyIOError::new_err(e.to_string()),
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| py_err(e.into()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Accepts a JSON string or any JSON-serializable Python object.
fn from_py<T: DeserializeOwned>(py: Python<'_>, value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if value.is_instance_of::<PyString>() {
        value.extract()?
    } else {
        py.import("json")?.call_method1("dumps", (value,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn point(x: f64, y: f64) -> PyResult<Point> {
    Point::new(x, y).map_err(py_err)
}

/// An embedded random graph: points in the unit square and Euclidean-weighted edges.
#[pyclass(name = "Graph", frozen, module = "pystretchlab")]
struct PyGraph {
    inner: EmbeddedGraph,
}

#[pymethods]
impl PyGraph {
    /// Samples a graph with `n` uniform points and edge probability `p`.
    #[staticmethod]
    fn generate(n: usize, p: f64, seed: u64) -> PyResult<Self> {
        let params = ModelParams::new(n, p, seed).map_err(py_err)?;
        let inner = EmbeddedGraph::generate(params).map_err(py_err)?;
        Ok(PyGraph { inner })
    }

    /// Builds a graph from explicit points and edges.
    #[staticmethod]
    #[pyo3(signature = (points, edges, p = 0.5, seed = 0))]
    fn from_parts(points: Vec<(f64, f64)>, edges: Vec<(usize, usize)>, p: f64, seed: u64) -> PyResult<Self> {
        let pts = points.into_iter().map(|(x, y)| point(x, y)).collect::<PyResult<Vec<_>>>()?;
        let params = ModelParams::new(pts.len(), p, seed).map_err(py_err)?;
        let inner = EmbeddedGraph::from_parts(params, pts, edges).map_err(py_err)?;
        Ok(PyGraph { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = EmbeddedGraph::from_json(text).map_err(py_err)?;
        Ok(PyGraph { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.params().p
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.params().seed
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.inner.points().iter().map(|q| (q.x, q.y)).collect()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Shortest-path distances from `source`; unreachable vertices give `inf`.
    fn shortest_paths(&self, source: usize) -> PyResult<Vec<f64>> {
        stretch::sssp(&self.inner, source).map_err(py_err)
    }

    /// The stretch factor as a dict with keys `stretch`, `defined`, `pair`,
    /// `d_graph` and `d_euclid`.
    fn stretch_factor(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let report = py.detach(|| stretch::stretch_factor(&self.inner)).map_err(py_err)?;
        to_py(py, &report)
    }

    /// The stretch factor by Floyd–Warshall, for cross-checking small graphs.
    fn oracle_stretch(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let report = stretch::oracle_stretch(&self.inner).map_err(py_err)?;
        to_py(py, &report)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        let params = self.inner.params();
        format!(
            "Graph(n={}, p={}, seed={}, edges={})",
            params.n,
            params.p,
            params.seed,
            self.inner.edge_count()
        )
    }
}

/// Area of the disc of radius `r` about `(x, y)` clipped to the unit square.
#[pyfunction]
fn disc_square_area(x: f64, y: f64, r: f64) -> PyResult<f64> {
    geom::disc_square_area(point(x, y)?, r).map_err(py_err)
}

/// Lower bound on a clipped disc's area; `regime` is `"half"` or `"sqrt2"`.
#[pyfunction]
#[pyo3(signature = (r, regime = "half"))]
fn prop1_lower_bound(r: f64, regime: &str) -> PyResult<f64> {
    let regime = match regime {
        "half" => Prop1Regime::Half,
        "sqrt2" => Prop1Regime::Sqrt2,
        other => return Err(PyValueError::new_err(format!("unknown regime {other:?}"))),
    };
    geom::prop1_lower_bound(r, regime).map_err(py_err)
}

#[pyfunction]
fn thm1_threshold(n: usize, p: f64, w: f64) -> PyResult<f64> {
    bounds::thm1_threshold(n, p, w).map_err(py_err)
}

#[pyfunction]
fn thm2_aas_bound(py: Python<'_>, n: usize, p: f64, w: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &bounds::thm2_aas_bound(n, p, w).map_err(py_err)?)
}

#[pyfunction]
fn thm2_expectation_bound(py: Python<'_>, n: usize, p: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &bounds::thm2_expectation_bound(n, p).map_err(py_err)?)
}

#[pyfunction]
fn lemma4_bound(py: Python<'_>, n: usize, p: f64, lam: f64, c: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &bounds::lemma4_bound(n, p, lam, c).map_err(py_err)?)
}

#[pyfunction]
fn lemma5_bound(n: usize, p: f64, lam: f64) -> PyResult<f64> {
    bounds::lemma5_bound(n, p, lam).map_err(py_err)
}

#[pyfunction]
fn nice_probability_lower_bound(p: f64, lam: f64) -> PyResult<f64> {
    bounds::nice_probability_lower_bound(p, lam).map_err(py_err)
}

/// Every bound at one point; `w` defaults to `ln n`.
#[pyfunction]
#[pyo3(signature = (n, p, lam, w = None, c = None, p_expr = None))]
fn evaluate_bounds(
    py: Python<'_>,
    n: usize,
    p: f64,
    lam: f64,
    w: Option<f64>,
    c: Option<f64>,
    p_expr: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let expr = p_expr.map(str::parse::<PExpression>).transpose().map_err(py_err)?;
    let inputs = BoundInputs {
        n,
        p,
        lambda: lam,
        w: w.unwrap_or_else(|| (n as f64).ln()),
        c,
    };
    to_py(py, &bounds::evaluate_all(inputs, expr.as_ref()).map_err(py_err)?)
}

/// `"BOUNDED"`, `"CRITICAL"` or `"UNBOUNDED"` for a p-expression such as `"one_minus_pow(2,1)"`.
#[pyfunction]
fn regime_classify(p_expr: &str) -> PyResult<String> {
    let expr: PExpression = p_expr.parse().map_err(py_err)?;
    Ok(bounds::regime_classify(&expr).map_err(py_err)?.to_string())
}

/// Evaluates a p-expression at `n`.
#[pyfunction]
fn eval_p(p_expr: &str, n: usize) -> PyResult<f64> {
    let expr: PExpression = p_expr.parse().map_err(py_err)?;
    expr.eval(n).map_err(py_err)
}

#[pyfunction]
fn pick_c(n: usize) -> PyResult<f64> {
    constructs::pick_c(n).map_err(py_err)
}

/// Runs the three-phase generator. Returns `(trace, graph)`, where `graph` is
/// `None` when the first stage fails the conditioning event.
#[pyfunction]
#[pyo3(signature = (n, p, lam, seed, c = None))]
fn three_phase(
    py: Python<'_>,
    n: usize,
    p: f64,
    lam: f64,
    seed: u64,
    c: Option<f64>,
) -> PyResult<(Py<PyAny>, Option<PyGraph>)> {
    let choice = constructs::resolve_c(n, c).map_err(py_err)?;
    let params = ModelParams::new(n, p, seed).map_err(py_err)?;
    let run = constructs::three_phase_generate(params, choice.c, lam).map_err(py_err)?;
    let graph = run.graph.map(|inner| PyGraph { inner });
    Ok((to_py(py, &run.trace)?, graph))
}

/// Whether the graph's stretch factor exceeds the trace's `lambda`; `None`
/// when the graph is disconnected.
#[pyfunction]
fn verify_nice_implication(py: Python<'_>, trace: &Bound<'_, PyAny>, graph: &PyGraph) -> PyResult<Option<bool>> {
    let trace: ThreePhaseTrace = from_py(py, trace)?;
    constructs::verify_nice_implication(&trace, &graph.inner).map_err(py_err)
}

/// Runs an experiment from a config (JSON string or dict) and returns
/// `{"records": [...], "summary": {...}}`.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let spec: ExperimentSpec = from_py(py, config)?;
    let result = py.detach(|| harness::run_experiment(&spec)).map_err(py_err)?;
    #[derive(Serialize)]
    struct Out<'a> {
        records: &'a [harness::TrialRecord],
        summary: &'a harness::SummaryStats,
    }
    to_py(
        py,
        &Out {
            records: &result.records,
            summary: &result.summary,
        },
    )
}

/// Compares a summary (as returned by `run_experiment`) with the bounds.
#[pyfunction]
fn compare_to_bounds(py: Python<'_>, summary: &Bound<'_, PyAny>, config: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let summary: harness::SummaryStats = from_py(py, summary)?;
    let spec: ExperimentSpec = from_py(py, config)?;
    to_py(py, &harness::compare_to_bounds(&summary, &spec))
}

/// Two-sample Kolmogorov–Smirnov test: `(statistic, p_value)`.
#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = harness::ks_two_sample(&a, &b)
        .ok_or_else(|| PyValueError::new_err("samples must be non-empty and free of NaN"))?;
    Ok((r.statistic, r.p_value))
}

#[pymodule]
fn pystretchlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(disc_square_area, m)?)?;
    m.add_function(wrap_pyfunction!(prop1_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(thm1_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(thm2_aas_bound, m)?)?;
    m.add_function(wrap_pyfunction!(thm2_expectation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(lemma4_bound, m)?)?;
    m.add_function(wrap_pyfunction!(lemma5_bound, m)?)?;
    m.add_function(wrap_pyfunction!(nice_probability_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(regime_classify, m)?)?;
    m.add_function(wrap_pyfunction!(eval_p, m)?)?;
    m.add_function(wrap_pyfunction!(pick_c, m)?)?;
    m.add_function(wrap_pyfunction!(three_phase, m)?)?;
    m.add_function(wrap_pyfunction!(verify_nice_implication, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(compare_to_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
