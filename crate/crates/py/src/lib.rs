//! Python bindings: the domain types and the headline operations
//! (path extraction, discovery, synthesis, evaluation) behind a thin
//! JSON-config interface shared with the CLI.

use std::path::Path;
use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use motifforge::{constraints, discovery, evaluation, io, loco, series};

fn to_pyerr(e: motifforge::Error) -> PyErr {
    use motifforge::Error as E;
    match e {
        E::Data { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A time series of n samples x dim dimensions.
#[pyclass(name = "TimeSeries", from_py_object)]
#[derive(Clone)]
struct PyTimeSeries {
    inner: Arc<series::TimeSeries>,
}

#[pymethods]
impl PyTimeSeries {
    /// Build from a flat list of floats (univariate) or a list of
    /// equal-length rows (multivariate).
    #[new]
    fn new(values: Bound<'_, PyAny>) -> PyResult<Self> {
        if let Ok(flat) = values.extract::<Vec<f64>>() {
            let ts = series::TimeSeries::univariate(flat).map_err(to_pyerr)?;
            return Ok(PyTimeSeries { inner: Arc::new(ts) });
        }
        let rows: Vec<Vec<f64>> = values.extract()?;
        let n = rows.len();
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(PyValueError::new_err("rows must have equal length"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let ts = series::TimeSeries::new(flat, n, dim).map_err(to_pyerr)?;
        Ok(PyTimeSeries { inner: Arc::new(ts) })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn values(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len()).map(|i| self.inner.sample(i).to_vec()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("TimeSeries(n={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

/// An inclusive interval of time indices.
#[pyclass(name = "Segment", from_py_object)]
#[derive(Clone)]
struct PySegment {
    inner: series::Segment,
}

#[pymethods]
impl PySegment {
    #[new]
    fn new(start: usize, end: usize) -> PyResult<Self> {
        Ok(PySegment { inner: series::Segment::new(start, end).map_err(to_pyerr)? })
    }

    #[getter]
    fn start(&self) -> usize {
        self.inner.start()
    }

    #[getter]
    fn end(&self) -> usize {
        self.inner.end()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Segment({}, {})", self.inner.start(), self.inner.end())
    }

    fn __eq__(&self, other: &PySegment) -> bool {
        self.inner == other.inner
    }
}

fn to_motif_set(segments: Vec<PySegment>) -> series::MotifSet {
    series::MotifSet::from_segments(segments.into_iter().map(|s| s.inner).collect())
}

/// Number of distinct time indices covered by the segments.
#[pyfunction]
fn coverage(segments: Vec<PySegment>) -> PyResult<usize> {
    series::coverage(&to_motif_set(segments)).map_err(to_pyerr)
}

/// Whether `beta` overlaps `beta_prime` by more than `nu * len(beta_prime)`.
#[pyfunction]
fn is_coincident(beta: &PySegment, beta_prime: &PySegment, nu: f64) -> PyResult<bool> {
    series::is_coincident(beta.inner, beta_prime.inner, nu).map_err(to_pyerr)
}

#[pyfunction]
fn subsequence_std(ts: &PyTimeSeries, segment: &PySegment) -> PyResult<f64> {
    series::subsequence_std(&ts.inner, segment.inner).map_err(to_pyerr)
}

#[pyfunction]
fn subsequence_skewness(ts: &PyTimeSeries, segment: &PySegment) -> PyResult<f64> {
    series::subsequence_skewness(&ts.inner, segment.inner).map_err(to_pyerr)
}

/// Decimal digit counts of the unconstrained search-space size:
/// (exact_digits, big_o_digits, empty).
#[pyfunction]
fn search_space_digit_count(n: u64, kappa: u32) -> (usize, usize, bool) {
    let r = series::search_space_digit_count(n, kappa);
    (r.exact_digits, r.big_o_digits, r.empty)
}

type PathTuples = Vec<(Vec<(u32, u32)>, f64)>;

/// Extract the local warping paths of a series. Returns a list of
/// (pairs, score) tuples; the identity self-path comes first.
#[pyfunction]
#[pyo3(signature = (ts, rho, warping=true, l_min_path=5, gamma=1.0, delta_penalty=None))]
fn local_warping_paths(
    ts: &PyTimeSeries,
    rho: f64,
    warping: bool,
    l_min_path: usize,
    gamma: f64,
    delta_penalty: Option<f64>,
) -> PyResult<PathTuples> {
    let params = loco::LocoParams { rho, warping, l_min_path, gamma, delta_penalty };
    let paths = loco::compute_local_warping_paths(&ts.inner, &params).map_err(to_pyerr)?;
    Ok(paths.into_iter().map(|p| (p.pairs().to_vec(), p.score())).collect())
}

/// Run constrained discovery under a JSON config (same schema as the CLI);
/// returns the result document as a JSON string. Mask file references in the
/// config resolve relative to the working directory.
#[pyfunction]
fn discover(py: Python<'_>, ts: &PyTimeSeries, config_json: &str) -> PyResult<String> {
    let series = ts.inner.clone();
    let config_json = config_json.to_string();
    py.detach(move || {
        let (config, meta) =
            io::parse_config(&config_json, series.clone(), Some(Path::new("."))).map_err(to_pyerr)?;
        let result = discovery::discover(&series, &config).map_err(to_pyerr)?;
        Ok(io::serialize_result(&result, &meta))
    })
}

/// Generate a synthetic series with planted patterns from a JSON spec;
/// returns (values, ground_truth_json).
#[pyfunction]
fn synthesize(spec_json: &str) -> PyResult<(Vec<f64>, String)> {
    let spec: io::SynthSpec = serde_json::from_str(spec_json)
        .map_err(|e| PyValueError::new_err(format!("invalid synthesis spec: {e}")))?;
    let (x, gt) = io::synthesize(&spec).map_err(to_pyerr)?;
    Ok((x.values().to_vec(), io::gt_to_json(&gt)))
}

/// Score a result document against ground truth; returns the report JSON.
#[pyfunction]
#[pyo3(signature = (result_json, gt_json, ignore_unmatched=false, threshold=0.5))]
fn evaluate(
    result_json: &str,
    gt_json: &str,
    ignore_unmatched: bool,
    threshold: f64,
) -> PyResult<String> {
    let doc = io::parse_result(result_json, Path::new("<result>")).map_err(to_pyerr)?;
    let gt = io::gt_from_json(gt_json, Path::new("<gt>")).map_err(to_pyerr)?;
    let sets: Vec<series::MotifSet> =
        doc.to_motif_sets().map_err(to_pyerr)?.into_iter().map(|(_, m)| m).collect();
    let report = evaluation::evaluate(&sets, &gt, ignore_unmatched, threshold).map_err(to_pyerr)?;
    Ok(io::report_to_json(&report))
}

/// Derive a mask from the series with a sliding-window statistic.
/// `method` is one of "std_window", "complexity_window", "binary_threshold".
#[pyfunction]
#[pyo3(signature = (ts, method, window, threshold=None, invert=false))]
fn build_mask_from_signal(
    ts: &PyTimeSeries,
    method: &str,
    window: usize,
    threshold: Option<f64>,
    invert: bool,
) -> PyResult<Vec<f64>> {
    let method = match method {
        "std_window" => constraints::MaskMethod::StdWindow,
        "complexity_window" => constraints::MaskMethod::ComplexityWindow,
        "binary_threshold" => constraints::MaskMethod::BinaryThreshold,
        other => {
            return Err(PyValueError::new_err(format!("unknown mask method \"{other}\"")))
        }
    };
    let mask = constraints::build_mask_from_signal(&ts.inner, method, window, threshold, invert)
        .map_err(to_pyerr)?;
    Ok(mask.values().to_vec())
}

#[pymodule]
fn motifforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyTimeSeries>()?;
    m.add_class::<PySegment>()?;
    m.add_function(wrap_pyfunction!(coverage, m)?)?;
    m.add_function(wrap_pyfunction!(is_coincident, m)?)?;
    m.add_function(wrap_pyfunction!(subsequence_std, m)?)?;
    m.add_function(wrap_pyfunction!(subsequence_skewness, m)?)?;
    m.add_function(wrap_pyfunction!(search_space_digit_count, m)?)?;
    m.add_function(wrap_pyfunction!(local_warping_paths, m)?)?;
    m.add_function(wrap_pyfunction!(discover, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(build_mask_from_signal, m)?)?;
    Ok(())
}
