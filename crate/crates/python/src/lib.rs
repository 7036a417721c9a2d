use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use risloc::geometry::{NodeLayout, Point, SensingPair};
use risloc::harness::{apply_override, SweepConfig};
use risloc::pipeline::TrialContext;

fn to_py(e: risloc::Error) -> PyErr {
    match e {
        risloc::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Parses an optional TOML config, applying `key=value` overrides.
fn load_config(config: Option<&str>, overrides: &[String]) -> PyResult<SweepConfig> {
    let mut table: toml::Table = config
        .unwrap_or("")
        .parse()
        .map_err(|e: toml::de::Error| PyValueError::new_err(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o).map_err(to_py)?;
    }
    SweepConfig::from_table(table).map_err(to_py)
}

fn layout(config: Option<&str>) -> PyResult<NodeLayout> {
    load_config(config, &[])?.scenario.layout().map_err(to_py)
}

/// Serializes through JSON into plain Python objects.
fn to_object<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyfunction]
#[pyo3(signature = (length=1989, root=7))]
fn generate_zc(length: usize, root: usize) -> PyResult<Vec<Complex64>> {
    Ok(risloc::signal::generate_zc(length, root).map_err(to_py)?.samples().to_vec())
}

/// Cyclic correlation magnitudes of `test` against the preamble; index = delay in samples.
#[pyfunction]
#[pyo3(signature = (test, length=1989, root=7))]
fn cross_correlate(py: Python<'_>, test: Vec<Complex64>, length: usize, root: usize) -> PyResult<Vec<f64>> {
    py.detach(|| {
        let zc = risloc::signal::generate_zc(length, root)?;
        Ok(risloc::signal::cross_correlate(&zc, &test)?.magnitudes)
    })
    .map_err(to_py)
}

/// `(theta_ris_deg, tau_s)` of a target.
#[pyfunction]
#[pyo3(signature = (target, config=None))]
fn forward_sensing(target: [f64; 2], config: Option<&str>) -> PyResult<(f64, f64)> {
    let s = risloc::geometry::forward_sensing(Point::new(target[0], target[1]), &layout(config)?).map_err(to_py)?;
    Ok((s.theta_ris_deg, s.tau_s))
}

#[pyfunction]
#[pyo3(signature = (theta_ris_deg, tau_s, config=None))]
fn map_to_position(theta_ris_deg: f64, tau_s: f64, config: Option<&str>) -> PyResult<(f64, f64)> {
    let pair = SensingPair { theta_ris_deg, tau_s };
    let p = risloc::geometry::map_to_position(pair, &layout(config)?).map_err(to_py)?;
    Ok((p.x, p.y))
}

/// One trial on given targets. `snr_db=None` runs without noise.
#[pyfunction]
#[pyo3(signature = (targets, ris_elements=64, snr_db=None, seed=0, config=None, overrides=vec![]))]
fn run_trial(
    py: Python<'_>,
    targets: Vec<[f64; 2]>,
    ris_elements: usize,
    snr_db: Option<f64>,
    seed: u64,
    config: Option<&str>,
    overrides: Vec<String>,
) -> PyResult<Py<PyAny>> {
    let mut c = load_config(config, &overrides)?;
    c.scenario.noiseless |= snr_db.is_none();
    let targets: Vec<Point> = targets.into_iter().map(|[x, y]| Point::new(x, y)).collect();
    let outcome = py
        .detach(|| {
            let scenario = c.scenario.build(snr_db.unwrap_or(0.0), ris_elements, targets)?;
            TrialContext::new(c.scenario.zc_length, c.scenario.zc_root)?.run_trial(&scenario, &c.estimator, seed)
        })
        .map_err(to_py)?;
    to_object(py, &outcome)
}

/// Runs a sweep and returns its rows as dicts. Writes the CSV too when the
/// config names an output.
#[pyfunction]
#[pyo3(signature = (config=None, overrides=vec![]))]
fn run_sweep(py: Python<'_>, config: Option<&str>, overrides: Vec<String>) -> PyResult<Py<PyAny>> {
    let c = load_config(config, &overrides)?;
    let rows = py
        .detach(|| match c.output {
            Some(_) => risloc::harness::simulate(&c),
            None => risloc::harness::run_sweep(&c),
        })
        .map_err(to_py)?;
    to_object(py, &rows)
}

/// Optimal `(actual, estimated)` index pairs.
#[pyfunction]
fn pair_targets(actual: Vec<[f64; 2]>, estimated: Vec<[f64; 2]>) -> Vec<(usize, usize)> {
    let a: Vec<Point> = actual.into_iter().map(|[x, y]| Point::new(x, y)).collect();
    let e: Vec<Point> = estimated.into_iter().map(|[x, y]| Point::new(x, y)).collect();
    risloc::metrics::pair_targets(&a, &e)
}

/// Sum of squared distances under the optimal pairing.
#[pyfunction]
fn total_squared_distance(actual: Vec<[f64; 2]>, estimated: Vec<[f64; 2]>) -> f64 {
    let a: Vec<Point> = actual.into_iter().map(|[x, y]| Point::new(x, y)).collect();
    let e: Vec<Point> = estimated.into_iter().map(|[x, y]| Point::new(x, y)).collect();
    let pairs = risloc::metrics::pair_targets(&a, &e);
    risloc::metrics::total_squared_distance(&a, &e, &pairs)
}

#[pymodule]
fn pyrisloc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CSV_HEADER", risloc::harness::CSV_HEADER)?;
    m.add_function(wrap_pyfunction!(generate_zc, m)?)?;
    m.add_function(wrap_pyfunction!(cross_correlate, m)?)?;
    m.add_function(wrap_pyfunction!(forward_sensing, m)?)?;
    m.add_function(wrap_pyfunction!(map_to_position, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(pair_targets, m)?)?;
    m.add_function(wrap_pyfunction!(total_squared_distance, m)?)?;
    Ok(())
}
