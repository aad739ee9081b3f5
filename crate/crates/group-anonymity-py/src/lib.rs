//! Python bindings for the group anonymity toolkit.
//!
//! Exposes the wavelet decomposition, the three masking pipelines, and the
//! config-driven mask/verify commands. Signals cross the boundary as plain
//! lists; structured results come back as dicts.

use group_anonymity::cli::{cmd_mask, cmd_verify};
use group_anonymity::config::RunConfig;
use group_anonymity::masking::{
    mask_concentration, mask_difference, mask_quantity, MaskingOptions, MaskingResult,
    MaskingStrategy, RoundingMode, Side, SolvePolicy,
};
use group_anonymity::signal::{Signal, SignalFlavor};
use group_anonymity::wavelet::{build_wrm, decompose, reconstruct_approx, WaveletFilter};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: group_anonymity::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn anon_signal(values: Vec<f64>, flavor: SignalFlavor) -> PyResult<Signal> {
    let labels = (0..values.len()).map(|i| i.to_string()).collect();
    Signal::new(values, labels, flavor).map_err(err)
}

fn options(
    offset: Option<f64>,
    sum_preserving: bool,
    extrema: Option<Vec<usize>>,
    mad_multiplier: Option<f64>,
) -> MaskingOptions {
    MaskingOptions {
        offset,
        rounding: if sum_preserving {
            RoundingMode::SumPreserving
        } else {
            RoundingMode::Nearest
        },
        extrema,
        mad_multiplier: mad_multiplier.unwrap_or(3.0),
    }
}

fn strategy(
    coefficients: Option<Vec<f64>>,
    targets: Option<Vec<usize>>,
) -> PyResult<MaskingStrategy> {
    match (coefficients, targets) {
        (Some(c), None) => Ok(MaskingStrategy::Manual(c)),
        (None, Some(t)) => Ok(MaskingStrategy::Permutation { targets: t }),
        (None, None) => Ok(MaskingStrategy::Leveling),
        (Some(_), Some(_)) => Err(PyValueError::new_err(
            "pass either coefficients or targets, not both",
        )),
    }
}

fn result_dict<'py>(py: Python<'py>, r: &MaskingResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("original_coeffs", &r.original_coeffs)?;
    d.set_item("new_coeffs", &r.new_coeffs)?;
    d.set_item("offset", r.offset)?;
    d.set_item("scale", r.scale)?;
    d.set_item("detail_ratio", r.detail_ratio)?;
    d.set_item("max_detail_deviation", r.max_detail_deviation)?;
    d.set_item("masked_real", &r.masked_real)?;
    d.set_item("masked_int", &r.masked_int)?;
    Ok(d)
}

/// Daubechies lowpass decomposition taps for the given order (1..=10).
#[pyfunction]
fn daubechies_taps(order: usize) -> PyResult<Vec<f64>> {
    Ok(WaveletFilter::daubechies(order)
        .map_err(err)?
        .lo_d()
        .to_vec())
}

/// Periodic wavelet decomposition. Returns
/// (approx_coeffs, approximation, [detail_1, ..., detail_level]).
#[allow(clippy::type_complexity)]
#[pyfunction(name = "decompose")]
#[pyo3(signature = (values, order=1, level=1))]
fn py_decompose(
    values: Vec<f64>,
    order: usize,
    level: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let filter = WaveletFilter::daubechies(order).map_err(err)?;
    let signal = anon_signal(values, SignalFlavor::Concentration)?;
    let dec = decompose(&signal, &filter, level).map_err(err)?;
    Ok((
        dec.approx_coeffs().to_vec(),
        dec.approx().to_vec(),
        dec.details().to_vec(),
    ))
}

/// Reconstruct a length-`length` approximation from `level`-level coefficients.
#[pyfunction(name = "reconstruct_approx")]
#[pyo3(signature = (coeffs, length, order=1, level=1))]
fn py_reconstruct_approx(
    coeffs: Vec<f64>,
    length: usize,
    order: usize,
    level: usize,
) -> PyResult<Vec<f64>> {
    let filter = WaveletFilter::daubechies(order).map_err(err)?;
    let wrm = build_wrm(&filter, level, length).map_err(err)?;
    reconstruct_approx(&coeffs, &wrm).map_err(err)
}

/// Mask a distribution of non-negative counts. Returns a result dict.
#[pyfunction(name = "mask_quantity")]
#[pyo3(signature = (counts, order=1, level=1, coefficients=None, targets=None,
                    offset=None, sum_preserving=false, extrema=None, mad_multiplier=None))]
#[allow(clippy::too_many_arguments)]
fn py_mask_quantity<'py>(
    py: Python<'py>,
    counts: Vec<f64>,
    order: usize,
    level: usize,
    coefficients: Option<Vec<f64>>,
    targets: Option<Vec<usize>>,
    offset: Option<f64>,
    sum_preserving: bool,
    extrema: Option<Vec<usize>>,
    mad_multiplier: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let filter = WaveletFilter::daubechies(order).map_err(err)?;
    let signal = anon_signal(counts, SignalFlavor::Quantity)?;
    let result = mask_quantity(
        &signal,
        &filter,
        level,
        &strategy(coefficients, targets)?,
        &options(offset, sum_preserving, extrema, mad_multiplier),
    )
    .map_err(err)?;
    result_dict(py, &result)
}

/// Mask the ratio series counts[i] / totals[i]. Returns a result dict.
#[pyfunction(name = "mask_concentration")]
#[pyo3(signature = (counts, totals, order=1, level=1, coefficients=None, targets=None,
                    offset=None, sum_preserving=false, extrema=None, mad_multiplier=None))]
#[allow(clippy::too_many_arguments)]
fn py_mask_concentration<'py>(
    py: Python<'py>,
    counts: Vec<f64>,
    totals: Vec<f64>,
    order: usize,
    level: usize,
    coefficients: Option<Vec<f64>>,
    targets: Option<Vec<usize>>,
    offset: Option<f64>,
    sum_preserving: bool,
    extrema: Option<Vec<usize>>,
    mad_multiplier: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let filter = WaveletFilter::daubechies(order).map_err(err)?;
    let signal = anon_signal(counts, SignalFlavor::Quantity)?;
    let totals = anon_signal(totals, SignalFlavor::Quantity)?;
    let result = mask_concentration(
        &signal,
        &totals,
        &filter,
        level,
        &strategy(coefficients, targets)?,
        &options(offset, sum_preserving, extrema, mad_multiplier),
    )
    .map_err(err)?;
    result_dict(py, &result)
}

/// Mask the difference of two ratio series over a shared denominator.
/// `solve_sides` picks, per bucket, which side absorbs the change
/// ("main" or "subordinate"); omitted = balanced split.
/// Returns a (main, subordinate) pair of result dicts.
#[pyfunction(name = "mask_difference")]
#[pyo3(signature = (counts_main, counts_sub, totals, order=1, level=1, coefficients=None,
                    targets=None, solve_sides=None, sum_preserving=false, extrema=None,
                    mad_multiplier=None))]
#[allow(clippy::too_many_arguments)]
fn py_mask_difference<'py>(
    py: Python<'py>,
    counts_main: Vec<f64>,
    counts_sub: Vec<f64>,
    totals: Vec<f64>,
    order: usize,
    level: usize,
    coefficients: Option<Vec<f64>>,
    targets: Option<Vec<usize>>,
    solve_sides: Option<Vec<String>>,
    sum_preserving: bool,
    extrema: Option<Vec<usize>>,
    mad_multiplier: Option<f64>,
) -> PyResult<(Bound<'py, PyDict>, Bound<'py, PyDict>)> {
    let filter = WaveletFilter::daubechies(order).map_err(err)?;
    let main = anon_signal(counts_main, SignalFlavor::Quantity)?;
    let sub = anon_signal(counts_sub, SignalFlavor::Quantity)?;
    let totals = anon_signal(totals, SignalFlavor::Quantity)?;
    let policy = match solve_sides {
        None => SolvePolicy::Balanced,
        Some(sides) => {
            let sides: PyResult<Vec<Side>> = sides
                .iter()
                .map(|s| match s.as_str() {
                    "main" => Ok(Side::Main),
                    "subordinate" => Ok(Side::Subordinate),
                    other => Err(PyValueError::new_err(format!("unknown side {other:?}"))),
                })
                .collect();
            SolvePolicy::PerIndex(sides?)
        }
    };
    let (r1, r2) = mask_difference(
        &main,
        &sub,
        &totals,
        &filter,
        level,
        &strategy(coefficients, targets)?,
        &policy,
        &options(None, sum_preserving, extrema, mad_multiplier),
    )
    .map_err(err)?;
    Ok((result_dict(py, &r1)?, result_dict(py, &r2)?))
}

/// Run a full masking pipeline from a TOML config file. Writes the output
/// microfile (and optional report / run record) and returns the run record
/// as a dict.
#[pyfunction(name = "run_mask")]
fn py_run_mask(py: Python<'_>, config_path: &str) -> PyResult<Py<PyAny>> {
    let config = RunConfig::load(config_path).map_err(err)?;
    let outcome = cmd_mask(&config).map_err(err)?;
    let json =
        serde_json::to_string(&outcome.record).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let loads = py.import("json")?.getattr("loads")?;
    Ok(loads.call1((json,))?.unbind())
}

/// Check a masked microfile against the original under a config. Returns
/// (passed, report_text).
#[pyfunction(name = "verify")]
fn py_verify(config_path: &str, original: &str, masked: &str) -> PyResult<(bool, String)> {
    let config = RunConfig::load(config_path).map_err(err)?;
    let outcome = cmd_verify(&config, original.as_ref(), masked.as_ref()).map_err(err)?;
    Ok((outcome.passed, outcome.report))
}

#[pymodule]
fn group_anonymity_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(daubechies_taps, m)?)?;
    m.add_function(wrap_pyfunction!(py_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(py_reconstruct_approx, m)?)?;
    m.add_function(wrap_pyfunction!(py_mask_quantity, m)?)?;
    m.add_function(wrap_pyfunction!(py_mask_concentration, m)?)?;
    m.add_function(wrap_pyfunction!(py_mask_difference, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_mask, m)?)?;
    m.add_function(wrap_pyfunction!(py_verify, m)?)?;
    Ok(())
}
