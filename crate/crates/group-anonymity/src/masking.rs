//! Masking pipelines: replace approximation coefficients of a quantity,
//! concentration, or concentration-difference signal, then restore
//! non-negativity, total sum, and integrality while the wavelet details stay
//! fixed up to the sum-preserving factor.

use crate::builder::{build_concentration_signal, build_difference_signal};
use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::wavelet::{
    build_wrm, decompose, decompose_values, reconstruct_approx, Decomposition, WaveletFilter,
};
use serde::{Deserialize, Serialize};

/// How new approximation coefficients are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskingStrategy {
    /// Hand-picked replacement coefficients, used verbatim.
    Manual(Vec<f64>),
    /// Raise the non-extremal coefficients so the extrema no longer stand
    /// out, keeping the coefficient mean ("Ali Baba's wife").
    Leveling,
    /// Move extremal coefficients to the given target indices by swapping
    /// (extremum transition). The mean is automatically preserved.
    Permutation { targets: Vec<usize> },
}

/// Integer rounding of the final signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingMode {
    /// Round half away from zero, elementwise.
    #[default]
    Nearest,
    /// Largest-remainder apportionment: the integer sum equals the rounded
    /// real sum.
    SumPreserving,
}

impl std::str::FromStr for RoundingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "sum-preserving" => Ok(Self::SumPreserving),
            other => Err(Error::Config(format!("unknown rounding mode {other:?}"))),
        }
    }
}

/// Knobs shared by the pipelines.
#[derive(Debug, Clone)]
pub struct MaskingOptions {
    /// Explicit non-positive offset, e.g. -800. `None` picks the smallest
    /// integer shift making the composed signal non-negative.
    pub offset: Option<f64>,
    pub rounding: RoundingMode,
    /// Explicit extremal coefficient indices. `None` detects them by the
    /// median-absolute-deviation rule.
    pub extrema: Option<Vec<usize>>,
    /// MAD multiplier for extremum detection.
    pub mad_multiplier: f64,
}

impl Default for MaskingOptions {
    fn default() -> Self {
        MaskingOptions {
            offset: None,
            rounding: RoundingMode::Nearest,
            extrema: None,
            mad_multiplier: 3.0,
        }
    }
}

/// Everything a pipeline run produces, pre- and post-rounding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskingResult {
    pub original_coeffs: Vec<f64>,
    pub new_coeffs: Vec<f64>,
    pub new_approx: Vec<f64>,
    /// New approximation plus the old details, before the offset step.
    pub raw_masked: Vec<f64>,
    /// Non-positive value subtracted from every element.
    pub offset: f64,
    /// Sum-preserving multiplier.
    pub scale: f64,
    pub masked_real: Vec<f64>,
    pub masked_int: Vec<i64>,
    /// Least-squares ratio between masked and original details.
    pub detail_ratio: f64,
    pub max_detail_deviation: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Indices whose distance from the median exceeds `multiplier` times the
/// median absolute deviation.
pub fn detect_extrema(values: &[f64], multiplier: f64) -> Vec<usize> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let med = median(&sorted);
    let mut devs: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    devs.sort_by(f64::total_cmp);
    let mad = median(&devs);
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| (*v - med).abs() > multiplier * mad)
        .map(|(i, _)| i)
        .collect()
}

/// Choose replacement approximation coefficients.
pub fn propose_coefficients(
    original: &[f64],
    strategy: &MaskingStrategy,
    extrema: &[usize],
) -> Result<Vec<f64>> {
    for &e in extrema {
        if e >= original.len() {
            return Err(Error::DimensionMismatch {
                expected: original.len(),
                got: e,
            });
        }
    }
    match strategy {
        MaskingStrategy::Manual(coeffs) => {
            if coeffs.len() != original.len() {
                return Err(Error::LengthMismatch {
                    expected: original.len(),
                    got: coeffs.len(),
                });
            }
            Ok(coeffs.clone())
        }
        MaskingStrategy::Leveling => {
            let n = original.len();
            let others: Vec<usize> = (0..n).filter(|i| !extrema.contains(i)).collect();
            if extrema.is_empty() || others.is_empty() {
                return Ok(original.to_vec());
            }
            let mean_ext: f64 =
                extrema.iter().map(|&i| original[i]).sum::<f64>() / extrema.len() as f64;
            let mean_rest: f64 =
                others.iter().map(|&i| original[i]).sum::<f64>() / others.len() as f64;
            // flatten the extrema to the bulk mean, push the rest up (or down)
            // by a constant so the overall mean is unchanged
            let lift = extrema.len() as f64 * (mean_ext - mean_rest) / others.len() as f64;
            let mut out = original.to_vec();
            for &e in extrema {
                out[e] = mean_rest;
            }
            for &i in &others {
                out[i] += lift;
            }
            Ok(out)
        }
        MaskingStrategy::Permutation { targets } => {
            if targets.is_empty() {
                return Err(Error::EmptyTargets);
            }
            for &t in targets {
                if t >= original.len() {
                    return Err(Error::DimensionMismatch {
                        expected: original.len(),
                        got: t,
                    });
                }
            }
            let mut out = original.to_vec();
            for (&e, &t) in extrema.iter().zip(targets) {
                out.swap(e, t);
            }
            Ok(out)
        }
    }
}

/// New approximation from the replacement coefficients plus the untouched
/// details: WRM * new_coeffs + sum of D_i. Returns (new_approx, raw signal).
pub fn compose_masked_signal(
    dec: &Decomposition,
    new_coeffs: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if new_coeffs.len() != dec.approx_coeffs().len() {
        return Err(Error::DimensionMismatch {
            expected: dec.approx_coeffs().len(),
            got: new_coeffs.len(),
        });
    }
    let wrm = build_wrm(dec.filter(), dec.level(), dec.signal_len())?;
    let new_approx = reconstruct_approx(new_coeffs, &wrm)?;
    let detail_sum = dec.detail_sum();
    let raw = new_approx
        .iter()
        .zip(&detail_sum)
        .map(|(a, d)| a + d)
        .collect();
    Ok((new_approx, raw))
}

const NEG_EPS: f64 = 1e-9;

/// Shift the signal to be elementwise non-negative. Returns the shifted
/// vector and the (non-positive) offset that was subtracted.
pub fn offset_to_nonnegative(v: &[f64], requested: Option<f64>) -> Result<(Vec<f64>, f64)> {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let offset = match requested {
        Some(r) => {
            if min - r < -NEG_EPS {
                return Err(Error::OffsetTooSmall { requested: r, min });
            }
            r
        }
        None => {
            if min >= -NEG_EPS {
                0.0
            } else {
                min.floor()
            }
        }
    };
    let shifted = v.iter().map(|x| (x - offset).max(0.0)).collect();
    Ok((shifted, offset))
}

/// Multiply so the sum becomes `target_sum`. Returns (vector, factor).
pub fn rescale_to_sum(v: &[f64], target_sum: f64) -> Result<(Vec<f64>, f64)> {
    let sum: f64 = v.iter().sum();
    if sum <= 0.0 || target_sum <= 0.0 {
        return Err(Error::NonPositiveSum(if sum <= 0.0 {
            sum
        } else {
            target_sum
        }));
    }
    let scale = target_sum / sum;
    Ok((v.iter().map(|x| x * scale).collect(), scale))
}

/// Round a non-negative vector to integers.
pub fn round_signal(v: &[f64], mode: RoundingMode) -> Vec<i64> {
    match mode {
        RoundingMode::Nearest => v.iter().map(|x| x.round() as i64).collect(),
        RoundingMode::SumPreserving => {
            let total: f64 = v.iter().sum();
            let target = total.round() as i64;
            let floors: Vec<i64> = v.iter().map(|x| x.floor() as i64).collect();
            let mut remaining = target - floors.iter().sum::<i64>();
            let mut order: Vec<usize> = (0..v.len()).collect();
            order.sort_by(|&a, &b| {
                let fa = v[a] - v[a].floor();
                let fb = v[b] - v[b].floor();
                fb.total_cmp(&fa).then(a.cmp(&b))
            });
            let mut out = floors;
            for &i in &order {
                if remaining == 0 {
                    break;
                }
                out[i] += 1;
                remaining -= 1;
            }
            out
        }
    }
}

/// Least-squares ratio between the details of `masked` and of `original`,
/// and the largest elementwise deviation from exact proportionality.
/// A zero original detail yields ratio 1 and deviation max|masked detail|.
pub fn verify_detail_fidelity(
    original: &Signal,
    masked: &[f64],
    filter: &WaveletFilter,
    level: usize,
) -> Result<(f64, f64)> {
    if masked.len() != original.len() {
        return Err(Error::LengthMismatch {
            expected: original.len(),
            got: masked.len(),
        });
    }
    let dec_o = decompose(original, filter, level)?;
    let dec_m = decompose_values(masked, filter, level)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (d_o, d_m) in dec_o.details().iter().zip(dec_m.details()) {
        for (a, b) in d_o.iter().zip(d_m) {
            num += a * b;
            den += a * a;
        }
    }
    if den < 1e-300 {
        let max = dec_m
            .details()
            .iter()
            .flatten()
            .fold(0.0f64, |acc, d| acc.max(d.abs()));
        return Ok((1.0, max));
    }
    let ratio = num / den;
    let mut max_dev = 0.0f64;
    for (d_o, d_m) in dec_o.details().iter().zip(dec_m.details()) {
        for (a, b) in d_o.iter().zip(d_m) {
            max_dev = max_dev.max((b - ratio * a).abs());
        }
    }
    Ok((ratio, max_dev))
}

fn pick_extrema(coeffs: &[f64], options: &MaskingOptions) -> Vec<usize> {
    match &options.extrema {
        Some(e) => e.clone(),
        None => detect_extrema(coeffs, options.mad_multiplier),
    }
}

/// Mask a quantity signal end to end: decompose, replace coefficients,
/// recompose, offset, rescale to the original total, round.
pub fn mask_quantity(
    q: &Signal,
    filter: &WaveletFilter,
    level: usize,
    strategy: &MaskingStrategy,
    options: &MaskingOptions,
) -> Result<MaskingResult> {
    let dec = decompose(q, filter, level)?;
    let extrema = pick_extrema(dec.approx_coeffs(), options);
    let new_coeffs = propose_coefficients(dec.approx_coeffs(), strategy, &extrema)?;
    let (new_approx, raw) = compose_masked_signal(&dec, &new_coeffs)?;
    let (shifted, offset) = offset_to_nonnegative(&raw, options.offset)?;
    let (masked_real, scale) = rescale_to_sum(&shifted, q.sum())?;
    let masked_int = round_signal(&masked_real, options.rounding);
    let (detail_ratio, max_detail_deviation) =
        verify_detail_fidelity(q, &masked_real, filter, level)?;
    Ok(MaskingResult {
        original_coeffs: dec.approx_coeffs().to_vec(),
        new_coeffs,
        new_approx,
        raw_masked: raw,
        offset,
        scale,
        masked_real,
        masked_int,
        detail_ratio,
        max_detail_deviation,
    })
}

fn div_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Mask a concentration signal: work on c = q / totals, then convert the
/// masked concentrations back to quantities against the untouched totals.
/// Detail fidelity is reported in the concentration domain.
pub fn mask_concentration(
    q: &Signal,
    totals: &Signal,
    filter: &WaveletFilter,
    level: usize,
    strategy: &MaskingStrategy,
    options: &MaskingOptions,
) -> Result<MaskingResult> {
    let c = build_concentration_signal(q, totals)?;
    let dec = decompose(&c, filter, level)?;
    let extrema = pick_extrema(dec.approx_coeffs(), options);
    let new_coeffs = propose_coefficients(dec.approx_coeffs(), strategy, &extrema)?;
    let (new_approx, raw) = compose_masked_signal(&dec, &new_coeffs)?;
    let (shifted, offset) = offset_to_nonnegative(&raw, options.offset)?;
    let quantities: Vec<f64> = shifted
        .iter()
        .zip(totals.values())
        .map(|(c, t)| c * t)
        .collect();
    let (masked_real, scale) = rescale_to_sum(&quantities, q.sum())?;
    let masked_int = round_signal(&masked_real, options.rounding);
    let masked_conc: Vec<f64> = masked_real
        .iter()
        .zip(totals.values())
        .map(|(&v, &t)| div_or_zero(v, t))
        .collect();
    let (detail_ratio, max_detail_deviation) =
        verify_detail_fidelity(&c, &masked_conc, filter, level)?;
    Ok(MaskingResult {
        original_coeffs: dec.approx_coeffs().to_vec(),
        new_coeffs,
        new_approx,
        raw_masked: raw,
        offset,
        scale,
        masked_real,
        masked_int,
        detail_ratio,
        max_detail_deviation,
    })
}

/// Which side of a concentration pair absorbs a per-index change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Main,
    Subordinate,
}

/// How to split a masked difference signal back into two concentration
/// signals. The m-equation system in 2m unknowns is underdetermined; the
/// policy picks a solution.
#[derive(Debug, Clone, PartialEq)]
pub enum SolvePolicy {
    /// The main signal absorbs every change.
    AdjustMain,
    /// The subordinate signal absorbs every change.
    AdjustSubordinate,
    /// Changed indices alternate sides, starting with the main signal.
    Alternate,
    /// Each change is split evenly between the sides.
    Balanced,
    /// An explicit side per index.
    PerIndex(Vec<Side>),
    /// A precomputed solution pair, used verbatim (its difference is not
    /// required to reproduce the masked difference exactly).
    Explicit {
        main: Vec<f64>,
        subordinate: Vec<f64>,
    },
}

/// Split a masked difference signal into new main/subordinate concentrations
/// with `new_main - new_subordinate = delta_hat` elementwise; untouched
/// elements keep their original values.
pub fn solve_concentration_pair(
    delta_hat: &[f64],
    c1: &Signal,
    c2: &Signal,
    policy: &SolvePolicy,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = delta_hat.len();
    if c1.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: c1.len(),
        });
    }
    if c2.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: c2.len(),
        });
    }
    if let SolvePolicy::Explicit { main, subordinate } = policy {
        if main.len() != m || subordinate.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: main.len().min(subordinate.len()),
            });
        }
        return Ok((main.clone(), subordinate.clone()));
    }
    if let SolvePolicy::PerIndex(sides) = policy {
        if sides.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: sides.len(),
            });
        }
    }
    let mut new1 = c1.values().to_vec();
    let mut new2 = c2.values().to_vec();
    let mut flips = 0usize;
    for i in 0..m {
        let delta_i = c1.values()[i] - c2.values()[i];
        if delta_hat[i] == delta_i {
            continue;
        }
        let side = match policy {
            SolvePolicy::AdjustMain => Side::Main,
            SolvePolicy::AdjustSubordinate => Side::Subordinate,
            SolvePolicy::Alternate => {
                let s = if flips.is_multiple_of(2) {
                    Side::Main
                } else {
                    Side::Subordinate
                };
                flips += 1;
                s
            }
            SolvePolicy::Balanced => {
                let mid = (c1.values()[i] + c2.values()[i]) / 2.0;
                new1[i] = mid + delta_hat[i] / 2.0;
                new2[i] = mid - delta_hat[i] / 2.0;
                if new1[i] < 0.0 || new2[i] < 0.0 {
                    return Err(Error::NegativeConcentration { index: i });
                }
                continue;
            }
            SolvePolicy::PerIndex(sides) => sides[i],
            SolvePolicy::Explicit { .. } => unreachable!(),
        };
        match side {
            Side::Main => new1[i] = c2.values()[i] + delta_hat[i],
            Side::Subordinate => new2[i] = c1.values()[i] - delta_hat[i],
        }
        if new1[i] < 0.0 || new2[i] < 0.0 {
            return Err(Error::NegativeConcentration { index: i });
        }
    }
    Ok((new1, new2))
}

/// Mask the difference of two concentration signals over shared totals.
/// The difference may be negative, so there is no offset step. Each masked
/// quantity signal is rescaled to its own original total and rounded.
#[allow(clippy::too_many_arguments)]
pub fn mask_difference(
    q1: &Signal,
    q2: &Signal,
    totals: &Signal,
    filter: &WaveletFilter,
    level: usize,
    strategy: &MaskingStrategy,
    policy: &SolvePolicy,
    options: &MaskingOptions,
) -> Result<(MaskingResult, MaskingResult)> {
    let c1 = build_concentration_signal(q1, totals)?;
    let c2 = build_concentration_signal(q2, totals)?;
    let delta = build_difference_signal(&c1, &c2)?;
    let dec = decompose(&delta, filter, level)?;
    let extrema = pick_extrema(dec.approx_coeffs(), options);
    let new_coeffs = propose_coefficients(dec.approx_coeffs(), strategy, &extrema)?;
    let (new_approx, delta_hat) = compose_masked_signal(&dec, &new_coeffs)?;
    let (new_c1, new_c2) = solve_concentration_pair(&delta_hat, &c1, &c2, policy)?;

    // the solved pair's difference plays the role of the masked signal when
    // judging detail fidelity in the difference domain
    let solved_delta: Vec<f64> = new_c1.iter().zip(&new_c2).map(|(a, b)| a - b).collect();
    let (detail_ratio, max_detail_deviation) =
        verify_detail_fidelity(&delta, &solved_delta, filter, level)?;

    let mut results = Vec::with_capacity(2);
    for (q, new_c) in [(q1, &new_c1), (q2, &new_c2)] {
        let quantities: Vec<f64> = new_c
            .iter()
            .zip(totals.values())
            .map(|(c, t)| c * t)
            .collect();
        let (masked_real, scale) = rescale_to_sum(&quantities, q.sum())?;
        let masked_int = round_signal(&masked_real, options.rounding);
        results.push(MaskingResult {
            original_coeffs: dec.approx_coeffs().to_vec(),
            new_coeffs: new_coeffs.clone(),
            new_approx: new_approx.clone(),
            raw_masked: delta_hat.clone(),
            offset: 0.0,
            scale,
            masked_real,
            masked_int,
            detail_ratio,
            max_detail_deviation,
        });
    }
    let second = results.pop().expect("two results");
    let first = results.pop().expect("two results");
    Ok((first, second))
}
