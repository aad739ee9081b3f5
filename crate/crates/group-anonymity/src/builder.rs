//! Building quantity, concentration, and difference signals from a microfile.

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::microdata::Microfile;
use crate::signal::{Signal, SignalFlavor};
use std::collections::BTreeSet;

fn count_per_bucket(
    mf: &Microfile,
    spec: &GroupSpec,
    combos: &BTreeSet<Vec<String>>,
    strict: bool,
) -> Result<Vec<f64>> {
    let vital_idx = mf.attr_indices(spec.vital_attrs())?;
    let param_idx = mf.attr_index(spec.parameter_attr())?;
    let m = spec.parameter_values().len();
    let mut counts = vec![0.0; m];
    let mut seen = vec![false; m];
    for rec in mf.records() {
        // records with out-of-range parameter values take no part in any signal
        let Some(bucket) = spec.parameter_index(&rec[param_idx]) else {
            continue;
        };
        seen[bucket] = true;
        let tuple: Vec<String> = vital_idx.iter().map(|&i| rec[i].clone()).collect();
        if combos.contains(&tuple) {
            counts[bucket] += 1.0;
        }
    }
    if strict {
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::UnknownParameterValue(
                spec.parameter_values()[i].clone(),
            ));
        }
    }
    Ok(counts)
}

/// Count the vital group per parameter value.
///
/// With `strict` set, a parameter value that never occurs in the microfile is
/// an error; otherwise its count is zero.
pub fn build_quantity_signal(mf: &Microfile, spec: &GroupSpec, strict: bool) -> Result<Signal> {
    let counts = count_per_bucket(mf, spec, spec.vital_combinations(), strict)?;
    Signal::new(
        counts,
        spec.parameter_values().to_vec(),
        SignalFlavor::Quantity,
    )
}

/// Count the enclosing (denominator) group per parameter value. Defaults to
/// all records when the spec names no denominator combinations.
pub fn build_group_totals(mf: &Microfile, spec: &GroupSpec) -> Result<Signal> {
    let counts = match spec.denominator_combinations() {
        Some(denoms) => count_per_bucket(mf, spec, denoms, false)?,
        None => {
            let param_idx = mf.attr_index(spec.parameter_attr())?;
            let m = spec.parameter_values().len();
            let mut counts = vec![0.0; m];
            for rec in mf.records() {
                if let Some(bucket) = spec.parameter_index(&rec[param_idx]) {
                    counts[bucket] += 1.0;
                }
            }
            counts
        }
    };
    Signal::new(
        counts,
        spec.parameter_values().to_vec(),
        SignalFlavor::Quantity,
    )
}

/// c_i = q_i / totals_i. A 0/0 bucket yields 0: an empty bucket carries no
/// disclosure risk and must not poison the pipeline.
pub fn build_concentration_signal(q: &Signal, totals: &Signal) -> Result<Signal> {
    if q.len() != totals.len() {
        return Err(Error::LengthMismatch {
            expected: q.len(),
            got: totals.len(),
        });
    }
    let mut values = Vec::with_capacity(q.len());
    for (i, (&num, &den)) in q.values().iter().zip(totals.values()).enumerate() {
        if den == 0.0 {
            if num > 0.0 {
                return Err(Error::DivisorZero(i));
            }
            values.push(0.0);
        } else {
            values.push(num / den);
        }
    }
    Signal::new(values, q.labels().to_vec(), SignalFlavor::Concentration)
}

/// delta_i = c1_i - c2_i over identical labels.
pub fn build_difference_signal(c1: &Signal, c2: &Signal) -> Result<Signal> {
    if c1.len() != c2.len() {
        return Err(Error::LengthMismatch {
            expected: c1.len(),
            got: c2.len(),
        });
    }
    for (i, (a, b)) in c1.labels().iter().zip(c2.labels()).enumerate() {
        if a != b {
            return Err(Error::LabelMismatch {
                index: i,
                left: a.clone(),
                right: b.clone(),
            });
        }
    }
    let values = c1
        .values()
        .iter()
        .zip(c2.values())
        .map(|(a, b)| a - b)
        .collect();
    Signal::new(values, c1.labels().to_vec(), SignalFlavor::Difference)
}
