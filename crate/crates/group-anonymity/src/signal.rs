//! Signals over an ordered range of parameter values.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// What a signal's values mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalFlavor {
    /// Record counts per parameter value. Non-negative integers.
    Quantity,
    /// Group share of an enclosing total per parameter value.
    Concentration,
    /// Elementwise difference of two concentration signals. May be negative.
    Difference,
}

/// An ordered real vector indexed by parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    values: Vec<f64>,
    labels: Vec<String>,
    flavor: SignalFlavor,
}

impl Signal {
    pub fn new(values: Vec<f64>, labels: Vec<String>, flavor: SignalFlavor) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SignalTooShort {
                len: values.len(),
                min: 2,
            });
        }
        if labels.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                got: labels.len(),
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidSignal(format!("duplicate label {l:?}")));
            }
        }
        if flavor == SignalFlavor::Quantity {
            for &v in &values {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::InvalidSignal(format!(
                        "quantity signals hold non-negative integers, got {v}"
                    )));
                }
            }
        }
        Ok(Signal {
            values,
            labels,
            flavor,
        })
    }

    /// Quantity signal with labels "0", "1", ... — convenient in tests.
    pub fn quantity(values: Vec<f64>) -> Result<Self> {
        let labels = (0..values.len()).map(|i| i.to_string()).collect();
        Signal::new(values, labels, SignalFlavor::Quantity)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn flavor(&self) -> SignalFlavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}
