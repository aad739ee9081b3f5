//! Group specifications: which records form the group to mask, and over
//! which attribute the group is redistributed.

use crate::error::{Error, Result};
use std::collections::BTreeSet;

/// Selects a respondent group (vital attributes + value combinations) and the
/// parameter attribute whose ordered values index the signals.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    vital_attrs: Vec<String>,
    vital_combinations: BTreeSet<Vec<String>>,
    parameter_attr: String,
    parameter_values: Vec<String>,
    /// Value combinations over the vital attributes defining the enclosing
    /// group used as a concentration denominator. `None` means all records.
    denominator_combinations: Option<BTreeSet<Vec<String>>>,
}

impl GroupSpec {
    pub fn new(
        vital_attrs: Vec<String>,
        vital_combinations: impl IntoIterator<Item = Vec<String>>,
        parameter_attr: String,
        parameter_values: Vec<String>,
        denominator_combinations: Option<BTreeSet<Vec<String>>>,
    ) -> Result<Self> {
        if vital_attrs.contains(&parameter_attr) {
            return Err(Error::InvalidGroupSpec(format!(
                "parameter attribute {parameter_attr:?} is also a vital attribute"
            )));
        }
        if parameter_values.is_empty() {
            return Err(Error::InvalidGroupSpec("no parameter values given".into()));
        }
        for (i, v) in parameter_values.iter().enumerate() {
            if parameter_values[..i].contains(v) {
                return Err(Error::InvalidGroupSpec(format!(
                    "duplicate parameter value {v:?}"
                )));
            }
        }
        let vital_combinations: BTreeSet<Vec<String>> = vital_combinations.into_iter().collect();
        if vital_combinations.is_empty() {
            return Err(Error::InvalidGroupSpec(
                "no vital value combinations given".into(),
            ));
        }
        for combo in &vital_combinations {
            if combo.len() != vital_attrs.len() {
                return Err(Error::InvalidGroupSpec(format!(
                    "vital combination {combo:?} has arity {} but there are {} vital attributes",
                    combo.len(),
                    vital_attrs.len()
                )));
            }
        }
        if let Some(denoms) = &denominator_combinations {
            for combo in denoms {
                if combo.len() != vital_attrs.len() {
                    return Err(Error::InvalidGroupSpec(format!(
                        "denominator combination {combo:?} has wrong arity"
                    )));
                }
            }
            if !vital_combinations.is_subset(denoms) {
                return Err(Error::InvalidGroupSpec(
                    "vital combinations must be contained in the denominator combinations".into(),
                ));
            }
        }
        Ok(GroupSpec {
            vital_attrs,
            vital_combinations,
            parameter_attr,
            parameter_values,
            denominator_combinations,
        })
    }

    pub fn vital_attrs(&self) -> &[String] {
        &self.vital_attrs
    }

    pub fn vital_combinations(&self) -> &BTreeSet<Vec<String>> {
        &self.vital_combinations
    }

    pub fn parameter_attr(&self) -> &str {
        &self.parameter_attr
    }

    pub fn parameter_values(&self) -> &[String] {
        &self.parameter_values
    }

    pub fn denominator_combinations(&self) -> Option<&BTreeSet<Vec<String>>> {
        self.denominator_combinations.as_ref()
    }

    /// Position of a parameter value in the signal index order.
    pub fn parameter_index(&self, value: &str) -> Option<usize> {
        self.parameter_values.iter().position(|v| v == value)
    }
}

/// Main and subordinate group over the same parameter ordering, for the
/// concentration-difference pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedGroupSpec {
    main: GroupSpec,
    subordinate: GroupSpec,
}

impl PairedGroupSpec {
    pub fn new(main: GroupSpec, subordinate: GroupSpec) -> Result<Self> {
        if main.parameter_attr != subordinate.parameter_attr
            || main.parameter_values != subordinate.parameter_values
        {
            return Err(Error::InvalidGroupSpec(
                "main and subordinate specs must share the parameter attribute and value order"
                    .into(),
            ));
        }
        Ok(PairedGroupSpec { main, subordinate })
    }

    pub fn main(&self) -> &GroupSpec {
        &self.main
    }

    pub fn subordinate(&self) -> &GroupSpec {
        &self.subordinate
    }
}

/// One element of a vital value tuple in a config: either a literal value or
/// an inclusive integer range such as ages 18..=25. Ranges are expanded into
/// explicit combination sets at load time.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueSelector {
    Literal(String),
    Range(i64, i64),
}

impl ValueSelector {
    fn expand(&self) -> Vec<String> {
        match self {
            ValueSelector::Literal(s) => vec![s.clone()],
            ValueSelector::Range(lo, hi) => (*lo..=*hi).map(|v| v.to_string()).collect(),
        }
    }
}

/// Cross-product expansion of selector tuples into explicit value combinations.
pub fn expand_combinations(tuples: &[Vec<ValueSelector>]) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    for tuple in tuples {
        let mut partial: Vec<Vec<String>> = vec![Vec::new()];
        for sel in tuple {
            let choices = sel.expand();
            partial = partial
                .into_iter()
                .flat_map(|p| {
                    choices
                        .iter()
                        .map(move |c| {
                            let mut next = p.clone();
                            next.push(c.clone());
                            next
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        out.extend(partial);
    }
    out
}
