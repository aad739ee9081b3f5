//! Run configuration: a TOML file carrying everything a masking run needs.
//!
//! ```toml
//! mode = "quantity"               # quantity | concentration | difference
//! input = "microfile.csv"
//! output = "masked.csv"
//! report = "report.txt"           # optional
//! run_record = "run.json"         # optional
//! seed = 42
//! offset = -800.0                 # optional; omitted = auto
//! rounding = "nearest"            # nearest | sum-preserving
//! solve_policy = "balanced"       # adjust-main | adjust-subordinate | alternate | balanced
//! solve_sides = ["main", "subordinate", ...]   # optional per-index override
//!
//! [wavelet]
//! order = 1
//! level = 1
//!
//! [group]
//! vital_attrs = ["MIL"]
//! vital_values = [["1"]]          # "18..25" spans an inclusive integer range
//! parameter_attr = "POWPUMA"
//! parameter_values = ["12010", "12020"]
//! denominator_values = [["1"], ["0"]]          # optional; omitted = all records
//!
//! [subordinate_group]             # difference mode only
//! vital_attrs = ["SEX", "AGE"]
//! vital_values = [["2", "18..25"]]
//!
//! [strategy]
//! kind = "manual"                 # manual | leveling | permutation
//! coefficients = [0.1, 0.2]       # manual only
//! targets = [3, 4]                # permutation only
//! extrema = [0, 1]                # optional explicit extrema
//! mad_multiplier = 3.0
//! ```

use crate::error::{Error, Result};
use crate::group::{expand_combinations, GroupSpec, PairedGroupSpec, ValueSelector};
use crate::masking::{MaskingOptions, MaskingStrategy, RoundingMode, Side, SolvePolicy};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Quantity,
    Concentration,
    Difference,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantity" => Ok(Mode::Quantity),
            "concentration" => Ok(Mode::Concentration),
            "difference" => Ok(Mode::Difference),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveletConfig {
    pub order: usize,
    pub level: usize,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        WaveletConfig { order: 1, level: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupConfig {
    pub vital_attrs: Vec<String>,
    pub vital_values: Vec<Vec<String>>,
    #[serde(default)]
    pub parameter_attr: Option<String>,
    #[serde(default)]
    pub parameter_values: Vec<String>,
    #[serde(default)]
    pub denominator_values: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: String,
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default)]
    pub targets: Option<Vec<usize>>,
    #[serde(default)]
    pub extrema: Option<Vec<usize>>,
    #[serde(default)]
    pub mad_multiplier: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Largest allowed deviation from exact detail proportionality, as a
    /// multiple of 0.5 * (1 + |ratio|), the elementwise rounding bound.
    #[serde(default = "default_tolerance_factor")]
    pub tolerance_factor: f64,
}

fn default_tolerance_factor() -> f64 {
    1.0
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tolerance_factor: default_tolerance_factor(),
        }
    }
}

/// The full run configuration, as read from TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: PathBuf,
    pub output: PathBuf,
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub run_record: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub offset: Option<f64>,
    #[serde(default)]
    pub rounding: RoundingMode,
    #[serde(default)]
    pub solve_policy: Option<String>,
    #[serde(default)]
    pub solve_sides: Option<Vec<Side>>,
    #[serde(default)]
    pub wavelet: WaveletConfig,
    pub group: GroupConfig,
    #[serde(default)]
    pub subordinate_group: Option<GroupConfig>,
    pub strategy: StrategyConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn parse_selector(raw: &str) -> ValueSelector {
    if let Some((lo, hi)) = raw.split_once("..") {
        if let (Ok(lo), Ok(hi)) = (lo.trim().parse::<i64>(), hi.trim().parse::<i64>()) {
            return ValueSelector::Range(lo, hi);
        }
    }
    ValueSelector::Literal(raw.to_string())
}

fn compile_combinations(tuples: &[Vec<String>]) -> Vec<Vec<String>> {
    let selectors: Vec<Vec<ValueSelector>> = tuples
        .iter()
        .map(|t| t.iter().map(|v| parse_selector(v)).collect())
        .collect();
    expand_combinations(&selectors).into_iter().collect()
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.group.parameter_attr.is_none() {
            return Err(Error::Config("group.parameter_attr is required".into()));
        }
        if self.group.parameter_values.is_empty() {
            return Err(Error::Config("group.parameter_values is required".into()));
        }
        match self.strategy.kind.as_str() {
            "manual" => {
                if self.strategy.coefficients.is_none() {
                    return Err(Error::Config(
                        "manual strategy requires strategy.coefficients".into(),
                    ));
                }
            }
            "leveling" => {}
            "permutation" => {
                if self
                    .strategy
                    .targets
                    .as_deref()
                    .unwrap_or_default()
                    .is_empty()
                {
                    return Err(Error::Config(
                        "permutation strategy requires strategy.targets".into(),
                    ));
                }
            }
            other => return Err(Error::Config(format!("unknown strategy kind {other:?}"))),
        }
        if self.mode == Mode::Difference && self.subordinate_group.is_none() {
            return Err(Error::Config(
                "difference mode requires a [subordinate_group] block".into(),
            ));
        }
        if let Some(p) = &self.solve_policy {
            match p.as_str() {
                "adjust-main" | "adjust-subordinate" | "alternate" | "balanced" => {}
                other => return Err(Error::Config(format!("unknown solve policy {other:?}"))),
            }
        }
        Ok(())
    }

    /// The main group spec with ranges expanded.
    pub fn main_spec(&self) -> Result<GroupSpec> {
        let denoms = self
            .group
            .denominator_values
            .as_ref()
            .map(|d| compile_combinations(d).into_iter().collect());
        GroupSpec::new(
            self.group.vital_attrs.clone(),
            compile_combinations(&self.group.vital_values),
            self.group.parameter_attr.clone().expect("validated"),
            self.group.parameter_values.clone(),
            denoms,
        )
    }

    /// Main plus subordinate specs for difference mode. The subordinate block
    /// inherits the parameter attribute, value order, and denominator rule.
    pub fn paired_spec(&self) -> Result<PairedGroupSpec> {
        let main = self.main_spec()?;
        let sub_cfg = self
            .subordinate_group
            .as_ref()
            .ok_or_else(|| Error::Config("missing [subordinate_group]".into()))?;
        let denoms = sub_cfg
            .denominator_values
            .as_ref()
            .or(self.group.denominator_values.as_ref())
            .map(|d| compile_combinations(d).into_iter().collect());
        let sub = GroupSpec::new(
            sub_cfg.vital_attrs.clone(),
            compile_combinations(&sub_cfg.vital_values),
            main.parameter_attr().to_string(),
            main.parameter_values().to_vec(),
            denoms,
        )?;
        PairedGroupSpec::new(main, sub)
    }

    pub fn strategy(&self) -> Result<MaskingStrategy> {
        Ok(match self.strategy.kind.as_str() {
            "manual" => {
                MaskingStrategy::Manual(self.strategy.coefficients.clone().expect("validated"))
            }
            "leveling" => MaskingStrategy::Leveling,
            "permutation" => MaskingStrategy::Permutation {
                targets: self.strategy.targets.clone().expect("validated"),
            },
            other => return Err(Error::Config(format!("unknown strategy kind {other:?}"))),
        })
    }

    pub fn masking_options(&self) -> MaskingOptions {
        MaskingOptions {
            offset: self.offset,
            rounding: self.rounding,
            extrema: self.strategy.extrema.clone(),
            mad_multiplier: self.strategy.mad_multiplier.unwrap_or(3.0),
        }
    }

    pub fn solve_policy(&self) -> Result<SolvePolicy> {
        if let Some(sides) = &self.solve_sides {
            return Ok(SolvePolicy::PerIndex(sides.clone()));
        }
        Ok(match self.solve_policy.as_deref() {
            None | Some("balanced") => SolvePolicy::Balanced,
            Some("adjust-main") => SolvePolicy::AdjustMain,
            Some("adjust-subordinate") => SolvePolicy::AdjustSubordinate,
            Some("alternate") => SolvePolicy::Alternate,
            Some(other) => return Err(Error::Config(format!("unknown solve policy {other:?}"))),
        })
    }
}
