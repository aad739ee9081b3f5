//! Microfile storage: CSV load/save, redistribution planning, and auditing.
//!
//! Values are opaque categorical strings. A redistribution plan only ever
//! edits the parameter attribute: vital attribute values are never touched,
//! so no group members are fabricated or destroyed.

use crate::builder::build_quantity_signal;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Where a microfile came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub loaded_at: String,
}

/// A table of depersonalized respondent records.
#[derive(Debug, Clone, Default)]
pub struct Microfile {
    schema: Vec<String>,
    records: Vec<Vec<String>>,
    provenance: Option<Provenance>,
}

impl PartialEq for Microfile {
    /// Provenance is metadata and does not participate in equality.
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.records == other.records
    }
}

impl Microfile {
    pub fn new(schema: Vec<String>, records: Vec<Vec<String>>) -> Result<Self> {
        for (i, a) in schema.iter().enumerate() {
            if schema[..i].contains(a) {
                return Err(Error::DuplicateAttribute(a.clone()));
            }
        }
        for (i, r) in records.iter().enumerate() {
            if r.len() != schema.len() {
                return Err(Error::MalformedRow {
                    line: i as u64 + 2,
                    expected: schema.len(),
                    got: r.len(),
                });
            }
        }
        Ok(Microfile {
            schema,
            records,
            provenance: None,
        })
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn records(&self) -> &[Vec<String>] {
        &self.records
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn attr_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    /// Indices of the given attributes, in order.
    pub fn attr_indices(&self, names: &[String]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.attr_index(n)).collect()
    }

    /// Load a comma-separated file with a header row naming the attributes.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
        let schema: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        for (i, a) in schema.iter().enumerate() {
            if schema[..i].contains(a) {
                return Err(Error::DuplicateAttribute(a.clone()));
            }
        }
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row?;
            if row.len() != schema.len() {
                let line = row.position().map(|p| p.line()).unwrap_or(0);
                return Err(Error::MalformedRow {
                    line,
                    expected: schema.len(),
                    got: row.len(),
                });
            }
            records.push(row.iter().map(str::to_string).collect());
        }
        let loaded_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_default();
        Ok(Microfile {
            schema,
            records,
            provenance: Some(Provenance {
                source: path.display().to_string(),
                loaded_at,
            }),
        })
    }

    /// Write as CSV, atomically (temp file in the target directory, then rename).
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        {
            let mut writer = csv::Writer::from_path(&tmp)?;
            writer.write_record(&self.schema)?;
            for rec in &self.records {
                writer.write_record(rec)?;
            }
            writer.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// One record edit: rewrite `attribute` of `record` from `old_value` to `new_value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub record: usize,
    pub attribute: String,
    pub old_value: String,
    pub new_value: String,
}

/// Redistribution mode for [`plan_redistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RedistributionMode {
    /// Move vital records between buckets by editing their parameter value.
    Free,
    /// Pair every vital move with a counter-move of a non-vital denominator
    /// record so each bucket's denominator total is unchanged.
    DenominatorPreserving,
}

/// A set of record edits realizing a target quantity signal.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SwapPlan {
    pub moves: Vec<Move>,
    /// Signed vital-count change per parameter value.
    pub deltas: BTreeMap<String, i64>,
}

impl SwapPlan {
    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Per-record classification used while planning.
struct Classified {
    bucket: Option<usize>,
    vital: bool,
    denominator: bool,
    protected: bool,
}

fn classify(mf: &Microfile, spec: &GroupSpec, protected: &[&GroupSpec]) -> Result<Vec<Classified>> {
    let vital_idx = mf.attr_indices(spec.vital_attrs())?;
    let param_idx = mf.attr_index(spec.parameter_attr())?;
    let mut protected_idx = Vec::new();
    for p in protected {
        protected_idx.push((mf.attr_indices(p.vital_attrs())?, *p));
    }
    let mut out = Vec::with_capacity(mf.record_count());
    for rec in mf.records() {
        let tuple: Vec<String> = vital_idx.iter().map(|&i| rec[i].clone()).collect();
        let vital = spec.vital_combinations().contains(&tuple);
        let denominator = match spec.denominator_combinations() {
            Some(denoms) => denoms.contains(&tuple),
            None => true,
        };
        let is_protected = protected_idx.iter().any(|(idx, p)| {
            let t: Vec<String> = idx.iter().map(|&i| rec[i].clone()).collect();
            p.vital_combinations().contains(&t)
        });
        out.push(Classified {
            bucket: spec.parameter_index(&rec[param_idx]),
            vital,
            denominator,
            protected: is_protected,
        });
    }
    Ok(out)
}

/// Plan record edits so that the vital-group count per parameter value equals
/// `target`. Movable records are drawn uniformly at random under the seeded
/// generator, so plans are reproducible.
///
/// `protected` lists group specs whose vital counts must not be disturbed;
/// their members are never chosen as movers or exchange partners.
pub fn plan_redistribution(
    mf: &Microfile,
    spec: &GroupSpec,
    target: &[i64],
    mode: RedistributionMode,
    seed: u64,
    protected: &[&GroupSpec],
) -> Result<SwapPlan> {
    let labels = spec.parameter_values();
    if target.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            got: target.len(),
        });
    }
    if let Some(i) = target.iter().position(|&t| t < 0) {
        return Err(Error::NegativeTarget(labels[i].clone()));
    }
    let current = build_quantity_signal(mf, spec, false)?;
    let current: Vec<i64> = current.values().iter().map(|&v| v as i64).collect();
    let total_now: i64 = current.iter().sum();
    let total_want: i64 = target.iter().sum();
    if total_now != total_want {
        return Err(Error::InfeasibleTarget(format!(
            "target sum {total_want} differs from current vital-group total {total_now}"
        )));
    }

    let classes = classify(mf, spec, protected)?;
    let param_attr = spec.parameter_attr().to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Per-bucket pools of movable vital records and (for paired swaps)
    // non-vital denominator partners.
    let m = labels.len();
    let mut movers: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut partners: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, c) in classes.iter().enumerate() {
        if let Some(b) = c.bucket {
            if c.vital && !c.protected {
                movers[b].push(i);
            } else if !c.vital && c.denominator && !c.protected {
                partners[b].push(i);
            }
        }
    }
    for pool in movers.iter_mut().chain(partners.iter_mut()) {
        pool.shuffle(&mut rng);
    }

    let mut surplus: Vec<(usize, i64)> = Vec::new();
    let mut deficit: Vec<(usize, i64)> = Vec::new();
    for b in 0..m {
        let d = current[b] - target[b];
        if d > 0 {
            surplus.push((b, d));
        } else if d < 0 {
            deficit.push((b, -d));
        }
    }

    let mut moves = Vec::new();
    let mut deltas = BTreeMap::new();
    for b in 0..m {
        let d = target[b] - current[b];
        if d != 0 {
            deltas.insert(labels[b].clone(), d);
        }
    }

    let mut di = 0;
    for (from, mut excess) in surplus {
        while excess > 0 {
            while di < deficit.len() && deficit[di].1 == 0 {
                di += 1;
            }
            let (to, _) = deficit[di];
            let mover = movers[from].pop().ok_or_else(|| {
                Error::InfeasibleTarget(format!(
                    "bucket {:?} lacks movable vital records",
                    labels[from]
                ))
            })?;
            moves.push(Move {
                record: mover,
                attribute: param_attr.clone(),
                old_value: labels[from].clone(),
                new_value: labels[to].clone(),
            });
            if mode == RedistributionMode::DenominatorPreserving {
                let partner = partners[to].pop().ok_or_else(|| {
                    Error::InfeasibleTarget(format!(
                        "bucket {:?} lacks non-vital denominator records for a paired exchange",
                        labels[to]
                    ))
                })?;
                moves.push(Move {
                    record: partner,
                    attribute: param_attr.clone(),
                    old_value: labels[to].clone(),
                    new_value: labels[from].clone(),
                });
            }
            deficit[di].1 -= 1;
            excess -= 1;
        }
    }
    Ok(SwapPlan { moves, deltas })
}

/// Apply a plan, producing a new microfile. Fails if any move's recorded old
/// value no longer matches the file (stale plan).
pub fn apply_plan(mf: &Microfile, plan: &SwapPlan) -> Result<Microfile> {
    let mut records = mf.records.clone();
    for mv in &plan.moves {
        let col = mf.attr_index(&mv.attribute)?;
        let cell = records
            .get_mut(mv.record)
            .ok_or(Error::DimensionMismatch {
                expected: mf.record_count(),
                got: mv.record,
            })?
            .get_mut(col)
            .expect("attr_index bounds the column");
        if *cell != mv.old_value {
            return Err(Error::StalePlan {
                record: mv.record,
                attribute: mv.attribute.clone(),
                expected: mv.old_value.clone(),
            });
        }
        *cell = mv.new_value.clone();
    }
    Ok(Microfile {
        schema: mf.schema.clone(),
        records,
        provenance: mf.provenance.clone(),
    })
}

/// Post-edit verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub record_count_unchanged: bool,
    pub counts_match_target: bool,
    pub denominators_unchanged: bool,
    pub edited_attributes: Vec<String>,
    pub edited_records: usize,
    pub failures: Vec<String>,
}

impl AuditReport {
    /// True when every applicable check succeeded. Denominator preservation is
    /// only required in denominator-preserving pipelines.
    pub fn passed(&self, require_denominators: bool) -> bool {
        self.record_count_unchanged
            && self.counts_match_target
            && (!require_denominators || self.denominators_unchanged)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "record count unchanged: {}", self.record_count_unchanged)?;
        writeln!(f, "vital counts match target: {}", self.counts_match_target)?;
        writeln!(
            f,
            "denominator totals unchanged: {}",
            self.denominators_unchanged
        )?;
        writeln!(f, "edited attributes: {:?}", self.edited_attributes)?;
        writeln!(f, "edited records: {}", self.edited_records)?;
        for fail in &self.failures {
            writeln!(f, "FAIL: {fail}")?;
        }
        Ok(())
    }
}

/// Compare the microfile before and after an edit against the target signal.
pub fn audit(
    before: &Microfile,
    after: &Microfile,
    spec: &GroupSpec,
    target: &[i64],
) -> Result<AuditReport> {
    if before.schema != after.schema {
        return Err(Error::InvalidGroupSpec(
            "schema mismatch between before and after".into(),
        ));
    }
    let mut failures = Vec::new();
    let record_count_unchanged = before.record_count() == after.record_count();
    if !record_count_unchanged {
        failures.push(format!(
            "record count changed: {} -> {}",
            before.record_count(),
            after.record_count()
        ));
    }

    let counts = build_quantity_signal(after, spec, false)?;
    let mut counts_match_target = target.len() == counts.len();
    for (i, (&got, &want)) in counts.values().iter().zip(target).enumerate() {
        if got as i64 != want {
            counts_match_target = false;
            failures.push(format!(
                "bucket {:?}: vital count {got} != target {want}",
                spec.parameter_values()[i]
            ));
        }
    }

    let denom_spec = GroupSpec::new(
        spec.vital_attrs().to_vec(),
        spec.denominator_combinations()
            .cloned()
            .unwrap_or_else(|| spec.vital_combinations().clone()),
        spec.parameter_attr().to_string(),
        spec.parameter_values().to_vec(),
        None,
    )?;
    let (denom_before, denom_after) = if spec.denominator_combinations().is_some() {
        (
            build_quantity_signal(before, &denom_spec, false)?,
            build_quantity_signal(after, &denom_spec, false)?,
        )
    } else {
        (
            crate::builder::build_group_totals(before, spec)?,
            crate::builder::build_group_totals(after, spec)?,
        )
    };
    let mut denominators_unchanged = true;
    for (i, (b, a)) in denom_before
        .values()
        .iter()
        .zip(denom_after.values())
        .enumerate()
    {
        if b != a {
            denominators_unchanged = false;
            failures.push(format!(
                "bucket {:?}: denominator total {b} -> {a}",
                spec.parameter_values()[i]
            ));
        }
    }

    let mut edited_attributes = Vec::new();
    let mut edited_records = 0;
    if record_count_unchanged {
        for (b, a) in before.records().iter().zip(after.records()) {
            let mut any = false;
            for (col, (vb, va)) in b.iter().zip(a).enumerate() {
                if vb != va {
                    any = true;
                    let name = &before.schema[col];
                    if !edited_attributes.contains(name) {
                        edited_attributes.push(name.clone());
                    }
                }
            }
            if any {
                edited_records += 1;
            }
        }
    }

    Ok(AuditReport {
        record_count_unchanged,
        counts_match_target,
        denominators_unchanged,
        edited_attributes,
        edited_records,
        failures,
    })
}
