//! Command implementations behind the `groupanon` binary: mask, inspect,
//! verify. Kept in the library so they are testable without spawning a
//! process.

use crate::builder::{
    build_concentration_signal, build_difference_signal, build_group_totals, build_quantity_signal,
};
use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::masking::{
    mask_concentration, mask_difference, mask_quantity, verify_detail_fidelity, MaskingResult,
};
use crate::microdata::{
    apply_plan, audit, plan_redistribution, AuditReport, Microfile, RedistributionMode,
};
use crate::signal::Signal;
use crate::wavelet::{decompose, WaveletFilter};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Verbosity from the GROUPANON_VERBOSITY environment variable (0 = quiet).
pub fn verbosity() -> u8 {
    std::env::var("GROUPANON_VERBOSITY")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

macro_rules! verbose {
    ($($arg:tt)*) => {
        if verbosity() > 0 {
            eprintln!($($arg)*);
        }
    };
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Everything recorded about one group's pass through a pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupRunRecord {
    pub name: String,
    pub original_signal: Vec<f64>,
    pub original_coeffs: Vec<f64>,
    pub new_coeffs: Vec<f64>,
    pub offset: f64,
    pub scale: f64,
    pub detail_ratio: f64,
    pub max_detail_deviation: f64,
    pub masked_real: Vec<f64>,
    pub masked_int: Vec<i64>,
    pub moves: usize,
    pub audit: AuditReport,
}

/// Machine-readable record of a full mask run; contains every number needed
/// to replay the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub mode: Mode,
    pub seed: u64,
    pub wavelet_order: usize,
    pub wavelet_level: usize,
    pub rounding: crate::masking::RoundingMode,
    pub labels: Vec<String>,
    pub groups: Vec<GroupRunRecord>,
}

/// Outcome of `cmd_mask`, also returned to callers for inspection.
pub struct MaskOutcome {
    pub record: RunRecord,
    pub masked: Microfile,
}

fn signal_line(label: &str, values: &[f64]) -> String {
    let rendered: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    format!("{label}: ({})\n", rendered.join(", "))
}

fn group_record(
    name: &str,
    signal: &Signal,
    result: &MaskingResult,
    moves: usize,
    report: AuditReport,
) -> GroupRunRecord {
    GroupRunRecord {
        name: name.to_string(),
        original_signal: signal.values().to_vec(),
        original_coeffs: result.original_coeffs.clone(),
        new_coeffs: result.new_coeffs.clone(),
        offset: result.offset,
        scale: result.scale,
        detail_ratio: result.detail_ratio,
        max_detail_deviation: result.max_detail_deviation,
        masked_real: result.masked_real.clone(),
        masked_int: result.masked_int.clone(),
        moves,
        audit: report,
    }
}

/// Plan and apply the edits realizing `target` for one group.
fn realize(
    mf: &Microfile,
    spec: &GroupSpec,
    target: &[i64],
    mode: RedistributionMode,
    seed: u64,
    protected: &[&GroupSpec],
) -> Result<(Microfile, usize, AuditReport)> {
    let plan = plan_redistribution(mf, spec, target, mode, seed, protected)?;
    let moves = plan.moves.len();
    let applied = apply_plan(mf, &plan)?;
    let report = audit(mf, &applied, spec, target)?;
    Ok((applied, moves, report))
}

/// Run a full masking pipeline: mask the signal, rewrite the microfile,
/// audit, and write the output file, report, and run record.
pub fn cmd_mask(config: &RunConfig) -> Result<MaskOutcome> {
    config.validate()?;
    let filter = WaveletFilter::daubechies(config.wavelet.order)?;
    let level = config.wavelet.level;
    let strategy = config.strategy()?;
    let options = config.masking_options();
    let mf = Microfile::load_csv(&config.input)?;
    verbose!(
        "loaded {} records from {}",
        mf.record_count(),
        config.input.display()
    );

    let mut groups = Vec::new();
    let masked_file = match config.mode {
        Mode::Quantity => {
            let spec = config.main_spec()?;
            let q = build_quantity_signal(&mf, &spec, false)?;
            let result = mask_quantity(&q, &filter, level, &strategy, &options)?;
            let (applied, moves, report) = realize(
                &mf,
                &spec,
                &result.masked_int,
                RedistributionMode::Free,
                config.seed,
                &[],
            )?;
            groups.push(group_record("main", &q, &result, moves, report));
            applied
        }
        Mode::Concentration => {
            let spec = config.main_spec()?;
            let q = build_quantity_signal(&mf, &spec, false)?;
            let totals = build_group_totals(&mf, &spec)?;
            let result = mask_concentration(&q, &totals, &filter, level, &strategy, &options)?;
            let (applied, moves, report) = realize(
                &mf,
                &spec,
                &result.masked_int,
                RedistributionMode::DenominatorPreserving,
                config.seed,
                &[],
            )?;
            groups.push(group_record("main", &q, &result, moves, report));
            applied
        }
        Mode::Difference => {
            let paired = config.paired_spec()?;
            let (main, sub) = (paired.main(), paired.subordinate());
            let q1 = build_quantity_signal(&mf, main, false)?;
            let q2 = build_quantity_signal(&mf, sub, false)?;
            let totals = build_group_totals(&mf, main)?;
            let policy = config.solve_policy()?;
            let (r1, r2) = mask_difference(
                &q1, &q2, &totals, &filter, level, &strategy, &policy, &options,
            )?;
            let (after_main, moves1, report1) = realize(
                &mf,
                main,
                &r1.masked_int,
                RedistributionMode::DenominatorPreserving,
                config.seed,
                &[sub],
            )?;
            let (after_both, moves2, report2) = realize(
                &after_main,
                sub,
                &r2.masked_int,
                RedistributionMode::DenominatorPreserving,
                config.seed.wrapping_add(1),
                &[main],
            )?;
            groups.push(group_record("main", &q1, &r1, moves1, report1));
            groups.push(group_record("subordinate", &q2, &r2, moves2, report2));
            after_both
        }
    };

    let labels = config.main_spec()?.parameter_values().to_vec();
    let record = RunRecord {
        mode: config.mode,
        seed: config.seed,
        wavelet_order: config.wavelet.order,
        wavelet_level: level,
        rounding: config.rounding,
        labels,
        groups,
    };

    masked_file.save_csv(&config.output)?;
    if let Some(path) = &config.report {
        write_atomic(path, &render_report(config, &record))?;
    }
    if let Some(path) = &config.run_record {
        let json =
            serde_json::to_string_pretty(&record).map_err(|e| Error::Config(e.to_string()))?;
        write_atomic(path, &json)?;
    }
    Ok(MaskOutcome {
        record,
        masked: masked_file,
    })
}

fn render_report(config: &RunConfig, record: &RunRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "group anonymity mask run");
    let _ = writeln!(out, "mode: {:?}", record.mode);
    let _ = writeln!(out, "input: {}", config.input.display());
    let _ = writeln!(out, "output: {}", config.output.display());
    let _ = writeln!(
        out,
        "wavelet: daubechies order {} level {}",
        record.wavelet_order, record.wavelet_level
    );
    let _ = writeln!(out, "seed: {}", record.seed);
    for g in &record.groups {
        let _ = writeln!(out, "\n[{}]", g.name);
        out.push_str(&signal_line("original", &g.original_signal));
        out.push_str(&signal_line("coefficients", &g.original_coeffs));
        out.push_str(&signal_line("new coefficients", &g.new_coeffs));
        let _ = writeln!(out, "offset: {}", g.offset);
        let _ = writeln!(out, "scale: {:.4}", g.scale);
        let _ = writeln!(out, "detail ratio: {:.4}", g.detail_ratio);
        let _ = writeln!(out, "max detail deviation: {:.6e}", g.max_detail_deviation);
        let masked: Vec<f64> = g.masked_int.iter().map(|&v| v as f64).collect();
        out.push_str(&signal_line("masked", &masked));
        let _ = writeln!(out, "record moves: {}", g.moves);
        let _ = writeln!(out, "audit:\n{}", g.audit);
    }
    out
}

/// Decompose the configured signal and render it with its approximation,
/// details, and flagged extrema. Optionally emit plot-ready tab-separated
/// series: label, signal, approximation, then one column per detail level.
pub fn cmd_inspect(config: &RunConfig, emit_plot: Option<&Path>) -> Result<String> {
    config.validate()?;
    let filter = WaveletFilter::daubechies(config.wavelet.order)?;
    let level = config.wavelet.level;
    let mf = Microfile::load_csv(&config.input)?;
    let spec = config.main_spec()?;
    let signal = match config.mode {
        Mode::Quantity => build_quantity_signal(&mf, &spec, false)?,
        Mode::Concentration => {
            let q = build_quantity_signal(&mf, &spec, false)?;
            let totals = build_group_totals(&mf, &spec)?;
            build_concentration_signal(&q, &totals)?
        }
        Mode::Difference => {
            let paired = config.paired_spec()?;
            let q1 = build_quantity_signal(&mf, paired.main(), false)?;
            let q2 = build_quantity_signal(&mf, paired.subordinate(), false)?;
            let totals = build_group_totals(&mf, paired.main())?;
            let c1 = build_concentration_signal(&q1, &totals)?;
            let c2 = build_concentration_signal(&q2, &totals)?;
            build_difference_signal(&c1, &c2)?
        }
    };
    let dec = decompose(&signal, &filter, level)?;
    let options = config.masking_options();
    let extrema = match &options.extrema {
        Some(e) => e.clone(),
        None => crate::masking::detect_extrema(dec.approx_coeffs(), options.mad_multiplier),
    };

    let mut out = String::new();
    out.push_str(&signal_line("signal", signal.values()));
    out.push_str(&signal_line(&format!("A_{level}"), dec.approx()));
    for (i, d) in dec.details().iter().enumerate() {
        out.push_str(&signal_line(&format!("D_{}", i + 1), d));
    }
    out.push_str(&signal_line("coefficients", dec.approx_coeffs()));
    let _ = writeln!(out, "extremal coefficient indices: {extrema:?}");

    if let Some(path) = emit_plot {
        let mut plot = String::from("label\tsignal\tapprox");
        for i in 1..=level {
            let _ = write!(plot, "\td{i}");
        }
        plot.push('\n');
        for row in 0..signal.len() {
            let _ = write!(
                plot,
                "{}\t{}\t{}",
                signal.labels()[row],
                signal.values()[row],
                dec.approx()[row]
            );
            for d in dec.details() {
                let _ = write!(plot, "\t{}", d[row]);
            }
            plot.push('\n');
        }
        write_atomic(path, &plot)?;
    }
    Ok(out)
}

/// Outcome of `cmd_verify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub detail_ratio: f64,
    pub max_detail_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub report: String,
}

fn domain_signal(config: &RunConfig, mf: &Microfile) -> Result<Signal> {
    let spec = config.main_spec()?;
    match config.mode {
        Mode::Quantity => build_quantity_signal(mf, &spec, false),
        Mode::Concentration => {
            let q = build_quantity_signal(mf, &spec, false)?;
            let totals = build_group_totals(mf, &spec)?;
            build_concentration_signal(&q, &totals)
        }
        Mode::Difference => {
            let paired = config.paired_spec()?;
            let q1 = build_quantity_signal(mf, paired.main(), false)?;
            let q2 = build_quantity_signal(mf, paired.subordinate(), false)?;
            let totals = build_group_totals(mf, paired.main())?;
            let c1 = build_concentration_signal(&q1, &totals)?;
            let c2 = build_concentration_signal(&q2, &totals)?;
            build_difference_signal(&c1, &c2)
        }
    }
}

/// Recompute signals from an original and a masked microfile, measure detail
/// fidelity, and check the conservation rules of the configured pipeline.
pub fn cmd_verify(config: &RunConfig, original: &Path, masked: &Path) -> Result<VerifyOutcome> {
    config.validate()?;
    let before = Microfile::load_csv(original)?;
    let after = Microfile::load_csv(masked)?;
    if before.schema() != after.schema() {
        return Err(Error::SchemaMismatch(format!(
            "{:?} vs {:?}",
            before.schema(),
            after.schema()
        )));
    }
    let filter = WaveletFilter::daubechies(config.wavelet.order)?;
    let level = config.wavelet.level;

    let mut failures: Vec<String> = Vec::new();
    if before.record_count() != after.record_count() {
        failures.push(format!(
            "record count changed: {} -> {}",
            before.record_count(),
            after.record_count()
        ));
    }

    // conservation per group: total vital count must not change
    let mut specs: Vec<(String, GroupSpec)> = vec![("main".into(), config.main_spec()?)];
    if config.mode == Mode::Difference {
        let paired = config.paired_spec()?;
        specs.push(("subordinate".into(), paired.subordinate().clone()));
    }
    for (name, spec) in &specs {
        let qb = build_quantity_signal(&before, spec, false)?;
        let qa = build_quantity_signal(&after, spec, false)?;
        if qb.sum() != qa.sum() {
            for (i, (b, a)) in qb.values().iter().zip(qa.values()).enumerate() {
                if b != a {
                    failures.push(format!(
                        "{name} group, bucket {:?}: count {b} -> {a}",
                        spec.parameter_values()[i]
                    ));
                }
            }
            failures.push(format!(
                "{name} group total changed: {} -> {}",
                qb.sum(),
                qa.sum()
            ));
        }
    }

    // denominator totals must be fixed for the ratio-based pipelines
    if config.mode != Mode::Quantity {
        let spec = config.main_spec()?;
        let tb = build_group_totals(&before, &spec)?;
        let ta = build_group_totals(&after, &spec)?;
        for (i, (b, a)) in tb.values().iter().zip(ta.values()).enumerate() {
            if b != a {
                failures.push(format!(
                    "bucket {:?}: denominator total {b} -> {a}",
                    spec.parameter_values()[i]
                ));
            }
        }
    }

    let sig_before = domain_signal(config, &before)?;
    let sig_after = domain_signal(config, &after)?;
    let (detail_ratio, max_detail_deviation) =
        verify_detail_fidelity(&sig_before, sig_after.values(), &filter, level)?;

    // rounding perturbs each quantity by at most 0.5; in the ratio domains
    // that bound shrinks by the smallest denominator
    let domain_unit = match config.mode {
        Mode::Quantity => 1.0,
        _ => {
            let spec = config.main_spec()?;
            let totals = build_group_totals(&after, &spec)?;
            totals
                .values()
                .iter()
                .copied()
                .filter(|&t| t > 0.0)
                .fold(f64::INFINITY, f64::min)
                .recip()
        }
    };
    let tolerance = config.verify.tolerance_factor * 0.5 * (1.0 + detail_ratio.abs()) * domain_unit;
    if max_detail_deviation > tolerance {
        failures.push(format!(
            "detail deviation {max_detail_deviation:.6e} exceeds tolerance {tolerance:.6e}"
        ));
    }

    let passed = failures.is_empty();
    let mut report = String::new();
    let _ = writeln!(report, "detail ratio: {detail_ratio:.4}");
    let _ = writeln!(report, "max detail deviation: {max_detail_deviation:.6e}");
    let _ = writeln!(report, "tolerance: {tolerance:.6e}");
    for f in &failures {
        let _ = writeln!(report, "FAIL: {f}");
    }
    let _ = writeln!(report, "verdict: {}", if passed { "pass" } else { "fail" });
    Ok(VerifyOutcome {
        detail_ratio,
        max_detail_deviation,
        tolerance,
        passed,
        report,
    })
}
