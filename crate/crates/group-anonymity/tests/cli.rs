//! Black-box tests of the groupanon binary: flags, exit codes, and the
//! inspect/verify surfaces.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_groupanon");

struct Rng(u64);

impl Rng {
    fn below(&mut self, n: u64) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x % n
    }
}

fn write_microfile(path: &Path, n: usize) {
    let mut rng = Rng(0xc0ffee);
    let mut csv = String::from("ID,SEX,MIL,PUMA\n");
    for i in 0..n {
        // MIL 1 and 2 are two disjoint study groups (~17% each); the rest of
        // the population is untouched by either
        let mil = match rng.below(6) {
            0 => 1,
            1 => 2,
            _ => 0,
        };
        let puma = if mil == 1 && rng.below(2) == 0 {
            0
        } else {
            rng.below(6)
        };
        csv.push_str(&format!("{i},{},{mil},P{puma:02}\n", 1 + rng.below(2)));
    }
    std::fs::write(path, csv).unwrap();
}

fn write_config(dir: &Path, mode: &str) -> (PathBuf, PathBuf, PathBuf) {
    let input = dir.join("input.csv");
    let output = dir.join("masked.csv");
    let config = dir.join(format!("{mode}.toml"));
    let sub = if mode == "difference" {
        "\n[subordinate_group]\nvital_attrs = [\"MIL\"]\nvital_values = [[\"2\"]]\n"
    } else {
        ""
    };
    std::fs::write(
        &config,
        format!(
            r#"
mode = "{mode}"
input = "{}"
output = "{}"
seed = 9
rounding = "sum-preserving"
{sub}
[group]
vital_attrs = ["MIL"]
vital_values = [["1"]]
parameter_attr = "PUMA"
parameter_values = ["P00", "P01", "P02", "P03", "P04", "P05"]

[strategy]
kind = "leveling"
"#,
            input.display(),
            output.display()
        ),
    )
    .unwrap();
    (config, input, output)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn mask_then_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (config, input, output) = write_config(dir.path(), "quantity");
    write_microfile(&input, 1500);

    let masked = run(&["mask", "--config", config.to_str().unwrap()]);
    assert!(
        masked.status.success(),
        "{}",
        String::from_utf8_lossy(&masked.stderr)
    );

    let verify = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        input.to_str().unwrap(),
        output.to_str().unwrap(),
    ]);
    assert!(verify.status.success(), "{}", stdout(&verify));
    assert!(stdout(&verify).contains("verdict: pass"));
}

#[test]
fn verify_names_a_corrupted_bucket() {
    let dir = tempfile::tempdir().unwrap();
    let (config, input, output) = write_config(dir.path(), "quantity");
    write_microfile(&input, 1500);
    run(&["mask", "--config", config.to_str().unwrap()]);

    // append 10 extra vital records to one bucket
    let mut text = std::fs::read_to_string(&output).unwrap();
    for i in 0..10 {
        text.push_str(&format!("x{i},1,1,P03\n"));
    }
    std::fs::write(&output, text).unwrap();

    let verify = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        input.to_str().unwrap(),
        output.to_str().unwrap(),
    ]);
    assert_eq!(verify.status.code(), Some(2), "{}", stdout(&verify));
    let report = stdout(&verify);
    assert!(report.contains("verdict: fail"), "{report}");
    assert!(
        report.contains("P03"),
        "corrupted bucket not named: {report}"
    );
}

#[test]
fn verify_rejects_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let (config, input, _) = write_config(dir.path(), "quantity");
    write_microfile(&input, 300);
    let other = dir.path().join("other.csv");
    std::fs::write(&other, "ID,GENDER,MIL,PUMA\n0,1,1,P00\n").unwrap();

    let verify = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        input.to_str().unwrap(),
        other.to_str().unwrap(),
    ]);
    assert_eq!(verify.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&verify.stderr).contains("schema"));
}

#[test]
fn concentration_and_difference_modes_round_trip() {
    for mode in ["concentration", "difference"] {
        let dir = tempfile::tempdir().unwrap();
        let (config, input, output) = write_config(dir.path(), mode);
        write_microfile(&input, 2400);

        let masked = run(&["mask", "--config", config.to_str().unwrap()]);
        assert!(
            masked.status.success(),
            "{mode}: {}",
            String::from_utf8_lossy(&masked.stderr)
        );
        let verify = run(&[
            "verify",
            "--config",
            config.to_str().unwrap(),
            input.to_str().unwrap(),
            output.to_str().unwrap(),
        ]);
        assert!(verify.status.success(), "{mode}: {}", stdout(&verify));
        assert!(stdout(&verify).contains("verdict: pass"), "{mode}");
    }
}

#[test]
fn inspect_emits_plot_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (config, input, _) = write_config(dir.path(), "quantity");
    write_microfile(&input, 600);
    let plot = dir.path().join("plot.tsv");

    let out = run(&[
        "inspect",
        "--config",
        config.to_str().unwrap(),
        "--emit-plot",
        plot.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("signal:"), "{text}");
    assert!(text.contains("A_1:"), "{text}");
    assert!(text.contains("D_1:"), "{text}");
    assert!(text.contains("extremal coefficient indices"), "{text}");

    let plot_text = std::fs::read_to_string(&plot).unwrap();
    let mut lines = plot_text.lines();
    assert_eq!(lines.next(), Some("label\tsignal\tapprox\td1"));
    assert_eq!(lines.count(), 6, "one row per parameter value");
}

#[test]
fn flag_overrides_beat_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let (config, input, output) = write_config(dir.path(), "quantity");
    write_microfile(&input, 1500);

    // different seeds shuffle the mover pool differently
    run(&["mask", "--config", config.to_str().unwrap(), "--seed", "1"]);
    let first = std::fs::read(&output).unwrap();
    run(&["mask", "--config", config.to_str().unwrap(), "--seed", "2"]);
    let second = std::fs::read(&output).unwrap();
    assert_ne!(first, second, "seed override had no effect");

    // an unknown mode is rejected before any work happens
    let bad = run(&[
        "mask",
        "--config",
        config.to_str().unwrap(),
        "--mode",
        "bogus",
    ]);
    assert!(!bad.status.success());
}

#[test]
fn config_errors_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "mode = \"quantity\"\n").unwrap();
    let out = run(&["mask", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
