use std::fs;
use std::process::Command;

use maler_core::{Execution, LearnerKind};
use maler_harness::certify::certify;
use maler_harness::experiment::{run_experiment, trace_path, ExperimentConfig, Trace, CSV_HEADER};
use maler_harness::plot::render_svg;

fn small_config(out: Option<std::path::PathBuf>) -> ExperimentConfig {
    ExperimentConfig {
        rounds: 40,
        dim: 5,
        batch: 20,
        lambda: 0.01,
        seed: 3,
        out,
        svg: true,
        ..ExperimentConfig::regression()
    }
}

#[test]
fn csv_matches_replayed_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(Some(dir.path().to_path_buf()));
    let outcome = run_experiment(&cfg, Execution::default()).unwrap();

    let bytes = fs::read(dir.path().join("regret.csv")).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), cfg.rounds * cfg.algos.len());

    for algo in &cfg.algos {
        let trace = Trace::read(&trace_path(dir.path(), *algo)).unwrap();
        let mine: Vec<&Vec<String>> = rows.iter().filter(|r| r[1] == algo.name()).collect();
        let mut regret = 0.0;
        for (r, row) in trace.rounds.iter().zip(&mine) {
            regret += r.loss - r.comparator_loss;
            let csv: f64 = row[2].parse().unwrap();
            assert!(
                (csv - regret).abs() <= 1e-9,
                "{algo} round {}",
                r.record.round
            );
            assert_eq!(row[0], r.record.round.to_string());
            let meta = matches!(algo, LearnerKind::Maler | LearnerKind::MetaGrad);
            assert_eq!(row[5].is_empty(), !meta);
        }
        let replay = certify(&trace, Execution::Sequential).unwrap();
        let summary = outcome
            .summary
            .algos
            .iter()
            .find(|a| a.algo == *algo)
            .unwrap();
        assert_eq!(replay, summary.certificates);
    }
    let svg = fs::read_to_string(dir.path().join("regret.svg")).unwrap();
    assert_eq!(svg, render_svg(&outcome.runs));
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn results_do_not_depend_on_execution() {
    let a = run_experiment(&small_config(None), Execution::Sequential).unwrap();
    let b = run_experiment(&small_config(None), Execution::Parallel).unwrap();
    for (x, y) in a.runs.iter().zip(&b.runs) {
        assert_eq!(x.trace, y.trace);
    }
}

#[test]
fn cli_runs_and_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_maler"))
        .args([
            "run",
            "--task",
            "regression",
            "--algos",
            "maler,ogd-sc",
            "--rounds",
            "30",
            "--dim",
            "4",
            "--batch",
            "10",
            "--lambda",
            "0.05",
            "--noise-std",
            "0.2",
            "--seed",
            "7",
            "--radius",
            "0.5",
            "--svg",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("maler,") && stdout.contains("ogd-sc,"));
    for f in [
        "regret.csv",
        "regret.svg",
        "summary.json",
        "trace_maler.json",
        "trace_ogd-sc.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    let cert = Command::new(env!("CARGO_BIN_EXE_maler"))
        .arg("certify")
        .arg("--trace")
        .arg(dir.path().join("trace_maler.json"))
        .output()
        .unwrap();
    assert!(cert.status.success());
    assert!(String::from_utf8(cert.stdout)
        .unwrap()
        .contains("all checks hold"));

    let bad = dir.path().join("bad.libsvm");
    fs::write(&bad, "+1 1:1\n-1 2:oops\n").unwrap();
    let err = Command::new(env!("CARGO_BIN_EXE_maler"))
        .args(["run", "--task", "classification", "--data"])
        .arg(&bad)
        .output()
        .unwrap();
    assert!(!err.status.success());
    assert!(String::from_utf8_lossy(&err.stderr).contains("line 2"));

    let unknown = Command::new(env!("CARGO_BIN_EXE_maler"))
        .args(["run", "--task", "regression", "--algos", "adam"])
        .output()
        .unwrap();
    assert!(!unknown.status.success());
}
