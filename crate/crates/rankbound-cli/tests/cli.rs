//! End-to-end checks of the `rankbound` binary: exit codes, config
//! resolution, and bit-for-bit reproducibility of the written reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rankbound"));
    cmd.env_remove("RANKBOUND_WORKERS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// 10 users x 6 distinct items out of 14; items (u + 2t) mod 14 so every
/// user has at least 8 non-interacted items to sample from.
fn write_dataset(dir: &Path) -> PathBuf {
    let mut text = String::from("user_id,item_id,timestamp\n");
    for u in 0..10 {
        for t in 0..6 {
            text.push_str(&format!("u{u},i{},{t}\n", (u + 2 * t) % 14));
        }
    }
    let path = dir.join("events.csv");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn verify_passes_and_reports_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let args = |out: &Path| {
        vec![
            "verify".to_string(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.display().to_string(),
            "--chain-cases".into(),
            "1500".into(),
            "--sampled-cases".into(),
            "1500".into(),
            "--trials".into(),
            "1500".into(),
        ]
    };
    let first = bin().args(args(&out_a)).output().unwrap();
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));
    let second = bin().args(args(&out_b)).output().unwrap();
    assert_eq!(code(&second), 0);

    let report_a = fs::read(out_a.join("monte-carlo.csv")).unwrap();
    let report_b = fs::read(out_b.join("monte-carlo.csv")).unwrap();
    assert_eq!(report_a, report_b);
    assert!(report_a.starts_with(b"loss,metric,trials,frequency,theoretical_bound,std_err\n"));

    let resolved = fs::read_to_string(out_a.join("resolved-config.toml")).unwrap();
    assert!(resolved.contains("command = \"verify\""));
    assert!(resolved.contains("seed = 42"));
}

#[test]
fn verify_worker_count_does_not_change_the_report() {
    let tmp = TempDir::new().unwrap();
    let mut reports = Vec::new();
    for workers in ["1", "4"] {
        let out = tmp.path().join(workers);
        let output = bin()
            .env("RANKBOUND_WORKERS", workers)
            .args([
                "verify",
                "--seed",
                "9",
                "--chain-cases",
                "800",
                "--sampled-cases",
                "800",
                "--trials",
                "800",
                "--out",
            ])
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
        reports.push(fs::read(out.join("monte-carlo.csv")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn invalid_worker_count_is_a_usage_error() {
    let output = bin().env("RANKBOUND_WORKERS", "zero").args(["verify"]).output().unwrap();
    assert_eq!(code(&output), 2);
    assert!(stderr(&output).contains("RANKBOUND_WORKERS"));
}

#[test]
fn verify_rejects_zero_trials() {
    let tmp = TempDir::new().unwrap();
    let output = run(&["verify", "--trials", "0", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&output), 2);
    assert!(stderr(&output).contains("trials"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("config.toml");
    fs::write(&config, "trials = 50\nbogus = 1\n").unwrap();
    let output = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 2);
    assert!(stderr(&output).contains("bogus"));
}

#[test]
fn flags_override_config_file_values() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("config.toml");
    fs::write(
        &config,
        "trials = 123\nchain_cases = 200\nsampled_cases = 200\nseed = 5\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let output = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--trials",
        "77",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let resolved = fs::read_to_string(out.join("resolved-config.toml")).unwrap();
    assert!(resolved.contains("trials = 77"), "flag should win: {resolved}");
    assert!(resolved.contains("chain_cases = 200"));
    assert!(resolved.contains("seed = 5"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let output = run(&["verify", "--config", "/nonexistent/config.toml"]);
    assert_eq!(code(&output), 1);
    assert!(stderr(&output).contains("/nonexistent/config.toml"));
}

#[test]
fn surface_writes_one_row_per_cell() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let output = run(&[
        "surface",
        "--population",
        "100",
        "--k-list",
        "1,5,20",
        "--rank-list",
        "1..10",
        "--losses",
        "bpr,cce",
        "--metric",
        "ndcg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let text = fs::read_to_string(out.join("surface.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "K,r_plus,loss,metric,lower_bound");
    assert_eq!(lines.len(), 1 + 3 * 10 * 2);

    // rerun reproduces the file byte for byte
    let out2 = tmp.path().join("out2");
    let rerun = run(&[
        "surface",
        "--population",
        "100",
        "--k-list",
        "1,5,20",
        "--rank-list",
        "1..10",
        "--losses",
        "bpr,cce",
        "--metric",
        "ndcg",
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(code(&rerun), 0);
    assert_eq!(fs::read(out.join("surface.csv")).unwrap(), fs::read(out2.join("surface.csv")).unwrap());
}

#[test]
fn surface_single_cell_yields_one_row() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let output = run(&[
        "surface",
        "--population",
        "50",
        "--k-list",
        "5",
        "--rank-list",
        "3",
        "--losses",
        "bce",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let text = fs::read_to_string(out.join("surface.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("5,3,bce,ndcg,"));
}

#[test]
fn surface_rejects_zero_rank() {
    let tmp = TempDir::new().unwrap();
    let output = run(&[
        "surface",
        "--rank-list",
        "0..3",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 2);
}

#[test]
fn surface_rejects_k_beyond_population() {
    let tmp = TempDir::new().unwrap();
    let output = run(&[
        "surface",
        "--population",
        "10",
        "--k-list",
        "5,50",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 2);
}

#[test]
fn unwritable_out_directory_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let output = run(&["surface", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&output), 1);
}

#[test]
fn train_writes_trace_model_and_id_maps() {
    let tmp = TempDir::new().unwrap();
    let dataset = write_dataset(tmp.path());
    let out = tmp.path().join("out");
    let output = run(&[
        "train",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--dim",
        "4",
        "--epochs",
        "2",
        "--negatives",
        "2",
        "--batch-size",
        "8",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("epoch,split,metric,cutoff,value\n"));
    // epochs 0..=2 validation (ndcg + mrr) plus the final test pair
    assert_eq!(trace.lines().count(), 1 + 3 * 2 + 2);
    let model = fs::read_to_string(out.join("model.txt")).unwrap();
    assert!(model.starts_with("d,m,n,scorer\n4,14,10,factor\n"));
    assert!(out.join("user_ids.csv").exists());
    assert!(out.join("item_ids.csv").exists());
    assert!(out.join("resolved-config.toml").exists());
}

#[test]
fn train_epochs_zero_only_evaluates() {
    let tmp = TempDir::new().unwrap();
    let dataset = write_dataset(tmp.path());
    let out = tmp.path().join("out");
    let output = run(&[
        "train",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--dim",
        "4",
        "--epochs",
        "0",
        "--negatives",
        "2",
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 2 + 2);
}

#[test]
fn train_missing_dataset_fails_with_the_path() {
    let tmp = TempDir::new().unwrap();
    let output = run(&[
        "train",
        "--dataset",
        "/no/such/events.csv",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 1);
    assert!(stderr(&output).contains("/no/such/events.csv"));
}

#[test]
fn train_requires_a_dataset_argument() {
    let tmp = TempDir::new().unwrap();
    let output = run(&["train", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&output), 2);
    assert!(stderr(&output).contains("dataset"));
}

#[test]
fn single_negative_bpr_and_cce_traces_are_identical() {
    let tmp = TempDir::new().unwrap();
    let dataset = write_dataset(tmp.path());
    let mut traces = Vec::new();
    for loss in ["bpr", "cce"] {
        let out = tmp.path().join(loss);
        let output = run(&[
            "train",
            "--dataset",
            dataset.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--loss",
            loss,
            "--negatives",
            "1",
            "--dim",
            "4",
            "--epochs",
            "3",
            "--batch-size",
            "8",
            "--seed",
            "11",
        ]);
        assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
        traces.push((
            fs::read(out.join("trace.csv")).unwrap(),
            fs::read(out.join("model.txt")).unwrap(),
        ));
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn sweep_merges_all_cells_and_reruns_identically() {
    let tmp = TempDir::new().unwrap();
    let dataset = write_dataset(tmp.path());
    let run_sweep = |out: &Path| {
        let output = run(&[
            "sweep",
            "--dataset",
            dataset.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--loss-list",
            "bce,bpr,cce",
            "--k-list",
            "1,2",
            "--seeds",
            "0",
            "--dim",
            "4",
            "--epochs",
            "1",
            "--batch-size",
            "8",
        ]);
        assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
        fs::read_to_string(out.join("sweep.csv")).unwrap()
    };
    let first = run_sweep(&tmp.path().join("a"));
    let second = run_sweep(&tmp.path().join("b"));
    assert_eq!(first, second);

    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "loss,K,seed,epoch,split,metric,cutoff,value");
    let mut cells: Vec<String> = lines[1..]
        .iter()
        .map(|l| {
            let mut parts = l.split(',');
            format!("{},{}", parts.next().unwrap(), parts.next().unwrap())
        })
        .collect();
    cells.sort();
    cells.dedup();
    assert_eq!(cells, ["bce,1", "bce,2", "bpr,1", "bpr,2", "cce,1", "cce,2"]);
    // per cell: epochs 0..=1 validation (2 metrics) + test pair
    assert_eq!(lines.len(), 1 + 6 * (2 * 2 + 2));
}

#[test]
fn sweep_rejects_unknown_losses_before_running() {
    let tmp = TempDir::new().unwrap();
    let dataset = write_dataset(tmp.path());
    let out = tmp.path().join("out");
    let output = run(&[
        "sweep",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--loss-list",
        "bpr,nope",
    ]);
    assert_eq!(code(&output), 2);
    assert!(stderr(&output).contains("nope"));
    assert!(!out.exists(), "no output may be written on a usage error");
}

#[test]
fn sweep_reports_failed_cells_with_nonzero_exit() {
    let tmp = TempDir::new().unwrap();
    let dataset = write_dataset(tmp.path());
    let out = tmp.path().join("out");
    let output = run(&[
        "sweep",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--loss-list",
        "bpr",
        "--k-list",
        "1",
        "--seeds",
        "0",
        "--dim",
        "4",
        "--epochs",
        "2",
        "--optimizer",
        "sgd",
        "--learning-rate",
        "1e200",
    ]);
    assert_eq!(code(&output), 1);
    assert!(stderr(&output).contains("failed"));
    // the aggregate exists but holds only the header: every cell diverged
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}
