//! End-to-end runs of the `mpot` binary: pipeline smoke, the exit-code
//! contract, configuration typo safety, and byte-for-byte reproducibility
//! through run manifests.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mpot(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpot"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("mpot must spawn")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_status(output: &Output, expected: i32) {
    assert_eq!(
        output.status.code(),
        Some(expected),
        "stdout:\n{}\nstderr:\n{}",
        stdout(output),
        stderr(output)
    );
}

const SMALL_MARKET: &str = "\
# small market for fast end-to-end runs
n_dealers = 40
n_ticks = 4000
seed = 5
";

const SMALL_ANALYSIS: &str = "\
window = 500
stride = 100
";

#[test]
fn simulate_then_analyze_pipeline() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    fs::write(root.join("market.conf"), SMALL_MARKET).unwrap();
    fs::write(root.join("analysis.conf"), SMALL_ANALYSIS).unwrap();

    let sim = mpot(
        root,
        &["simulate", "--config", "market.conf", "--out", "ticks.csv"],
    );
    assert_status(&sim, 0);
    assert!(stdout(&sim).contains("simulated 4000 ticks"));

    let ticks = fs::read_to_string(root.join("ticks.csv")).unwrap();
    assert!(ticks.starts_with("u,price\n"));
    assert_eq!(ticks.lines().count(), 4_001);

    let analyze = mpot(
        root,
        &[
            "analyze",
            "--ticks",
            "ticks.csv",
            "--out-dir",
            "report",
            "--config",
            "analysis.conf",
            "--max-lag",
            "50",
        ],
    );
    assert_status(&analyze, 0);
    assert!(stdout(&analyze).contains("b*"));

    let estimates = fs::read_to_string(root.join("report/estimates.csv")).unwrap();
    assert!(estimates.starts_with("window_start,b,slope,intercept,residual_std,n_points\n"));
    assert!(estimates.lines().count() >= 2, "at least one estimate row");
    let curve = fs::read_to_string(root.join("report/curve.csv")).unwrap();
    assert!(curve.starts_with("x,u_of_x,count\n"));
    let diffusion = fs::read_to_string(root.join("report/diffusion.csv")).unwrap();
    assert_eq!(diffusion.lines().count(), 51, "header plus 50 lags");
}

#[test]
fn analyze_rejects_short_series_with_domain_exit() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    fs::write(root.join("market.conf"), "n_dealers = 40\nn_ticks = 100\nseed = 5\n").unwrap();
    let sim = mpot(
        root,
        &["simulate", "--config", "market.conf", "--out", "ticks.csv"],
    );
    assert_status(&sim, 0);

    // The default 2000-tick window cannot fit in 100 ticks.
    let analyze = mpot(root, &["analyze", "--ticks", "ticks.csv", "--out-dir", "report"]);
    assert_status(&analyze, 3);
    assert!(stderr(&analyze).contains("insufficient history"));
}

#[test]
fn missing_input_file_is_an_io_exit() {
    let dir = TempDir::new().unwrap();
    let analyze = mpot(
        dir.path(),
        &["analyze", "--ticks", "no-such.csv", "--out-dir", "report"],
    );
    assert_status(&analyze, 4);
}

#[test]
fn unknown_subcommand_is_a_usage_exit() {
    let dir = TempDir::new().unwrap();
    let output = mpot(dir.path(), &["frobnicate"]);
    assert_status(&output, 2);
}

#[test]
fn unknown_config_key_is_rejected_with_its_line() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    fs::write(root.join("market.conf"), "n_dealers = 40\nn_dealer = 41\n").unwrap();
    let sim = mpot(
        root,
        &["simulate", "--config", "market.conf", "--out", "ticks.csv"],
    );
    assert_status(&sim, 3);
    let message = stderr(&sim);
    assert!(message.contains("market.conf:2"), "line number in: {message}");
    assert!(message.contains("unknown key `n_dealer`"), "key name in: {message}");
}

#[test]
fn manifest_reruns_reproduce_outputs_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    fs::write(root.join("market.conf"), SMALL_MARKET).unwrap();

    let first = mpot(
        root,
        &["simulate", "--config", "market.conf", "--out", "first.csv"],
    );
    assert_status(&first, 0);
    let manifest = fs::read_to_string(root.join("first.csv.manifest")).unwrap();
    assert!(manifest.starts_with("# command: "));
    assert!(manifest.contains("seed = 5\n"));
    assert!(manifest.contains("m_dealer = 16\n"), "defaults resolved in: {manifest}");

    // The manifest is itself a complete configuration file.
    let second = mpot(
        root,
        &[
            "simulate",
            "--config",
            "first.csv.manifest",
            "--out",
            "second.csv",
        ],
    );
    assert_status(&second, 0);
    assert_eq!(
        fs::read(root.join("first.csv")).unwrap(),
        fs::read(root.join("second.csv")).unwrap(),
        "replay from the manifest must be byte-identical"
    );

    // Identical invocations also produce identical manifests.
    let again = mpot(
        root,
        &["simulate", "--config", "market.conf", "--out", "first.csv"],
    );
    assert_status(&again, 0);
    assert_eq!(
        manifest,
        fs::read_to_string(root.join("first.csv.manifest")).unwrap()
    );
}

const SMALL_SWEEP: &str = "\
n_dealers = 20
m_analysis = 4
window = 30
stride = 10
ticks_per_run = 54
base_seed = 99
d_values = -0.5, 0, 0.5
";

#[test]
fn sweep_writes_rows_and_fit() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    fs::write(root.join("sweep.conf"), SMALL_SWEEP).unwrap();

    let sweep = mpot(
        root,
        &["sweep", "--config", "sweep.conf", "--out", "rows.csv"],
    );
    assert_status(&sweep, 0);
    let report = stdout(&sweep);
    assert!(report.contains("fit: intercept"), "fit line in: {report}");

    let rows = fs::read_to_string(root.join("rows.csv")).unwrap();
    assert!(rows.starts_with("d,b_star,b_std,n_windows,n_degenerate,stalled\n"));
    assert_eq!(rows.lines().count(), 4, "header plus three rows");

    let manifest = fs::read_to_string(root.join("rows.csv.manifest")).unwrap();
    assert!(manifest.contains("# per-run derived seeds:"));
    assert!(manifest.contains("d_values = -0.5, 0, 0.5\n"));

    // The sweep manifest loads back as a sweep configuration.
    let replay = mpot(
        root,
        &[
            "sweep",
            "--config",
            "rows.csv.manifest",
            "--out",
            "rows2.csv",
        ],
    );
    assert_status(&replay, 0);
    assert_eq!(
        fs::read(root.join("rows.csv")).unwrap(),
        fs::read(root.join("rows2.csv")).unwrap()
    );
}

#[test]
fn stalled_sweep_flags_rows_and_exits_domain() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    fs::write(
        root.join("sweep.conf"),
        format!("{SMALL_SWEEP}max_steps = 2\n"),
    )
    .unwrap();

    let sweep = mpot(
        root,
        &["sweep", "--config", "sweep.conf", "--out", "rows.csv"],
    );
    assert_status(&sweep, 3);
    assert!(stderr(&sweep).contains("stalled"));

    let rows = fs::read_to_string(root.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4, "stalled rows are still written");
    assert!(rows.contains("true"), "stall flag present in: {rows}");
}

#[test]
fn sweep_config_rejects_per_run_keys() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    fs::write(root.join("sweep.conf"), format!("{SMALL_SWEEP}seed = 7\n")).unwrap();
    let sweep = mpot(
        root,
        &["sweep", "--config", "sweep.conf", "--out", "rows.csv"],
    );
    assert_status(&sweep, 3);
    assert!(stderr(&sweep).contains("derived per run"));
}

#[test]
fn null_walk_prints_a_calibration_report() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    let null = mpot(
        root,
        &[
            "null",
            "walk",
            "--length",
            "30000",
            "--seed",
            "9",
            "--manifest",
            "walk.manifest",
        ],
    );
    assert_status(&null, 0);
    let report = stdout(&null);
    // 30,000 ticks hold 14 disjoint 2000-tick windows with the margin the
    // window rule keeps at the end of the series.
    assert!(report.contains("windows 14"), "window count in: {report}");
    assert!(report.contains("mean b "), "mean in: {report}");
    assert!(report.contains("std b "), "std in: {report}");
    let manifest = fs::read_to_string(root.join("walk.manifest")).unwrap();
    assert!(manifest.contains("# surrogate: walk"));
    assert!(manifest.contains("stride = 2000\n"), "disjoint default in: {manifest}");
}

#[test]
fn null_shuffle_reads_from_a_tick_file() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    fs::write(root.join("market.conf"), SMALL_MARKET).unwrap();
    let sim = mpot(
        root,
        &["simulate", "--config", "market.conf", "--out", "ticks.csv"],
    );
    assert_status(&sim, 0);
    fs::write(root.join("analysis.conf"), SMALL_ANALYSIS).unwrap();

    let null = mpot(
        root,
        &[
            "null",
            "shuffle",
            "--ticks",
            "ticks.csv",
            "--seed",
            "3",
            "--config",
            "analysis.conf",
            "--out",
            "shuffled.csv",
        ],
    );
    assert_status(&null, 0);
    assert!(stdout(&null).contains("surrogate: shuffle"));
    let shuffled = fs::read_to_string(root.join("shuffled.csv")).unwrap();
    assert_eq!(shuffled.lines().count(), 4_001);
    assert!(root.join("shuffled.csv.manifest").exists());
}
