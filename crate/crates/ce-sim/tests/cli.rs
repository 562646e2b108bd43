//! End-to-end tests of the `ce-sim` binary: exit codes, CSV schema, and
//! byte-level reproducibility at different parallelism degrees.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ce-sim");

const TINY_CONFIG: &str = "\
# tiny smoke sweep
M=2
L=2
T=8
N=8,16
alpha=1.0,0.5
snr_db=5
frames=8
channels=3
seed=7
out=OUT
";

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("CE_SIM_THREADS", n),
        None => cmd.env_remove("CE_SIM_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn sweep_body(dir: &Path, threads: &str) -> String {
    let out = dir.join(format!("out-{threads}.csv"));
    let cfg = dir.join(format!("cfg-{threads}.txt"));
    std::fs::write(&cfg, TINY_CONFIG.replace("OUT", out.to_str().unwrap())).unwrap();
    let result = run(&["run", "--config", cfg.to_str().unwrap()], Some(threads));
    assert!(
        result.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn run_is_byte_identical_across_reruns_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let single = sweep_body(dir.path(), "1");
    let multi = sweep_body(dir.path(), "4");
    assert_eq!(single, multi, "CSV body must not depend on parallelism");

    let header = single.lines().next().unwrap();
    assert_eq!(header, "N,M,L,T,alpha,snr_min_db,energy,rate_bpcu,seed");
    assert_eq!(single.lines().count(), 1 + 4, "header plus 2×2 sweep rows");

    // Rerun with the same thread count: still identical.
    let out = dir.path().join("out-1.csv");
    let before = std::fs::read_to_string(&out).unwrap();
    let again = sweep_body(dir.path(), "1");
    assert_eq!(single, again);
    drop(before);
}

#[test]
fn rate_subcommand_reports_a_point() {
    let out = run(
        &[
            "rate", "--N", "8", "--M", "2", "--L", "2", "--T", "8", "--alpha", "1.0", "--snr-db",
            "5", "--energy", "1.0", "--seed", "7", "--frames", "4", "--channels", "2",
        ],
        Some("1"),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rate_bpcu = "), "got: {text}");

    // Same invocation, same numbers.
    let out2 = run(
        &[
            "rate", "--N", "8", "--M", "2", "--L", "2", "--T", "8", "--alpha", "1.0", "--snr-db",
            "5", "--energy", "1.0", "--seed", "7", "--frames", "4", "--channels", "2",
        ],
        Some("2"),
    );
    assert_eq!(text, String::from_utf8(out2.stdout).unwrap());
}

#[test]
fn selfcheck_exits_zero_and_prints_table() {
    let out = run(&["selfcheck"], Some("1"));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    for suite in [
        "coordinate-update grid oracle",
        "incremental residual equivalence",
        "objective monotonicity",
        "phase-increment feasibility",
        "log-det naive oracle",
    ] {
        assert!(text.contains(suite), "missing suite {suite:?} in:\n{text}");
    }
    assert!(!text.contains("FAIL"));
}

#[test]
fn bad_config_fails_with_named_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.txt");
    std::fs::write(&cfg, "M=2\nL=2\nT=8\nN=8\nalpha=1.5\nsnr_db=0\nseed=1\nout=x.csv").unwrap();
    let out = run(&["run", "--config", cfg.to_str().unwrap()], Some("1"));
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha"), "stderr should name the key: {err}");
}

#[test]
fn missing_config_file_fails_with_path() {
    let out = run(&["run", "--config", "/nonexistent/cfg.txt"], Some("1"));
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/cfg.txt"), "{err}");
}
