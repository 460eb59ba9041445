use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bisect(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bisect"));
    cmd.args(args).env_remove("BISECT_OUT_DIR").env_remove("RUST_LOG");
    if let Some(dir) = out_dir {
        cmd.current_dir(dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn hash_dir(dir: &Path) -> String {
    let mut h = Sha256::new();
    for name in ["steps.csv", "report.json", "trace.jsonl"] {
        h.update(std::fs::read(dir.join(name)).unwrap());
    }
    format!("{:x}", h.finalize())
}

const SMALL: &[&str] = &[
    "simulate", "--alg", "icb", "--n", "48", "--q", "1", "--w", "6", "--d", "12", "--T", "300", "--seed", "3",
    "--strict",
];

#[test]
fn odd_n_is_a_usage_error() {
    let o = bisect(&["simulate", "--n", "5"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n must be even"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = bisect(&["simulate", "--n", "8", "--colour", "red"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_writes_outputs_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut args = SMALL.to_vec();
        let path = dir.path().to_str().unwrap();
        args.extend(["--out-dir", path]);
        let o = bisect(&args, None);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("post_step_balance: pass"), "{}", stdout(&o));
    }
    assert_eq!(hash_dir(a.path()), hash_dir(b.path()));
    let csv = std::fs::read_to_string(a.path().join("steps.csv")).unwrap();
    assert_eq!(csv.lines().count(), 301);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bisect"))
        .args(["simulate", "--alg", "cb", "--n", "8", "--T", "20"])
        .env("BISECT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn config_file_sits_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 8, "T": 12, "alg": "static", "gen": "merge_script"}"#).unwrap();
    let out = dir.path().join("out");
    let o = bisect(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "simulate",
            "--T",
            "7",
            "--out-dir",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("static n=8 T=7"), "{}", stdout(&o));

    std::fs::write(&cfg, r#"{"n": 8, "colour": "red"}"#).unwrap();
    let o = bisect(&["--config", cfg.to_str().unwrap(), "simulate"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn default_parameters_warn_with_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let o = bisect(&["simulate", "--n", "16", "--T", "10"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    assert!(err.contains("d >= 2qw fails: d = 7 < 2qw = 264"), "{err}");
    assert!(stdout(&o).contains("pivotal_steps: skipped"));
}

#[test]
fn verify_passes() {
    let o = bisect(&["verify"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    for name in ["oracle_equivalence: pass", "bezout_certificates: pass", "sampler_uniformity: pass"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn oracle_queries() {
    assert_eq!(stdout(&bisect(&["oracle", "count", "2", "1", "1"], None)).trim(), "2");
    assert_eq!(stdout(&bisect(&["oracle", "count", "--json", "[1,1,1,1]"], None)).trim(), "6");
    assert_eq!(stdout(&bisect(&["oracle", "exists", "3", "1"], None)).trim(), "false");
    let o = bisect(&["oracle", "closest", "2", "1", "1", "--prev", "0101"], None);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dist"], 2);
    let o = bisect(&["oracle", "sample", "1", "1", "1", "1", "--draws", "5", "--seed", "2"], None);
    assert_eq!(stdout(&o).lines().count(), 5);
    assert_eq!(bisect(&["oracle", "sample", "3", "1"], None).status.code(), Some(1));
}

#[test]
fn bezout_prints_certificate() {
    let o = bisect(&["bezout", "4", "--", "6"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["g"], 2);
    assert_eq!(v["bound"], 108);
    assert_eq!(v["verified"], true);
    assert_eq!(bisect(&["bezout", "4", "--", "4"], None).status.code(), Some(1));
}

#[test]
fn opt_reads_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bisect(&["simulate", "--alg", "cb", "--n", "8", "--T", "20", "--seed", "4", "--out-dir", out], None);
    assert_eq!(o.status.code(), Some(0));
    let trace = dir.path().join("trace.jsonl");
    let o = bisect(&["opt", "--trace", trace.to_str().unwrap(), "--n", "8"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(v["opt"].as_u64().unwrap() <= report["total_cost"].as_u64().unwrap());
    assert_eq!(v["epoch_lower_bound"], report["epochs_finished"]);
}

#[test]
fn sweep_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bisect(
        &["sweep", "--alg", "cb,static", "--seeds", "3", "--n", "8", "--T", "30", "--out-dir", out],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn acceptance_run_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bisect(
        &[
            "simulate", "--alg", "icb", "--n", "2112", "--q", "2", "--w", "66", "--d", "264", "--gen", "uniform",
            "--T", "5000", "--seed", "7", "--strict", "--out-dir", out,
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["steps.csv", "report.json", "trace.jsonl"] {
        assert!(dir.path().join(name).exists());
    }
}
