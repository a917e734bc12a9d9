use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tncn::datagen::load_idx_sprites;
use tncn::harness::load_checkpoint;

fn tncn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tncn"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    tncn().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn summary_value(out: &Output, key: &str) -> Option<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
}

const SMALL_BOUNCING: &str = r#"{
  "experiment": "train",
  "seed": 4,
  "model": {"kind": "ptncn", "layer_dims": [12, 12], "parallel": true},
  "hyperparams": {"hebbian_enabled": false},
  "data": {"kind": "bouncing", "frame_size": 12, "seq_len": 5, "num_objects": 2,
           "speed_range": [0.5, 1.0], "train_count": 10, "test_count": 3},
  "train": {"batch": 2}
}"#;

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_BOUNCING);
    let cfg = cfg.to_str().unwrap();

    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["train"]).status.code(), Some(1));
    assert_eq!(run(&["fly", "--config", cfg]).status.code(), Some(1));
    assert_eq!(run(&["train", "--config", "/no/such/file.json"]).status.code(), Some(1));
    assert_eq!(run(&["train", "--config", cfg, "--bogus"]).status.code(), Some(1));

    let bad_key = run(&["train", "--config", cfg, "--set", "train.speed=3"]);
    assert_eq!(bad_key.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_key.stderr).contains("speed"));

    let bad_value = run(&["train", "--config", cfg, "--set", "hyperparams.beta=-1"]);
    assert_eq!(bad_value.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.ptnc");
    std::fs::write(&junk, b"not a checkpoint").unwrap();
    let body = SMALL_BOUNCING.replace(
        r#""train": {"batch": 2}"#,
        &format!(r#""train": {{"batch": 2}}, "eval": {{"checkpoint": {:?}}}"#, junk.to_str().unwrap()),
    );
    let cfg = write_config(dir.path(), &body);
    let out = run(&["eval", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("tncn: checkpoint error"));
}

#[test]
fn cosine_run_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("noisy_cosine.json");
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,metric,value,wall_ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100_000);
    assert!(rows.iter().all(|r| r.starts_with(|c: char| c.is_ascii_digit()) && r.ends_with(",0.000")));
    let pse: f64 = summary_value(&out, "train_mean").unwrap().parse().unwrap();
    assert!(pse < 0.05, "pSE {pse}");
    for f in ["checkpoint.ptnc", "effective_config.json", "summary.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    load_checkpoint(dir.path().join("checkpoint.ptnc")).unwrap();
}

#[test]
fn seed_and_set_reach_the_effective_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_BOUNCING);
    let out_dir = dir.path().join("o");
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--set",
        "hyperparams.beta=0.2",
        "--set",
        "data.train_count=4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary_value(&out, "seed").as_deref(), Some("9"));
    let eff: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("effective_config.json")).unwrap()).unwrap();
    assert_eq!(eff["seed"], 9);
    assert_eq!(eff["hyperparams"]["beta"], 0.2);
    assert_eq!(eff["data"]["train_count"], 4);
    let summary = std::fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("experiment=train"));
}

#[test]
fn bench_writes_row_per_learner_and_width() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("bench_scaling.json");
    let out = run(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "bench.widths=[4,8,16]",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("learner,width,median_ms"));
    assert_eq!(csv.lines().count(), 1 + 4 * 3);
    for k in ["ptncn", "rtrl", "uoro", "esn"] {
        assert!(summary_value(&out, &format!("slope_{k}")).is_some());
    }
}

#[test]
fn gendata_writes_readable_idx() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("gendata_bouncing.json");
    let out = run(&["gendata", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let frames = load_idx_sprites(dir.path().join("train.idx")).unwrap();
    assert_eq!(frames.len(), 100 * 10);
    assert_eq!(frames.max_extent(), (16, 16));
}

#[test]
fn metrics_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_BOUNCING);
    let csv = |threads: &str| {
        let out_dir = dir.path().join(format!("t{threads}"));
        let out = tncn()
            .args(["train", "--config", cfg.to_str().unwrap(), "--no-timing", "--out", out_dir.to_str().unwrap()])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(out_dir.join("metrics.csv")).unwrap()
    };
    assert_eq!(csv("1"), csv("4"));
}

#[test]
fn every_shipped_config_parses() {
    // Data paths in the configs are relative to the repository root; the
    // other tests here only use absolute paths.
    std::env::set_current_dir(configs().join("..")).unwrap();
    let mut seen = 0;
    for entry in std::fs::read_dir("configs").unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        tncn::cli::parse_config(&path, &tncn::cli::Overrides::default())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 10);
}
