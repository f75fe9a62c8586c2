use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
seed = 5

[game]
users = 20
rate = 0.05
seq_len = 512
strategy = { kind = "threshold", n = 10 }
burn_in = { base = 200, jitter = 200 }

[simulate]
duration = 500

[dataset]
samples = 30

[metrics]
lengths = [256, 512]

[sweep]
thresholds = [10, 20]
pools = [0, 5]
lambdas = [5.0]
rounds = 10
latency_seconds = 500
"#;

fn mixprobe(dir: &Path, args: &[&str]) -> Output {
    let config = dir.join("small.toml");
    if !config.exists() {
        fs::write(&config, SMALL).unwrap();
    }
    Command::new(env!("CARGO_BIN_EXE_mixprobe"))
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("runs"))
        .args(args)
        .output()
        .unwrap()
}

fn run_dir(out: &Output) -> PathBuf {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    PathBuf::from(String::from_utf8(out.stdout.clone()).unwrap().trim())
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn bad_config_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let zero = mixprobe(tmp.path(), &["--set", "game.strategy={kind=\"poisson\",lambda=0.0}", "simulate"]);
    assert_eq!(zero.status.code(), Some(2), "{}", String::from_utf8_lossy(&zero.stderr));
    let unknown = mixprobe(tmp.path(), &["--set", "game.colour=3", "simulate"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(!tmp.path().join("runs").exists());
}

#[test]
fn missing_dataset_exits_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mixprobe(tmp.path(), &["metrics", tmp.path().join("nope").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn simulate_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_dir(&mixprobe(tmp.path(), &["simulate"]));
    let first = snapshot(&a);
    let b = run_dir(&mixprobe(tmp.path(), &["simulate"]));
    assert_eq!(a, b);
    assert_eq!(first, snapshot(&b));
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["ledger.jsonl", "manifest.json", "trace.jsonl"]);

    let other = run_dir(&mixprobe(tmp.path(), &["--seed", "6", "simulate"]));
    assert_ne!(other, a);
}

#[test]
fn dataset_then_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let data = run_dir(&mixprobe(tmp.path(), &["gen-dataset"]));
    let data_files = snapshot(&data);
    assert_eq!(data_files.len(), 7);

    let report = run_dir(&mixprobe(tmp.path(), &["metrics", data.to_str().unwrap()]));
    let first = snapshot(&report);
    assert_eq!(run_dir(&mixprobe(tmp.path(), &["metrics", data.to_str().unwrap()])), report);
    assert_eq!(snapshot(&report), first);
    assert_eq!(snapshot(&data), data_files);

    let mut rows = csv::Reader::from_path(report.join("report.csv")).unwrap();
    let headers = rows.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    let lengths: Vec<&str> = rows.iter().map(|r| &r[col("observations")]).collect();
    assert_eq!(lengths, ["512", "256"]);
    let cap = (20f64).log2();
    for r in &rows {
        let acc: f64 = r[col("accuracy")].parse().unwrap();
        assert!((0.0..=1.0).contains(&acc));
        for name in ["entropy", "entropy_all"] {
            let h: f64 = r[col(name)].parse().unwrap();
            assert!((0.0..=cap + 1e-9).contains(&h), "{name} = {h}");
        }
        assert!(r[col("epsilon")].parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn sweep_writes_both_figures() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_dir(&mixprobe(tmp.path(), &["sweep"]));
    for f in ["fig3.csv", "fig4.csv"] {
        let rows = csv::Reader::from_path(dir.join(f)).unwrap().records().count();
        // two thresholds, one pool above 5, one lambda
        assert_eq!(rows, 2 + 2 + 1, "{f}");
    }
}
