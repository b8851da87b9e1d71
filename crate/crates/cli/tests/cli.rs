use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tripsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tripsel"))
        .args(args)
        .output()
        .expect("run tripsel")
}

fn ok(args: &[&str]) -> String {
    let out = tripsel(args);
    assert!(
        out.status.success(),
        "tripsel {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const QUICK: &[&str] = &[
    "--preset",
    "ci",
    "--synthetic",
    "--epochs",
    "2",
    "--seed",
    "3",
];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(QUICK).chain(tail).copied().collect()
}

#[test]
fn train_writes_fixed_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let stdout = ok(&with(&["train"], &["--out", path(&out)]));
    assert!(stdout.contains("trained 2 epochs"));
    for f in ["model.ckpt", "train_log.csv", "manifest.txt"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let log = fs::read_to_string(out.join("train_log.csv")).unwrap();
    assert_eq!(
        log.lines().next(),
        Some("epoch,mean_loss,cum_triplets,lr,seconds")
    );
    assert_eq!(log.lines().count(), 3);
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("beta=0.5\n"));
    assert!(manifest.contains("gamma=0.1\n"));
    assert!(manifest.contains("alpha=0.2\n"));
    assert!(manifest.contains("command=train\n"));
}

#[test]
fn manifest_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&with(
        &["train"],
        &["--sampler", "ras-ris", "--gamma", "0.3", "--out", path(&a)],
    ));
    ok(&[
        "train",
        "--config",
        path(&a.join("manifest.txt")),
        "--out",
        path(&b),
    ]);
    for f in ["model.ckpt", "train_log.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn wall_time_fills_seconds() {
    let dir = TempDir::new().unwrap();
    ok(&with(
        &["train"],
        &["--wall-time", "--out", path(dir.path())],
    ));
    let log = fs::read_to_string(dir.path().join("train_log.csv")).unwrap();
    assert!(log.lines().skip(1).all(|l| !l.ends_with(',')));
}

#[test]
fn missing_labels_file_exits_2_naming_it() {
    let dir = TempDir::new().unwrap();
    let features = dir.path().join("f.csv");
    fs::write(&features, "id,x\na,1\n").unwrap();
    let missing = dir.path().join("no-such-labels.csv");
    let out = tripsel(&[
        "train",
        "--features",
        path(&features),
        "--labels",
        path(&missing),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no-such-labels.csv"), "{err}");
    assert!(!err.contains("panicked"));
}

#[test]
fn bad_flag_values_exit_2() {
    assert_eq!(
        tripsel(&with(&["train"], &["--beta", "1.5"])).status.code(),
        Some(2)
    );
    assert_eq!(
        tripsel(&with(&["train"], &["--sampler", "xyz-rhdis"]))
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        tripsel(&["train", "--preset", "ci", "--batch-size", "500"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn evaluate_untrained_checkpoint() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    ok(&[
        "train",
        "--preset",
        "ci",
        "--synthetic",
        "--epochs",
        "0",
        "--out",
        path(out),
    ]);
    let manifest = out.join("manifest.txt");
    let table = ok(&["evaluate", "--config", path(&manifest), "--out", path(out)]);
    assert!(table.contains("F1 Score"));
    let first = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = first.lines();
    assert_eq!(
        lines.next(),
        Some("method,accuracy,precision,recall,f1,queries,k")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    for v in &row[1..5] {
        let v: f64 = v.parse().unwrap();
        assert!(v > 0.0 && v < 1.0, "metric {v} outside (0, 1)");
    }
    assert_eq!(row[6], "10");

    ok(&["evaluate", "--config", path(&manifest), "--out", path(out)]);
    assert_eq!(fs::read_to_string(out.join("metrics.csv")).unwrap(), first);
}

#[test]
fn evaluate_rejects_large_k_and_wrong_dims() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    ok(&[
        "train",
        "--preset",
        "ci",
        "--synthetic",
        "--epochs",
        "0",
        "--out",
        path(out),
    ]);
    let manifest = out.join("manifest.txt");
    let big_k = tripsel(&[
        "evaluate",
        "--config",
        path(&manifest),
        "--out",
        path(out),
        "--k",
        "41",
    ]);
    assert_eq!(big_k.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&big_k.stderr).contains("k = 41"));
    let dims = tripsel(&[
        "evaluate",
        "--config",
        path(&manifest),
        "--out",
        path(out),
        "--feature-dim",
        "5",
    ]);
    assert_eq!(dims.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&dims.stderr).contains("input features"));
}

#[test]
fn ablate_grid_has_nine_rows() {
    let dir = TempDir::new().unwrap();
    ok(&with(&["ablate"], &["--out", path(dir.path())]));
    let grid = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let rows: Vec<Vec<&str>> = grid
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 9);
    let triplets = |a: &str, i: &str| -> u64 {
        rows.iter().find(|r| r[0] == a && r[1] == i).unwrap()[6]
            .parse()
            .unwrap()
    };
    assert!(triplets("bas", "bis") > triplets("das", "rhdis"));
    assert!(!dir.path().join("curve.csv").exists());
}

#[test]
fn mine_debug_dumps_one_block_per_batch() {
    // Full preset: batch 100, anchor fraction 0.1.
    let text = ok(&["mine-debug", "--synthetic", "--batches", "1"]);
    let headers: Vec<&str> = text.lines().filter(|l| l.contains(" size=")).collect();
    assert_eq!(headers.len(), 1);
    assert!(headers[0].contains("anchor_count=10"), "{}", headers[0]);
    assert_eq!(text.lines().filter(|l| l.contains(" anchor=")).count(), 10);

    for line in text.lines() {
        for field in line.split(' ') {
            let (key, value) = field.split_once('=').unwrap();
            if matches!(key, "anchor" | "anchors" | "positives" | "negatives") {
                for idx in value.split(',').filter(|s| !s.is_empty()) {
                    assert!(idx.parse::<usize>().unwrap() < 100, "{line}");
                }
            }
        }
    }
}

#[test]
fn mine_debug_more_batches_than_available() {
    let text = ok(&with(&["mine-debug"], &["--batches", "9", "--full"]));
    // 120 training samples, batch 40.
    assert!(text.starts_with("# only 3 full batches"));
    assert_eq!(text.lines().filter(|l| l.contains(" triplets=")).count(), 3);
    assert!(text.contains(" ip="));
}

#[test]
fn mine_debug_uses_checkpoint() {
    let dir = TempDir::new().unwrap();
    ok(&with(&["train"], &["--out", path(dir.path())]));
    let ckpt = dir.path().join("model.ckpt");
    let trained = ok(&with(&["mine-debug"], &["--checkpoint", path(&ckpt)]));
    let fresh = ok(&with(&["mine-debug"], &[]));
    assert_eq!(trained.lines().count(), fresh.lines().count());
    assert_ne!(trained, fresh);
}

#[test]
fn csv_dataset_round_trip() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("features.csv");
    let l = dir.path().join("labels.csv");
    let mut features = String::from("id,a,b,c\n");
    let mut labels = String::from("id,x,y\n");
    for i in 0..30 {
        let c = i % 2;
        features.push_str(&format!(
            "s{i},{},{},{}\n",
            c as f64 + 0.01 * i as f64,
            1.0 - c as f64,
            0.5
        ));
        labels.push_str(&format!("s{i},{},{}\n", 1 - c, c));
    }
    fs::write(&f, features).unwrap();
    fs::write(&l, labels).unwrap();
    let out = dir.path().join("run");
    ok(&[
        "train",
        "--preset",
        "ci",
        "--features",
        path(&f),
        "--labels",
        path(&l),
        "--batch-size",
        "10",
        "--positives",
        "2",
        "--negatives",
        "2",
        "--epochs",
        "2",
        "--out",
        path(&out),
    ]);
    let table = ok(&[
        "evaluate",
        "--config",
        path(&out.join("manifest.txt")),
        "--out",
        path(&out),
        "--k",
        "3",
    ]);
    assert!(table.contains("DAS-RHDIS"));
}
