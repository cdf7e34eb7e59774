use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tree-l1"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gen_families() {
    let out = run(&["gen", "path", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);

    let out = run(&["gen", "kary", "2", "6"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 127);

    let out = run(&["gen", "caterpillar-star", "3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 15 + 15 * 8);

    let a = run(&["gen", "random", "50", "3", "--seed", "4"]);
    let b = run(&["gen", "random", "50", "3", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);

    assert!(!run(&["gen", "kary", "2"]).status.success());
}

#[test]
fn embed_path_meets_target_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let tree = dir.path().join("path5.tree");
    fs::write(&tree, String::from_utf8(run(&["gen", "path", "5"]).stdout).unwrap()).unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let status = run(&[
            "embed", "--eps", "0.5", "--k", "8", "--seed", "1", "--target", "2", "--out",
            path_str(out), path_str(&tree),
        ])
        .status;
        assert!(status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let doc = json(&a);
    for key in ["eps", "delta", "k", "t", "m", "dim", "seed", "attempts", "expansion", "contraction", "distortion", "coords"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert!(doc["distortion"].as_f64().unwrap() <= 2.0);
    assert_eq!(doc["coords"].as_array().unwrap().len(), 5);
}

#[test]
fn embed_reports_missed_target() {
    let dir = TempDir::new().unwrap();
    let tree = dir.path().join("t.tree");
    fs::write(&tree, String::from_utf8(run(&["gen", "kary", "2", "3"]).stdout).unwrap()).unwrap();
    let out_path = dir.path().join("o.json");
    let out = run(&[
        "embed", "--k", "4", "--delta", "0.125", "--retries", "2", "--target", "1.0000001", "--out",
        path_str(&out_path), path_str(&tree),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&out_path);
    assert_eq!(doc["attempts"], 2);
    assert_eq!(doc["target_met"], false);
}

#[test]
fn malformed_tree_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let tree = dir.path().join("bad.tree");
    fs::write(&tree, "root 0\n0 1 abc\n").unwrap();
    let out = run(&["embed", path_str(&tree)]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("parse error"));
}

#[test]
fn verify_baseline_is_isometric() {
    let dir = TempDir::new().unwrap();
    let tree = dir.path().join("t.tree");
    fs::write(&tree, String::from_utf8(run(&["gen", "random", "40", "4", "--seed", "2"]).stdout).unwrap()).unwrap();
    for dense in [false, true] {
        let coords = dir.path().join("c.json");
        let mut args = vec!["baseline", "--out", path_str(&coords), path_str(&tree)];
        if dense {
            args.push("--dense");
        }
        assert!(run(&args).status.success());
        let report = dir.path().join("r.json");
        let out = run(&["verify", "--out", path_str(&report), path_str(&coords), path_str(&tree)]);
        assert!(out.status.success());
        let d = json(&report)["distortion"].as_f64().unwrap();
        assert!((d - 1.0).abs() <= 1e-9, "{d}");
    }
}

#[test]
fn embed_dumps_coloring_and_scales() {
    let dir = TempDir::new().unwrap();
    let tree = dir.path().join("t.tree");
    fs::write(&tree, String::from_utf8(run(&["gen", "kary", "3", "2"]).stdout).unwrap()).unwrap();
    let (col, sc) = (dir.path().join("col.txt"), dir.path().join("sc.txt"));
    let out = run(&[
        "embed", "--k", "4", "--delta", "0.125", "--out", path_str(&dir.path().join("o.json")),
        "--dump-coloring", path_str(&col), "--dump-scales", path_str(&sc), path_str(&tree),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&col).unwrap().lines().count(), 12);
    assert!(!fs::read_to_string(&sc).unwrap().is_empty());
}

#[test]
fn kary_subcommand() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("k.json");
    let out = run(&["kary", "--k", "2", "--h", "4", "--seed", "3", "--out", path_str(&out_path)]);
    assert!(out.status.success());
    let doc = json(&out_path);
    assert_eq!(doc["t"][0], 28);
    assert_eq!(doc["dim"], 28 * 4 * 28);
    assert!(doc["distortion"].as_f64().unwrap() <= 2.0);
}

#[test]
fn bench_rows() {
    let out = run(&["bench", "--family", "path", "--sizes", "5,9", "--mode", "baseline"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,n,eps,dim,expansion,contraction,distortion,attempts,millis,status");
    assert_eq!(lines.len(), 3);
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[6], "1");
        assert_eq!(f[9], "ok");
    }

    let out = run(&[
        "bench", "--family", "kary", "--sizes", "3,4", "--eps", "0.5,0.25", "--k", "4", "--delta", "0.125",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let dims: Vec<usize> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    // Rows are ordered (size, eps); smaller eps means a larger dimension.
    assert!(dims[1] > dims[0] && dims[3] > dims[2]);
}
