//! End-to-end runs of the `score` binary: artifacts, determinism, and exit
//! codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn score(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_score"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let out = score(args, dir);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn report(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("report.json")).expect("report exists");
    serde_json::from_str(&text).expect("report parses")
}

fn metric(rep: &serde_json::Value, name: &str) -> f64 {
    rep["metrics"][name]
        .as_f64()
        .unwrap_or_else(|| panic!("metric {name} missing from {rep}"))
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

fn generate_dcbm(dir: &Path, out: &str, seed: &str) {
    run_ok(
        &[
            "generate", "dcbm", "--n", "120", "--k", "2", "--within", "0.5", "--between",
            "0.05", "--seed", seed, "--out-dir", out,
        ],
        dir,
    );
}

#[test]
fn generate_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    generate_dcbm(tmp.path(), "a", "1");
    generate_dcbm(tmp.path(), "b", "1");
    for name in ["edges.txt", "labels.csv"] {
        assert_eq!(
            read(tmp.path().join("a").join(name)),
            read(tmp.path().join("b").join(name)),
            "{name} differs between identical runs"
        );
    }
    generate_dcbm(tmp.path(), "c", "2");
    assert_ne!(
        read(tmp.path().join("a/edges.txt")),
        read(tmp.path().join("c/edges.txt")),
        "different seeds gave the same graph"
    );
}

#[test]
fn detect_recovers_planted_labels_and_lists_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    generate_dcbm(tmp.path(), "gen", "3");
    run_ok(
        &[
            "detect", "--input", "gen/edges.txt", "--k", "2", "--method", "score", "--truth",
            "gen/labels.csv", "--seed", "7", "--out-dir", "det",
        ],
        tmp.path(),
    );
    let rep = report(&tmp.path().join("det"));
    assert_eq!(rep["command"], "detect");
    assert_eq!(metric(&rep, "errors_vs_truth"), 0.0);
    assert_eq!(metric(&rep, "n_giant"), 120.0);
    for artifact in rep["artifacts"].as_array().unwrap() {
        let path = tmp.path().join("det").join(
            Path::new(artifact.as_str().unwrap())
                .file_name()
                .unwrap(),
        );
        assert!(path.exists(), "listed artifact {path:?} missing");
    }
    let labels = read(tmp.path().join("det/labels.csv"));
    assert!(labels.starts_with("node,label\n"));
    assert_eq!(labels.lines().count(), 121);
}

#[test]
fn detect_reruns_reproduce_metrics_and_labels_bitwise() {
    let tmp = tempfile::tempdir().unwrap();
    generate_dcbm(tmp.path(), "gen", "5");
    for out in ["d1", "d2"] {
        run_ok(
            &[
                "detect", "--input", "gen/edges.txt", "--k", "2", "--seed", "11", "--out-dir",
                out,
            ],
            tmp.path(),
        );
    }
    let (r1, r2) = (report(&tmp.path().join("d1")), report(&tmp.path().join("d2")));
    assert_eq!(r1["metrics"], r2["metrics"]);
    assert_eq!(
        read(tmp.path().join("d1/labels.csv")),
        read(tmp.path().join("d2/labels.csv"))
    );
}

#[test]
fn unknown_flags_and_values_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    generate_dcbm(tmp.path(), "gen", "1");
    let out = score(
        &["detect", "--input", "gen/edges.txt", "--k", "2", "--methid", "score"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--method"), "no suggestion in: {err}");

    let out = score(
        &["detect", "--input", "gen/edges.txt", "--k", "2", "--method", "wizardry"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("score-plus"));
}

#[test]
fn missing_input_is_a_computation_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = score(
        &["detect", "--input", "nowhere.edges", "--k", "2"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.edges"));
}

#[test]
fn estimate_k_stops_at_the_planted_count() {
    let tmp = tempfile::tempdir().unwrap();
    generate_dcbm(tmp.path(), "gen", "9");
    run_ok(
        &[
            "estimate-k", "--input", "gen/edges.txt", "--alpha", "0.05", "--m-max", "5",
            "--resamples", "12", "--seed", "2", "--out-dir", "ek",
        ],
        tmp.path(),
    );
    let rep = report(&tmp.path().join("ek"));
    assert_eq!(metric(&rep, "k_hat"), 2.0);
    let trace = read(tmp.path().join("ek/gof_trace.csv"));
    assert!(trace.starts_with("m,psi,q,bias\n"));
    assert_eq!(trace.lines().count() as f64 - 1.0, metric(&rep, "steps"));
    assert!(metric(&rep, "psi_1") > metric(&rep, "z_alpha"));
    assert!(metric(&rep, "psi_2") <= metric(&rep, "z_alpha"));
}

#[test]
fn gof_at_the_planted_count_accepts() {
    let tmp = tempfile::tempdir().unwrap();
    generate_dcbm(tmp.path(), "gen", "13");
    run_ok(
        &[
            "gof", "--input", "gen/edges.txt", "--k", "2", "--resamples", "12", "--seed", "2",
            "--out-dir", "g",
        ],
        tmp.path(),
    );
    let rep = report(&tmp.path().join("g"));
    assert_eq!(metric(&rep, "reject"), 0.0);
    assert!(metric(&rep, "c_n") > 0.0);
}

#[test]
fn mixed_memberships_are_probability_rows() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "generate", "mixed", "--k", "3", "--within", "0.9", "--between", "0.1",
            "--pure-per-community", "40", "--mixed-count", "80", "--alpha", "0.4", "--seed",
            "5", "--out-dir", "gen",
        ],
        tmp.path(),
    );
    run_ok(
        &[
            "mixed", "--input", "gen/edges.txt", "--k", "3", "--truth", "gen/memberships.csv",
            "--seed", "3", "--out-dir", "mix",
        ],
        tmp.path(),
    );
    let rep = report(&tmp.path().join("mix"));
    assert!(metric(&rep, "membership_mse") < 0.1);
    let csv = read(tmp.path().join("mix/memberships.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("node,pi_1,pi_2,pi_3"));
    for line in lines {
        let fields: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|f| f.parse().unwrap())
            .collect();
        let sum: f64 = fields.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "row not a PMF: {line}");
        assert!(fields.iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn dynamic_stacks_one_block_per_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    generate_dcbm(tmp.path(), "s1", "21");
    generate_dcbm(tmp.path(), "s2", "22");
    run_ok(
        &[
            "dynamic", "--input", "s1/edges.txt", "--input", "s2/edges.txt", "--k", "2",
            "--seed", "6", "--out-dir", "dyn",
        ],
        tmp.path(),
    );
    let rep = report(&tmp.path().join("dyn"));
    assert_eq!(metric(&rep, "snapshots"), 2.0);
    let traj = read(tmp.path().join("dyn/trajectories.csv"));
    assert!(traj.starts_with("node,t,dist_to_v_1,dist_to_v_2\n"));
    assert_eq!(traj.lines().count(), 1 + 2 * 120);
}

#[test]
fn topics_writes_stochastic_estimates_and_anchors() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "generate", "plsi", "--k", "3", "--anchors-per-topic", "3", "--shared-words",
            "30", "--pure-docs", "15", "--mixed-docs", "90", "--alpha", "0.4",
            "--doc-length", "400", "--seed", "11", "--out-dir", "gen",
        ],
        tmp.path(),
    );
    run_ok(
        &[
            "topics", "--corpus", "gen/corpus.txt", "--vocab", "gen/vocab.txt", "--k", "3",
            "--vh", "sp", "--seed", "4", "--out-dir", "top",
        ],
        tmp.path(),
    );
    let rep = report(&tmp.path().join("top"));
    assert_eq!(metric(&rep, "anchor_free"), 0.0);
    let a_hat = read(tmp.path().join("top/a_hat.csv"));
    let mut sums = [0.0f64; 3];
    for line in a_hat.lines().skip(1) {
        for (t, f) in line.split(',').skip(1).enumerate() {
            sums[t] += f.parse::<f64>().unwrap();
        }
    }
    for s in sums {
        assert!((s - 1.0).abs() < 1e-9, "topic column sums to {s}");
    }
    assert!(read(tmp.path().join("top/anchors.csv")).starts_with("topic,rank,word,score\n"));
    assert!(read(tmp.path().join("top/w_hat.csv")).starts_with("doc,topic_1,topic_2,topic_3\n"));
}

#[test]
fn hier_prints_the_tree_and_partitions_the_nodes() {
    let tmp = tempfile::tempdir().unwrap();
    generate_dcbm(tmp.path(), "gen", "17");
    let out = run_ok(
        &[
            "hier", "--input", "gen/edges.txt", "--alpha0", "0.001", "--k-max", "4",
            "--min-split", "15", "--seed", "9", "--out-dir", "h",
        ],
        tmp.path(),
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("C1 (120 nodes"), "tree missing from: {stdout}");
    assert!(stdout.contains("C1-1"));
    let rep = report(&tmp.path().join("h"));
    assert_eq!(metric(&rep, "leaves"), 2.0);
    let leaves = read(tmp.path().join("h/leaves.csv"));
    assert_eq!(leaves.lines().count(), 121);
    assert!(tmp.path().join("h/tree.json").exists());
}

#[test]
fn bench_sweeps_are_deterministic_and_long_format() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = r#"{
  "kind": "community",
  "param": "scale",
  "grid": [0.9, 1.0],
  "methods": ["score", "osc"],
  "reps": 2,
  "base-seed": 7,
  "instance": {
    "n": 100, "k": 2, "within": 0.6, "between": 0.1,
    "theta": {"kind": "fixed", "value": 1.0}
  }
}"#;
    std::fs::write(tmp.path().join("sweep.json"), spec).unwrap();
    for out in ["b1", "b2"] {
        run_ok(&["bench", "--spec", "sweep.json", "--out-dir", out], tmp.path());
    }
    let csv = read(tmp.path().join("b1/results.csv"));
    assert_eq!(csv, read(tmp.path().join("b2/results.csv")));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("param,method,rep,metric,value"));
    assert_eq!(lines.clone().count(), 8);
    // Sorted by grid position, then method order, then rep.
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..4], &["0.9", "score", "0", "hamming"]);
    let rep = report(&tmp.path().join("b1"));
    assert_eq!(metric(&rep, "rows"), 8.0);
}

#[test]
fn testglobal_rejects_a_two_block_graph() {
    let tmp = tempfile::tempdir().unwrap();
    generate_dcbm(tmp.path(), "gen", "23");
    run_ok(
        &["testglobal", "--input", "gen/edges.txt", "--out-dir", "t"],
        tmp.path(),
    );
    let rep = report(&tmp.path().join("t"));
    assert!(metric(&rep, "phi_n") > 3.0);
    assert!(metric(&rep, "p_value") < 0.01);
}
