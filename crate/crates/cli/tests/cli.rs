//! End-to-end checks of the installed binary: generate, simulate, sweep,
//! analyze, and the edge-list file format.

use std::fs;
use std::path::Path;
use std::process::Command;

use clusterwave_core::io::parse_edge_list;

fn clusterwave() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clusterwave"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("binary runs");
    assert!(
        output.status.success(),
        "command failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).unwrap()
}

#[test]
fn generate_writes_parseable_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graph.txt");
    run_ok(clusterwave().args([
        "generate",
        "--kind",
        "ssc",
        "--n",
        "500",
        "--w",
        "20",
        "--m0",
        "4",
        "--k-rule",
        "paper",
        "--seed",
        "11",
        "--out",
        path.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("500 20 4 3 ssc 11\n"));
    let (graph, seed) = parse_edge_list(&text).unwrap();
    assert_eq!(seed, 11);
    assert_eq!(graph.n_nodes(), 500);
    assert!(graph.max_degree() <= 24);
    // clique membership round-trips: 3 cliques of 4 nodes
    assert_eq!((0..500).filter(|&v| graph.clique_of(v).is_some()).count(), 12);

    // same seed, same bytes
    let path2 = dir.path().join("graph2.txt");
    run_ok(clusterwave().args([
        "generate", "--kind", "ssc", "--n", "500", "--w", "20", "--m0", "4", "--k-rule", "paper",
        "--seed", "11", "--out", path2.to_str().unwrap(),
    ]));
    assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
}

#[test]
fn sweep_then_analyze_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        r#"
kinds = ["ssc"]
n_values = [150]
w_values = [8, 4]
m0_values = [2]
p_values = [1.0]
k_rules = [1]
trials = 2
horizon = 25
base_seed = 5
"#,
    )
    .unwrap();
    let out = dir.path().join("results");
    run_ok(clusterwave().args([
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    for file in [
        "manifest.json",
        "analysis/peaks.csv",
        "analysis/waves.csv",
        "analysis/summary_peak_ssc_k1_n150_p1.csv",
        "cells/ssc-n150-w8-m2-p1-k1/series.csv",
        "cells/ssc-n150-w8-m2-p1-k1/meta.json",
    ] {
        assert!(out.join(file).is_file(), "missing {file}");
    }

    let before = snapshot(&out.join("analysis"));
    run_ok(clusterwave().args(["analyze", "--in", out.to_str().unwrap()]));
    assert_eq!(before, snapshot(&out.join("analysis")), "analyze changed the tables");
}

#[test]
fn simulate_requires_unambiguous_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.toml");
    fs::write(
        &cfg,
        r#"
kinds = ["ssc"]
n_values = [100]
w_values = [8, 4]
m0_values = [2, 1]
p_values = [1.0]
k_rules = [1]
trials = 1
horizon = 10
base_seed = 3
"#,
    )
    .unwrap();
    // ambiguous without --cell
    let output = clusterwave()
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!output.status.success());

    let out = dir.path().join("one-cell");
    let stdout = run_ok(clusterwave().args([
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--cell",
        "W=4,m0=1",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(stdout.contains("1 cells"), "stdout: {stdout}");
    assert!(out.join("cells/ssc-n100-w4-m1-p1-k1/series.csv").is_file());
}

/// Results must not depend on the worker-pool size.
#[test]
fn sweep_output_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        r#"
kinds = ["sc", "ssc"]
n_values = [120]
w_values = [8, 4]
m0_values = [2]
p_values = [1.0]
k_rules = [1]
trials = 2
horizon = 20
base_seed = 9
"#,
    )
    .unwrap();
    let out_one = dir.path().join("one");
    let out_two = dir.path().join("two");
    run_ok(
        clusterwave()
            .env("CLUSTERWAVE_THREADS", "1")
            .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", out_one.to_str().unwrap()]),
    );
    run_ok(
        clusterwave()
            .env("CLUSTERWAVE_THREADS", "2")
            .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", out_two.to_str().unwrap()]),
    );
    let files = |root: &Path| -> Vec<(String, Vec<u8>)> {
        let mut out = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for entry in fs::read_dir(&d).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    out.push((
                        path.strip_prefix(root).unwrap().to_string_lossy().into_owned(),
                        fs::read(&path).unwrap(),
                    ));
                }
            }
        }
        out.sort();
        out
    };
    assert_eq!(files(&out_one), files(&out_two));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&path).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}
