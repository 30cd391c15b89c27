//! End-to-end tests of the `bsft` binary: file formats, exit codes, and the
//! report schemas.

use std::path::Path;
use std::process::{Command, Output};

fn bsft(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsft"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn generate_writes_documented_headers_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = bsft(
        &["generate", "--dim", "2", "--n", "64", "--density", "5", "--seed", "9", "--out", "a"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let src = std::fs::read(dir.path().join("a.src.pts")).unwrap();
    let tgt = std::fs::read(dir.path().join("a.tgt.pts")).unwrap();
    let src_header = String::from_utf8_lossy(&src);
    let src_header = src_header.lines().next().unwrap();
    let parts: Vec<&str> = src_header.split_whitespace().collect();
    assert_eq!(parts[0], "2");
    assert_eq!(parts[1], "64");
    assert_eq!(parts[3], "1"); // sources carry charges
    assert!(String::from_utf8_lossy(&tgt).lines().next().unwrap().ends_with(" 0"));

    // same seed, byte-identical files
    let out = bsft(
        &["generate", "--dim", "2", "--n", "64", "--density", "5", "--seed", "9", "--out", "b"],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(src, std::fs::read(dir.path().join("b.src.pts")).unwrap());
    assert_eq!(tgt, std::fs::read(dir.path().join("b.tgt.pts")).unwrap());
}

#[test]
fn missing_mesh_is_an_io_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = bsft(
        &["generate", "--dim", "3", "--n", "16", "--geometry-k", "mesh:absent.obj"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("absent.obj"), "{}", stderr(&out));
}

#[test]
fn transform_zero_charges_yields_zero_potentials() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("src.pts"),
        "2 4 2 1\n1.25 2.5 0.0 0.0\n0.5 0.5 0.0 0.0\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("tgt.pts"), "2 4 2 0\n3.0 0.5\n1.0 1.0\n").unwrap();
    let out = bsft(
        &["transform", "--sources", "src.pts", "--targets", "tgt.pts", "--p", "5"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    for line in stdout(&out).lines() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(vals.len(), 4);
        assert_eq!(vals[2], 0.0);
        assert_eq!(vals[3], 0.0);
    }
}

#[test]
fn transform_single_pair_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("src.pts"), "2 4 1 1\n1.25 2.5 1.0 0.0\n").unwrap();
    std::fs::write(dir.path().join("tgt.pts"), "2 4 1 0\n3.0 0.5\n").unwrap();
    let out = bsft(
        &["transform", "--sources", "src.pts", "--targets", "tgt.pts", "--p", "5"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let line = stdout(&out);
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    let phase = std::f64::consts::TAU * (3.0 * 1.25 + 0.5 * 2.5) / 4.0;
    assert!((vals[2] - phase.cos()).abs() <= 5e-3);
    assert!((vals[3] - phase.sin()).abs() <= 5e-3);
}

#[test]
fn transform_rejects_mismatched_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("src.pts"), "2 4 1 1\n1.0 1.0 1.0 0.0\n").unwrap();
    std::fs::write(dir.path().join("tgt8.pts"), "2 8 1 0\n1.0 1.0\n").unwrap();
    let out = bsft(
        &["transform", "--sources", "src.pts", "--targets", "tgt8.pts", "--p", "5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("N mismatch"), "{}", stderr(&out));

    std::fs::write(
        dir.path().join("tgt3.pts"),
        "3 4 1 0\n1.0 1.0 1.0\n",
    )
    .unwrap();
    let out = bsft(
        &["transform", "--sources", "src.pts", "--targets", "tgt3.pts", "--p", "5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("dimension mismatch"), "{}", stderr(&out));
}

fn verify_json(dir: &Path, n: &str, p: &str, seed: &str) -> serde_json::Value {
    let out = bsft(
        &["verify", "--n", n, "--p", p, "--seed", seed, "--format", "json"],
        dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn verify_meets_reference_accuracy_bands() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = verify_json(dir.path(), "1024", "5", "7");
    let eps5 = coarse["eps_a"].as_f64().unwrap();
    assert!(eps5 <= 5e-3, "p=5 eps_a = {eps5:.3e}");

    let fine = verify_json(dir.path(), "1024", "9", "7");
    let eps9 = fine["eps_a"].as_f64().unwrap();
    assert!(eps9 <= 5e-7, "p=9 eps_a = {eps9:.3e}");

    // finer grids never do worse on identical inputs
    assert!(eps9 <= eps5);
}

#[test]
fn verify_is_deterministic_for_fixed_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "dim = 2\nn = 128\np = 5\ndensity = 5\nseed = 42\nformat = json\n",
    )
    .unwrap();
    let run = || {
        let out = bsft(&["verify", "--config", "run.cfg"], dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
        serde_json::from_str::<serde_json::Value>(&stdout(&out)).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a["eps_a"], b["eps_a"]);
    assert_eq!(a["count"], b["count"]);
    // flags override the config file
    let out = bsft(
        &["verify", "--config", "run.cfg", "--n", "64", "--format", "json"],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n"].as_u64(), Some(64));
}

#[test]
fn bench_emits_the_documented_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = bsft(
        &["bench", "--n", "64,128", "--p", "5,7", "--seed", "3", "--out", "table.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let table = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "N,p,P,T_a,T_d,speedup,eps_a");
    assert_eq!(lines.len(), 5); // header + 2x2 cross product

    let mut by_p: std::collections::HashMap<u64, Vec<(u64, f64)>> = Default::default();
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 7);
        let n: u64 = cells[0].parse().unwrap();
        let p: u64 = cells[1].parse().unwrap();
        let count: f64 = cells[2].parse().unwrap();
        let t_a: f64 = cells[3].parse().unwrap();
        let t_d: f64 = cells[4].parse().unwrap();
        let speedup: f64 = cells[5].parse().unwrap();
        let eps: f64 = cells[6].parse().unwrap();
        assert!(t_a > 0.0 && t_d > 0.0 && eps > 0.0);
        // speedup column is consistent with its factors at printed precision
        assert!((speedup - t_d / t_a).abs() / speedup < 1e-2);
        // round trip: re-formatting the parsed values reproduces the row
        let reformatted = format!(
            "{n},{p},{:.2e},{:.2e},{:.2e},{:.2e},{:.2e}",
            count, t_a, t_d, speedup, eps
        );
        assert_eq!(&reformatted, row);
        by_p.entry(p).or_default().push((n, count));
    }
    // at fixed p the point count doubles with N (within 10%)
    for counts in by_p.values() {
        let ratio = counts[1].1 / counts[0].1;
        assert!((1.8..=2.2).contains(&ratio), "P ratio {ratio}");
    }
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = tempfile::tempdir().unwrap();
    // usage: unknown flag
    let out = bsft(&["verify", "--does-not-exist"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    // usage: invalid N
    let out = bsft(&["verify", "--n", "100"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("power of two"));
    // I/O: unwritable output path
    let out = bsft(
        &["bench", "--n", "4", "--p", "3", "--out", "no/such/dir/t.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    // help exits cleanly
    let out = bsft(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn obj_mesh_geometry_flows_through_generate() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("patch.obj"),
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n",
    )
    .unwrap();
    let out = bsft(
        &[
            "generate", "--dim", "3", "--n", "8", "--density", "25",
            "--geometry-k", "mesh:patch.obj", "--seed", "4", "--out", "m",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let src = std::fs::read_to_string(dir.path().join("m.src.pts")).unwrap();
    let header: Vec<&str> = src.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header[0], "3");
    assert_eq!(header[1], "8");
    let count: usize = header[2].parse().unwrap();
    assert!(count > 100); // rescaled patch sampled at 25 per unit area
}
