//! End-to-end tests driving the `expd` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_expd"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("expd-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_q3(dir: &Path) -> PathBuf {
    let mut lines = String::new();
    for i in 0..8u32 {
        for b in 0..3 {
            let j = i ^ (1 << b);
            if i < j {
                lines.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    let path = dir.join("q3.el");
    fs::write(&path, lines).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn decompose_then_verify_round_trips() {
    let dir = workdir("roundtrip");
    let graph = write_q3(&dir);
    let out = run(bin()
        .args(["decompose", "--phi", "2", "--graph"])
        .arg(&graph)
        .arg("--out-dir")
        .arg(&dir));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("q3.cut").exists());
    assert!(dir.join("q3.audit.json").exists());

    let out = run(bin()
        .args(["verify", "--graph"])
        .arg(&graph)
        .arg("--cut")
        .arg(dir.join("q3.cut"))
        .arg("--audit")
        .arg(dir.join("q3.audit.json")));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 fail"), "{stdout}");
}

#[test]
fn custom_weights_override_degrees() {
    let dir = workdir("weights");
    let graph = write_q3(&dir);
    let weights = dir.join("w.nw");
    fs::write(&weights, "0 1\n7 1\n").unwrap();
    let out = run(bin()
        .args(["decompose", "--phi", "1", "--graph"])
        .arg(&graph)
        .arg("--weights")
        .arg(&weights)
        .arg("--out-dir")
        .arg(&dir));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // |A| = 2 across opposite corners routes at kappa = 1.5 > 1/phi = 1,
    // so something must be cut... at phi = 1 kappa(D_A) for the two-corner
    // demand is dist-limited; just check the run completed and files exist.
    assert!(dir.join("q3.cut").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = workdir("determinism");
    let graph = write_q3(&dir);
    for sub in ["a", "b"] {
        let out = run(bin()
            .args(["decompose", "--phi", "0.5", "--graph"])
            .arg(&graph)
            .arg("--out-dir")
            .arg(dir.join(sub)));
        assert!(out.status.success());
    }
    let cut_a = fs::read(dir.join("a/q3.cut")).unwrap();
    let cut_b = fs::read(dir.join("b/q3.cut")).unwrap();
    assert_eq!(cut_a, cut_b);
    let audit_a = fs::read(dir.join("a/q3.audit.json")).unwrap();
    let audit_b = fs::read(dir.join("b/q3.audit.json")).unwrap();
    assert_eq!(audit_a, audit_b);
}

#[test]
fn tampered_cut_fails_with_exit_3() {
    let dir = workdir("tamper");
    let graph = write_q3(&dir);
    let out = run(bin()
        .args(["decompose", "--phi", "2", "--graph"])
        .arg(&graph)
        .arg("--out-dir")
        .arg(&dir));
    assert!(out.status.success());
    // drop the last edge from the cut file
    let cut_path = dir.join("q3.cut");
    let text = fs::read_to_string(&cut_path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() > 2, "expected a nonempty cut at phi=2");
    lines.pop();
    fs::write(&cut_path, lines.join("\n") + "\n").unwrap();

    let out = run(bin()
        .args(["verify", "--graph"])
        .arg(&graph)
        .arg("--cut")
        .arg(&cut_path)
        .arg("--audit")
        .arg(dir.join("q3.audit.json")));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn parse_errors_exit_2_with_line_number() {
    let dir = workdir("parse");
    let bad = dir.join("bad.el");
    fs::write(&bad, "0 1\nnot numbers\n").unwrap();
    let out = run(bin()
        .args(["decompose", "--phi", "1", "--graph"])
        .arg(&bad));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn forced_exact_solver_flag_is_accepted() {
    let dir = workdir("solver");
    let graph = write_q3(&dir);
    let out = run(bin()
        .args(["decompose", "--phi", "0.25", "--solver", "exact", "--epsilon", "0", "--graph"])
        .arg(&graph)
        .arg("--out-dir")
        .arg(&dir));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oversized_component_is_unverified_and_strict_rejects_it() {
    // A 300-vertex ring stays whole at a tiny phi (gated by MWU above 256
    // vertices), leaving one component too large for the exact checker.
    let dir = workdir("oversized");
    let n = 300;
    let mut lines = String::new();
    for v in 0..n {
        lines.push_str(&format!("{v} {}\n", (v + 1) % n));
    }
    let graph = dir.join("ring.el");
    fs::write(&graph, lines).unwrap();
    let out = run(bin()
        .args(["decompose", "--phi", "0.0001", "--graph"])
        .arg(&graph)
        .arg("--out-dir")
        .arg(&dir));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let verify = |strict: bool| {
        let mut cmd = bin();
        cmd.args(["verify", "--graph"])
            .arg(&graph)
            .arg("--cut")
            .arg(dir.join("ring.cut"))
            .arg("--audit")
            .arg(dir.join("ring.audit.json"));
        if strict {
            cmd.arg("--strict");
        }
        run(&mut cmd)
    };
    let out = verify(false);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unverified"), "{stderr}");
    let out = verify(true);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bench_emits_csv_rows() {
    let dir = workdir("bench");
    // tiny custom corpus: one path graph
    fs::write(dir.join("path4.el"), "0 1\n1 2\n2 3\n").unwrap();
    let csv = dir.join("out.csv");
    let out = run(bin()
        .args(["bench", "--phi", "0.25", "--corpus"])
        .arg(&dir)
        .arg("--csv")
        .arg(&csv));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "header + 2 algorithms: {text}");
    assert!(lines[0].starts_with("instance,n,m,phi,algorithm"));
    assert!(lines[1].contains(",ed,") && lines[2].contains(",cut-and-recurse,"));
}
