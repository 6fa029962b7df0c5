use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epr-route"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks").join(name)
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
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
fn compile_both_writes_two_circuits_and_one_row() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = run(&["compile", "--gen", "qft:5", "--mode", "both", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let qasm: Vec<_> = dir_contents(tmp.path()).into_iter().filter(|(n, _)| n.ends_with(".qasm")).collect();
    assert_eq!(qasm.len(), 2);
    let rows = data_rows(&fs::read_to_string(tmp.path().join("comparison.csv")).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "qft_5");
    for (name, bytes) in dir_contents(tmp.path()) {
        let text = String::from_utf8(bytes).unwrap();
        let marker = if name.ends_with(".json") { "\"config\": {" } else { "config: {" };
        assert!(text.contains(marker), "{name} lacks the run config");
    }
}

#[test]
fn cx_free_circuit_has_no_remote_blocks() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("singles.qasm");
    fs::write(&input, "OPENQASM 2.0;\nqreg q[3];\nh q;\nt q[1];\n").unwrap();
    let out = tmp.path().join("out");
    let o = run(&["compile", "--input", input.to_str().unwrap(), "--mode", "remote", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("singles.metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["remote"]["counts"]["remote_cx"], 0);
    assert!(metrics.get("standard").is_none());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for args in [
        vec!["compile", "--gen", "qft:7", "--gen", "dj:6", "--physical"],
        vec!["bench", "--gen", "qft:4..6", "--gen", "dj:5"],
    ] {
        for dir in [&a, &b] {
            let mut full = args.clone();
            full.extend(["--out", "run"]);
            let o = bin().args(&full).current_dir(dir.path()).output().unwrap();
            assert!(o.status.success());
        }
        assert_eq!(dir_contents(&a.path().join("run")), dir_contents(&b.path().join("run")));
    }
}

#[test]
fn bench_suite_rows_are_consistent() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = run(&["bench", "--gen", "qft:4..12", "--out", out]);
    assert!(o.status.success());
    let rows = data_rows(&fs::read_to_string(tmp.path().join("report.csv")).unwrap());
    assert_eq!(rows.len(), 9);
    let n = |r: &Vec<String>, i: usize| r[i].parse::<i64>().unwrap();
    for r in &rows {
        assert_eq!(r[1], "ok");
        // cx_difference = standard_cx - remote_standard_cx, and likewise for depth.
        assert_eq!(n(r, 18), n(r, 16) - n(r, 10));
        assert_eq!(n(r, 19), n(r, 17) - n(r, 13));
        assert_eq!(n(r, 12), n(r, 10) + 2 * n(r, 11));
        assert!(n(r, 14) >= n(r, 13));
        assert!(n(r, 15) <= n(r, 13));
    }
    let diffs = data_rows(&fs::read_to_string(tmp.path().join("differences.csv")).unwrap());
    assert_eq!(diffs.len(), 9);
    assert_eq!(diffs[0], vec!["4", &rows[0][18], &rows[0][19], "qft"]);
}

#[test]
fn empty_suite_writes_header_only() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["bench", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(data_rows(&csv).is_empty());
}

#[test]
fn unparsable_file_fails_only_its_row() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.qasm");
    fs::write(&bad, "OPENQASM 2.0;\nqreg q[2];\nccx q[0],q[1];\n").unwrap();
    let out = tmp.path().join("out");
    let o = run(&[
        "bench",
        "--gen",
        "dj:4",
        "--input",
        bad.to_str().unwrap(),
        "--input",
        corpus("gf2_2_mult.qasm").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = data_rows(&fs::read_to_string(out.join("report.csv")).unwrap());
    let status: Vec<(&str, &str)> = rows.iter().map(|r| (r[0].as_str(), r[1].as_str())).collect();
    assert_eq!(status, [("dj_4", "ok"), ("bad", "failed"), ("gf2_2_mult", "ok")]);
    assert!(rows[1][2].contains("unsupported gate"), "{}", rows[1][2]);
    assert!(rows[1][2].contains("3:1"), "{}", rows[1][2]);
}

#[test]
fn verify_compiled_files_and_catch_corruption() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path();
    let o = run(&["compile", "--gen", "qft:4", "--mode", "remote", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let compiled = out.join("qft_4.remote.qasm");
    let verify = |compiled: &Path| {
        run(&[
            "verify",
            "--gen",
            "qft:4",
            "--compiled",
            compiled.to_str().unwrap(),
            "--layout",
            out.join("qft_4.remote.layout.json").to_str().unwrap(),
            "--blocks",
            out.join("qft_4.remote.blocks.json").to_str().unwrap(),
            "--trials",
            "4",
        ])
    };
    let o = verify(&compiled);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));

    // Drop one rotation outside any remote block.
    let text = fs::read_to_string(&compiled).unwrap();
    let victim = text.lines().position(|l| l.starts_with("rz(")).unwrap();
    let corrupted: Vec<&str> = text.lines().enumerate().filter(|&(i, _)| i != victim).map(|(_, l)| l).collect();
    let bad = out.join("corrupted.qasm");
    fs::write(&bad, corrupted.join("\n")).unwrap();
    let o = verify(&bad);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn verify_in_memory_and_size_limit() {
    let o = run(&["verify", "--gen", "qft:4", "--gen", "dj:5", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.matches("\"verdict\":\"pass\"").count(), 4);

    let o = run(&["verify", "--gen", "qft:20"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8(o.stdout).unwrap().contains("not verifiable"));
}

#[test]
fn exit_codes_for_usage_and_pipeline_errors() {
    assert_eq!(run(&["compile", "--mode", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let o = run(&["compile", "--input", "/nonexistent/file.qasm"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("not a readable file"));
    assert_eq!(run(&["compile", "--gen", "ghz:4"]).status.code(), Some(3));
}

#[test]
fn gen_and_device_commands() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert!(run(&["gen", "--gen", "dj:3..4", "--out", out]).status.success());
    assert!(tmp.path().join("dj_3.qasm").exists() && tmp.path().join("dj_4.qasm").exists());

    assert!(run(&["device", "--side", "5", "--out", out]).status.success());
    let json = tmp.path().join("device_5.json");
    let dot = fs::read_to_string(tmp.path().join("device_5.dot")).unwrap();
    assert!(dot.contains("n2 -- n22 [style=dashed"));

    // The written device can drive a compilation.
    let o = run(&["compile", "--gen", "qft:6", "--device-json", json.to_str().unwrap(), "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("qft_6.metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["remote"]["side"], 5);
    assert_eq!(metrics["standard"]["side"], 5);
}
