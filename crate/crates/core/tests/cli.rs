use std::io::Write;
use std::process::Command;

fn xorcount() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xorcount"))
}

fn file_with(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn exact_count_text() {
    let f = file_with("p cnf 3 1\nc ind 1 2 0\n1 2 3 0\n");
    let out = xorcount().arg("count").arg(f.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("Exact Count: 4\n"));
}

#[test]
fn structured_output_is_one_object() {
    let f = file_with("p cnf 12 0\n");
    let out = xorcount()
        .args(["count", "--format", "structured", "--seed", "3"])
        .arg(f.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 3);
    assert!(v["status"] == "interval" || v["status"] == "exact");
    assert!(v["total_queries"].as_u64().unwrap() > 0);
}

#[test]
fn exit_codes() {
    let bad = file_with("p cnf 2 1\n1 5 0\n");
    assert_eq!(xorcount().arg("count").arg(bad.path()).output().unwrap().status.code(), Some(3));
    assert_eq!(
        xorcount().args(["count", "/nonexistent/file.cnf"]).output().unwrap().status.code(),
        Some(3)
    );
    let ok = file_with("p cnf 12 0\n");
    let code = |extra: &[&str]| {
        xorcount()
            .arg("count")
            .arg(ok.path())
            .args(extra)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(code(&["--cl", "1.5"]), Some(3));
    assert_eq!(code(&["--prior", "uniform:3:40"]), Some(3));
    assert_eq!(code(&["--thres", "0", "--max-iterations", "2"]), Some(2));
    let smt = file_with("(declare-fun y () (_ BitVec 4))\n");
    let solver_fails = xorcount()
        .args(["count", "--mode", "smt", "--output-name", "y", "--output-width", "4"])
        .args(["--solver-cmd", "sh -c exit"])
        .arg(smt.path())
        .output()
        .unwrap();
    assert_eq!(solver_fails.status.code(), Some(4));
    let missing_name = xorcount()
        .args(["count", "--mode", "smt"])
        .arg(smt.path())
        .output()
        .unwrap();
    assert_eq!(missing_name.status.code(), Some(3));
}

#[test]
fn reads_standard_input() {
    let mut child = xorcount()
        .args(["count", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"p cnf 2 0\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("Exact Count: 4"));
}

#[test]
fn calibrate_prints_a_table() {
    let out = xorcount()
        .args(["calibrate", "--runs", "3", "--generator", "planted:6:10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("runs: 3 coverage:"), "{text}");
    assert_eq!(
        xorcount().args(["calibrate", "--generator", "bogus"]).output().unwrap().status.code(),
        Some(3)
    );
}
