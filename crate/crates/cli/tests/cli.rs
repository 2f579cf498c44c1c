use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn crtsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crtsat"))
        .args(args)
        .env_remove("CRTSAT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn header_counts(path: &Path) -> (u64, u64) {
    let text = fs::read_to_string(path).unwrap();
    let line = text.lines().find(|l| l.starts_with("p ")).unwrap();
    let f: Vec<&str> = line.split_whitespace().collect();
    (f[2].parse().unwrap(), f[3].parse().unwrap())
}

#[test]
fn generate_crt_l50_within_envelope() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f.cnf");
    let o = crtsat(&[
        "generate",
        "--l",
        "50",
        "--mode",
        "crt",
        "--seed",
        "1",
        "--format",
        "dimacs",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (vars, clauses) = header_counts(&out);
    assert!(vars <= 5657 && clauses <= 35_776, "{vars} {clauses}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("c l=50\nc x-hex="));
    assert!(stdout(&o).contains("variables="));
}

#[test]
fn generate_naive_l50_exact() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("n.cnf");
    let o = crtsat(&[
        "generate",
        "--l",
        "50",
        "--mode",
        "naive",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(header_counts(&out).0, 7599);
}

#[test]
fn witness_round_trip_and_perturbation() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.cnf");
    let o = crtsat(&[
        "generate",
        "--l",
        "4",
        "--seed",
        "7",
        "--witness",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let wpath = dir.path().join("w.cnf.witness");
    let ok = crtsat(&["verify", out.to_str().unwrap(), wpath.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));

    // Flip input variable 1.
    let text = fs::read_to_string(&wpath).unwrap();
    let flipped = match text.find("v 1 ") {
        Some(i) => format!("{}v -1 {}", &text[..i], &text[i + 4..]),
        None => text.replacen("v -1 ", "v 1 ", 1),
    };
    let bad = dir.path().join("bad.witness");
    fs::write(&bad, flipped).unwrap();
    let o = crtsat(&["verify", out.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("violated clause"));

    let truncated = dir.path().join("trunc.witness");
    fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    let o = crtsat(&["verify", out.to_str().unwrap(), truncated.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn extended_format_with_witness() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("e.ext");
    let o = crtsat(&[
        "generate",
        "--l",
        "6",
        "--format",
        "ext",
        "--witness",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&out).unwrap().contains("\np ext "));
}

#[test]
fn deterministic_output_and_env_directory() {
    let dir = TempDir::new().unwrap();
    let run = || {
        let o = Command::new(env!("CARGO_BIN_EXE_crtsat"))
            .args(["generate", "--l", "12", "--seed", "3"])
            .env("CRTSAT_OUT_DIR", dir.path())
            .output()
            .unwrap();
        assert!(o.status.success());
        fs::read(dir.path().join("crtsat-l12-crt-s3.cnf")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn negation_with_target_override() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("neg.cnf");
    let o = crtsat(&[
        "generate",
        "--l",
        "4",
        "--x",
        "4d",
        "--negate",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let plain = dir.path().join("pos.cnf");
    assert!(crtsat(&[
        "generate",
        "--l",
        "4",
        "--x",
        "4d",
        "-o",
        plain.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(header_counts(&out).1, header_counts(&plain).1 + 2);
    let text = fs::read_to_string(&out).unwrap();
    assert!(
        !text.contains("=7\n") && !text.contains("=b\n"),
        "factors must not leak"
    );

    let o = crtsat(&[
        "generate",
        "--l",
        "4",
        "--negate",
        "--witness",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = crtsat(&[
        "generate",
        "--l",
        "4",
        "--x",
        "61",
        "--witness",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "97 has no 4-bit factorization");
}

#[test]
fn plan_and_report() {
    let o = crtsat(&["plan", "--l", "50"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("l=50 e0=27 e=5,7,8,9,11") && s.contains("valid: yes"));
    for l in ["33", "2"] {
        let o = crtsat(&["plan", "--l", l]);
        assert!(o.status.success() && stdout(&o).contains("valid: yes"));
    }
    let o = crtsat(&["report", "--l", "30,50"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let row50 = s
        .lines()
        .find(|l| l.trim_start().starts_with("50 "))
        .unwrap();
    assert!(row50.contains(" 7599 ") && row50.contains(" 49596 ") && row50.contains(" 5455 "));
    assert!(s
        .lines()
        .any(|l| l.trim_start().starts_with("30 ") && l.contains(" 2759 ")));
}

#[test]
fn usage_errors() {
    assert_eq!(crtsat(&["generate"]).status.code(), Some(2));
    assert_eq!(
        crtsat(&["generate", "--l", "4", "--mode", "fast"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        crtsat(&["generate", "--l", "50", "--plan", "l=40 e0=16 e=7,8,9,11"])
            .status
            .code(),
        Some(2)
    );
    let o = crtsat(&["verify", "/nonexistent/a.cnf", "/nonexistent/b"]);
    assert_eq!(o.status.code(), Some(3));
}
