//! The binary end to end: exit codes, stdin input, and JSON round trips.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cordsheaf"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn augmentation_survives_sheaf_and_back_through_stdin() {
    let augs = run(
        &[
            "augs",
            "--braid",
            "1 1 1",
            "--strands",
            "2",
            "--field",
            "3",
            "--json",
        ],
        None,
    );
    assert_eq!(code(&augs), 0);
    let all: Value = serde_json::from_str(&stdout(&augs)).unwrap();
    let points = all["points"].as_array().unwrap();
    assert_eq!(points.len(), all["point_count"].as_u64().unwrap() as usize);
    for point in points {
        let text = point.to_string();
        let sheaf = run(
            &[
                "sheaf",
                "--aug",
                "-",
                "--braid",
                "1 1 1",
                "--strands",
                "2",
                "--json",
            ],
            Some(&text),
        );
        assert_eq!(
            code(&sheaf),
            0,
            "{}",
            String::from_utf8_lossy(&sheaf.stderr)
        );
        let back = run(&["to-aug", "--sheaf", "-", "--json"], Some(&stdout(&sheaf)));
        assert_eq!(code(&back), 0, "{}", String::from_utf8_lossy(&back.stderr));
        let got: Value = serde_json::from_str(&stdout(&back)).unwrap();
        // the point list is already in canonical dilation form for a knot
        assert_eq!(&got, point);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "verify",
        "--braid",
        "",
        "--strands",
        "2",
        "--field",
        "3",
        "--json",
    ];
    let a = run(&args, None);
    let b = run(&args, None);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert!(report["failures"].as_array().unwrap().is_empty());
}

#[test]
fn verify_exit_codes() {
    let ok = run(
        &["verify", "--braid", "", "--strands", "1", "--field", "3"],
        None,
    );
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("3"));
    let over = run(
        &[
            "verify",
            "--braid",
            "1 1",
            "--strands",
            "2",
            "--field",
            "3",
            "--budget",
            "10",
        ],
        None,
    );
    assert_eq!(code(&over), 3);
    let not_prime = run(
        &["verify", "--braid", "1", "--strands", "2", "--field", "4"],
        None,
    );
    assert_eq!(code(&not_prime), 2);
    let bad_gen = run(
        &["verify", "--braid", "3", "--strands", "2", "--field", "3"],
        None,
    );
    assert_eq!(code(&bad_gen), 2);
}

#[test]
fn input_errors() {
    assert_eq!(code(&run(&["frobnicate"], None)), 2);
    assert_eq!(code(&run(&["to-aug", "--sheaf", "-"], Some("nope"))), 2);
    assert_eq!(
        code(&run(
            &["to-aug", "--sheaf", "/nonexistent/sheaf.json"],
            None
        )),
        2
    );
    assert_eq!(code(&run(&["--help"], None)), 0);
}

#[test]
fn relation_failure_exits_one() {
    let bad = r#"{"field":"F_3","n":2,"r":1,"component_map":[1,1],
        "R":[["1","1"],["1","2"]],"lambda":["1"],"mu":["2"]}"#;
    let o = run(
        &["sheaf", "--aug", "-", "--braid", "1 1 1", "--strands", "2"],
        Some(bad),
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("normalization"));
}

#[test]
fn unlink_family_end_to_end() {
    let ok = run(
        &[
            "example-unlink3",
            "--field",
            "5",
            "--e12",
            "1",
            "--e13",
            "1",
            "--e32",
            "1",
            "--e33",
            "2",
        ],
        None,
    );
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains(": OK"));
    let json = run(
        &[
            "example-unlink3",
            "--field",
            "5",
            "--e12",
            "1",
            "--e13",
            "1",
            "--e32",
            "1",
            "--e33",
            "2",
            "--json",
        ],
        None,
    );
    assert_eq!(code(&json), 0);
    serde_json::from_str::<Value>(&stdout(&json)).unwrap();
    // e12 e33 − e13 e32 = 0
    let singular = run(
        &[
            "example-unlink3",
            "--field",
            "5",
            "--e12",
            "1",
            "--e13",
            "1",
            "--e32",
            "1",
            "--e33",
            "1",
        ],
        None,
    );
    assert_eq!(code(&singular), 2);
    assert!(String::from_utf8_lossy(&singular.stderr).contains("determinant"));
    let zero = run(
        &[
            "example-unlink3",
            "--field",
            "5",
            "--e12",
            "0",
            "--e13",
            "1",
            "--e32",
            "1",
            "--e33",
            "2",
        ],
        None,
    );
    assert_eq!(code(&zero), 2);
}

#[test]
fn markov_exit_codes() {
    let same = run(
        &[
            "markov",
            "--braid1",
            "",
            "--strands1",
            "1",
            "--braid2",
            "-1",
            "--strands2",
            "2",
            "--field",
            "2",
        ],
        None,
    );
    assert_eq!(code(&same), 0, "{}", stdout(&same));
    let different = run(
        &[
            "markov",
            "--braid1",
            "1 1",
            "--strands1",
            "2",
            "--braid2",
            "-2 1 1 2",
            "--strands2",
            "3",
            "--field",
            "2",
            "--json",
        ],
        None,
    );
    assert_eq!(code(&different), 1);
    let rep: Value = serde_json::from_str(&stdout(&different)).unwrap();
    assert_eq!(rep["matched"], Value::Bool(false));
}
