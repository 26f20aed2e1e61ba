use std::io::Write;
use std::process::{Command, Output, Stdio};

use gaussian_eof::symplectic::tmss_cm;
use gaussian_eof::{entropy_of_tmss, f_of_delta, EprUncertainty};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gaussian-eof"));
    cmd.env_remove("GAUSS_EOF_TOL");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in:\n{text}"))
        .to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn analyze_headline_value() {
    let o = run(&["analyze", "2", "1.5", "1.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "eof_bits"), "0.566165626623");
    assert_eq!(field(&text, "delta"), "0.5");
    assert_eq!(field(&text, "separable"), "false");
    let again = run(&["analyze", "--n", "2", "--kx", "1.5", "--kp", "1.5"]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn analyze_separable_state() {
    let o = run(&["analyze", "2", "0.9", "0.9", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "n,m,kx,kp,valid,symmetric,separable,delta,r_delta,eof_bits\n2,2,0.9,0.9,true,true,true,1,0,0\n"
    );
}

#[test]
fn analyze_matrix_file_matches_tmss_entropy() {
    let cm = tmss_cm(1.0).unwrap();
    let mut file = tempfile::NamedTempFile::new().unwrap();
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| format!("{:?}", cm.matrix()[(i, j)]))
            .collect();
        writeln!(file, "{}", row.join(" ")).unwrap();
    }
    let path = file.path().to_str().unwrap();
    let o = run(&["analyze", "--input", path, "--digits", "17"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let eof: f64 = field(&stdout(&o), "eof_bits").parse().unwrap();
    assert!((eof - entropy_of_tmss(1.0)).abs() < 1e-9, "{eof}");
}

#[test]
fn analyze_reads_stdin() {
    let mut child = bin()
        .args(["analyze", "-i", "-", "--format", "csv"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"# state\n2, 1.5, 1.5\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("0.566165626623\n"));
}

#[test]
fn exit_codes() {
    let cases: &[(&[&str], i32)] = &[
        (&["analyze", "1", "1", "1"], 2),
        (
            &[
                "analyze", "2", "0", "1", "0", "0", "2", "0", "-1", "1", "0", "3", "0", "0", "-1",
                "0", "3",
            ],
            3,
        ),
        (&["analyze"], 64),
        (&["analyze", "2", "1.5", "1.5", "--n", "2"], 64),
        (&["analyze", "--n", "2", "--kx", "1"], 64),
        (&["analyze", "2", "x", "1.5"], 65),
        (&["analyze", "--input", "/nonexistent/state.txt"], 66),
        (&["verify", "nosuchsuite"], 64),
        (
            &[
                "sweep", "--axis", "k", "--lo", "1", "--hi", "0", "--steps", "5", "--n", "2",
            ],
            64,
        ),
        (
            &[
                "sweep", "--axis", "kx", "--lo", "0", "--hi", "1", "--steps", "5", "--n", "2",
            ],
            64,
        ),
        (&["--help"], 0),
        (&["--version"], 0),
    ];
    for (args, want) in cases {
        let o = run(args);
        assert_eq!(
            o.status.code(),
            Some(*want),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn parse_error_reports_position() {
    let o = run(&["analyze", "2", "1.5", "abc"]);
    assert_eq!(o.status.code(), Some(65));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 1, column"), "{err}");
}

#[test]
fn invalid_state_still_reports() {
    let o = run(&["analyze", "1", "1", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).ends_with("1,1,1,1,false,true,,,,\n"));
    assert!(!o.stderr.is_empty());
}

#[test]
fn tolerance_from_environment() {
    let o = bin()
        .args(["analyze", "1", "1", "1"])
        .env("GAUSS_EOF_TOL", "1e-9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let bad = bin()
        .args(["analyze", "2", "1", "1"])
        .env("GAUSS_EOF_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn sweep_is_byte_stable_with_lf_endings() {
    let args = [
        "sweep", "--axis", "n", "--lo", "1.6", "--hi", "4", "--steps", "25", "--kx", "1.5", "--kp",
        "1.5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains(&b'\r'));
    assert!(a.stdout.ends_with(b"\n"));
    assert_eq!(stdout(&a).lines().count(), 26);
}

#[test]
fn sweep_k_turns_on_past_one() {
    let o = run(&[
        "sweep", "--axis", "k", "--lo", "0", "--hi", "1.7", "--steps", "18", "--n", "2",
    ]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 18);
    for (i, row) in rows.iter().enumerate() {
        let eof: f64 = row[9].parse().unwrap();
        if i <= 10 {
            assert_eq!(eof, 0.0, "k = {}", row[2]);
            assert_eq!(row[6], "true");
        } else {
            assert!(eof > 0.0);
            assert_eq!(row[6], "false");
        }
    }
}

#[test]
fn sweep_r_matches_tmss_entropy() {
    let o = run(&[
        "sweep", "--axis", "r", "--lo", "0", "--hi", "2", "--steps", "9", "--digits", "17",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for (i, row) in csv_rows(&stdout(&o)).iter().enumerate() {
        let r = 0.25 * i as f64;
        let eof: f64 = row[9].parse().unwrap();
        assert!((eof - entropy_of_tmss(r)).abs() < 1e-9, "r = {r}: {eof}");
    }
}

#[test]
fn single_point_sweep_equals_analyze() {
    let sweep = run(&[
        "sweep", "--axis", "k", "--lo", "1.5", "--hi", "1.5", "--steps", "1", "--n", "2",
    ]);
    let analyze = run(&["analyze", "2", "1.5", "1.5", "--format", "csv"]);
    assert_eq!(sweep.status.code(), Some(0));
    assert_eq!(sweep.stdout, analyze.stdout);
}

#[test]
fn sweep_agrees_with_closed_form() {
    let o = run(&[
        "sweep", "--axis", "kp", "--lo", "0", "--hi", "1.5", "--steps", "7", "--n", "2", "--kx",
        "1.5", "--digits", "17",
    ]);
    for row in csv_rows(&stdout(&o)) {
        assert_eq!(row[4], "true");
        let kp: f64 = row[3].parse().unwrap();
        let delta = ((2.0 - 1.5) * (2.0 - kp)).sqrt().min(1.0);
        let want = f_of_delta(EprUncertainty::new(delta).unwrap());
        let eof: f64 = row[9].parse().unwrap();
        assert!((eof - want).abs() < 1e-12, "kp = {kp}");
    }
}

#[test]
fn sweep_with_no_valid_point_warns() {
    let o = run(&[
        "sweep", "--axis", "n", "--lo", "0.1", "--hi", "0.5", "--steps", "3", "--kx", "0", "--kp",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(csv_rows(&stdout(&o)).len(), 3);
}

#[test]
fn output_file_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let o = run(&[
        "analyze",
        "2",
        "1.5",
        "1.5",
        "--format",
        "json",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["valid"], true);
    assert!((json["eof_bits"].as_f64().unwrap() - 0.5661656266226014).abs() < 1e-15);

    let missing = dir.path().join("no/such/dir/out.csv");
    let o = run(&[
        "analyze",
        "2",
        "1.5",
        "1.5",
        "-o",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(74));
}

#[test]
fn verify_recursion_suite() {
    let o = run(&["verify", "recursion", "--r", "0.5,1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("recursion: PASS (6 cases"), "{text}");
}

#[test]
fn verify_failure_exits_one() {
    let o = run(&[
        "verify",
        "d0",
        "--dim",
        "10",
        "--samples",
        "200",
        "--mc-tol",
        "1e-9",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample:"));
    let unbalanced = run(&["verify", "d0", "--kp", "1", "--samples", "0"]);
    assert_eq!(unbalanced.status.code(), Some(1));
}

#[test]
fn verify_lemma1_json() {
    let o = run(&[
        "verify", "lemma1", "--trials", "40", "--dim", "5", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["cases"], 40);
    assert_eq!(json["failures"].as_array().unwrap().len(), 0);
}
