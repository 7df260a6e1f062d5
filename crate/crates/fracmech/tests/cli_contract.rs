//! Byte-level contract tests for the command-line interface: frozen stdout
//! and CSV output, the exit-code table, error wording, and determinism of
//! seeded commands. Commands run from a scratch directory so relative
//! `--output` paths never touch the source tree.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracmech::problem::ProblemFile;

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn data(name: &str) -> String {
    manifest("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn golden(name: &str) -> String {
    let path = manifest("tests/data/golden").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

/// Scratch working directory, removed on drop.
struct Workdir(PathBuf);

impl Workdir {
    fn new(tag: &str) -> Workdir {
        let dir = std::env::temp_dir().join(format!("fracmech-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).expect("creating the scratch directory");
        Workdir(dir)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_fracmech"))
            .current_dir(&self.0)
            .args(args)
            .output()
            .expect("the bundled binary should run")
    }

    fn file(&self, name: &str) -> String {
        fs::read_to_string(self.0.join(name)).expect("reading a written output file")
    }

    fn entries(&self) -> Vec<String> {
        let mut names: Vec<String> = fs::read_dir(&self.0)
            .expect("listing the scratch directory")
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        names
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be UTF-8")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

#[test]
fn deriv_csv_is_frozen_for_both_sides() {
    let work = Workdir::new("deriv");
    let left = work.run(&["deriv", "--expr", "t^2", "--alpha", "0.5", "--n", "33"]);
    assert_eq!(code_of(&left), 0);
    assert_eq!(stdout_of(&left), golden("deriv_left.csv"));
    let right = work.run(&[
        "deriv", "--expr", "t^2", "--alpha", "0.5", "--side", "right", "--n", "17",
    ]);
    assert_eq!(code_of(&right), 0);
    assert_eq!(stdout_of(&right), golden("deriv_right.csv"));
}

#[test]
fn deriv_writes_the_file_instead_of_stdout_when_asked() {
    let work = Workdir::new("deriv-output");
    let out = work.run(&[
        "deriv", "--expr", "t^2", "--alpha", "0.5", "--n", "33", "--output", "d.csv",
    ]);
    assert_eq!(code_of(&out), 0);
    assert_eq!(stdout_of(&out), "");
    assert_eq!(work.file("d.csv"), golden("deriv_left.csv"));
}

#[test]
fn derive_report_is_frozen_and_echo_round_trips() {
    let work = Workdir::new("derive");
    let path = data("demo.toml");
    let out = work.run(&["derive", &path]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert_eq!(text, golden("derive_demo.json"));

    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let echo = report["input_echo_toml"].as_str().unwrap();
    let original = fs::read_to_string(&path).unwrap();
    assert_eq!(
        ProblemFile::parse(echo).unwrap(),
        ProblemFile::parse(&original).unwrap(),
        "echoed problem text should describe the same problem"
    );
    assert_eq!(
        report["results"]["euler_lagrange"], report["results"]["combined"],
        "both derivation routes should print identical equations"
    );
}

#[test]
fn solve_report_and_trajectory_csv_are_frozen() {
    let work = Workdir::new("solve");
    let out = work.run(&["solve", &data("solve_small.toml"), "--output", "traj.csv"]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out), golden("solve_small.json"));
    assert_eq!(work.file("traj.csv"), golden("solve_small_traj.csv"));
    assert_eq!(work.entries(), vec!["traj.csv"]);
}

#[test]
fn solve_without_output_writes_no_files() {
    let work = Workdir::new("solve-stdout");
    let out = work.run(&["solve", &data("solve_small.toml")]);
    assert_eq!(code_of(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(report["results"]["csv"].is_null());
    assert!(work.entries().is_empty(), "unexpected files: {:?}", work.entries());
}

#[test]
fn solve_csv_cells_round_trip_through_f64() {
    let work = Workdir::new("solve-roundtrip");
    let out = work.run(&["solve", &data("solve_small.toml"), "--output", "traj.csv"]);
    assert_eq!(code_of(&out), 0);
    let text = work.file("traj.csv");
    for (li, line) in text.lines().skip(1).enumerate() {
        for (ci, cell) in line.split(',').enumerate() {
            let value: f64 = cell
                .parse()
                .unwrap_or_else(|e| panic!("row {li} column {ci}: {e}"));
            assert_eq!(
                format!("{value:.16e}"),
                cell,
                "row {li} column {ci} loses bits on re-parse"
            );
        }
    }
}

#[test]
fn residual_report_and_csv_are_frozen() {
    let work = Workdir::new("residual");
    let out = work.run(&["residual", &data("residual_traj.toml"), "--output", "res.csv"]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out), golden("residual_traj.json"));
    assert_eq!(work.file("res.csv"), golden("residual_traj_res.csv"));
}

#[test]
fn check_equivalence_is_deterministic_and_frozen() {
    let work = Workdir::new("check");
    let args = [
        "check-equivalence",
        &data("check_small.toml"),
        "--trials",
        "3",
        "--seed",
        "11",
    ];
    let first = work.run(&args);
    let second = work.run(&args);
    assert_eq!(code_of(&first), 0);
    assert_eq!(stdout_of(&first), golden("check_small.json"));
    assert_eq!(
        first.stdout, second.stdout,
        "the same seed should reproduce the same report bytes"
    );
}

#[test]
fn mismatched_operators_fail_the_equivalence_check() {
    let work = Workdir::new("check-mismatch");
    let out = work.run(&[
        "check-equivalence",
        &data("check_small.toml"),
        "--trials",
        "3",
        "--seed",
        "11",
        "--debug-mismatch-operators",
    ]);
    assert_eq!(code_of(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["pass"], false);
    assert!(report["results"]["max_abs_diff"].as_f64().unwrap() > 1e-6);
}

#[test]
fn poisson_report_is_frozen() {
    let work = Workdir::new("poisson");
    let out = work.run(&[
        "poisson",
        "--a-expr",
        "q1*p1",
        "--b-expr",
        "q1^2",
        "--pairs",
        "q1:p1",
        "--at",
        "q1=2,p1=-1",
    ]);
    assert_eq!(code_of(&out), 0);
    assert_eq!(stdout_of(&out), golden("poisson.json"));
}

#[test]
fn input_errors_exit_with_two_and_explain_themselves() {
    let work = Workdir::new("errors");
    let bad_syntax = data("bad_syntax.toml");
    let bad_constraints = data("bad_constraints.toml");
    let no_trajectory = data("solve_small.toml");
    let cases: [(&[&str], &str); 5] = [
        (
            &["deriv", "--expr", "t @ 2", "--alpha", "0.5"],
            "syntax error at offset",
        ),
        (&["solve", &bad_syntax], "syntax error at offset"),
        (&["derive", &bad_constraints], "strictly smaller"),
        (&["residual", &no_trajectory], "no trajectory section"),
        (
            &["poisson", "--a-expr", "z", "--b-expr", "p1", "--pairs", "q1:p1"],
            "undeclared variable",
        ),
    ];
    for (args, phrase) in cases {
        let out = work.run(args);
        assert_eq!(code_of(&out), 2, "args: {args:?}");
        let stderr = stderr_of(&out);
        assert!(
            stderr.contains("error:") && stderr.contains(phrase),
            "args {args:?} produced stderr {stderr:?}, expected {phrase:?}"
        );
    }
}

#[test]
fn non_convergence_exits_with_three() {
    let work = Workdir::new("infeasible");
    let out = work.run(&["solve", &data("infeasible.toml")]);
    assert_eq!(code_of(&out), 3, "stderr: {}", stderr_of(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["pass"], false);
    assert_eq!(report["results"]["converged"], false);
}

#[test]
fn help_and_version_list_the_interface() {
    let work = Workdir::new("help");
    let help = work.run(&["--help"]);
    assert_eq!(code_of(&help), 0);
    let text = stdout_of(&help);
    for sub in [
        "deriv",
        "derive",
        "residual",
        "solve",
        "check-equivalence",
        "poisson",
    ] {
        assert!(text.contains(sub), "--help does not mention {sub}");
    }
    let version = work.run(&["--version"]);
    assert_eq!(code_of(&version), 0);
    assert!(stdout_of(&version).contains(env!("CARGO_PKG_VERSION")));

    let unknown = work.run(&["frobnicate"]);
    assert_eq!(code_of(&unknown), 2);
}
