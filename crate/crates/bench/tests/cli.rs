//! End-to-end tests of the `bench` binary: flag surface, output formats,
//! exit codes, and the DIMACS path.

use std::path::PathBuf;
use std::process::{Command, Output};

use bench_cli::CSV_HEADER;

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(args)
        .output()
        .expect("failed to spawn bench binary")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is not UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is not UTF-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("binary was killed by a signal")
}

/// Write `text` to a unique scratch file and return its path.
fn scratch_file(tag: &str, text: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("bench-cli-test-{}-{tag}.gr", std::process::id()));
    std::fs::write(&path, text).expect("cannot write scratch file");
    path
}

#[test]
fn verified_run_prints_csv_and_exits_zero() {
    let out = bench(&[
        "run", "--name", "adder", "--n", "200", "--updates", "40", "--verify", "--trials", "1",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let row = lines.next().expect("missing data row");
    assert!(row.starts_with("adder,200,40,"), "row: {row}");
    assert!(row.ends_with(",true"), "row: {row}");
    assert_eq!(lines.next(), None);
}

#[test]
fn json_output_parses_and_names_the_benchmark() {
    let out = bench(&[
        "run", "--name", "mapper", "--n", "100", "--updates", "20", "--verify", "--trials", "1",
        "--format", "json",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("bad JSON");
    assert_eq!(value["spec"]["name"], "mapper");
    assert_eq!(value["spec"]["n"], 100);
    assert_eq!(value["report"]["verified"], true);
}

#[test]
fn same_seed_reports_differ_only_in_timing() {
    let args = [
        "run", "--name", "msorter", "--n", "64", "--updates", "25", "--seed", "9", "--verify",
        "--trials", "1",
    ];
    let a = bench(&args);
    let b = bench(&args);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(exit_code(&b), 0);
    let row = |out: &Output| -> Vec<String> {
        stdout(out).lines().nth(1).expect("missing row").split(',').map(String::from).collect()
    };
    let (ra, rb) = (row(&a), row(&b));
    assert_eq!(ra.len(), 8);
    // Columns 3 and 4 are wall-clock times; everything else is seeded.
    for i in [0usize, 1, 2, 5, 6, 7] {
        assert_eq!(ra[i], rb[i], "column {i} diverged");
    }
}

#[test]
fn usage_errors_exit_two() {
    let unknown_name = bench(&["run", "--name", "nosuch"]);
    assert_eq!(exit_code(&unknown_name), 2);

    let missing_subcommand = bench(&[]);
    assert_eq!(exit_code(&missing_subcommand), 2);

    let bad_scheduler_for_list = bench(&[
        "run", "--name", "mapper", "--n", "50", "--updates", "5", "--scheduler", "min-dist",
    ]);
    assert_eq!(exit_code(&bad_scheduler_for_list), 2);
    assert!(stderr(&bad_scheduler_for_list).contains("min-dist"));
}

#[test]
fn dimacs_graph_runs_verified() {
    let path = scratch_file(
        "ok",
        "c diamond with a long way round\n\
         p sp 5 7\n\
         a 1 2 10\na 1 3 40\na 2 3 10\na 2 4 100\na 3 4 20\na 3 5 90\na 4 5 30\n",
    );
    let out = bench(&[
        "sp", "--graph", path.to_str().unwrap(), "--decreases", "30", "--trials", "1",
    ]);
    std::fs::remove_file(&path).ok();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let row = text.lines().nth(1).expect("missing row");
    assert!(row.starts_with("sp,5,30,"), "row: {row}");
    assert!(row.ends_with(",true"), "row: {row}");
}

#[test]
fn malformed_dimacs_exits_two_with_line_number() {
    let path = scratch_file("bad", "p sp 2 1\na 1 7 5\n");
    let out = bench(&["sp", "--graph", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_graph_file_exits_two() {
    let out = bench(&["sp", "--graph", "/nonexistent/never.gr"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn dimacs_warnings_go_to_stderr() {
    let path = scratch_file(
        "warn",
        "p sp 3 3\na 1 2 5\na 1 2 9\na 2 3 4\n",
    );
    let out = bench(&[
        "sp", "--graph", path.to_str().unwrap(), "--decreases", "5", "--trials", "1",
    ]);
    std::fs::remove_file(&path).ok();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("warning:"), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("parallel arc"), "stderr: {}", stderr(&out));
}
