//! End-to-end tests of the installed binary: flag surface, exit statuses,
//! and the stdout/stderr contract.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

const THREE_CLAUSE: &str = "p cnf 3 3\n-1 2 3 0\n-2 -3 0\n1 -2 0\n";

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tdcount-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tdcount"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn counts_from_stdin() {
    let output = run_with_stdin(&[], THREE_CLAUSE);
    assert!(output.status.success());
    assert_eq!(stdout_of(&output), "4\n");
    assert_eq!(stderr_of(&output), "");
}

#[test]
fn counts_from_file_with_both_heuristics() {
    let path = scratch_dir().join("three.cnf");
    std::fs::write(&path, THREE_CLAUSE).unwrap();
    for heuristic in ["min-fill", "min-degree"] {
        let output = run_with_stdin(&[path.to_str().unwrap(), "--heuristic", heuristic], "");
        assert!(output.status.success());
        assert_eq!(stdout_of(&output), "4\n");
    }
}

#[test]
fn empty_clause_counts_zero() {
    let output = run_with_stdin(&[], "p cnf 2 1\n0\n");
    assert!(output.status.success());
    assert_eq!(stdout_of(&output), "0\n");
}

#[test]
fn strict_vars_flag_switches_convention() {
    let input = "p cnf 5 1\n1 0\n";
    let declared = run_with_stdin(&[], input);
    assert_eq!(stdout_of(&declared), "16\n");
    let strict = run_with_stdin(&["--strict-vars"], input);
    assert_eq!(stdout_of(&strict), "1\n");
}

#[test]
fn parse_error_exits_two() {
    let output = run_with_stdin(&[], "p cnf 2 1\n1 nonsense 0\n");
    assert_eq!(output.status.code(), Some(2));
    assert_eq!(stdout_of(&output), "");
    assert!(stderr_of(&output).contains("line 2"));
}

#[test]
fn missing_input_file_exits_two() {
    let output = run_with_stdin(&["/nonexistent/input.cnf"], "");
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn imported_decomposition_counts_identically() {
    let dir = scratch_dir();
    let td_path = dir.join("import.td");
    std::fs::write(&td_path, "s td 1 6 6\nb 1 1 2 3 4 5 6\n").unwrap();
    let output = run_with_stdin(&["--td", td_path.to_str().unwrap()], THREE_CLAUSE);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(stdout_of(&output), "4\n");
}

#[test]
fn invalid_imported_decomposition_exits_three() {
    let dir = scratch_dir();
    // misses vertex 6 (the third clause), so condition 1 fails
    let td_path = dir.join("invalid.td");
    std::fs::write(&td_path, "s td 1 6 6\nb 1 1 2 3 4 5\n").unwrap();
    let output = run_with_stdin(&["--td", td_path.to_str().unwrap()], THREE_CLAUSE);
    assert_eq!(output.status.code(), Some(3));
    assert_eq!(stdout_of(&output), "");

    // malformed file: also exit 3
    let bad_path = dir.join("malformed.td");
    std::fs::write(&bad_path, "s td what\n").unwrap();
    let output = run_with_stdin(&["--td", bad_path.to_str().unwrap()], THREE_CLAUSE);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn td_and_heuristic_flags_conflict() {
    let dir = scratch_dir();
    let td_path = dir.join("conflict.td");
    std::fs::write(&td_path, "s td 1 6 6\nb 1 1 2 3 4 5 6\n").unwrap();
    let output = run_with_stdin(
        &["--td", td_path.to_str().unwrap(), "--heuristic", "min-fill"],
        THREE_CLAUSE,
    );
    assert!(!output.status.success());
}

#[test]
fn verify_flag_cross_checks() {
    let output = run_with_stdin(&["--verify"], THREE_CLAUSE);
    assert!(output.status.success());
    assert_eq!(stdout_of(&output), "4\n");
    assert!(stderr_of(&output).contains("verified"));
}

#[test]
fn verify_guard_exits_five() {
    // 30 declared variables exceed the enumeration guard
    let output = run_with_stdin(&["--verify"], "p cnf 30 1\n1 0\n");
    assert_eq!(output.status.code(), Some(5));
}

#[test]
fn stats_are_json_on_stderr_only() {
    let output = run_with_stdin(&["--stats"], THREE_CLAUSE);
    assert!(output.status.success());
    assert_eq!(stdout_of(&output), "4\n");
    let stats: serde_json::Value = serde_json::from_str(stderr_of(&output).trim()).unwrap();
    for key in [
        "width",
        "node_count",
        "largest_clause_size",
        "max_table_rows",
        "wall_time_ms",
    ] {
        assert!(stats.get(key).is_some(), "missing {key}");
    }
    assert_eq!(stats["largest_clause_size"].as_u64(), Some(3));
}

#[test]
fn trace_emits_json_lines() {
    let output = run_with_stdin(&["--trace"], "p cnf 1 1\n1 0\n");
    assert!(output.status.success());
    assert_eq!(stdout_of(&output), "1\n");
    let err = stderr_of(&output);
    let lines: Vec<&str> = err.trim().lines().collect();
    assert!(lines.len() >= 5); // leaf + introduces + forgets
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["kind"].is_string());
    }
}

#[test]
fn emit_td_can_be_fed_back() {
    let dir = scratch_dir();
    let td_path = dir.join("emitted.td");
    let first = run_with_stdin(&["--emit-td", td_path.to_str().unwrap()], THREE_CLAUSE);
    assert!(first.status.success());
    let text = std::fs::read_to_string(&td_path).unwrap();
    assert!(text.starts_with("s td "));
    let second = run_with_stdin(&["--td", td_path.to_str().unwrap()], THREE_CLAUSE);
    assert!(second.status.success());
    assert_eq!(stdout_of(&first), stdout_of(&second));
}

#[test]
fn emit_gr_writes_pace_graph() {
    let dir = scratch_dir();
    let gr_path = dir.join("graph.gr");
    let output = run_with_stdin(
        &["--emit-gr", gr_path.to_str().unwrap()],
        "p cnf 2 1\n1 -2 0\n",
    );
    assert!(output.status.success());
    let text = std::fs::read_to_string(&gr_path).unwrap();
    assert_eq!(text, "p tw 3 2\n1 3\n2 3\n");
}
