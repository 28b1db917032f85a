use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmbr9")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn log_lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("log line is JSON"))
        .collect()
}

#[test]
fn solve_matches_oracle_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let log = dir.path().join("runs.jsonl");
    let (sol_s, log_s) = (sol.to_str().unwrap(), log.to_str().unwrap());
    let inst = ["--variant", "K-9-2-3", "--deck", "0,0,7", "--grid", "10", "--levels", "2"];

    let oracle = run(&[&["oracle"][..], &inst, &["--log", log_s]].concat());
    assert_eq!(code(&oracle), 0);
    let report: serde_json::Value = serde_json::from_slice(&oracle.stdout).unwrap();
    let max = report["report"]["max_score"].as_i64().unwrap();

    let solved = run(&[&["solve"][..], &inst, &["-o", sol_s, "--log", log_s]].concat());
    assert_eq!(code(&solved), 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(doc["score"].as_i64(), Some(max));
    assert_eq!(doc["format_version"], 1);

    let lines = log_lines(&log);
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["command"], "oracle");
    assert_eq!(lines[1]["command"], "solve");
    assert_eq!(lines[1]["result"]["score"].as_i64(), Some(max));
    assert_eq!(lines[1]["result"]["proof"], "optimal");
    assert_eq!(lines[1]["artifacts"]["output"], sol_s);
}

#[test]
fn render_replays_a_solution() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let sol_s = sol.to_str().unwrap();
    let solved = run(&["solve", "--variant", "K-9-2-2", "--deck", "9,9", "--grid", "8", "--levels", "3", "-o", sol_s]);
    assert_eq!(code(&solved), 0);
    let first = run(&["render", sol_s]);
    let second = run(&["render", sol_s]);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert_eq!(text.matches("level ").count(), 3);
    assert!(text.ends_with("score 0\n"));
    assert!(text.contains('9'));

    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    doc["score"] = serde_json::json!(5);
    fs::write(&sol, doc.to_string()).unwrap();
    assert_eq!(code(&run(&["render", sol_s])), 65);
}

#[test]
fn export_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.model");
    let b = dir.path().join("b.model");
    for path in [&a, &b] {
        let out = run(&["export", "--variant", "K-1-1-2", "--deck", "0,1", "--grid", "6", "--levels", "2", "-o", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().filter(|l| l.contains(" regular ")).count(), 4);
}

#[test]
fn oracle_guards_long_decks() {
    let args = ["oracle", "--variant", "F-9-2-5", "--grid", "8", "--levels", "2", "--node-limit", "50"];
    assert_eq!(code(&run(&args)), 64);
    let forced = run(&[&args[..], &["--force"]].concat());
    assert_eq!(code(&forced), 2);
}

#[test]
fn oracle_enumerates_both_decks() {
    let out = run(&["oracle", "--variant", "F-1-1-2", "--grid", "8", "--levels", "2"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["report"]["decks"], 2);
    assert_eq!(report["report"]["max_score"], 0);
}

#[test]
fn node_limit_reports_bound_limited() {
    let out = run(&["solve", "--variant", "F-6-1-5", "--grid", "8", "--levels", "3", "--node-limit", "10"]);
    assert_eq!(code(&out), 2);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["proof"], "bound-limited");
}

#[test]
fn bad_input_exit_codes() {
    assert_eq!(code(&run(&["solve", "--variant", "K-9-2-3", "--bogus"])), 64);
    assert_eq!(code(&run(&["solve", "--variant", "U-9-2-3", "--grid", "8"])), 65);
    assert_eq!(code(&run(&["solve", "--variant", "K-9-2-3", "--deck", "1,1,1", "--grid", "8"])), 65);
    assert_eq!(code(&run(&["render", "/nonexistent/solution.json"])), 74);
}

#[test]
fn gen_deck_is_reproducible() {
    let a = run(&["gen-deck", "--variant", "K-9-2-20", "--seed", "7"]);
    let b = run(&["gen-deck", "--variant", "K-9-2-20", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let deck = String::from_utf8(a.stdout).unwrap();
    assert_eq!(deck.trim().split(',').count(), 20);
    assert_ne!(run(&["gen-deck", "--variant", "K-9-2-20", "--seed", "8"]).stdout, deck.as_bytes());
    assert_eq!(code(&run(&["gen-deck", "--variant", "K-9-2-20"])), 64);

    let played = run(&["gen-deck", "--variant", "K-9-2-20", "--seed", "7", "--play"]);
    assert_eq!(code(&played), 0);
    let doc: serde_json::Value = serde_json::from_slice(&played.stdout).unwrap();
    assert_eq!(doc["placements"].as_array().unwrap().len(), 20);
}
