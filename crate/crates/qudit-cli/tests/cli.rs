//! End-to-end behaviour of the command-line interface.

use qudit_cli::{run_args, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    run_args(std::iter::once("qudit").chain(args.iter().copied()))
}

fn machine_value<'a>(out: &'a str, key: &str) -> Option<&'a str> {
    out.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

#[test]
fn bounds_table_is_machine_readable() {
    let (code, out, _) = run(&["--format", "machine", "bounds", "--graph", "rb87"]);
    assert_eq!(code, 0);
    assert!(out.contains("k=7 depth=13 lower_bound=11"));
    assert!(out.contains("k=1 depth=28 lower_bound=28 counting_bound=28"));
    assert_eq!(machine_value(&out, "verdict"), Some("pass"));
}

#[test]
fn schedule_state_reports_table_depth() {
    let (code, out, _) = run(&["--format", "machine", "schedule-state", "--target", "3", "--k", "2", "--verify"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(machine_value(&out, "depth"), Some("5"));
    assert_eq!(machine_value(&out, "check.leakage"), Some("pass"));
}

#[test]
fn qr_verifies_random_unitary() {
    let (code, out, _) = run(&["--format", "machine", "qr", "--graph", "cs133", "--k", "7", "--verify", "--seed", "3"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(machine_value(&out, "depth"), Some("29"));
    assert_eq!(machine_value(&out, "check.reconstruction"), Some("pass"));
}

#[test]
fn human_and_machine_carry_same_values() {
    let (_, human, _) = run(&["diag", "--graph", "cs133"]);
    let (_, machine, _) = run(&["--format", "machine", "diag", "--graph", "cs133"]);
    assert_eq!(machine_value(&machine, "steps"), Some("9"));
    let human_steps = human
        .lines()
        .find_map(|l| l.strip_prefix("steps:"))
        .map(str::trim);
    assert_eq!(human_steps, Some("9"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["--format", "machine", "nonlocal", "cv", "--d", "3", "--seed", "9"][..],
        &["--format", "machine", "nonlocal", "synth", "--d", "3", "--sample", "--seed", "4"][..],
        &["--format", "machine", "qr", "--k", "2", "--verify"][..],
    ] {
        assert_eq!(run(args), run(args));
    }
}

#[test]
fn nonlocal_counters() {
    let (code, out, _) = run(&["--format", "machine", "nonlocal", "full", "--d", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("ebits=12 cbits=24 steps=60"));
    let (code, out, _) = run(&["--format", "machine", "nonlocal", "synth", "--d", "4"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("ebits=3 cbits=6 steps=7"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["qr", "--k", "x"]).0, EXIT_USAGE);
    assert_eq!(run(&["bounds", "--graph", "nope"]).0, EXIT_USAGE);
    assert_eq!(run(&["diag", "--phases", "1,0,0,0,0,0,0,0"]).0, EXIT_USAGE);
    assert_eq!(run(&["nonlocal", "synth", "--d", "7"]).0, EXIT_USAGE);
    let (code, _, err) = run(&["schedule-state", "--target", "9"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.starts_with("error:"));
}

#[test]
fn normalize_accepts_non_special_phases() {
    let (code, out, _) = run(&["--format", "machine", "diag", "--phases", "1,0,0,0,0,0,0,0", "--normalize"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("nonlocal"));
}
