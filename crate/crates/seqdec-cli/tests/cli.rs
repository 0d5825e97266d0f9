//! End-to-end checks of the binary: output stability, formats and exit
//! codes.

use std::process::{Command, Output};

fn seqdec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqdec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_output_is_byte_identical_across_runs() {
    let a = seqdec(&["solve", "cyl-det", "--steps", "4"]);
    let b = seqdec(&["solve", "cyl-det", "--steps", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("b -> R : 19.000000000"), "{text}");
}

#[test]
fn timedep_solve_drops_the_left_column_start() {
    let out = seqdec(&["solve", "cyl-time", "--steps", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let first_block: Vec<&str> = text
        .lines()
        .skip(1)
        .take_while(|l| !l.starts_with("t="))
        .collect();
    assert!(!first_block.iter().any(|l| l.starts_with("a ->")), "{text}");
    assert!(first_block.iter().any(|l| l.starts_with("b ->")), "{text}");
}

#[test]
fn knapsack_solve_reports_seven_at_full_capacity() {
    let out = seqdec(&["solve", "knapsack", "--steps", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("5 -> Take : 7.000000000"), "{text}");
}

#[test]
fn deterministic_trajectories_print_one_line() {
    let out = seqdec(&["trajectories", "cyl-det", "--start", "b", "--steps", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[0].ends_with(": 19.000000000"), "{text}");
    assert_eq!(lines[1], "meas : 19.000000000");
}

#[test]
fn stochastic_trajectory_masses_sum_to_one() {
    let out = seqdec(&["trajectories", "cyl-stoch", "--start", "b", "--steps", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut total = 0.0;
    let mut lines = 0;
    for line in text.lines() {
        if let Some((prob, _)) = line.split_once('|') {
            total += prob.parse::<f64>().unwrap();
            lines += 1;
        }
    }
    assert!(lines <= 4);
    assert!((total - 1.0).abs() < 1e-9, "{text}");
}

#[test]
fn nondeterministic_trajectories_have_no_probability_prefix() {
    let out = seqdec(&["trajectories", "cyl-nondet", "--start", "b", "--steps", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let traj_lines: Vec<&str> = text.lines().filter(|l| l.contains("->")).collect();
    assert_eq!(traj_lines.len(), 2, "{text}");
    assert!(traj_lines.iter().all(|l| !l.contains('|')), "{text}");
}

#[test]
fn verify_passes_on_shipped_examples() {
    let out = seqdec(&["verify", "cyl-stoch", "--steps", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().all(|l| l.contains("PASS")), "{text}");
    assert!(text.contains("opt_policy_seq PASS"));
    assert!(text.contains("bellman n=1 PASS"));
}

#[test]
fn verify_exits_four_when_the_cap_is_too_small() {
    let out = seqdec(&["verify", "cyl-det", "--steps", "12", "--cap", "1000"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("cap"));
}

#[test]
fn nonviable_trajectory_start_exits_three() {
    let out = seqdec(&["trajectories", "cyl-time", "--start", "a", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn unknown_problem_exits_two() {
    let out = seqdec(&["solve", "nosuch", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown problem"));
}

#[test]
fn dead_end_file_with_clean_validation_exits_three() {
    // Both starts validate fine but have no controls at all, so nothing
    // is viable for one step.
    let dir = std::env::temp_dir().join(format!("seqdec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("deadend.sdp");
    std::fs::write(&path, "kind = det\n\n[layers]\n0 = a b\n1 = a b\n").unwrap();
    let out = seqdec(&["solve", path.to_str().unwrap(), "--steps", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn json_output_mirrors_the_text_fields() {
    let out = seqdec(&["solve", "cyl-det", "--steps", "1", "--format", "json"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with('{'), "{text}");
    assert!(text.contains("\"problem\":\"cyl-det\""));
    assert!(text.contains("\"blocks\":[{\"t\":0,\"n\":1,"));
    assert!(text.contains("{\"x\":\"b\",\"ctrl\":\"L\",\"value\":3.000000000}"));

    let out = seqdec(&[
        "trajectories",
        "cyl-stoch",
        "--start",
        "b",
        "--steps",
        "1",
        "--format",
        "json",
    ]);
    let text = stdout(&out);
    assert!(text.contains("\"trajectories\":[{\"prob\":0.800000000,"), "{text}");
    assert!(text.contains("\"meas\":"), "{text}");

    let out = seqdec(&["verify", "cyl-det", "--steps", "1", "--format", "json"]);
    let text = stdout(&out);
    assert!(text.contains("\"checks\":[{\"name\":\"validate\",\"pass\":true"), "{text}");

    let out = seqdec(&["validate", "cyl-det", "--format", "json"]);
    let text = stdout(&out);
    assert_eq!(text.trim(), "{\"violations\":[]}");
}

#[test]
fn measure_override_changes_the_aggregation() {
    let worst = seqdec(&["solve", "cyl-stoch", "--steps", "2", "--measure", "worst"]);
    let expected = seqdec(&["solve", "cyl-stoch", "--steps", "2"]);
    assert!(worst.status.success());
    assert!(expected.status.success());
    assert_ne!(worst.stdout, expected.stdout);
}
