//! End-to-end tests of the command-line driver: exit codes, JSON schema,
//! determinism, and the documented example invocations.

use std::process::{Command, Output};

fn qsu2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsu2"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn zeta_evaluates_away_from_poles() {
    let out = qsu2(&["zeta", "--q", "1/2", "--a", "2", "--b", "1", "--z", "5"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let v = json_of(&out);
    assert_eq!(v["schema"], "qsu2/1");
    let value: f64 = v["value_re"].as_str().unwrap().parse().unwrap();
    assert!(value > 0.0 && value.is_finite());
    let tail: f64 = v["tail_bound"].as_str().unwrap().parse().unwrap();
    assert!(tail < 1e-20, "tail {tail}");
}

#[test]
fn zeta_allows_b_zero_but_residue_does_not() {
    let out = qsu2(&["zeta", "--q", "1/2", "--a", "2", "--b", "0", "--z", "5"]);
    assert_eq!(out.status.code(), Some(0));

    let out = qsu2(&["residue", "--q", "1/2", "--a", "2", "--b", "0", "--at", "n"]);
    assert_eq!(out.status.code(), Some(2), "double pole exits 2");
}

#[test]
fn zeta_at_pole_exits_three() {
    let out = qsu2(&["zeta", "--q", "1/2", "--a", "2", "--b", "1", "--z", "3"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn residue_at_dimension_reports_the_known_value() {
    let out = qsu2(&["residue", "--at", "n", "--a", "2", "--b", "1", "--q", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let res: f64 = v["residue_re"].as_str().unwrap().parse().unwrap();
    assert!((res - 14.6074).abs() < 5e-4, "residue {res}");
    assert_eq!(v["z0"], 3.0);
    assert_eq!(v["contributing_k"][0], 0);
}

#[test]
fn residue_two_below_dimension_vanishes_at_two() {
    let out = qsu2(&["residue", "--at", "n-2", "--a", "2", "--q", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let res: f64 = v["residue_re"].as_str().unwrap().parse().unwrap();
    assert!(res.abs() < 1e-10, "residue {res}");

    let weighted = qsu2(&[
        "residue", "--at", "n-2", "--a", "2", "--q", "1/2", "--gamma",
    ]);
    assert_eq!(weighted.status.code(), Some(0));
}

#[test]
fn haar_command_matches_the_haar_state() {
    let out = qsu2(&["haar", "--expr", "b c", "--a", "2", "--q", "1/4"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let v = json_of(&out);
    assert_eq!(v["pass"], true);
    let phi: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert!((phi + 4.0 / 17.0).abs() < 1e-9, "phi {phi}");

    let unit = qsu2(&["haar", "--expr", "1", "--q", "1/4"]);
    let v = json_of(&unit);
    assert_eq!(v["pass"], true);

    // Off-diagonal monomials integrate to zero on both sides.
    let ab = qsu2(&["haar", "--expr", "a b", "--q", "1/4"]);
    let v = json_of(&ab);
    assert_eq!(v["pass"], true);
    let phi: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert_eq!(phi, 0.0);
}

#[test]
fn verify_algebra_suite_passes() {
    let out = qsu2(&["verify", "--suite", "algebra", "--q", "1/4"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let v = json_of(&out);
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_zeta_suite_passes_near_classical_q() {
    // Larger q needs more series terms but still passes.
    let out = qsu2(&["verify", "--suite", "zeta", "--q", "9/10", "--lmax", "30"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let v = json_of(&out);
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_all_suites_pass() {
    let out = qsu2(&["verify", "--suite", "all", "--q", "1/2", "--lmax", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json_of(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["suites"].as_array().unwrap().len(), 4);
}

#[test]
fn scan_a2_brackets_two() {
    let out = qsu2(&["scan-a2", "--q", "1/2", "--a-min", "1.2", "--a-max", "3.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["root_found"], true);
    let a_star: f64 = v["a_star"].as_str().unwrap().parse().unwrap();
    assert!((a_star - 2.0).abs() < 1e-8);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["zeta", "--q", "1/2", "--a", "2", "--b", "1", "--z", "5"],
        vec!["verify", "--suite", "algebra", "--q", "1/4", "--seed", "7"],
    ] {
        let first = qsu2(&args);
        let second = qsu2(&args);
        assert_eq!(first.stdout, second.stdout, "args {args:?}");
    }
}

#[test]
fn config_file_merges_under_flags() {
    let dir = std::env::temp_dir().join(format!("qsu2-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.conf");
    std::fs::write(&path, "q = 1/4\na = 3\n# comment\nseed = 9\n").unwrap();

    let out = qsu2(&[
        "residue",
        "--at",
        "n",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let v = json_of(&out);
    assert_eq!(v["q"], "1/4");
    assert_eq!(v["a"], 3.0);
    assert_eq!(v["z0"], 4.0);

    // Flags win over the file.
    let out = qsu2(&[
        "residue",
        "--at",
        "n",
        "--a",
        "2",
        "--config",
        path.to_str().unwrap(),
    ]);
    let v = json_of(&out);
    assert_eq!(v["a"], 2.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_parameters_exit_two() {
    let bad_q = qsu2(&["zeta", "--q", "5/4", "--z", "5"]);
    assert_eq!(bad_q.status.code(), Some(2));

    let divergent = qsu2(&["zeta", "--q", "1/2", "--a", "0.5", "--b", "1", "--z", "5"]);
    assert_eq!(divergent.status.code(), Some(2));

    let bad_expr = qsu2(&["haar", "--expr", "x y", "--q", "1/4"]);
    assert_eq!(bad_expr.status.code(), Some(2));
}

#[test]
fn alternative_output_formats() {
    let csv = qsu2(&[
        "zeta", "--q", "1/2", "--z", "5", "--output", "csv",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("schema,qsu2/1"));

    let table = qsu2(&[
        "zeta", "--q", "1/2", "--z", "5", "--output", "table",
    ]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("value_re"));
}
