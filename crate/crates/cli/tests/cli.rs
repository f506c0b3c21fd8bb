//! End-to-end tests of the `tamespace` binary: canonical outputs, exit
//! codes, config handling, and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-fixtures");
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn fixture(name: &str, content: &str) -> PathBuf {
    let path = scratch().join(name);
    fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tamespace"))
        .args(args)
        .env_remove("TAMESPACE_CONFIG")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn value_of(report: &str, key: &str) -> String {
    let prefix = format!("{key}: ");
    report
        .lines()
        .find_map(|line| line.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("missing key `{key}` in report:\n{report}"))
        .to_string()
}

#[test]
fn glued_chart_points_compare_equal() {
    let word = fixture("tripode.word", "aff [[0,1],[1,1]] [0,0]\n");
    let out = run(&[
        "val",
        "equal",
        "--weight-a",
        "1,2",
        "--weight-b",
        "2,1",
        "--frame-b",
        word.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "true\n");
}

#[test]
fn hyperplane_count_at_strict_flag_weight() {
    let out = run(&["adm", "mult", "-w", "3,2,1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "3\n");
}

#[test]
fn closed_four_arc_cycle_totals() {
    let out = run(&["link", "octangle", "-p", "1", "-q", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    let log_total: f64 = value_of(&report, "log_total").parse().unwrap();
    let simplex_total: f64 = value_of(&report, "simplex_total").parse().unwrap();
    let two_pi = 2.0 * std::f64::consts::PI;
    assert!((log_total - 4.0 * two_pi / 3.0).abs() < 1e-9);
    assert!(simplex_total < two_pi);
    assert_eq!(value_of(&report, "commutation_verified"), "true");
    assert_eq!(value_of(&report, "gluing_verified"), "true");
}

#[test]
fn composing_a_word_with_its_inverse_gives_the_identity() {
    let word = fixture(
        "roundtrip.word",
        "elem 1 \"x2^2\"\nperm [2,1,3]\naff [[1,0,0],[0,1,0],[0,0,2]] [0,3,0]\n",
    );
    let path = word.to_str().unwrap();
    let inverted = run(&["tame", "invert", path]);
    assert!(inverted.status.success(), "{}", stderr(&inverted));
    let inverse = fixture("roundtrip-inverse.word", &stdout(&inverted));

    let composed = run(&["tame", "compose", path, inverse.to_str().unwrap()]);
    assert!(composed.status.success(), "{}", stderr(&composed));
    let identity = fixture("roundtrip-identity.word", &stdout(&composed));

    let comps = run(&["tame", "components", identity.to_str().unwrap()]);
    assert!(comps.status.success(), "{}", stderr(&comps));
    assert_eq!(stdout(&comps), "f1 = x1\nf2 = x2\nf3 = x3\n");
}

#[test]
fn differential_and_pivot_permutation() {
    let word = fixture(
        "diff.word",
        "elem 1 \"x2^2\"\nperm [2,1,3]\naff [[1,0,0],[0,1,0],[0,0,2]] [0,0,0]\n",
    );
    let out = run(&["tame", "diff", word.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "[[0,1,0],[1,0,0],[0,0,2]]\n");

    let out = run(&["tame", "bruhat", word.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "[2,1,3]\n");
}

#[test]
fn moved_valuation_witness_certifies() {
    let word = fixture("witness.word", "elem 1 \"x2^2\"\n");
    let out = run(&["val", "witness", "--word", word.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(value_of(&report, "certified"), "true");

    // The top-level alias produces the identical report.
    let alias = run(&["witness", "--word", word.to_str().unwrap()]);
    assert!(alias.status.success(), "{}", stderr(&alias));
    assert_eq!(stdout(&alias), report);
}

#[test]
fn quadratic_involution_linearizes_to_a_reflection() {
    let group = fixture(
        "involution.words",
        "elem 1 \"-x2^2\"\naff [[-1,0,0],[0,1,0],[0,0,1]] [0,0,0]\n",
    );
    let out = run(&["linearize", "--group", group.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(value_of(&report, "order"), "2");
    assert!(report.contains("[[-1,0,0],[0,1,0],[0,0,1]]"));
    assert!(report.contains("elem 1 \"1/2*x2^2\""));
}

#[test]
fn rank_one_tree_ball_is_acyclic() {
    let out = run(&["tree", "--field", "2", "--depth", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(value_of(&report, "acyclic"), "true");
    assert_eq!(value_of(&report, "vertices"), "10");
    assert_eq!(value_of(&report, "edges"), "9");
}

#[test]
fn word_parse_errors_carry_line_and_column_and_exit_2() {
    let word = fixture("bad.word", "perm [2,1,3]\nelem 1 \"x2^^2\"\n");
    let out = run(&["val", "fix", "-w", "2,1,1", "--word", word.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn degree_cap_exhaustion_exits_3() {
    let word = fixture("deep.word", "elem 1 \"x2^9\"\nperm [2,1,3]\nelem 1 \"x2^9\"\n");
    let out = run(&[
        "tame",
        "components",
        word.to_str().unwrap(),
        "--cap",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("degree cap"), "{}", stderr(&out));
}

#[test]
fn invalid_weights_exit_2() {
    let out = run(&["adm", "mult", "-w", "0,1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["adm", "mult", "-w", "3,,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("column"), "{}", stderr(&out));
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let cfg = fixture("session.cfg", "# defaults\nfield = 5\nvars = 2\ncap = 64\n");
    let path = cfg.to_str().unwrap();

    // 7 = 2 in the five-element field, so the coefficient survives.
    let out = run(&["val", "eval", "-w", "3,2", "-P", "7*x1", "--config", path]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "-3/2\n");

    // A command-line flag beats the file: 7*x1 vanishes over the
    // 7-element field, and the valuation of zero is infinite.
    let out = run(&[
        "val", "eval", "-w", "3,2", "-P", "7*x1", "--config", path, "--field", "7",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "inf\n");

    // The environment variable supplies the same default path.
    let out = Command::new(env!("CARGO_BIN_EXE_tamespace"))
        .args(["val", "eval", "-w", "3,2", "-P", "7*x1"])
        .env("TAMESPACE_CONFIG", path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "-3/2\n");
}

#[test]
fn bad_config_keys_are_rejected_with_position() {
    let cfg = fixture("bad.cfg", "field = 5\nbogus = 1\n");
    let out = run(&["val", "eval", "-w", "1,1", "-P", "x1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn json_reports_are_well_formed_and_byte_identical() {
    let group = fixture("perms.words", "perm [2,1,3]\n\nperm [1,3,2]\n");
    let args = [
        "link",
        "build",
        "-w",
        "1,1,1",
        "--group",
        group.to_str().unwrap(),
        "--field",
        "2",
        "--radius",
        "2",
        "--dot",
        "--json",
    ];
    let first = run(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);

    let parsed: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(parsed["vertices"], 6);
    assert_eq!(parsed["edges"], 6);
    assert_eq!(parsed["combinatorial_girth"], 6);
    assert_eq!(parsed["short_cycle_free"], true);
    assert!(parsed["dot"].as_str().unwrap().starts_with("graph link {"));
}

#[test]
fn stabilizer_membership_report() {
    let word = fixture("scale.word", "aff [[2,0,0],[0,2,0],[0,0,1]] [0,0,0]\n");
    let out = run(&["stab", "member", "-w", "2,2,1", "--word", word.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(value_of(&report, "stabilizer"), "true");
    assert_eq!(value_of(&report, "m_alpha"), "false");
    assert_eq!(value_of(&report, "l_alpha"), "true");
}

#[test]
fn chain_upper_bound_meets_apartment_distance_in_one_frame() {
    let out = run(&["dist", "upper", "--weight-a", "1,1", "--weight-b", "2,1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    let upper: f64 = value_of(&report, "upper").parse().unwrap();
    let expected = (2f64.ln() / 2.0) * 2f64.sqrt();
    assert!((upper - expected).abs() < 1e-12, "upper = {upper}");

    let lower = run(&["dist", "lower", "--weight-a", "1,1", "--weight-b", "2,1"]);
    assert!(lower.status.success(), "{}", stderr(&lower));
    let low: f64 = stdout(&lower).trim().parse().unwrap();
    assert!(low <= upper + 1e-12);
}
