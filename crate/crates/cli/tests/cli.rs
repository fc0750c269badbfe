//! End-to-end tests of the `rcft` binary: exit codes, output contracts,
//! format switches, and determinism.

use std::process::{Command, Output};

fn rcft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcft"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn validate_ising_exits_zero_with_all_checks_passing() {
    let out = rcft(&["validate", "--data", "ising"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("overall: pass"));
    for check in [
        "unitary",
        "symmetric",
        "s_squared_permutation",
        "involution",
        "modular_relation",
        "t_unimodular",
        "t_matches_weights",
        "vacuum_row_positive",
    ] {
        assert!(text.contains(check), "missing check {check} in: {text}");
    }
    // The resolved configuration is echoed on stderr in text mode.
    assert!(stderr(&out).contains("command=validate"));
}

#[test]
fn dims_four_sigma_sphere_prints_two() {
    let out = rcft(&[
        "dims",
        "--data",
        "ising",
        "--genus",
        "0",
        "--punctures",
        "σ,σ,σ,σ",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "2\n");
}

#[test]
fn fusion_with_non_unitary_s_exits_two_naming_the_check() {
    let dir = std::env::temp_dir().join("rcft-cli-test-bogus");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bogus.json");
    std::fs::write(
        &path,
        r#"{
            "labels": ["a", "b"],
            "vacuum": 0,
            "central_charge": "1/2",
            "weights": ["0", "1/2"],
            "S": [[0.9, 0.0], [0.1, 0.0], [0.1, 0.0], [-0.9, 0.0]]
        }"#,
    )
    .unwrap();
    let out = rcft(&["fusion", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unitary"), "stderr: {}", stderr(&out));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["frobnicate"],
        vec!["validate"],                       // missing --data
        vec!["validate", "--data"],             // missing value
        vec!["dims", "--data", "ising"],        // missing --genus
        vec!["validate", "--data", "ising", "--bogus-flag"],
    ] {
        let out = rcft(&args);
        assert_eq!(out.status.code(), Some(1), "args {args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(rcft(&["--help"]).status.code(), Some(0));
    assert_eq!(rcft(&["--version"]).status.code(), Some(0));
    assert_eq!(rcft(&["fusion", "--help"]).status.code(), Some(0));
}

#[test]
fn missing_data_file_exits_one() {
    let out = rcft(&["validate", "--data", "/nonexistent/nowhere.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fusion_table_matches_ising_ring() {
    let out = rcft(&["fusion", "--data", "ising"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("σ x σ = 𝒱 + ε"));
    assert!(text.contains("ε x σ = σ"));
    assert!(text.contains("ε x ε = 𝒱"));
}

#[test]
fn fusion_single_product_by_label_or_index() {
    let by_name = rcft(&["fusion", "--data", "ising", "--left", "σ", "--right", "σ"]);
    let by_index = rcft(&["fusion", "--data", "ising", "--left", "2", "--right", "2"]);
    assert_eq!(by_name.status.code(), Some(0));
    assert_eq!(stdout(&by_name), "σ x σ = 𝒱 + ε\n");
    assert_eq!(stdout(&by_name), stdout(&by_index));
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let args = ["kz", "--level", "2", "--loop", "loop23"];
    let a = rcft(&args);
    let b = rcft(&args);
    assert_eq!(a.status.code(), Some(0), "stderr: {}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn json_format_emits_a_single_parseable_document() {
    for args in [
        vec!["validate", "--data", "ising", "--format", "json"],
        vec!["fusion", "--data", "su2:3", "--format", "json"],
        vec![
            "dims", "--data", "ising", "--genus", "2", "--format", "json",
        ],
        vec!["chars", "--model", "ising", "--cutoff", "3", "--format", "json"],
        vec!["braid", "--check", "--format", "json"],
        vec!["orbifold", "--group", "z2", "--classes", "--format", "json"],
    ] {
        let out = rcft(&args);
        assert_eq!(out.status.code(), Some(0), "args {args:?}");
        let doc: serde_json::Value =
            serde_json::from_str(&stdout(&out)).unwrap_or_else(|e| {
                panic!("args {args:?}: stdout not a single JSON document: {e}")
            });
        assert!(doc.get("config").is_some(), "args {args:?}");
        assert!(doc.get("result").is_some(), "args {args:?}");
        // Config goes inside the document in JSON mode, not to stderr.
        assert!(stderr(&out).is_empty(), "args {args:?}");
    }
}

#[test]
fn validate_json_reports_every_check() {
    let out = rcft(&["validate", "--data", "su2:2", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let checks = doc["result"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 8);
    assert!(checks.iter().all(|c| c["pass"].as_bool().unwrap()));
    assert_eq!(doc["result"]["pass"], serde_json::json!(true));
}

#[test]
fn chars_prints_exact_rational_terms() {
    let out = rcft(&["chars", "--model", "ising", "--cutoff", "3", "--label", "σ"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# σ"));
    assert!(text.contains("1/24  1"));
    assert!(text.contains("25/24  1"));
}

#[test]
fn check_command_reports_small_residual_and_exit_zero() {
    let out = rcft(&[
        "check", "--model", "ising", "--which", "T", "--tau", "0.3,0.8",
        "--cutoff", "30",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let residual: f64 = text
        .trim()
        .strip_prefix("residual: ")
        .expect("residual line")
        .parse()
        .expect("parseable residual");
    assert!(residual < 1e-10, "residual {residual}");
}

#[test]
fn check_rejects_insufficient_cutoff_as_relation_failure() {
    // At cutoff 2 the truncation bound cannot support a 1e-6 verdict at tau=i.
    let out = rcft(&[
        "check", "--model", "ising", "--which", "S", "--tau", "0,1", "--cutoff",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn minv_ising_finds_only_the_diagonal() {
    let out = rcft(&["minv", "--data", "ising"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("invariants: 1\n"), "got: {text}");
    assert!(text.contains("1 0 0"));
}

#[test]
fn monodromy_circle_loop_prints_closed_unimodular_matrix() {
    let out = rcft(&["monodromy", "--loop", "circle:0,0:0.5"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("closed: true"));
    assert!(text.contains("germ_swapped: false"));
}

#[test]
fn monodromy_path_file_round_trip() {
    let dir = std::env::temp_dir().join("rcft-cli-test-path");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("loop.txt");
    // A closed diamond around w = 0 staying clear of w = 1.
    std::fs::write(
        &path,
        "start 0.5,0\nline 0,0.5\nline -0.5,0\nline 0,-0.5\nline 0.5,0\n",
    )
    .unwrap();
    let out = rcft(&["monodromy", "--path", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("closed: true"));
}

#[test]
fn monodromy_requires_exactly_one_path_source() {
    let neither = rcft(&["monodromy"]);
    assert_eq!(neither.status.code(), Some(1));
    let both = rcft(&[
        "monodromy", "--loop", "circle:0,0:0.5", "--path", "whatever.txt",
    ]);
    assert_eq!(both.status.code(), Some(1));
}

#[test]
fn monodromy_through_singularity_exits_two() {
    let out = rcft(&["monodromy", "--loop", "circle:1,0:1.0"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("clearance"));
}

#[test]
fn lift_default_cutoff_prints_both_blocks() {
    let out = rcft(&["lift"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# block 1"));
    assert!(text.contains("# block 2"));
    assert!(text.contains("-1/16  1"));
    assert!(text.contains("3/16  2"));
}

#[test]
fn kz_swap_paths_and_spin_overrides() {
    let out = rcft(&["kz", "--level", "2", "--loop", "swap23"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("invariant dimension: 2"));
    assert!(text.contains("eigenvalues:"));

    let spins = rcft(&[
        "kz", "--level", "2", "--loop", "swap12", "--spins", "1/2,1/2,1/2,1/2",
    ]);
    assert_eq!(spins.status.code(), Some(0), "stderr: {}", stderr(&spins));

    let bad_spins = rcft(&["kz", "--level", "2", "--loop", "swap12", "--spins", "0.3"]);
    assert_eq!(bad_spins.status.code(), Some(1));
}

#[test]
fn kz_sample_file_transport() {
    let dir = std::env::temp_dir().join("rcft-cli-test-kz");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("path.txt");
    // Small closed wiggle of the second point.
    std::fs::write(
        &path,
        "0,0 1,0 2,0 3,0\n0,0 1,0.3 2,0 3,0\n0,0 1,0 2,0 3,0\n",
    )
    .unwrap();
    let out = rcft(&["kz", "--level", "2", "--loop", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("closed: true"));
}

#[test]
fn braid_check_and_closure() {
    let check = rcft(&["braid", "--check"]);
    assert_eq!(check.status.code(), Some(0));
    assert!(stdout(&check).contains("s1 s2 s1 = s2 s1 s2"));

    let closure = rcft(&["braid", "--closure", "--max", "100"]);
    assert_eq!(closure.status.code(), Some(0));
    assert_eq!(stdout(&closure), "finite: order 24\n");

    let neither = rcft(&["braid"]);
    assert_eq!(neither.status.code(), Some(1));
}

#[test]
fn orbifold_counts_classes_and_action() {
    let out = rcft(&["orbifold", "--group", "s3", "--classes", "--action"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("flat tuples: 18"));
    assert!(text.contains("degree oracle: 18 (match)"));
    assert!(text.contains("classes: 8"));
    assert!(text.contains("torus classes: 8"));
    assert!(text.contains("S^4: residual 0.00000000000000e0"));

    let genus2 = rcft(&["orbifold", "--group", "q8", "--genus", "2"]);
    assert_eq!(genus2.status.code(), Some(0));
    assert!(stdout(&genus2).contains("flat tuples: 2176"));
}

#[test]
fn orbifold_group_table_file() {
    let dir = std::env::temp_dir().join("rcft-cli-test-group");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("klein.txt");
    std::fs::write(&path, "4\n0 1 2 3\n1 0 3 2\n2 3 0 1\n3 2 1 0\n").unwrap();
    let out = rcft(&["orbifold", "--group", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("group order: 4"));
    assert!(text.contains("flat tuples: 16"));

    // Parseable but mathematically invalid (entry out of range): a data
    // validation failure, exit 2, like a non-unitary S file.
    let bad = dir.join("broken.txt");
    std::fs::write(&bad, "2\n0 1\n1 2\n").unwrap();
    let broken = rcft(&["orbifold", "--group", bad.to_str().unwrap()]);
    assert_eq!(broken.status.code(), Some(2), "stderr: {}", stderr(&broken));

    // Unparseable (non-numeric entry): a usage error, exit 1.
    let junk = dir.join("junk.txt");
    std::fs::write(&junk, "2\n0 1\nx y\n").unwrap();
    let junked = rcft(&["orbifold", "--group", junk.to_str().unwrap()]);
    assert_eq!(junked.status.code(), Some(1), "stderr: {}", stderr(&junked));
}

#[test]
fn unknown_group_name_exits_one() {
    let out = rcft(&["orbifold", "--group", "m11"]);
    assert_eq!(out.status.code(), Some(1));
}
