//! End-to-end tests of the command-line interface: subcommand behavior,
//! exit codes, and byte-determinism of reports.

use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fibercalc")
}

fn run(catalog: &TempDir, args: &[&str]) -> Output {
    Command::new(bin())
        .arg("--catalog")
        .arg(catalog.path())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn invariants_of_shipped_block_file() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("q3_9_m5.fib");
    let out = run(
        &dir,
        &[
            "build-block",
            "--family",
            "q",
            "--g",
            "3",
            "--h",
            "9",
            "--m",
            "5",
            "--out",
            file.to_str().unwrap(),
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(&dir, &["--json", "invariants", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["euler"], 64);
    assert_eq!(report["signature"], 0);
    assert_eq!(report["h1"]["rank"], 23);
    assert_eq!(report["h1"]["torsion"][0], 5);
}

#[test]
fn check_distinguishes_invalid_from_malformed() {
    let dir = TempDir::new().unwrap();
    // mathematically invalid: lefschetz with no vanishing cycles
    let bad = dir.path().join("bad.fib");
    std::fs::write(
        &bad,
        r#"{"kind": "lefschetz", "fiber_genus": 2, "base_genus": 1, "body": "explicit",
           "handles": [{"alpha": [], "beta": []}], "vanishing_cycles": [],
           "sections": [], "asserted": {"relatively_minimal": false, "mcg_valid": false, "disjoint_pairs": []},
           "meta": {"name": "", "citation": ""}}"#,
    )
    .unwrap();
    let out = run(&dir, &["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "mathematically refused");
    // malformed JSON
    let truncated = dir.path().join("trunc.fib");
    std::fs::write(&truncated, "{\"kind\": \"bundle\"").unwrap();
    let out = run(&dir, &["check", truncated.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "input error");
    // valid builtin
    let out = run(&dir, &["check", "r-3-1-m2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn stabilize_horizontal_from_catalog_seed() {
    let dir = TempDir::new().unwrap();
    let result_file = dir.path().join("stabilized.fib");
    let out = run(
        &dir,
        &[
            "--json",
            "stabilize",
            "horizontal",
            "--input",
            "korkmaz-Y2",
            "--partner-h",
            "1",
            "--m",
            "5",
            "--out",
            result_file.to_str().unwrap(),
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["sigma_before"], -4);
    assert_eq!(report["sigma_after"], -4);
    assert_eq!(report["b1_after"], 3);
    assert_eq!(report["h1_after"]["torsion"][0], 5);
    assert_eq!(report["kernel_dim"], 0);
    // the emitted result parses and certifies
    let out = run(&dir, &["certify", result_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn stabilize_vertical_requires_declared_signature() {
    let dir = TempDir::new().unwrap();
    // the template has no declared signature: signature-dependent
    // stabilization is an input error
    let out = run(
        &dir,
        &[
            "stabilize",
            "vertical",
            "--input",
            "ekkos-genus3-h9",
            "--partner-g",
            "1",
            "--m",
            "3",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("signature"), "{}", err);
}

#[test]
fn family_reports_are_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = [
        "--json", "family", "--mode", "iii", "--g", "2", "--h", "1", "--count", "3",
    ];
    let first = run(&dir, &args);
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let second = run(&dir, &args);
    assert_eq!(stdout(&first), stdout(&second));
    let report: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(report["members"].as_array().unwrap().len(), 3);
    assert_eq!(report["distinctions"].as_array().unwrap().len(), 3);
}

#[test]
fn family_mode_i_needs_a_complete_seed() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &dir,
        &[
            "family", "--mode", "i", "--g", "4", "--h", "9", "--count", "2",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("signature"), "{}", err);
}

#[test]
fn catalog_add_show_and_duplicates() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("block.fib");
    let out = run(
        &dir,
        &[
            "build-block",
            "--family",
            "r",
            "--g",
            "2",
            "--h",
            "1",
            "--m",
            "4",
            "--a",
            "1,0,0,0",
            "--b",
            "0,0,1,0",
            "--out",
            file.to_str().unwrap(),
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(
        &dir,
        &["catalog", "add", file.to_str().unwrap(), "--id", "my-block"],
    );
    assert_eq!(out.status.code(), Some(0));
    let out = run(&dir, &["--json", "catalog", "show", "my-block"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["provenance"], "user");
    assert_eq!(doc["report"]["h1"]["rank"], 4);
    assert_eq!(doc["report"]["h1"]["torsion"][0], 4);
    // duplicate id is an input error
    let out = run(
        &dir,
        &["catalog", "add", file.to_str().unwrap(), "--id", "my-block"],
    );
    assert_eq!(out.status.code(), Some(2));
    // list shows the stored id
    let out = run(&dir, &["catalog", "list"]);
    assert!(stdout(&out).contains("my-block"));
}

#[test]
fn intersecting_curves_rejected_for_r_over_torus() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &dir,
        &[
            "build-block",
            "--family",
            "r",
            "--g",
            "2",
            "--h",
            "1",
            "--m",
            "2",
            "--a",
            "1,0,0,0",
            "--b",
            "0,1,0,0",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("<a,b>") || err.contains("a,b"), "{}", err);
}

#[test]
fn twisted_stabilize_via_matrix_file() {
    let dir = TempDir::new().unwrap();
    let seed = dir.path().join("p22.fib");
    let out = run(
        &dir,
        &[
            "build-block",
            "--family",
            "p",
            "--g",
            "2",
            "--h",
            "2",
            "--out",
            seed.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    // the transvection along b_1 as a twist matrix
    let twist = dir.path().join("twist.json");
    std::fs::write(
        &twist,
        r#"{"matrix": [["1","0","0","0"],["1","1","0","0"],["0","0","1","0"],["0","0","0","1"]]}"#,
    )
    .unwrap();
    let out = run(
        &dir,
        &[
            "--json",
            "stabilize",
            "horizontal",
            "--input",
            seed.to_str().unwrap(),
            "--partner-h",
            "1",
            "--m",
            "4",
            "--twist",
            twist.to_str().unwrap(),
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["kernel_dim"], 0);
    assert_eq!(report["sigma_after"], 0);
    assert_eq!(report["h1_after"]["torsion"][0], 4);
    // a non-symplectic matrix is rejected as input error
    std::fs::write(
        &twist,
        r#"{"matrix": [["1","1","0","0"],["1","1","0","0"],["0","0","1","0"],["0","0","0","1"]]}"#,
    )
    .unwrap();
    let out = run(
        &dir,
        &[
            "stabilize",
            "horizontal",
            "--input",
            seed.to_str().unwrap(),
            "--partner-h",
            "1",
            "--m",
            "4",
            "--twist",
            twist.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn family_mode_i_with_user_filled_seed() {
    let dir = TempDir::new().unwrap();
    // the user's copy of the seed: the template with the signature filled in
    let seed = dir.path().join("seed.fib");
    std::fs::write(
        &seed,
        r#"{
  "kind": "bundle",
  "fiber_genus": 3,
  "base_genus": 9,
  "body": "opaque",
  "euler": 64,
  "signature": -4,
  "h1": { "rank": 18, "torsion": [] },
  "fiber_primitive": true,
  "nontorsion_fiber_curve_exists": false,
  "torsion_fiber_curve_exists": true,
  "source": "user-filled genus-3 seed bundle",
  "sections": [ { "self_intersection": 0, "splits_base": true } ],
  "asserted": { "relatively_minimal": false, "mcg_valid": false, "disjoint_pairs": [] },
  "meta": { "name": "my-seed", "citation": "filled from the source" }
}"#,
    )
    .unwrap();
    let out = run(&dir, &["catalog", "add", seed.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(
        &dir,
        &[
            "--json", "family", "--mode", "i", "--g", "4", "--h", "9", "--count", "3", "--seed",
            "my-seed",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let members = report["members"].as_array().unwrap();
    assert_eq!(members.len(), 3);
    for member in members {
        assert_eq!(member["kind"], "bundle");
        assert_eq!(member["fiber_genus"], 4);
        assert_eq!(member["base_genus"], 9);
        assert_eq!(member["noncomplex"]["status"], "granted");
        assert_eq!(member["fibration"]["signature"], -4);
    }
    for pair in report["distinctions"].as_array().unwrap() {
        assert_eq!(pair["certificate"]["status"], "granted");
    }
}
