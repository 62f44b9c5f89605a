use std::path::Path;
use std::process::{Command, Output};

use cwm_core::table::{parse_csv, parse_grid, parse_json};
use cwm_core::weilsearch::icw2_77_100_reference;
use serde_json::Value;

fn cwm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwm"))
        .args(args)
        .env_remove("CWM_CACHE")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn check_fbound_cell() {
    let out = cwm(&["check", "128", "49"]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(&out);
    assert_eq!(j["status"], "NONEXISTENT");
    assert_eq!(j["certificate"]["rule"], "FBOUND");
    assert_eq!(j["certificate"]["params"]["F"], 16);
}

#[test]
fn check_with_search_finds_witness() {
    let out = cwm(&["check", "7", "4", "--search", "--no-fixture"]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(&out);
    assert_eq!(j["status"], "EXISTS");
    assert_eq!(j["provenance"], "search");
    let d: Vec<i64> = serde_json::from_value(j["witness"].clone()).unwrap();
    assert_eq!(d.len(), 7);
    assert_eq!(d.iter().map(|c| c * c).sum::<i64>(), 4);
}

#[test]
fn check_uses_fixture() {
    let j = json(&cwm(&["check", "200", "100"]));
    assert_eq!(j["status"], "NONEXISTENT");
    assert_eq!(j["fixture"], ".");
    let j = json(&cwm(&["check", "120", "36"]));
    assert_eq!(j["provenance"], "manual");
    let j = json(&cwm(&["check", "2x22", "36"]));
    assert_eq!(j["provenance"], "manual");
}

#[test]
fn check_exit_codes() {
    assert_eq!(cwm(&["check", "104", "81"]).status.code(), Some(3));
    assert_eq!(cwm(&["check", "7", "0"]).status.code(), Some(2));
    assert_eq!(cwm(&["check", "seven", "4"]).status.code(), Some(2));
    assert_eq!(cwm(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn table_is_deterministic_across_jobs() {
    let args = |jobs: &'static str| ["table", "--vmax", "80", "--format", "csv", "--jobs", jobs];
    let a = cwm(&args("1"));
    let b = cwm(&args("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, cwm(&args("4")).stdout);
}

#[test]
fn table_formats_agree() {
    let run =
        |f: &str| String::from_utf8(cwm(&["table", "--vmax", "40", "--format", f]).stdout).unwrap();
    let csv = parse_csv(&run("csv")).unwrap();
    assert_eq!(csv.len(), 400);
    assert_eq!(csv, parse_json(&run("json")).unwrap());
    assert_eq!(csv, parse_grid(&run("grid")).unwrap());
}

#[test]
fn table_diff_on_group_fixture() {
    let out = cwm(&[
        "table",
        "--group-invariant",
        "--diff-fixture",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("0 soundness violations, 0 completeness gaps"),
        "{err}"
    );
}

#[test]
fn table_rule_filter() {
    let out = cwm(&[
        "table", "--vmax", "30", "--rules", "FBOUND", "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FBOUND"));
    assert!(!text.contains("THM45"));
    assert_eq!(cwm(&["table", "--rules", "NOPE"]).status.code(), Some(2));
}

#[test]
fn weil_small_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let j = json(&cwm(&["weil", "4", "4", "--cache-dir", d]));
    assert_eq!(j["classes"].as_array().unwrap().len(), 1);
    assert!(dir.path().join("weil_4_4.json").exists());
    let out = Command::new(env!("CARGO_BIN_EXE_cwm"))
        .args(["weil", "31", "36"])
        .env("CWM_CACHE", d)
        .output()
        .unwrap();
    let j = json(&out);
    assert_eq!(j["complete"], true);
    assert_eq!(j["classes"].as_array().unwrap().len(), 1);
    assert!(dir.path().join("weil_31_36.json").exists());
}

#[test]
fn weil_import_is_flagged_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("list.json");
    let listed = cwm(&["weil", "5", "9"]).stdout;
    std::fs::write(&src, &listed).unwrap();
    let cache = dir.path().join("cache");
    let out = cwm(&[
        "weil",
        "5",
        "9",
        "--import",
        src.to_str().unwrap(),
        "--cache-dir",
        cache.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["complete"], false);
    // A list for the wrong conductor is rejected.
    let out = cwm(&["weil", "7", "9", "--import", src.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn weil_too_large_is_open() {
    let out = cwm(&["weil", "155", "36"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("--import"));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_reference_and_perturbations() {
    let dir = tempfile::tempdir().unwrap();
    let e = icw2_77_100_reference();
    let good = write(
        dir.path(),
        "e.json",
        &serde_json::json!({"v": 77, "coeffs": e}).to_string(),
    );
    let out = cwm(&["verify", &good, "100", "-a", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["proper"], true);

    let mut flipped = e.clone();
    let i = flipped.iter().position(|&c| c != 0).unwrap();
    flipped[i] = -flipped[i];
    let bad = write(
        dir.path(),
        "f.json",
        &serde_json::json!({"v": 77, "coeffs": flipped}).to_string(),
    );
    assert_eq!(
        cwm(&["verify", &bad, "100", "-a", "2"]).status.code(),
        Some(1)
    );

    let empty = write(dir.path(), "z.json", r#"{"coeffs": []}"#);
    assert_eq!(cwm(&["verify", &empty, "100"]).status.code(), Some(1));
    let garbage = write(dir.path(), "g.json", "{not json");
    assert_eq!(cwm(&["verify", &garbage, "100"]).status.code(), Some(2));
}

#[test]
fn verify_general_form() {
    let dir = tempfile::tempdir().unwrap();
    // −1 + x + x² + x⁴ on C_7 in the {group, u, terms} form.
    let text = r#"{"group":[7],"u":1,"terms":[{"g":[0],"c":-1},{"g":[1],"c":1},{"g":[2],"c":1},{"g":[4],"c":1}]}"#;
    let f = write(dir.path(), "c7.json", text);
    let out = cwm(&["verify", &f, "4"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
