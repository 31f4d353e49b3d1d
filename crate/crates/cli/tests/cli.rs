use std::io::Write;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;
use tempfile::NamedTempFile;

const WEAK: &str = r#"{
  "schema_version": 1,
  "site": { "base": "powerset", "locations": ["x", "y"], "coverage": "downward-closed" },
  "resource": { "kind": "partial-memory", "values": [0, 1] },
  "monoid": "weak",
  "formulas": { "double": "x |->! 0 * x |->! 0" }
}"#;

const BITS: &str = r#"{
  "schema_version": 1,
  "site": { "base": "finsurj", "max_size": 2, "coverage": "atomic" },
  "variables": { "X": [0, 0, 1, 1], "Y": [0, 1, 0, 1] },
  "spaces": {
    "uniform": { "measure": ["1/4", "1/4", "1/4", "1/4"] },
    "correlated": { "measure": ["1/2", "1/2"], "blocks": [0, 1, 1, 0] }
  }
}"#;

fn model(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn run(file: &NamedTempFile, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sheafsep"))
        .args(args)
        .arg("--model")
        .arg(file.path())
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn weak_sat_succeeds_with_a_witness() {
    let f = model(WEAK);
    let out = run(&f, &["sat", "--formula", "x |->! 0 * x |->! 0", "--heap", "{x:0}", "--stage", "{x}", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["result"], true);
    assert_eq!(v["result"]["witness"]["left_stage"], "{x}");
    assert_eq!(v["result"]["witness"]["right"], "{x:0}");
}

#[test]
fn strong_sat_fails() {
    let f = model(&WEAK.replace("\"weak\"", "\"strong\""));
    for mode in ["unfolded", "pipeline"] {
        let out = run(&f, &["sat", "--formula", "double", "--heap", "{x:0}", "--stage", "{x}", "--mode", mode]);
        assert_eq!(out.status.code(), Some(1), "{mode}");
    }
}

#[test]
fn laws_pass_on_the_default_memory_model() {
    let f = model(WEAK);
    let start = Instant::now();
    let out = run(&f, &["laws", "--json"]);
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for expected in ["heyting residuation", "amalgamation isomorphism", "day stability", "weak monoid laws"] {
        assert!(names.contains(&expected), "{names:?}");
    }
    assert!(names.iter().any(|n| n.starts_with("image ⊣ preimage")), "{names:?}");
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let f = model(WEAK);
    let strip = |out: Output| {
        let mut v = json(&out);
        v.as_object_mut().unwrap().remove("elapsed_ms");
        serde_json::to_string(&v).unwrap()
    };
    let a = strip(run(&f, &["laws", "--json", "--samples", "50", "--seed", "3"]));
    let b = strip(run(&f, &["laws", "--json", "--samples", "50", "--seed", "3"]));
    assert_eq!(a, b);
    let text = |out: Output| String::from_utf8(out.stdout).unwrap();
    assert_eq!(text(run(&f, &["laws", "--samples", "50"])), text(run(&f, &["laws", "--samples", "50"])));
}

#[test]
fn too_many_locations_is_a_bound_error() {
    let f = model(&WEAK.replace(r#"["x", "y"]"#, r#"["a", "b", "c", "d", "e", "f"]"#).replace(",\n  \"formulas\": { \"double\": \"x |->! 0 * x |->! 0\" }", ""));
    let out = run(&f, &["check-site", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "bound-exceeded");
}

#[test]
fn weak_monoid_on_strict_memory_is_invalid() {
    let f = model(&WEAK.replace("partial-memory", "strict-memory"));
    let out = run(&f, &["check-site", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "invalid-model");
}

#[test]
fn schema_errors_carry_the_field_path() {
    let f = model(&WEAK.replace("\"values\": [0, 1]", "\"values\": [0, 1], \"colour\": 3"));
    let out = run(&f, &["check-site", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "schema");
    assert_eq!(v["error"]["path"], "resource");
}

#[test]
fn malformed_formula_and_unknown_command_exit_2() {
    let f = model(WEAK);
    let out = run(&f, &["eval", "--formula", "x |-> ", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "formula");
    let out = run(&f, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn eval_prints_a_stage_indexed_table() {
    let f = model(WEAK);
    let out = run(&f, &["eval", "--formula", "x ~> 0 -> F", "--stage", "{x}", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["result"]["table"]["{x}"], serde_json::json!([]));
    assert_eq!(v["result"]["table"]["{}"], serde_json::json!([]));
    let out = run(&f, &["eval", "--formula", "T", "--stage", "{x}"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("{x}: {x:⊥} {x:0} {x:1}"));
}

#[test]
fn check_sheaf_reports_the_support_bounded_failure() {
    let f = model(r#"{
      "schema_version": 1,
      "site": { "base": "powerset", "locations": ["x", "y"], "coverage": "downward-closed" },
      "resource": { "kind": "support-bounded", "values": [0], "k": 1 }
    }"#);
    let out = run(&f, &["check-sheaf"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("{x:0}") && text.contains("{y:0}"), "{text}");
}

#[test]
fn psl_separates_independent_bits_only() {
    let f = model(BITS);
    let phi = "X ~ {0: 1/2, 1: 1/2} * Y ~ {0: 1/2, 1: 1/2}";
    let out = run(&f, &["psl", "--space", "uniform", "--formula", phi, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["witness"]["left"], serde_json::json!([0, 0, 1, 1]));
    let out = run(&f, &["psl", "--space", "correlated", "--formula", phi]);
    assert_eq!(out.status.code(), Some(1));
}
