use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn thinlie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinlie"))
        .args(args)
        .env_remove("THINLIE_MAX_DEGREE")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("thinlie-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn build_reports_structure_and_pass() {
    let out = thinlie(&["build", "--family", "a", "--q", "7", "--N", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["structure"]["N"], 60);
    assert_eq!(doc["structure"]["components"][6]["dims"], 2);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let args = ["detect", "--family", "c", "--s", "1", "--N", "80"];
    assert_eq!(thinlie(&args).stdout, thinlie(&args).stdout);
    let args = ["export", "--family", "L0q", "--N", "40"];
    assert_eq!(thinlie(&args).stdout, thinlie(&args).stdout);
}

#[test]
fn diagram_labels_diamonds_with_types() {
    let out = thinlie(&["diagram", "--family", "a", "--q", "7", "--N", "14"]);
    assert_eq!(out.status.code(), Some(0));
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    let diamonds: Vec<&str> = dot.lines().filter(|l| l.contains("diamond_")).collect();
    assert_eq!(diamonds.len(), 3);
    assert!(diamonds[0].contains("diamond_1 "));
    assert!(diamonds[1].contains("diamond_7 ") && diamonds[1].contains("label=\"-1\""));
    assert!(diamonds[2].contains("diamond_13 ") && diamonds[2].contains("label=\"-1\""));

    let txt = thinlie(&["diagram", "--family", "a", "--N", "14", "--format", "txt"]);
    let txt = String::from_utf8(txt.stdout).unwrap();
    assert!(txt.lines().nth(6).unwrap().contains("diamond of type -1"));
}

#[test]
fn roundtrip_on_the_uniqueness_family() {
    let out = thinlie(&["roundtrip", "--family", "uniqueness", "--q", "7", "--s", "1", "--N", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["pass"], true);
    let seq = doc["extracted_sequence"]["entries"].as_str().unwrap();
    assert_eq!(seq.find('X'), Some(12));
}

#[test]
fn verify_fails_on_an_inconsistent_pattern() {
    let path = scratch("bad.json");
    let entries: Vec<String> = std::iter::once(r#"{"degree":7,"type":"finite:-1"}"#.to_string())
        .chain((2..20).map(|k| {
            let ty = if k == 3 { "finite:2" } else { "infinite" };
            format!(r#"{{"degree":{},"type":"{ty}"}}"#, 1 + 6 * k)
        }))
        .collect();
    std::fs::write(&path, format!(r#"{{"p":7,"q":7,"entries":[{}]}}"#, entries.join(","))).unwrap();
    let out = thinlie(&["verify", "--pattern", path.to_str().unwrap(), "--N", "60", "--check", "jacobi"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn verify_passes_on_case_b() {
    let out = thinlie(&["verify", "--family", "b", "--mu", "2", "--N", "80"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn deflation_of_the_nottingham_algebra() {
    let out = thinlie(&["deflate", "--family", "a", "--q", "49", "--N", "60"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["regularity"]["regularity"], "irregular");
    let entries = doc["pattern"]["entries"].as_array().unwrap();
    assert_eq!(entries[0]["degree"], 7);
    assert_eq!(entries[1]["degree"], 13);
    assert_eq!(entries[1]["type"], "fake1");
}

#[test]
fn sequences_and_specs_are_accepted() {
    let out = thinlie(&["detect", "--sequence", &"Y".repeat(30), "--N", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let spec = scratch("spec.json");
    std::fs::write(&spec, r#"{"p":7,"q":7,"family":"d","params":{"s":1,"second":0}}"#).unwrap();
    let out = thinlie(&["detect", "--spec", spec.to_str().unwrap(), "--N", "60"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pattern"]["entries"][7]["type"], "fake0");
}

#[test]
fn exit_codes_are_distinct() {
    assert_eq!(thinlie(&["build", "--family", "nope"]).status.code(), Some(2));
    assert_eq!(thinlie(&["build", "--family", "a", "--q", "25", "--p", "7"]).status.code(), Some(2));
    assert_eq!(thinlie(&["build", "--family", "c"]).status.code(), Some(2));
    assert_eq!(thinlie(&["build", "--pattern", "/nonexistent.json"]).status.code(), Some(5));
    let out = Command::new(env!("CARGO_BIN_EXE_thinlie"))
        .args(["build", "--family", "a", "--N", "60"])
        .env("THINLIE_MAX_DEGREE", "40")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
