use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use serde_json::Value as Json;
use tsopom::cli::{run, Cli};

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name).display().to_string()
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tsopom-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn scratch(name: &str, text: &str) -> String {
    let path = scratch_dir("files").join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

/// Output and verdict of one command.
fn tsopom(args: &[&str]) -> (String, bool) {
    let cli = Cli::try_parse_from(std::iter::once("tsopom").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    let holds = run(&cli, &mut out).unwrap();
    (String::from_utf8(out).unwrap(), holds)
}

fn assert_valid(schema: &str, output: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{schema}.schema.json"));
    let schema: Json = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let instance: Json = serde_json::from_str(output).unwrap();
    let errors: Vec<String> =
        validator.iter_errors(&instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

const EXAMPLE: &str = r#"{"nodes": ["x:=2", "x=2", "x:=3", "x=3"], "edges": [[0, 1], [2, 3]]}"#;

#[test]
fn litmus_reports_and_validates() {
    let (text, holds) = tsopom(&["litmus", &corpus("sb.lit"), "--witnesses", "1"]);
    assert!(holds);
    assert!(text.starts_with("sb: reachable (r1 = 0 && r2 = 0): HOLDS"), "{text}");
    assert!(text.contains("witness 0: final [r1=0, r2=0, x=1, y=1]"));
    let (json, _) = tsopom(&["litmus", &corpus("sb.lit"), "--format", "json"]);
    assert_valid("verdict", &json);
    let (dot, _) = tsopom(&["litmus", &corpus("sb.lit"), "--format", "dot", "--witnesses", "1"]);
    assert!(dot.starts_with("digraph \"witness_0\""));
}

#[test]
fn fences_forbid_the_store_buffering_outcome() {
    let (text, holds) = tsopom(&["litmus", &corpus("fence_sb.lit")]);
    assert!(holds);
    assert!(text.starts_with("fence_sb: forbidden (r1 = 0 && r2 = 0): HOLDS"));
}

#[test]
fn flags_override_file_bounds() {
    let (json, _) = tsopom(&["litmus", &corpus("sb.lit"), "--format", "json", "--values", "0,1,5", "--unroll", "1"]);
    let v: Json = serde_json::from_str(&json).unwrap();
    assert_eq!(v["bounds"]["values"], serde_json::json!([0, 1, 5]));
    assert_eq!(v["bounds"]["unroll_max"], 1);
    assert!(Cli::try_parse_from(["tsopom", "--unroll", "0", "litmus", "f"]).is_err());
    assert!(Cli::try_parse_from(["tsopom", "--values", "", "litmus", "f"]).is_err());
}

#[test]
fn check_names_the_failing_read() {
    let pomset = scratch("example.json", EXAMPLE);
    let (text, holds) = tsopom(&["check", &pomset, &scratch("bad.ord", "0 2 3 1"), "--init", "x=0"]);
    assert!(!holds);
    assert!(text.contains("Va: FAIL at read x=2 (node 1)"), "{text}");
    assert_eq!(text.lines().filter(|l| l.contains("FAIL")).count(), 1);

    let (text, holds) = tsopom(&["check", &pomset, &scratch("good.ord", "1 0 3 2")]);
    assert!(holds);
    assert!(text.lines().take(8).all(|l| l.ends_with(": pass")), "{text}");

    let (json, holds) = tsopom(&["check", &pomset, &scratch("part.ord", "1<0, 3<2, 0<2"), "--format", "json"]);
    assert!(holds);
    assert_valid("check", &json);
    let v: Json = serde_json::from_str(&json).unwrap();
    assert_eq!(v["total"], false);
    assert_eq!(v["extension"].as_array().unwrap().len(), 4);
}

#[test]
fn empty_order_over_delta_passes() {
    let (text, holds) =
        tsopom(&["check", &scratch("delta.json", r#"{"nodes": ["delta"]}"#), &scratch("empty.ord", "")]);
    assert!(holds);
    assert!(text.contains("consistent"));
}

#[test]
fn check_rejects_foreign_nodes() {
    let cli =
        Cli::try_parse_from(["tsopom", "check", &scratch("example2.json", EXAMPLE), &scratch("wide.ord", "0 1 2 4")])
            .unwrap();
    assert!(run(&cli, &mut Vec::new()).is_err());
}

#[test]
fn denote_counts_and_validates() {
    let (text, _) = tsopom(&["denote", "--level", "po", &scratch("skip.imp", "skip")]);
    assert!(text.starts_with("1 po pomsets for skip"));
    let read = scratch("buffer_read.imp", "r := x");
    let args = ["denote", &read, "--buffer", "x:=3,y:=2", "--values", "0,1,2,3", "--format", "json"];
    let (first, _) = tsopom(&args);
    let (second, _) = tsopom(&args);
    assert_eq!(first, second);
    assert_valid("denotation", &first);
    let v: Json = serde_json::from_str(&first).unwrap();
    assert_eq!(v["count"], 37);
    let (dot, _) = tsopom(&["denote", "--level", "po", &corpus("sb.lit"), "--format", "dot"]);
    assert_eq!(dot.matches("digraph").count(), 4);
}

#[test]
fn dot_draws_cover_edges() {
    let chain = scratch("chain.json", r#"{"nodes": ["x:=1", "x=1", "y=0"], "edges": [[0, 1], [1, 2], [0, 2]]}"#);
    let (dot, _) = tsopom(&["dot", &chain]);
    assert!(dot.contains("n0 -> n1;") && dot.contains("n1 -> n2;"));
    assert!(!dot.contains("n0 -> n2;"));
    assert_valid("pomset", r#"{"nodes": ["x:=1", "x^:=1", "x=1", "delta"], "edges": [[0, 1]]}"#);
}

#[test]
fn harness_on_an_empty_directory() {
    let dir = scratch_dir("empty");
    let (json, holds) = tsopom(&["harness", dir.to_str().unwrap(), "--format", "json"]);
    assert!(holds);
    assert_valid("harness", &json);
    let v: Json = serde_json::from_str(&json).unwrap();
    assert_eq!(v["programs"], serde_json::json!([]));
}

#[test]
fn harness_detects_a_weakened_checker() {
    let dir = scratch_dir("mutation");
    for f in ["sb.lit", "fence_sb.lit"] {
        std::fs::copy(corpus(f), dir.join(f)).unwrap();
    }
    let (text, holds) = tsopom(&["harness", dir.to_str().unwrap()]);
    assert!(holds, "{text}");
    assert!(text.contains("fence_sb: skipped"));
    let (json, holds) = tsopom(&["harness", dir.to_str().unwrap(), "--drop-axiom", "Va", "--format", "json"]);
    assert!(!holds);
    assert_valid("harness", &json);
    let v: Json = serde_json::from_str(&json).unwrap();
    assert!(!v["programs"][0]["mismatches"].as_array().unwrap().is_empty());
}

#[test]
fn random_harness_is_seeded() {
    let dir = scratch_dir("random");
    let args = ["harness", dir.to_str().unwrap(), "--random", "3", "--seed", "11", "--format", "json"];
    let (first, holds) = tsopom(&args);
    assert!(holds);
    assert_eq!(first, tsopom(&args).0);
}

#[test]
fn exit_codes() {
    let bin = env!("CARGO_BIN_EXE_tsopom");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["litmus", &corpus("dekker.lit"), "--witnesses", "0"]), Some(0));
    let wrong = scratch(
        "sb_forbidden.lit",
        &std::fs::read_to_string(corpus("sb.lit")).unwrap().replace("reachable", "forbidden"),
    );
    assert_eq!(status(&["litmus", &wrong, "--witnesses", "0"]), Some(1));
    assert_eq!(status(&["litmus", "/nonexistent.lit"]), Some(2));
    assert_eq!(status(&["litmus", &scratch("broken.lit", "program { x := }")]), Some(2));
}
