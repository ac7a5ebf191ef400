//! Contract tests for the `qpc` binary: subcommands, exit codes, output
//! files and their schemas.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpc"))
        .args(args)
        .env_remove("QPC_HASH_KEY")
        .output()
        .expect("binary runs")
}

fn work_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qpc-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_inputs(dir: &Path, inputs: &[&str], bit_length: usize) -> PathBuf {
    let path = dir.join("inputs.json");
    let body = serde_json::json!({ "inputs": inputs, "bit_length": bit_length });
    fs::write(&path, serde_json::to_string(&body).unwrap()).unwrap();
    path
}

#[test]
fn verify_passes_and_prints_the_leakage_constants() {
    let out = qpc(&["verify"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    assert!(!stdout.contains("FAIL"));
    assert!(stdout.contains("0.584963"));
    assert!(stdout.contains("1.584963"));
}

#[test]
fn oracle_prints_the_uniform_distribution() {
    let out = qpc(&["oracle", "--a", "phi+", "--b", "phi+"]);
    assert!(out.status.success());
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    let outcomes = json["outcomes"].as_array().unwrap();
    assert_eq!(outcomes.len(), 4);
    for entry in outcomes {
        assert!((entry["probability"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(entry["measured"], entry["residual"]);
    }
}

#[test]
fn oracle_cross_terms_follow_the_xor_law() {
    let out = qpc(&["oracle", "--a", "phi-", "--b", "psi+"]);
    assert!(out.status.success());
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    for entry in json["outcomes"].as_array().unwrap() {
        let m = u8::from_str_radix(entry["measured_code"].as_str().unwrap(), 2).unwrap();
        let n = u8::from_str_radix(entry["residual_code"].as_str().unwrap(), 2).unwrap();
        assert_eq!(n, 0b01 ^ 0b10 ^ m);
    }
}

#[test]
fn oracle_rejects_bad_labels() {
    let out = qpc(&["oracle", "--a", "foo", "--b", "phi+"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8(out.stderr).unwrap().is_empty());
}

#[test]
fn run_writes_deterministic_outputs() {
    let dir = work_dir("run");
    let inputs = write_inputs(&dir, &["00abcdef", "00abcdef", "12345678"], 32);
    let transcript = dir.join("t.jsonl");
    let report = dir.join("r.json");
    let args = [
        "run",
        "--protocol",
        "multi",
        "--k",
        "3",
        "--inputs",
        inputs.to_str().unwrap(),
        "--hash-bits",
        "128",
        "--seed",
        "7",
        "--transcript",
        transcript.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ];
    let out = qpc(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let first_transcript = fs::read_to_string(&transcript).unwrap();
    let first_report = fs::read_to_string(&report).unwrap();

    // Same command twice: byte-identical artifacts.
    let out = qpc(&args);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&transcript).unwrap(), first_transcript);
    assert_eq!(fs::read_to_string(&report).unwrap(), first_report);

    // Report carries the three pairwise verdicts: P1 == P2, both != P3.
    let report: Value = serde_json::from_str(&first_report).unwrap();
    let pairs = report["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 3);
    let verdict = |m: u64, k: u64| {
        pairs
            .iter()
            .find(|p| p["m"] == m && p["k"] == k)
            .and_then(|p| p["equal"].as_bool())
            .unwrap()
    };
    assert!(verdict(1, 2));
    assert!(!verdict(1, 3));
    assert!(!verdict(2, 3));
}

/// A minimal structural validator: every `required` key of the schema
/// object exists in the instance.
fn assert_required_fields(schema: &Value, instance: &Value) {
    for key in schema["required"].as_array().unwrap() {
        let key = key.as_str().unwrap();
        assert!(
            instance.get(key).is_some(),
            "instance is missing required field {key:?}"
        );
    }
}

#[test]
fn outputs_conform_to_the_shipped_schemas() {
    let dir = work_dir("schema");
    let inputs_path = write_inputs(&dir, &["1a", "1a"], 8);
    let transcript_path = dir.join("t.jsonl");
    let report_path = dir.join("r.json");
    let out = qpc(&[
        "run",
        "--protocol",
        "hash2",
        "--inputs",
        inputs_path.to_str().unwrap(),
        "--seed",
        "5",
        "--transcript",
        transcript_path.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let schema_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("docs/schemas");
    let load = |name: &str| -> Value {
        serde_json::from_str(&fs::read_to_string(schema_dir.join(name)).unwrap()).unwrap()
    };

    let inputs_schema = load("inputs.schema.json");
    let inputs_doc: Value =
        serde_json::from_str(&fs::read_to_string(&inputs_path).unwrap()).unwrap();
    assert_required_fields(&inputs_schema, &inputs_doc);

    let report_schema = load("report.schema.json");
    let report_doc: Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_required_fields(&report_schema, &report_doc);
    assert_eq!(report_doc["schema_version"], 1);

    let transcript_schema = load("transcript.schema.json");
    let transcript_text = fs::read_to_string(&transcript_path).unwrap();
    let mut lines = transcript_text.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_required_fields(&transcript_schema["definitions"]["header"], &header);
    let known_events: Vec<&str> = transcript_schema["definitions"]["event"]["oneOf"]
        .as_array()
        .unwrap()
        .iter()
        .map(|alt| alt["properties"]["event"]["const"].as_str().unwrap())
        .collect();
    for line in lines {
        let event: Value = serde_json::from_str(line).unwrap();
        let tag = event["event"].as_str().unwrap();
        assert!(known_events.contains(&tag), "unknown event tag {tag:?}");
    }
}

#[test]
fn omitted_seed_is_drawn_and_recorded() {
    let dir = work_dir("noseed");
    let inputs = write_inputs(&dir, &["3c", "3c"], 8);
    let report = dir.join("r.json");
    let out = qpc(&[
        "run",
        "--protocol",
        "hash2",
        "--inputs",
        inputs.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(report["seed"].is_u64(), "drawn seed recorded in the report");
}

#[test]
fn trial_batches_aggregate_deterministically() {
    let dir = work_dir("trials");
    let inputs = write_inputs(&dir, &["0a", "0a", "1b"], 8);
    let args = [
        "run",
        "--protocol",
        "multi",
        "--k",
        "3",
        "--inputs",
        inputs.to_str().unwrap(),
        "--seed",
        "21",
        "--trials",
        "8",
    ];
    let out = qpc(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["trials"], 8);
    assert_eq!(summary["aborted"], 0);
    // P1 == P2 on every trial; unequal pairs never count.
    let counts = summary["equal_counts"].as_array().unwrap();
    assert!(counts.contains(&serde_json::json!([1, 2, 8])));
    assert_eq!(counts.len(), 1);
    // Same batch again: identical aggregate despite the thread fan-out.
    let again = qpc(&args);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn attacked_run_exits_with_code_two() {
    let dir = work_dir("abort");
    let inputs = write_inputs(&dir, &["aa", "bb"], 8);
    // 20 decoys per transmission: detection probability 1 - (3/4)^20.
    let out = qpc(&[
        "run",
        "--protocol",
        "llcll2",
        "--inputs",
        inputs.to_str().unwrap(),
        "--seed",
        "3",
        "--check-count",
        "20",
        "--attack",
        "intercept-resend",
        "--attack-channel",
        "TP-P1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("ABORTED"));
}

#[test]
fn config_errors_exit_with_code_one() {
    let dir = work_dir("config");
    let inputs = write_inputs(&dir, &["aa", "bb"], 8);
    let inputs = inputs.to_str().unwrap();

    let out = qpc(&["run", "--protocol", "bogus", "--inputs", inputs]);
    assert_eq!(out.status.code(), Some(1));

    let out = qpc(&["run", "--protocol", "multi", "--inputs", inputs]);
    assert_eq!(out.status.code(), Some(1), "--k is mandatory for multi");

    let out = qpc(&[
        "run",
        "--protocol",
        "three",
        "--inputs",
        inputs,
        "--attack",
        "intercept-resend",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "channel attack needs --attack-channel"
    );
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("--attack-channel"),
        "diagnostic names the flag: {stderr}"
    );

    // Three users declared, two inputs supplied.
    let out = qpc(&["run", "--protocol", "three", "--inputs", inputs]);
    assert_eq!(out.status.code(), Some(1));

    // tp-bell with decoys still on is contradictory.
    let out = qpc(&[
        "run",
        "--protocol",
        "hash2",
        "--inputs",
        inputs,
        "--attack",
        "tp-bell",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("--no-decoys"),
        "diagnostic suggests the fix: {stderr}"
    );
}

#[test]
fn tp_bell_run_records_the_attack_measurement() {
    let dir = work_dir("tpbell");
    let inputs = write_inputs(&dir, &["aa", "bb"], 8);
    let transcript = dir.join("t.jsonl");
    let out = qpc(&[
        "run",
        "--protocol",
        "hash2",
        "--inputs",
        inputs.to_str().unwrap(),
        "--seed",
        "11",
        "--no-decoys",
        "--attack",
        "tp-bell",
        "--transcript",
        transcript.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&transcript).unwrap();
    assert!(text.contains("\"tp_attack\""));
}

#[test]
fn leakage_report_carries_constants_and_views() {
    let dir = work_dir("leakage");
    let inputs = write_inputs(&dir, &["0a", "0a", "3f"], 8);
    let transcript = dir.join("t.jsonl");
    let out = qpc(&[
        "run",
        "--protocol",
        "three",
        "--inputs",
        inputs.to_str().unwrap(),
        "--seed",
        "2",
        "--transcript",
        transcript.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = qpc(&[
        "leakage",
        "--transcript",
        transcript.to_str().unwrap(),
        "--role",
        "outside",
        "--k",
        "6",
    ]);
    assert!(out.status.success());
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["leaked_bits"]["score_1"].as_f64().unwrap() - 0.5849625).abs() < 1e-6);
    assert!((json["leaked_bits"]["score_2"].as_f64().unwrap() - 1.5849625).abs() < 1e-6);
    assert_eq!(json["execution_count"]["pairwise_max"], 15);
    assert_eq!(json["execution_count"]["this_protocol"], 1);
    assert_eq!(json["observer_view"]["role"], "outside");
    assert_eq!(
        json["observer_view"]["symbols"]["G[P3]"]["status"],
        "unknown"
    );
}

#[test]
fn attack_experiments_emit_reports() {
    let out = qpc(&[
        "attack",
        "--experiment",
        "tp-bell",
        "--variant",
        "lwc2",
        "--trials",
        "5",
        "--seed",
        "9",
    ]);
    assert!(out.status.success());
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["raw_inputs_recovered"], 5);
    assert_eq!(json["detected"], 0);

    let out = qpc(&[
        "attack",
        "--experiment",
        "detection",
        "--scheme",
        "bellpair",
        "--photons",
        "2000",
        "--seed",
        "4",
    ]);
    assert!(out.status.success());
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["rate"].as_f64().unwrap() - 0.25).abs() < 0.05);

    let out = qpc(&["attack", "--experiment", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}
