//! The command-line contract: argv, formats and exit codes.

use std::io::Cursor;

use parity_die::cli::{parse_sequence, run, EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
use parity_die::stats::scenario;
use serde_json::Value;

fn invoke(args: &[&str], stdin: &str) -> (i32, String, String) {
    let mut argv = vec!["parity-die"];
    argv.extend_from_slice(args);
    let mut input = Cursor::new(stdin.as_bytes().to_vec());
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(argv, &mut input, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = invoke(args, "");
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn table_marks_mismatched_rows() {
    let v = json(&["table", "--rule", "copy"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let mismatched: Vec<&str> = rows
        .iter()
        .filter(|r| r["nonstandard_matches"] == false)
        .map(|r| r["sequence"].as_str().unwrap())
        .collect();
    assert_eq!(mismatched, ["EEE", "EEO", "OOE", "OOO"]);
    assert_eq!(rows[2]["nonstandard"]["numerator"], 1);
    assert_eq!(rows[2]["nonstandard"]["denominator"], 12);

    let (code, csv, _) = invoke(&["table", "--format", "csv"], "");
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[1].starts_with("EEE,1/8,1/8,1/4,") && lines[1].ends_with("MISMATCH"));
    assert!(lines[3].ends_with(",match"));
}

#[test]
fn enumerate_csv_schema() {
    let (code, out, _) = invoke(&["enumerate", "--rule", "none", "--depth", "2", "--format", "csv"], "");
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "sequence,numerator,denominator,decimal\nEE,1,4,0.25\nEO,1,4,0.25\nOE,1,4,0.25\nOO,1,4,0.25\n"
    );
}

#[test]
fn enumerate_json_is_exact() {
    let v = json(&["enumerate", "--rule", "copy", "--depth", "3"]);
    assert_eq!(v["depth"], 3);
    let eoe = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["sequence"] == "EOE")
        .unwrap();
    assert_eq!((eoe["numerator"].as_i64(), eoe["denominator"].as_i64()), (Some(1), Some(12)));

    let v = json(&["enumerate", "--depth", "4", "--view", "imbalance"]);
    assert_eq!(v["entries"].as_array().unwrap().len(), 5);
    let v = json(&["enumerate", "--depth", "1", "--view", "configs"]);
    assert_eq!(v["entries"][0]["config"], "(0,2,1)");
}

#[test]
fn chain_reports() {
    let v = json(&["chain", "--rule", "none", "--report", "verdict"]);
    assert_eq!(v["ergodic"], true);
    let v = json(&["chain", "--rule", "copy", "--report", "verdict"]);
    assert_eq!(v["ergodic"], false);
    assert_eq!(v["witness"][0], "(3,0,0)");
    assert_eq!(v["witness"][1], "(0,0,3)");
    let v = json(&["chain", "--rule", "increment", "--report", "verdict"]);
    assert_eq!(v["ergodic"], true);
    assert_eq!(v["aperiodic"], false);

    let full = json(&["chain"]);
    assert_eq!(full["chain"]["states"].as_array().unwrap().len(), 10);
    assert_eq!(full["chain"]["matrix"][0][1]["denominator"], 2);
    assert_eq!(full["absorption"]["expected_steps"]["numerator"], 11);

    let (code, out, _) = invoke(&["chain", "--report", "absorption", "--format", "csv"], "");
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\"(2,0,1)\",3,8,0.375,11/2,2/3"));
}

#[test]
fn scenario_emit_round_trips() {
    for id in 1..=3u8 {
        let (code, out, _) = invoke(&["scenario", "--id", &id.to_string(), "--emit"], "");
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.trim_end().len(), 100);
        assert_eq!(parse_sequence(&out).unwrap(), scenario(id).unwrap());
    }
    let (_, out, _) = invoke(&["scenario", "--id", "1", "--emit"], "");
    assert_eq!(out, format!("{}{}\n", "E".repeat(58), "O".repeat(42)));
    let v = json(&["scenario", "--id", "2"]);
    assert_eq!((v["n"].as_u64(), v["even_count"].as_u64()), (Some(100), Some(58)));
}

#[test]
fn test_subcommand_reads_stdin_and_files() {
    let (_, seq, _) = invoke(&["scenario", "--id", "3", "--emit"], "");
    let (code, out, err) = invoke(&["test"], &seq);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["test"]["z"], 1.6);
    assert_eq!(v["sequential"]["first_rejection"], 94);

    let dir = tempfile_dir();
    let path = dir.join("seq.txt");
    std::fs::write(&path, format!("# scenario three\n{seq}")).unwrap();
    let (code, out, _) = invoke(&["test", "--input", path.to_str().unwrap(), "--format", "csv"], "");
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,even_count,z,flag"));
    assert_eq!(lines.count(), 91);
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("parity-die-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn simulate_outputs() {
    let v = json(&["simulate", "--tosses", "20", "--seed", "3"]);
    assert_eq!(v["tosses"].as_str().unwrap().len(), 20);
    assert_eq!(v["trajectory"].as_array().unwrap().len(), 21);

    let v = json(&["simulate", "--tosses", "3", "--runs", "1000", "--seed", "3"]);
    assert_eq!(v["runs"], 1000);
    let total: u64 = v["sequences"].as_object().unwrap().values().map(|x| x.as_u64().unwrap()).sum();
    assert_eq!(total, 1000);

    let (code, out, _) = invoke(&["simulate", "--tosses", "10", "--runs", "3", "--trace"], "");
    assert_eq!(code, EXIT_OK);
    let seqs = parse_sequence(&out).unwrap();
    assert_eq!(seqs.len(), 30);
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        &["simulate", "--tosses", "50", "--runs", "500", "--seed", "11"][..],
        &["simulate", "--tosses", "50", "--seed", "11", "--format", "csv"][..],
        &["chain", "--rule", "increment"][..],
        &["enumerate", "--depth", "6"][..],
    ] {
        assert_eq!(invoke(args, ""), invoke(args, ""));
    }
    let parallel = invoke(&["simulate", "--tosses", "8", "--runs", "20000", "--seed", "5"], "");
    let serial = invoke(&["simulate", "--tosses", "8", "--runs", "20000", "--seed", "5", "--serial"], "");
    assert_eq!(parallel, serial);
}

#[test]
fn exit_codes() {
    assert_eq!(invoke(&[], "").0, EXIT_USAGE);
    assert_eq!(invoke(&["table", "--bogus"], "").0, EXIT_USAGE);
    assert_eq!(invoke(&["scenario", "--id", "4"], "").0, EXIT_USAGE);
    assert_eq!(invoke(&["table", "--rule", "dots"], "").0, EXIT_USAGE);

    let (code, _, err) = invoke(&["test"], "EXO");
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("position 2"), "{err}");
    assert_eq!(invoke(&["test"], "# nothing\n").0, EXIT_DATA);
    assert_eq!(invoke(&["test", "--input", "/nonexistent/file"], "").0, EXIT_DATA);

    assert_eq!(invoke(&["enumerate", "--depth", "21"], "").0, EXIT_NUMERIC);
    assert_eq!(invoke(&["enumerate", "--depth", "0"], "").0, EXIT_NUMERIC);
    assert_eq!(invoke(&["test", "--p0", "1"], "EEO").0, EXIT_NUMERIC);

    let (code, out, _) = invoke(&["--help"], "");
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("scenario"));
}
