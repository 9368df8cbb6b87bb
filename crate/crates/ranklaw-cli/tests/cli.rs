//! Per-command behavior of the `ranklaw` binary: artifacts, determinism, and
//! the exit-code contract (0 ok, 2 usage/input, 3 empty data, 4 degenerate).

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn ranklaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ranklaw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ranklaw_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ranklaw"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn analyze_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "tiny.txt", "a a bb\n");
    let out = ranklaw(&["analyze", &input, "--base", "2"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let rows = data_lines(&text);
    assert_eq!(rows[0], "rank,token,count,probability,length");
    assert!(rows[1].starts_with("1,a,2,"));
    assert!(rows[2].starts_with("2,bb,1,"));
    assert!(text.contains("# tau: -1\n"), "summary: {text}");
}

#[test]
fn analyze_empty_corpus_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "empty.txt", "");
    let out = ranklaw(&["analyze", &input, "--base", "2"]);
    assert_eq!(out.status.code(), Some(3));

    let blank = write_file(dir.path(), "blank.txt", " \n\t\n");
    let out = ranklaw(&["analyze", &blank, "--base", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn analyze_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(
        dir.path(),
        "corpus.txt",
        "the cat sat on the mat the end\nnaïve naïve words\n",
    );
    let first = ranklaw(&["analyze", &input, "--base", "2", "--lowercase"]);
    let second = ranklaw(&["analyze", &input, "--base", "2", "--lowercase"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn analyze_json_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "tiny.txt", "x y x\n");
    let out = ranklaw(&["analyze", &input, "--base", "2", "--format", "json"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["summary"]["n"], 2);
    assert_eq!(value["summary"]["total_tokens"], 3);
    assert_eq!(value["rows"][0]["token"], "x");
    assert_eq!(value["meta"]["tool"], "ranklaw");
}

fn zipf_table(dir: &Path) -> String {
    let mut text = String::from("token,count,length\n");
    for i in 1..=100u64 {
        let count = (1e6 / i as f64).round() as u64;
        text.push_str(&format!("w{i},{count},{}\n", 1 + i / 10));
    }
    write_file(dir, "zipf.csv", &text)
}

fn geometric_table(dir: &Path) -> String {
    let mut text = String::from("token,count,length\n");
    for i in 1..=60u64 {
        let count = ((1e9 * (-0.25 * i as f64).exp()).round() as u64).max(1);
        text.push_str(&format!("g{i},{count},{i}\n"));
    }
    write_file(dir, "geo.csv", &text)
}

#[test]
fn fit_zipf_table_recovers_alpha_one() {
    let dir = tempfile::tempdir().unwrap();
    let table = zipf_table(dir.path());
    let out = ranklaw(&["fit", &table, "--base", "2", "--model", "zipf"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let alpha = value["zipf"]["alpha"].as_f64().unwrap();
    assert!((alpha - 1.0).abs() < 0.01, "alpha {alpha}");
}

#[test]
fn fit_both_on_geometric_selects_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let table = geometric_table(dir.path());
    let out = ranklaw(&["fit", &table, "--base", "2", "--model", "both"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["selection"]["verdict"], "exponential");
    let lambda = value["exponential"]["lambda"].as_f64().unwrap();
    assert!((lambda - 0.25).abs() < 0.01, "lambda {lambda}");
}

#[test]
fn fit_two_row_table_with_exp_model() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_file(dir.path(), "two.csv", "token,count,length\na,3,1\nb,1,2\n");
    let out = ranklaw(&["fit", &table, "--base", "2", "--model", "exp"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value["exponential"]["lambda"].as_f64().unwrap() > 0.0);
}

#[test]
fn fit_rejects_missing_table_and_csv_format() {
    let out = ranklaw(&["fit", "/nonexistent/table.csv", "--base", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let table = zipf_table(dir.path());
    let out = ranklaw(&["fit", &table, "--base", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_constructed_exponential_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let table = geometric_table(dir.path());
    let out = ranklaw(&["classify", &table, "--base", "2"]);
    assert!(out.status.success(), "report with verdict false still exits 0");
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["report"]["verdict"], false);
    // lengths were linear in rank, so the size-probability law is exact and
    // the size-rank law is what fails
    let r2 = value["report"]["size_probability"]["r_squared"].as_f64().unwrap();
    assert!(r2 > 0.999);
}

#[test]
fn classify_unreachable_threshold_fails_verdict() {
    let dir = tempfile::tempdir().unwrap();
    // mildly noisy class member
    let mut text = String::from("token,count,length\n");
    for i in 1..=200u64 {
        let count = ((1e7 / (i as f64).powf(1.2)).round() as u64).max(1);
        let length = (1.0 + (i as f64).log2() + 0.01 * (i % 3) as f64 * 0.1).round();
        text.push_str(&format!("t{i},{count},{length}\n"));
    }
    let table = write_file(dir.path(), "noisy.csv", &text);
    let out = ranklaw(&["classify", &table, "--base", "2", "--min-r2", "1.0"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["report"]["verdict"], false);
}

#[test]
fn classify_uniform_table_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("token,count,length\n");
    for i in 1..=20u64 {
        text.push_str(&format!("u{i},5,{i}\n"));
    }
    let table = write_file(dir.path(), "uniform.csv", &text);
    let out = ranklaw(&["classify", &table, "--base", "2"]);
    assert_eq!(out.status.code(), Some(4));
    // the diagnostic report is still written
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["report"]["verdict"], false);
    assert!(value["report"]["tau"].is_null());
}

#[test]
fn simulate_is_deterministic_and_validates() {
    let first = ranklaw(&[
        "simulate",
        "--alphabet-size",
        "2",
        "--p-space",
        "0.5",
        "--tokens",
        "100",
        "--seed",
        "7",
    ]);
    assert!(first.status.success());
    let first_text = stdout_str(&first);
    let tokens: Vec<&str> = first_text.lines().collect();
    assert_eq!(tokens.len(), 100);
    assert!(tokens.iter().all(|t| !t.is_empty()));

    let second = ranklaw(&[
        "simulate",
        "--alphabet-size",
        "2",
        "--p-space",
        "0.5",
        "--tokens",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(first.stdout, second.stdout);

    let metadata: serde_json::Value =
        serde_json::from_slice(&second.stderr).expect("metadata json on stderr");
    assert_eq!(metadata["simulation"]["generator"], "chacha12");
    assert_eq!(metadata["simulation"]["seed"], 7);

    let bad = ranklaw(&[
        "simulate",
        "--alphabet-size",
        "2",
        "--p-space",
        "1.0",
        "--tokens",
        "10",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_pipes_into_analyze() {
    let mut simulate = Command::new(env!("CARGO_BIN_EXE_ranklaw"))
        .args([
            "simulate",
            "--alphabet-size",
            "3",
            "--p-space",
            "0.4",
            "--tokens",
            "5000",
            "--seed",
            "11",
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let analyze = Command::new(env!("CARGO_BIN_EXE_ranklaw"))
        .args(["analyze", "-", "--base", "3"])
        .stdin(simulate.stdout.take().unwrap())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let out = analyze.wait_with_output().unwrap();
    assert!(simulate.wait().unwrap().success());
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("# tau: -0."), "tau should be negative: {text}");
}

#[test]
fn codes_reproduces_the_gamma_table() {
    let out = ranklaw(&["codes", "--scheme", "elias-gamma", "--upto", "6", "--alphabet", "ab"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let expected = "1\tb\n2\taba\n3\tabb\n4\taabaa\n5\taabab\n6\taabba";
    assert_eq!(data_lines(&text).join("\n"), expected);
    assert!(text.contains("# kraft_sum: 0.84375\n"));
    assert!(text.contains("# uniquely_decodable: true\n"));
}

#[test]
fn codes_nonsingular_lengths() {
    let out = ranklaw(&["codes", "--scheme", "nonsingular", "--upto", "6", "--alphabet", "ab"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let lengths: Vec<usize> = data_lines(&text)
        .iter()
        .map(|l| l.split('\t').nth(1).unwrap().len())
        .collect();
    assert_eq!(lengths, [1, 1, 2, 2, 2, 2]);
    assert!(text.contains("# uniquely_decodable: false\n"));
}

#[test]
fn infer_base_uses_observed_alphabet() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "abc.txt", "ab ab ba c ca cb aa\n");
    let out = ranklaw(&["analyze", &input, "--infer-base"]);
    assert!(out.status.success());
    assert!(stdout_str(&out).contains("# base: 3\n"));

    // the flags are mutually exclusive
    let out = ranklaw(&["analyze", &input, "--base", "2", "--infer-base"]);
    assert_eq!(out.status.code(), Some(2));
    // and one of them is required
    let out = ranklaw(&["analyze", &input]);
    assert_eq!(out.status.code(), Some(2));

    let table = zipf_table(dir.path());
    let out = ranklaw(&["classify", &table, "--infer-base"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn fit_report_carries_the_loglog_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let table = zipf_table(dir.path());
    let out = ranklaw(&["fit", &table, "--base", "2", "--model", "zipf"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let alpha = value["zipf_loglog"]["alpha"].as_f64().unwrap();
    assert!((alpha - 1.0).abs() < 0.01, "loglog alpha {alpha}");
    assert!(value["zipf_loglog"]["r_squared"].as_f64().unwrap() > 0.999);

    // not computed for the exponential-only model
    let out = ranklaw(&["fit", &table, "--base", "2", "--model", "exp"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value.get("zipf_loglog").is_none());
}

#[test]
fn codes_json_artifact() {
    let out = ranklaw(&[
        "codes",
        "--scheme",
        "elias-gamma",
        "--upto",
        "4",
        "--alphabet",
        "ab",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["entries"][3]["code"], "aabaa");
    assert_eq!(value["uniquely_decodable"], true);
    assert_eq!(value["scheme"], "uniquely_decodable");
}

#[test]
fn analyze_whitespace_splitter_keeps_punctuation() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "punct.txt", "x, x, y\n");
    let out = ranklaw(&[
        "analyze",
        &input,
        "--base",
        "2",
        "--splitter",
        "whitespace",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("1,\"x,\",2,"), "whitespace tokens keep commas: {text}");
}

#[test]
fn codes_validates_flags() {
    let out = ranklaw(&["codes", "--scheme", "nonsingular", "--upto", "0", "--alphabet", "ab"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ranklaw(&["codes", "--scheme", "nonsingular", "--upto", "3", "--alphabet", "aa"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ranklaw(&["codes", "--scheme", "elias-gamma", "--upto", "3", "--alphabet", "abc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = ranklaw_in(
        dir.path(),
        &[
            "codes",
            "--scheme",
            "elias-gamma",
            "--upto",
            "3",
            "--alphabet",
            "ab",
            "--output",
            "table.tsv",
        ],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = fs::read_to_string(dir.path().join("table.tsv")).unwrap();
    assert!(written.contains("1\tb\n2\taba\n3\tabb\n"));
}

#[test]
fn analyze_output_feeds_fit_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus = String::new();
    for i in 1..=50u64 {
        let reps = (200.0 / i as f64).round() as u64;
        let word = format!("{:b}", i + 1); // lengths grow with rank
        for _ in 0..reps {
            corpus.push_str(&word);
            corpus.push(' ');
        }
    }
    let input = write_file(dir.path(), "corpus.txt", &corpus);
    let table = dir.path().join("table.csv");
    let out = ranklaw(&[
        "analyze",
        &input,
        "--base",
        "2",
        "--output",
        table.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = ranklaw(&["fit", table.to_str().unwrap(), "--base", "2", "--model", "both"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = ranklaw(&["classify", table.to_str().unwrap(), "--base", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value["report"]["tau"].as_f64().unwrap() < 0.0);
}

#[test]
fn stdin_dash_reads_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = zipf_table(dir.path());
    let contents = fs::read(table).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_ranklaw"))
        .args(["fit", "-", "--base", "2", "--model", "zipf"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(&contents).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
}
