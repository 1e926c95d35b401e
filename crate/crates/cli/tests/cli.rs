use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn qaconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaconv")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn question_count(format: qaconv::FormatTag, path: &Path) -> usize {
    qaconv::formats::parse(format, &std::fs::read(path).unwrap()).unwrap().question_count()
}

#[test]
fn convert_coqa_to_squad_with_projection() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let input = fixture("coqa_sample.json");
    let o = qaconv(&["convert", "--from", "coqa", "--to", "squad2", "--project-extractive", s(&input), s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(question_count(qaconv::FormatTag::Squad2, &out), 16);
    assert!(stdout(&o).contains("abstractive-to-span"));
}

#[test]
fn convert_every_direction() {
    let dir = tempfile::tempdir().unwrap();
    for (from, file, n) in [("squad2", "squad2_sample.json", 10), ("quac", "quac_sample.json", 10), ("coqa", "coqa_sample.json", 16)] {
        for to in ["squad2", "quac", "coqa"] {
            let out = dir.path().join(format!("{from}-{to}.json"));
            let o = qaconv(&["convert", "--from", from, "--to", to, "--project-extractive", s(&fixture(file)), s(&out)]);
            assert_eq!(code(&o), 0, "{from} -> {to}: {}", stderr(&o));
            assert_eq!(question_count(to.parse().unwrap(), &out), n, "{from} -> {to}");
        }
    }
}

#[test]
fn synthesis_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("squad2_sample.json");
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = qaconv(&["convert", "--from", "squad2", "--to", "quac", "--synthesize", "--seed", seed, "--max-turns", "3", s(&input), s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = run("a.json", "1");
    assert_eq!(a, run("b.json", "1"));
    assert_ne!(a, run("c.json", "2"));
    let c = qaconv::formats::parse(qaconv::FormatTag::Quac, &a).unwrap();
    assert!(c.documents.iter().flat_map(|d| &d.dialogs).all(|d| d.turns.len() <= 3));
}

#[test]
fn usage_errors_exit_2() {
    let input = fixture("squad2_sample.json");
    let o = qaconv(&["convert", "--from", "squad2", "--to", "quac", "--synthesize", s(&input), "out.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--seed"));
    assert_eq!(code(&qaconv(&["frobnicate"])), 2);
    assert_eq!(code(&qaconv(&["stats", "--bogus", s(&input)])), 2);
    assert_eq!(code(&qaconv(&["stats", "--format", "trivia", s(&input)])), 2);
    assert_eq!(code(&qaconv(&["evaluate", "--protocol", "nope", "--gold", "g", "--pred", "p"])), 2);
    assert_eq!(code(&qaconv(&[])), 2);
    assert_eq!(code(&qaconv(&["--help"])), 0);
}

#[test]
fn missing_and_malformed_files_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let gold = fixture("quac_sample.json");
    let o = qaconv(&["evaluate", "--protocol", "quac", "--gold", s(&gold), "--pred", s(&missing)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("missing.json"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, b"{\"data\": [").unwrap();
    let o = qaconv(&["stats", "--format", "squad2", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.json"));

    // Span outside the context.
    std::fs::write(
        &bad,
        br#"{"data": [{"paragraphs": [{"context": "abc", "qas": [{"id": "q", "question": "?", "answers": [{"text": "abcdef", "answer_start": 0}]}]}]}]}"#,
    )
    .unwrap();
    assert_eq!(code(&qaconv(&["upper-bound", "--format", "squad2", s(&bad)])), 1);
}

#[test]
fn evaluate_all_protocols() {
    let dir = tempfile::tempdir().unwrap();
    for (protocol, gold, pred, headline) in [
        ("squad2", "squad2_sample.json", "squad2_predictions.json", "EM"),
        ("quac", "quac_sample.json", "quac_predictions.jsonl", "HEQD"),
        ("coqa", "coqa_sample.json", "coqa_predictions.json", "out-F1"),
    ] {
        let report = dir.path().join(format!("{protocol}.json"));
        let (gold, pred) = (fixture(gold), fixture(pred));
        let args = ["evaluate", "--protocol", protocol, "--gold", s(&gold), "--pred", s(&pred), "--report", s(&report)];
        let o = qaconv(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let table = stdout(&o);
        assert!(table.lines().any(|l| l.starts_with(headline)), "{table}");
        let first = std::fs::read(&report).unwrap();
        let again = qaconv(&args);
        assert_eq!(stdout(&again), table);
        assert_eq!(std::fs::read(&report).unwrap(), first);
        let json: serde_json::Value = serde_json::from_slice(&first).unwrap();
        assert!(json["per_question"].as_object().unwrap().len() >= 10);
    }
}

#[test]
fn evaluate_rejects_unknown_question() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("p.json");
    std::fs::write(&pred, br#"{"not-a-question": "x"}"#).unwrap();
    let o = qaconv(&["evaluate", "--protocol", "squad2", "--gold", s(&fixture("squad2_sample.json")), "--pred", s(&pred)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not-a-question"));
}

#[test]
fn upper_bound_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("ub.json");
    let o = qaconv(&["upper-bound", "--format", "coqa", "--report", s(&report), s(&fixture("coqa_sample.json"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("overall ")), "{out}");
    assert!(out.contains("overall (primary reference)"));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["per_question"].as_object().unwrap().len(), 16);

    let o = qaconv(&["upper-bound", "--primary-only", s(&fixture("quac_sample.json"))]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("100.0"));

    let o = qaconv(&["stats", s(&fixture("squad2_sample.json"))]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("3 (30.0%)"), "{}", stdout(&o));
}

#[test]
fn annotate_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.jsonl");
    std::fs::write(
        &labels,
        concat!(
            r#"{"question_id": "5ad39d53604f3c001a3fe8d1", "taxonomy": "UNANSWERABLE", "label": "false_premise"}"#, "\n",
            r#"{"question_id": "5ad3a266604f3c001a3fea2b", "taxonomy": "UNANSWERABLE", "label": "false_premise"}"#, "\n",
            r#"{"question_id": "zq3", "taxonomy": "UNANSWERABLE", "label": "missing_information"}"#, "\n",
            r#"{"question_id": "zq1", "taxonomy": "UNANSWERABLE", "label": "answerable"}"#, "\n",
        ),
    )
    .unwrap();
    let report = dir.path().join("t.json");
    let corpus = fixture("squad2_sample.json");
    let o = qaconv(&["annotate-aggregate", "--corpus", s(&corpus), "--labels", s(&labels), "--report", s(&report)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["taxonomies"]["UNANSWERABLE"]["false_premise"], 50.0);
    assert_eq!(json["taxonomies"]["UNANSWERABLE"]["total"], 4);

    std::fs::write(&labels, br#"{"question_id": "zq1", "taxonomy": "UNANSWERABLE", "label": "shrug"}"#).unwrap();
    let o = qaconv(&["annotate-aggregate", "--corpus", s(&corpus), "--labels", s(&labels)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn mark_context_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("marked.jsonl");
    let o = qaconv(&["mark-context", "--k", "2", s(&fixture("quac_sample.json")), s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    let keys: Vec<&String> = lines[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["question_id", "context_tokens", "markers", "question", "target_start", "target_end", "special_class"]);
    assert!(lines[0]["markers"].as_array().unwrap().iter().all(|m| m == 0));
    assert!(lines[1]["markers"].as_array().unwrap().iter().any(|m| m == 1));
    assert!(lines.iter().any(|l| l["special_class"] == "CANNOT_ANSWER"));
}
