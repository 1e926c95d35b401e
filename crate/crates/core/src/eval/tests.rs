use super::*;
use crate::model::{CharSpan, ContextDocument, Dialog, Reference, SourceFormat, SpecialClass, Turn};

fn refs(texts: &[&str]) -> Vec<Reference> {
    texts
        .iter()
        .map(|t| match *t {
            "CANNOTANSWER" => Reference::special(SpecialClass::CannotAnswer, *t, None),
            "" => Reference::special(SpecialClass::Unanswerable, "", None),
            _ => Reference::abstractive(*t, None),
        })
        .collect()
}

/// One document per entry of `dialogs`; each turn is a list of gold texts.
fn corpus(domain: &str, dialogs: &[&[&[&str]]]) -> UnifiedCorpus {
    let mut c = UnifiedCorpus::new("t", SourceFormat::Synthetic);
    for (d, turns) in dialogs.iter().enumerate() {
        let mut doc = ContextDocument::new(format!("d{d}"), "context");
        doc.domain = domain.into();
        doc.dialogs.push(Dialog {
            dialog_id: format!("d{d}"),
            turns: turns
                .iter()
                .enumerate()
                .map(|(i, g)| Turn::new(format!("d{d}_q{i}"), i as u32 + 1, "?", refs(g)))
                .collect(),
        });
        c.documents.push(doc);
    }
    c
}

fn preds(pairs: &[(&str, &str)]) -> PredictionSet {
    pairs.iter().map(|(q, a)| (q.to_string(), Prediction::text(*a))).collect()
}

#[test]
fn squad_unanswerable_empty_prediction() {
    let c = corpus("", &[&[&[""]]]);
    let r = evaluate(&preds(&[("d0_q0", "")]), &c, Protocol::Squad2, EvalOptions::default()).unwrap();
    assert_eq!(r.metric(F1), Some(100.0));
    assert_eq!(r.metric(EM), Some(100.0));
    let mut p = PredictionSet::default();
    p.insert("d0_q0", Prediction::class(PredictedClass::Unanswerable));
    let r = evaluate(&p, &c, Protocol::Squad2, EvalOptions::default()).unwrap();
    assert_eq!(r.metric(F1), Some(100.0));
    let r = evaluate(&preds(&[("d0_q0", "paris")]), &c, Protocol::Squad2, EvalOptions::default()).unwrap();
    assert_eq!(r.metric(F1), Some(0.0));
}

#[test]
fn squad_max_over_references_and_missing() {
    let c = corpus("", &[&[&["five years", "5 years"]], &[&["Paris"]]]);
    let r = evaluate(&preds(&[("d0_q0", "5")]), &c, Protocol::Squad2, EvalOptions::default()).unwrap();
    let q = &r.per_question["d0_q0"];
    assert!((q.f1 - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(q.em, Some(0.0));
    assert!(r.per_question["d1_q0"].missing);
    assert_eq!(r.missing, ["d1_q0"]);
    assert!((r.metric(F1).unwrap() - 100.0 / 3.0).abs() < 1e-9);
    assert_eq!(r.diagnostics.len(), 1);
}

#[test]
fn unknown_question_is_an_error() {
    let c = corpus("", &[&[&["x"]]]);
    assert_eq!(
        evaluate(&preds(&[("nope", "x")]), &c, Protocol::Squad2, EvalOptions::default()),
        Err(EvalError::UnknownQuestionId("nope".into()))
    );
}

#[test]
fn quac_heq_at_boundary() {
    // Model F1 equals human F1 on both questions.
    let c = corpus("", &[&[&["red car"], &["blue house", "blue house"]]]);
    let p = preds(&[("d0_q0", "red car"), ("d0_q1", "blue house")]);
    let r = evaluate(&p, &c, Protocol::Quac, EvalOptions::default()).unwrap();
    assert_eq!(r.metric(HEQQ), Some(100.0));
    assert_eq!(r.metric(HEQD), Some(100.0));
    assert_eq!(r.metric(F1), Some(100.0));
}

#[test]
fn quac_cannot_answer_and_filter() {
    let c = corpus(
        "",
        &[
            &[&["CANNOTANSWER", "CANNOTANSWER", "a dog"], &["red", "blue", "green"]],
            &[&["le chat noir"]],
        ],
    );
    let p = preds(&[("d0_q0", "CANNOTANSWER"), ("d0_q1", "red"), ("d1_q0", "chat")]);
    let r = evaluate(&p, &c, Protocol::Quac, EvalOptions::default()).unwrap();
    assert_eq!(r.per_question["d0_q0"].f1, 1.0);
    // Human agreement 0 on distinct colours: filtered out, dialog still passes.
    assert!(r.per_question["d0_q1"].excluded);
    assert_eq!(r.per_question["d0_q1"].human_f1, Some(0.0));
    assert!((r.per_question["d1_q0"].f1 - 0.5).abs() < 1e-12);
    assert!((r.metric(F1).unwrap() - 75.0).abs() < 1e-9);
    assert_eq!(r.metric(HEQQ), Some(50.0));
    assert_eq!(r.metric(HEQD), Some(50.0));
    let unfiltered = r.auxiliary["unfiltered-F1"];
    // "red" against {red, blue, green} with one left out each time: 0, 1, 1.
    let expected = 100.0 * (1.0 + 2.0 / 3.0 + 0.5) / 3.0;
    assert!((unfiltered - expected).abs() < 1e-9, "{unfiltered}");

    let all = evaluate(&p, &c, Protocol::Quac, EvalOptions { quac_min_f1: None }).unwrap();
    assert!(!all.per_question["d0_q1"].excluded);
    assert!((all.metric(F1).unwrap() - unfiltered).abs() < 1e-9);
}

#[test]
fn quac_missing_breaks_dialog() {
    let c = corpus("", &[&[&["x"], &["y"]]]);
    let r = evaluate(&preds(&[("d0_q0", "x")]), &c, Protocol::Quac, EvalOptions::default()).unwrap();
    assert_eq!(r.metric(F1), Some(50.0));
    assert_eq!(r.metric(HEQQ), Some(50.0));
    assert_eq!(r.metric(HEQD), Some(0.0));
}

#[test]
fn human_f1_examples() {
    let turn = |t: &[&str]| Turn::new("q", 1, "?", refs(t));
    assert_eq!(human_f1(&turn(&["yes", "yes"])), (1.0, false));
    assert_eq!(human_f1(&turn(&["the red car", "red car"])), (1.0, false));
    assert_eq!(human_f1(&turn(&["anything"])), (1.0, true));
    let (h, _) = human_f1(&turn(&["red car", "car", "blue"]));
    // "red car"~"car" = 2/3 both ways, "blue" matches nothing.
    assert!((h - 4.0 / 9.0).abs() < 1e-12);
}

#[test]
fn coqa_mean_of_three() {
    let c = corpus("race", &[&[&["a b"], &["c d"], &["e f"]]]);
    let p = preds(&[("d0_q0", "a b"), ("d0_q1", "c"), ("d0_q2", "x")]);
    let r = evaluate(&p, &c, Protocol::Coqa, EvalOptions::default()).unwrap();
    // Per-question F1 {1, 2/3, 0}: "c" vs "c d" is 2/3, not 1/2.
    let f1 = 100.0 * (1.0 + 2.0 / 3.0) / 3.0;
    assert!((r.metric(F1).unwrap() - f1).abs() < 1e-9);
    assert_eq!(r.metric(IN_F1), r.metric(F1));
    assert_eq!(r.metric(OUT_F1), Some(0.0));
    assert_eq!(r.per_domain.keys().collect::<Vec<_>>(), ["race"]);
}

#[test]
fn coqa_spec_example_exact() {
    let c = corpus("cnn", &[&[&["one"], &["two three"], &["four"]]]);
    let p = preds(&[("d0_q0", "one"), ("d0_q1", "two x"), ("d0_q2", "")]);
    let r = evaluate(&p, &c, Protocol::Coqa, EvalOptions::default()).unwrap();
    assert_eq!(r.rounded(F1), Some(50.0));
    assert_eq!(r.rounded(IN_F1), Some(50.0));
}

#[test]
fn coqa_leave_one_out_and_domains() {
    let c = corpus("reddit", &[&[&["a", "b", "a"]]]);
    let r = evaluate(&preds(&[("d0_q0", "a")]), &c, Protocol::Coqa, EvalOptions::default()).unwrap();
    // Drop each gold once: {b, a} -> 1, {a, a} -> 1, {a, b} -> 1.
    assert_eq!(r.per_question["d0_q0"].f1, 1.0);
    let c = corpus("reddit", &[&[&["a", "b", "c"]]]);
    let r = evaluate(&preds(&[("d0_q0", "a")]), &c, Protocol::Coqa, EvalOptions::default()).unwrap();
    assert!((r.per_question["d0_q0"].f1 - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(r.metric(OUT_F1), r.metric(F1));
    assert_eq!(r.metric(IN_F1), Some(0.0));
}

#[test]
fn coqa_classes_map_to_words() {
    let mut c = corpus("mctest", &[&[&["x"]]]);
    c.documents[0].dialogs[0].turns[0].references =
        vec![Reference::special(SpecialClass::Yes, "Yes", Some(CharSpan::new(0, 3)))];
    let mut p = PredictionSet::default();
    p.insert("d0_q0", Prediction::class(PredictedClass::Yes));
    let r = evaluate(&p, &c, Protocol::Coqa, EvalOptions::default()).unwrap();
    assert_eq!(r.metric(F1), Some(100.0));
}

#[test]
fn coqa_needs_domains() {
    let c = corpus("", &[&[&["x"]]]);
    assert!(matches!(
        evaluate(&PredictionSet::default(), &c, Protocol::Coqa, EvalOptions::default()),
        Err(EvalError::ProtocolMismatch { .. })
    ));
}

#[test]
fn report_rendering() {
    let c = corpus("race", &[&[&["a"]]]);
    let r = evaluate(&preds(&[("d0_q0", "a")]), &c, Protocol::Coqa, EvalOptions::default()).unwrap();
    let table = r.to_table();
    assert!(table.lines().any(|l| l.starts_with("F1") && l.ends_with("100.0")), "{table}");
    let j = r.to_json();
    assert_eq!(j["protocol"], "COQA");
    assert_eq!(j["metrics"]["F1"], 100.0);
    let keys: Vec<_> = j["metrics"].as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, ["in-F1", "out-F1", "F1", "EM"]);
}

#[test]
fn protocol_names() {
    for p in Protocol::ALL {
        assert_eq!(p.name().parse::<Protocol>(), Ok(p));
    }
    assert_eq!("squad-2.0".parse::<Protocol>(), Ok(Protocol::Squad2));
    assert!("trivia".parse::<Protocol>().is_err());
}

#[test]
fn rounding_is_display_only() {
    assert_eq!(round1(97.84), 97.8);
    assert_eq!(round1(66.66666), 66.7);
}
