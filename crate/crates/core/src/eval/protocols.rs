use super::normalize::{exact_match, normalize, overlap, token_f1};
use super::{EvalError, EvalOptions, EvalReport, PredictedClass, Prediction, PredictionSet, Protocol, QuestionScore};
use super::{EM, F1, HEQD, HEQQ, IN_F1, OUT_F1};
use crate::formats::QUAC_SENTINEL;
use crate::model::{Diagnostic, FollowupFlag, Reference, SpecialClass, Turn, UnifiedCorpus, YesNoFlag};
use crate::Score;
use std::collections::BTreeMap;

/// Human-agreement threshold of the QuAC scorer.
pub const QUAC_MIN_F1: Score = 0.4;

pub const COQA_IN_DOMAIN: [&str; 5] = ["mctest", "gutenberg", "race", "cnn", "wikipedia"];
pub const COQA_OUT_DOMAIN: [&str; 2] = ["reddit", "science"];

fn percent(sum: Score, n: usize) -> Score {
    if n == 0 {
        0.0
    } else {
        100.0 * sum / n as Score
    }
}

fn mean_percent(values: &[Score]) -> Score {
    percent(values.iter().sum(), values.len())
}

// ---------------------------------------------------------------- SQuAD 2.0

fn squad_gold(turn: &Turn) -> Vec<&str> {
    let answers: Vec<&str> = turn
        .references
        .iter()
        .filter(|r| !r.is_no_answer() && !normalize(&r.text).is_empty())
        .map(|r| r.text.as_str())
        .collect();
    if answers.is_empty() {
        vec![""]
    } else {
        answers
    }
}

fn squad_prediction(p: &Prediction) -> &str {
    match p.class {
        Some(PredictedClass::Unanswerable) => "",
        Some(PredictedClass::Yes) if p.text.is_empty() => "yes",
        Some(PredictedClass::No) if p.text.is_empty() => "no",
        _ => &p.text,
    }
}

fn max_of(golds: &[&str], f: impl Fn(&str) -> Score) -> Score {
    golds.iter().map(|g| f(g)).fold(Score::NEG_INFINITY, Score::max).max(0.0)
}

pub(super) fn squad2(predictions: &PredictionSet, gold: &UnifiedCorpus, report: &mut EvalReport) {
    let (mut f1s, mut ems) = (Vec::new(), Vec::new());
    let (mut has, mut no) = (Vec::new(), Vec::new());
    for t in gold.turns() {
        let turn = t.turn;
        let golds = squad_gold(turn);
        let score = match predictions.get(&turn.question_id) {
            Some(p) => {
                let pred = squad_prediction(p);
                QuestionScore {
                    f1: max_of(&golds, |g| token_f1(pred, g)),
                    em: Some(max_of(&golds, |g| exact_match(pred, g))),
                    human_f1: None,
                    excluded: false,
                    missing: false,
                }
            }
            None => missing_score(report, turn, Some(0.0)),
        };
        f1s.push(score.f1);
        ems.push(score.em.unwrap_or(0.0));
        if golds == [""] { &mut no } else { &mut has }.push(score.f1);
        report.per_question.insert(turn.question_id.clone(), score);
    }
    report.metrics.insert(F1.into(), mean_percent(&f1s));
    report.metrics.insert(EM.into(), mean_percent(&ems));
    if !has.is_empty() {
        report.auxiliary.insert("HasAns-F1".into(), mean_percent(&has));
    }
    if !no.is_empty() {
        report.auxiliary.insert("NoAns-F1".into(), mean_percent(&no));
    }
}

fn missing_score(report: &mut EvalReport, turn: &Turn, em: Option<Score>) -> QuestionScore {
    report.missing.push(turn.question_id.clone());
    QuestionScore {
        f1: 0.0,
        em,
        human_f1: None,
        excluded: false,
        missing: true,
    }
}

// --------------------------------------------------------------------- QuAC

/// QuAC's F1 variant: no shared token means 0, even when both sides are
/// empty.
pub fn quac_f1(prediction: &str, gold: &str) -> Score {
    let o = overlap(&normalize(prediction), &normalize(gold));
    if o.common == 0 {
        0.0
    } else {
        o.f1()
    }
}

/// Collapse a QuAC answer list: a majority (or tie) of no-answer marks
/// becomes the single no-answer mark, otherwise the marks are dropped.
pub fn handle_cannot(refs: Vec<String>) -> Vec<String> {
    let cannot = refs.iter().filter(|r| *r == QUAC_SENTINEL).count();
    if cannot >= refs.len() - cannot {
        vec![QUAC_SENTINEL.to_string()]
    } else {
        refs.into_iter().filter(|r| r != QUAC_SENTINEL).collect()
    }
}

fn quac_text(r: &Reference) -> String {
    if r.is_no_answer() {
        QUAC_SENTINEL.to_string()
    } else {
        r.text.clone()
    }
}

fn quac_gold(turn: &Turn) -> Vec<String> {
    handle_cannot(turn.references.iter().map(quac_text).collect())
}

fn span_overlap(prediction: &str, gold: &str) -> Score {
    if gold == QUAC_SENTINEL {
        return if prediction == QUAC_SENTINEL { 1.0 } else { 0.0 };
    }
    quac_f1(prediction, gold)
}

fn max_overlap(prediction: &str, golds: &[String]) -> Score {
    golds.iter().map(|g| span_overlap(prediction, g)).fold(0.0, Score::max)
}

/// Average over each gold answer left out of the best-match pool.
fn leave_one_out_max(prediction: &str, golds: &[String]) -> Score {
    if golds.len() == 1 {
        return max_overlap(prediction, golds);
    }
    let total: Score = (0..golds.len())
        .map(|i| {
            let rest: Vec<String> = golds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, g)| g.clone())
                .collect();
            max_overlap(prediction, &rest)
        })
        .sum();
    total / golds.len() as Score
}

fn leave_one_out(golds: &[String]) -> Score {
    if golds.len() == 1 {
        return 1.0;
    }
    let total: Score = (0..golds.len())
        .map(|i| {
            golds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, z)| quac_f1(&golds[i], z))
                .fold(0.0, Score::max)
        })
        .sum();
    total / golds.len() as Score
}

/// Human F1 of a turn: each gold answer scored against the others, averaged.
///
/// The flag is set when there is only one reference, in which case the score
/// is 1 by convention.
pub fn human_f1(turn: &Turn) -> (Score, bool) {
    (leave_one_out(&quac_gold(turn)), turn.references.len() < 2)
}

fn yesno_code(flag: YesNoFlag) -> char {
    match flag {
        YesNoFlag::Yes => 'y',
        YesNoFlag::No => 'n',
        YesNoFlag::Neither | YesNoFlag::Unspecified => 'x',
    }
}

pub(super) fn quac(predictions: &PredictionSet, gold: &UnifiedCorpus, options: EvalOptions, report: &mut EvalReport) {
    let min_f1 = options.quac_min_f1.unwrap_or(Score::NEG_INFINITY);
    let (mut f1s, mut unfiltered) = (Vec::new(), Vec::new());
    let (mut yes_nos, mut followups, mut unanswerables) = (Vec::new(), Vec::new(), Vec::new());
    let (mut heq, mut total_qs, mut dheq, mut dialogs) = (0usize, 0usize, 0usize, 0usize);

    for doc in &gold.documents {
        for dialog in &doc.dialogs {
            let mut good = true;
            for turn in &dialog.turns {
                let golds = quac_gold(turn);
                let hf1 = leave_one_out(&golds);
                let no_answer = golds == [QUAC_SENTINEL];
                let Some(p) = predictions.get(&turn.question_id) else {
                    let mut s = missing_score(report, turn, None);
                    s.human_f1 = Some(hf1);
                    report.per_question.insert(turn.question_id.clone(), s);
                    good = false;
                    f1s.push(0.0);
                    yes_nos.push(false);
                    followups.push(false);
                    if no_answer {
                        unanswerables.push(0.0);
                    }
                    total_qs += 1;
                    unfiltered.push(0.0);
                    continue;
                };
                let pred = match p.class {
                    Some(PredictedClass::Unanswerable) => QUAC_SENTINEL,
                    _ => p.text.as_str(),
                };
                let f1 = leave_one_out_max(pred, &golds);
                unfiltered.push(f1);
                let excluded = hf1 < min_f1;
                report.per_question.insert(
                    turn.question_id.clone(),
                    QuestionScore {
                        f1,
                        em: None,
                        human_f1: Some(hf1),
                        excluded,
                        missing: false,
                    },
                );
                if excluded {
                    continue;
                }
                let pred_yesno = match p.class {
                    Some(PredictedClass::Yes) => 'y',
                    Some(PredictedClass::No) => 'n',
                    _ => 'x',
                };
                yes_nos.push(pred_yesno == yesno_code(turn.yesno_flag));
                followups.push(p.followup.is_some_and(|f| f == turn.followup_flag && f != FollowupFlag::Unspecified));
                if no_answer {
                    unanswerables.push(f1);
                }
                if f1 >= hf1 {
                    heq += 1;
                } else {
                    good = false;
                }
                f1s.push(f1);
                total_qs += 1;
            }
            dheq += usize::from(good);
            dialogs += 1;
        }
    }

    report.metrics.insert(F1.into(), mean_percent(&f1s));
    report.metrics.insert(HEQQ.into(), percent(heq as Score, total_qs));
    report.metrics.insert(HEQD.into(), percent(dheq as Score, dialogs));
    report.auxiliary.insert("unfiltered-F1".into(), mean_percent(&unfiltered));
    let share = |v: &[bool]| percent(v.iter().filter(|b| **b).count() as Score, v.len());
    if !yes_nos.is_empty() {
        report.auxiliary.insert("yes/no".into(), share(&yes_nos));
        report.auxiliary.insert("followup".into(), share(&followups));
    }
    if !unanswerables.is_empty() {
        report.auxiliary.insert("unanswerable".into(), mean_percent(&unanswerables));
    }
}

// --------------------------------------------------------------------- CoQA

fn coqa_text(r: &Reference) -> &str {
    match r.special {
        Some(c) if c.is_no_answer() => "unknown",
        Some(SpecialClass::Yes) if r.text.is_empty() => "yes",
        Some(SpecialClass::No) if r.text.is_empty() => "no",
        _ => &r.text,
    }
}

fn coqa_prediction(p: &Prediction) -> &str {
    match p.class {
        Some(PredictedClass::Yes) => "yes",
        Some(PredictedClass::No) => "no",
        Some(PredictedClass::Unanswerable) => "unknown",
        None => &p.text,
    }
}

/// Leave-one-out average when there are several gold answers, plain max
/// otherwise. Returns `(em, f1)`.
fn coqa_turn_score(golds: &[&str], pred: &str) -> (Score, Score) {
    if golds.len() == 1 {
        return (exact_match(pred, golds[0]), token_f1(pred, golds[0]));
    }
    let (mut em, mut f1) = (0.0, 0.0);
    for i in 0..golds.len() {
        let rest: Vec<&str> = golds.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| *g).collect();
        em += max_of(&rest, |g| exact_match(pred, g));
        f1 += max_of(&rest, |g| token_f1(pred, g));
    }
    let n = golds.len() as Score;
    (em / n, f1 / n)
}

pub(super) fn coqa(predictions: &PredictionSet, gold: &UnifiedCorpus, report: &mut EvalReport) -> Result<(), EvalError> {
    if let Some(doc) = gold.documents.iter().find(|d| d.domain.is_empty()) {
        return Err(EvalError::ProtocolMismatch {
            protocol: Protocol::Coqa,
            message: format!("document {} has no domain label", doc.doc_id),
        });
    }
    // domain -> (em total, f1 total, turns), summed in gold order.
    let mut totals: BTreeMap<&str, (Score, Score, usize)> = BTreeMap::new();
    for t in gold.turns() {
        let turn = t.turn;
        let golds: Vec<&str> = turn.references.iter().map(coqa_text).collect();
        let score = match predictions.get(&turn.question_id) {
            Some(p) if !golds.is_empty() => {
                let (em, f1) = coqa_turn_score(&golds, coqa_prediction(p));
                QuestionScore {
                    f1,
                    em: Some(em),
                    human_f1: None,
                    excluded: false,
                    missing: false,
                }
            }
            Some(_) => QuestionScore {
                f1: 0.0,
                em: Some(0.0),
                human_f1: None,
                excluded: false,
                missing: false,
            },
            None => missing_score(report, turn, Some(0.0)),
        };
        let e = totals.entry(t.document.domain.as_str()).or_default();
        e.0 += score.em.unwrap_or(0.0);
        e.1 += score.f1;
        e.2 += 1;
        report.per_question.insert(turn.question_id.clone(), score);
    }

    let ratio = |sum: Score, n: usize| sum / n.max(1) as Score * 100.0;
    let group = |names: &[&str]| {
        names.iter().filter_map(|d| totals.get(d)).fold((0.0, 0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
    };
    let inside = group(&COQA_IN_DOMAIN);
    let outside = group(&COQA_OUT_DOMAIN);
    let unlisted: Vec<&str> = totals
        .keys()
        .copied()
        .filter(|d| !COQA_IN_DOMAIN.contains(d) && !COQA_OUT_DOMAIN.contains(d))
        .collect();
    let extra = group(&unlisted);
    for d in &unlisted {
        report.diagnostics.push(Diagnostic::warning(
            format!("domain {d}"),
            "unlisted-domain",
            "counted in F1 but in neither in-F1 nor out-F1",
        ));
    }
    for (d, (_, f1, n)) in &totals {
        report.per_domain.insert(d.to_string(), ratio(*f1, *n));
    }
    let overall_n = inside.2 + outside.2 + extra.2;
    report.metrics.insert(IN_F1.into(), ratio(inside.1, inside.2));
    report.metrics.insert(OUT_F1.into(), ratio(outside.1, outside.2));
    report.metrics.insert(F1.into(), ratio(inside.1 + outside.1 + extra.1, overall_n));
    report.metrics.insert(EM.into(), ratio(inside.0 + outside.0 + extra.0, overall_n));
    Ok(())
}
