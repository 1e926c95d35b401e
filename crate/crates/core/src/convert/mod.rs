//! Shape-changing transformations between dataset styles.
//!
//! - [`synthesize_dialogs`] turns single-question corpora into pseudo-dialogs
//!   by shuffling each document's questions with a pinned seeded generator.
//! - [`flatten_dialogs`] is the inverse direction: one dialog per turn.
//! - [`project_to_extractive`] replaces free-text answers with their best
//!   context span and yes/no answers with their rationale span.
//! - [`mark_context`] encodes the previous `k` answers on the context tokens.
//! - [`convert`] chains these with the repairs a target format needs and
//!   counts every lossy step in a ledger.

mod marking;
pub mod shuffle;

pub use marking::{mark_context, write_marked_jsonl, MarkedInstance, MarkedTarget};

use crate::formats::{coqa_padded_answers, FormatTag};
use crate::model::{
    Diagnostic, Dialog, FollowupFlag, Reference, ReferenceKind, SourceFormat, SpecialClass,
    UnifiedCorpus, YesNoFlag,
};
use crate::oracle::{max_f1_span, OracleError};
use crate::text::CharIndex;
use crate::Score;
use std::collections::BTreeMap;
use thiserror::Error;

/// Dialog length cap used when none is given.
pub const DEFAULT_MAX_TURNS: usize = 12;

/// Domain assigned to SQuAD and QuAC documents written as CoQA stories; both
/// corpora are drawn from Wikipedia.
pub const WIKIPEDIA_DOMAIN: &str = "wikipedia";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConvertError {
    #[error("dialog {dialog_id} already has {turns} turns; synthesis needs single-turn dialogs")]
    NotFlat { dialog_id: String, turns: usize },
    #[error("max_turns must be positive")]
    ZeroMaxTurns,
    #[error("turn {question_id} has neither an answer span nor a rationale to mark")]
    UnmarkableReference { question_id: String },
}

/// Count of elements one lossy rule touched during a conversion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LossinessLedgerEntry {
    pub direction: (FormatTag, FormatTag),
    pub rule: String,
    pub count: usize,
}

/// One reference rewritten by [`project_to_extractive`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRecord {
    pub question_id: String,
    pub reference_index: usize,
    pub rule: &'static str,
    /// F1 of the chosen span against the replaced text; `None` for yes/no
    /// answers, whose class is carried on the turn instead.
    pub f1: Option<Score>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub corpus: UnifiedCorpus,
    pub records: Vec<ProjectionRecord>,
    /// References left unchanged, e.g. yes/no answers without a rationale.
    pub issues: Vec<Diagnostic>,
}

/// Shuffle each document's questions and regroup them into dialogs of at
/// most `max_turns` turns.
///
/// Dialog ids are `<doc_id>#dialog-<k>`; the result is tagged `Synthetic`.
pub fn synthesize_dialogs(
    corpus: &UnifiedCorpus,
    seed: u64,
    max_turns: usize,
) -> Result<UnifiedCorpus, ConvertError> {
    if max_turns == 0 {
        return Err(ConvertError::ZeroMaxTurns);
    }
    if let Some(d) = corpus
        .documents
        .iter()
        .flat_map(|d| &d.dialogs)
        .find(|d| d.turns.len() > 1)
    {
        return Err(ConvertError::NotFlat {
            dialog_id: d.dialog_id.clone(),
            turns: d.turns.len(),
        });
    }

    let mut out = corpus.clone();
    out.source_format = SourceFormat::Synthetic;
    for doc in &mut out.documents {
        let mut turns: Vec<_> = std::mem::take(&mut doc.dialogs)
            .into_iter()
            .flat_map(|d| d.turns)
            .collect();
        let mut rng = shuffle::document_rng(seed, &doc.doc_id);
        shuffle::shuffle(&mut turns, &mut rng);

        let mut dialogs = Vec::new();
        let mut iter = turns.into_iter().peekable();
        while iter.peek().is_some() {
            let mut chunk: Vec<_> = iter.by_ref().take(max_turns).collect();
            for (i, t) in chunk.iter_mut().enumerate() {
                t.turn_index = i as u32 + 1;
                t.provenance.orig_turn_id = None;
            }
            dialogs.push(Dialog {
                dialog_id: format!("{}#dialog-{}", doc.doc_id, dialogs.len() + 1),
                turns: chunk,
            });
        }
        doc.dialogs = dialogs;
    }
    Ok(out)
}

/// Give every turn its own dialog. Question text is left as is.
///
/// Dialogs that already have at most one turn keep their id; turns split out
/// of longer dialogs get `<dialog_id>#turn-<i>`, and their original turn
/// number is kept as `orig_turn_id`. A question id that repeats an earlier
/// one gets the same `#turn-<i>` suffix.
pub fn flatten_dialogs(corpus: &UnifiedCorpus) -> UnifiedCorpus {
    let mut out = corpus.clone();
    let mut seen = std::collections::HashSet::new();
    for doc in &mut out.documents {
        let mut dialogs = Vec::new();
        for dialog in std::mem::take(&mut doc.dialogs) {
            if dialog.turns.len() <= 1 {
                seen.extend(dialog.turns.iter().map(|t| t.question_id.clone()));
                dialogs.push(dialog);
                continue;
            }
            for mut turn in dialog.turns {
                if !seen.insert(turn.question_id.clone()) {
                    turn.question_id = format!("{}#turn-{}", turn.question_id, turn.turn_index);
                    seen.insert(turn.question_id.clone());
                }
                let original = turn
                    .provenance
                    .orig_turn_id
                    .unwrap_or(turn.turn_index as i64);
                turn.provenance.orig_turn_id = (original != 1).then_some(original);
                let id = format!("{}#turn-{}", dialog.dialog_id, turn.turn_index);
                turn.turn_index = 1;
                dialogs.push(Dialog {
                    dialog_id: id,
                    turns: vec![turn],
                });
            }
        }
        doc.dialogs = dialogs;
    }
    out
}

/// Replace abstractive references by their max-F1 span and yes/no references
/// by their rationale span (the class moves to the turn's yes/no flag).
pub fn project_to_extractive(corpus: &UnifiedCorpus) -> Projection {
    let mut out = corpus.clone();
    let mut records = Vec::new();
    let mut issues = Vec::new();

    for (di, doc) in out.documents.iter_mut().enumerate() {
        let context = doc.context_text.clone();
        let index = CharIndex::new(&context);
        for (gi, dialog) in doc.dialogs.iter_mut().enumerate() {
            for (ti, turn) in dialog.turns.iter_mut().enumerate() {
                let mut class_for_turn = None;
                for (ri, r) in turn.references.iter_mut().enumerate() {
                    let path = format!("documents[{di}].dialogs[{gi}].turns[{ti}].references[{ri}]");
                    match (r.kind, r.special) {
                        (ReferenceKind::Abstractive, _) => match max_f1_span(&context, &r.text) {
                            Ok(m) => {
                                let text = index.slice(m.span).expect("span inside context");
                                replace_with_span(r, text, m.span);
                                records.push(ProjectionRecord {
                                    question_id: turn.question_id.clone(),
                                    reference_index: ri,
                                    rule: "abstractive-to-span",
                                    f1: Some(m.f1),
                                });
                            }
                            Err(e @ (OracleError::EmptyReference | OracleError::EmptyContext)) => {
                                issues.push(Diagnostic::warning(
                                    path,
                                    "unprojectable",
                                    format!("left abstractive: {e}"),
                                ))
                            }
                        },
                        (ReferenceKind::Special, Some(c @ (SpecialClass::Yes | SpecialClass::No))) => {
                            match r.rationale {
                                Some(span) => {
                                    let text = index.slice(span).unwrap_or_default().to_string();
                                    replace_with_span(r, &text, span);
                                    class_for_turn.get_or_insert(c);
                                    records.push(ProjectionRecord {
                                        question_id: turn.question_id.clone(),
                                        reference_index: ri,
                                        rule: "yesno-to-rationale",
                                        f1: None,
                                    });
                                }
                                None => issues.push(Diagnostic::warning(
                                    path,
                                    "missing-rationale",
                                    "yes/no answer without a rationale span left unchanged",
                                )),
                            }
                        }
                        _ => {}
                    }
                }
                if let Some(c) = class_for_turn {
                    if matches!(turn.yesno_flag, YesNoFlag::Unspecified | YesNoFlag::Neither) {
                        turn.yesno_flag = if c == SpecialClass::Yes {
                            YesNoFlag::Yes
                        } else {
                            YesNoFlag::No
                        };
                    }
                }
            }
        }
    }
    Projection {
        corpus: out,
        records,
        issues,
    }
}

fn replace_with_span(r: &mut Reference, text: &str, span: crate::model::CharSpan) {
    let original = std::mem::replace(&mut r.text, text.to_string());
    r.provenance.original_text = Some(original);
    r.provenance.answer_start = None;
    r.kind = ReferenceKind::Extractive;
    r.special = None;
    r.span = Some(span);
}

/// How dialogs are regrouped before conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regroup {
    #[default]
    Keep,
    Flatten,
    Synthesize { seed: u64, max_turns: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConvertOptions {
    pub project_extractive: bool,
    pub regroup: Regroup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conversion {
    /// Corpus ready to be written in the target format.
    pub corpus: UnifiedCorpus,
    pub ledger: Vec<LossinessLedgerEntry>,
    pub projection: Vec<ProjectionRecord>,
    pub issues: Vec<Diagnostic>,
}

/// Regroup, optionally project, then apply the repairs `to` needs.
pub fn convert(
    corpus: &UnifiedCorpus,
    from: FormatTag,
    to: FormatTag,
    options: ConvertOptions,
) -> Result<Conversion, ConvertError> {
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut corpus = match options.regroup {
        Regroup::Keep => corpus.clone(),
        Regroup::Flatten => {
            *counts.entry("flatten-dialogs").or_default() += multi_turn_count(corpus);
            flatten_dialogs(corpus)
        }
        Regroup::Synthesize { seed, max_turns } => {
            *counts.entry("synthesize-dialogs").or_default() += corpus.question_count();
            synthesize_dialogs(corpus, seed, max_turns)?
        }
    };

    let mut projection = Vec::new();
    let mut issues = Vec::new();
    if options.project_extractive {
        let p = project_to_extractive(&corpus);
        for r in &p.records {
            *counts.entry(r.rule).or_default() += 1;
        }
        projection = p.records;
        issues = p.issues;
        corpus = p.corpus;
    }

    let turns = || corpus.documents.iter().flat_map(|d| &d.dialogs).flat_map(|d| &d.turns);
    match to {
        FormatTag::Squad2 => {
            let multi = multi_turn_count(&corpus);
            let yesno = turns()
                .filter(|t| matches!(t.yesno_flag, YesNoFlag::Yes | YesNoFlag::No))
                .count();
            let followup = turns()
                .filter(|t| t.followup_flag != FollowupFlag::Unspecified)
                .count();
            let no_answer_origin = turns()
                .flat_map(|t| &t.references)
                .filter(|r| matches!(r.special, Some(SpecialClass::Unknown | SpecialClass::CannotAnswer)))
                .count();
            let minority = turns()
                .map(|t| {
                    let none = t.references.iter().filter(|r| r.is_no_answer()).count();
                    if t.is_unanswerable() {
                        t.references.len() - none
                    } else {
                        none
                    }
                })
                .sum::<usize>();
            add(&mut counts, "flatten-dialogs", multi);
            add(&mut counts, "drop-yesno-flag", yesno);
            add(&mut counts, "drop-followup-flag", followup);
            add(&mut counts, "no-answer-to-is-impossible", no_answer_origin);
            add(&mut counts, "drop-minority-answers", minority);
            if multi > 0 {
                corpus = flatten_dialogs(&corpus);
            }
        }
        FormatTag::Quac => {
            let origin = turns()
                .flat_map(|t| &t.references)
                .filter(|r| matches!(r.special, Some(SpecialClass::Unknown | SpecialClass::Unanswerable)))
                .count();
            let plausible = turns().map(|t| t.plausible_answers.len()).sum();
            add(&mut counts, "no-answer-to-cannotanswer", origin);
            add(&mut counts, "drop-plausible-answers", plausible);
        }
        FormatTag::Coqa => {
            let extractive = turns()
                .flat_map(|t| &t.references)
                .filter(|r| r.kind == ReferenceKind::Extractive)
                .count();
            let origin = turns()
                .flat_map(|t| &t.references)
                .filter(|r| matches!(r.special, Some(SpecialClass::CannotAnswer | SpecialClass::Unanswerable)))
                .count();
            let plausible = turns().map(|t| t.plausible_answers.len()).sum();
            add(&mut counts, "span-to-rationale", extractive);
            add(&mut counts, "no-answer-to-unknown", origin);
            add(&mut counts, "drop-plausible-answers", plausible);
            let mut assigned = 0;
            for doc in &mut corpus.documents {
                if doc.domain.is_empty() {
                    doc.domain = WIKIPEDIA_DOMAIN.to_string();
                    assigned += 1;
                }
            }
            add(&mut counts, "assign-domain-wikipedia", assigned);
            add(&mut counts, "pad-additional-answers", coqa_padded_answers(&corpus));
        }
    }

    let ledger = counts
        .into_iter()
        .filter(|(_, n)| *n > 0)
        .map(|(rule, count)| LossinessLedgerEntry {
            direction: (from, to),
            rule: rule.to_string(),
            count,
        })
        .collect();
    Ok(Conversion {
        corpus,
        ledger,
        projection,
        issues,
    })
}

fn add(counts: &mut BTreeMap<&'static str, usize>, rule: &'static str, n: usize) {
    *counts.entry(rule).or_default() += n;
}

fn multi_turn_count(corpus: &UnifiedCorpus) -> usize {
    corpus
        .documents
        .iter()
        .flat_map(|d| &d.dialogs)
        .filter(|d| d.turns.len() > 1)
        .map(|d| d.turns.len())
        .sum()
}
