//! Corpus statistics and aggregation of manual taxonomy labels.
//!
//! Counts are taken over each question's primary reference: the answer
//! shown to the questioner in QuAC, the main annotator's answer in CoQA.

mod annotations;
mod sentences;

pub use annotations::{
    aggregate_annotations, load_annotations, AnnotationRecord, AnnotationTable, Taxonomy, TaxonomySummary,
};
pub use sentences::{split_sentences, ABBREVIATIONS};

use crate::eval::normalize;
use crate::model::{CharSpan, ReferenceKind, SpecialClass, Turn, UnifiedCorpus, YesNoFlag};
use crate::oracle::max_f1_span;
use crate::Score;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("no reference in the corpus carries a span of the requested kind")]
    NoSpans,
    #[error("annotation for unknown question id {0:?}")]
    UnknownQuestionId(String),
    #[error("annotation line {line}: {message}")]
    InvalidRecord { line: usize, message: String },
}

/// Which spans count as covering a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoverageSpans {
    /// The answer itself: the span of an extractive answer, or the max-F1
    /// context span of a free-text one.
    Answer,
    /// CoQA-style rationale spans.
    Rationale,
    /// Either of the above.
    #[default]
    Evidence,
}

fn answer_span(context: &str, turn: &Turn) -> Option<CharSpan> {
    let r = turn.primary_reference();
    match (r.kind, r.span) {
        (_, Some(s)) => Some(s),
        (ReferenceKind::Abstractive, None) => max_f1_span(context, &r.text).ok().map(|m| m.span),
        _ => None,
    }
}

fn turn_spans(context: &str, turn: &Turn, which: CoverageSpans) -> Vec<CharSpan> {
    let rationale = turn.primary_reference().rationale;
    let mut spans = Vec::new();
    if which != CoverageSpans::Rationale {
        spans.extend(answer_span(context, turn));
    }
    if which != CoverageSpans::Answer {
        spans.extend(rationale);
    }
    spans.retain(|s| !s.is_empty());
    spans
}

/// Mean over documents of the share of context sentences touched by at
/// least one span, as a percentage.
pub fn sentence_coverage(corpus: &UnifiedCorpus, which: CoverageSpans) -> Result<Score, StatsError> {
    let mut fractions = Vec::new();
    let mut any_span = false;
    for doc in &corpus.documents {
        let sentences = split_sentences(&doc.context_text);
        if sentences.is_empty() {
            continue;
        }
        let spans: Vec<CharSpan> = doc
            .dialogs
            .iter()
            .flat_map(|d| &d.turns)
            .flat_map(|t| turn_spans(&doc.context_text, t, which))
            .collect();
        any_span |= !spans.is_empty();
        let covered = sentences.iter().filter(|s| spans.iter().any(|a| a.overlaps(s))).count();
        fractions.push(covered as Score / sentences.len() as Score);
    }
    if !any_span {
        return Err(StatsError::NoSpans);
    }
    Ok(100.0 * fractions.iter().sum::<Score>() / fractions.len() as Score)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    pub document_count: usize,
    pub dialog_count: usize,
    pub question_count: usize,
    pub unanswerable_count: usize,
    pub unanswerable_rate: Score,
    pub yesno_count: usize,
    pub yesno_rate: Score,
    /// Evidence-span coverage; `None` when the corpus has no spans at all.
    pub sentence_coverage: Option<Score>,
    pub answer_coverage: Option<Score>,
    pub rationale_coverage: Option<Score>,
    /// Normalized tokens per answered, non-yes/no primary answer.
    pub mean_answer_length_tokens: Score,
}

fn rate(count: usize, total: usize) -> Score {
    if total == 0 {
        0.0
    } else {
        100.0 * count as Score / total as Score
    }
}

fn is_yes_no(turn: &Turn) -> bool {
    matches!(turn.yesno_flag, YesNoFlag::Yes | YesNoFlag::No)
        || matches!(turn.primary_reference().special, Some(SpecialClass::Yes | SpecialClass::No))
}

pub fn dataset_profile(corpus: &UnifiedCorpus) -> ProfileReport {
    let turns: Vec<&Turn> = corpus.turns().map(|t| t.turn).collect();
    let unanswerable_count = turns.iter().filter(|t| t.primary_reference().is_no_answer()).count();
    let yesno_count = turns.iter().filter(|t| is_yes_no(t)).count();
    let lengths: Vec<usize> = turns
        .iter()
        .filter(|t| !t.primary_reference().is_no_answer() && !is_yes_no(t))
        .map(|t| normalize(&t.primary_reference().text).len())
        .collect();
    let coverage = |w| sentence_coverage(corpus, w).ok();
    ProfileReport {
        document_count: corpus.documents.len(),
        dialog_count: corpus.dialog_count(),
        question_count: turns.len(),
        unanswerable_count,
        unanswerable_rate: rate(unanswerable_count, turns.len()),
        yesno_count,
        yesno_rate: rate(yesno_count, turns.len()),
        sentence_coverage: coverage(CoverageSpans::Evidence),
        answer_coverage: coverage(CoverageSpans::Answer),
        rationale_coverage: coverage(CoverageSpans::Rationale),
        mean_answer_length_tokens: if lengths.is_empty() {
            0.0
        } else {
            lengths.iter().sum::<usize>() as Score / lengths.len() as Score
        },
    }
}

impl ProfileReport {
    pub fn to_json(&self) -> Value {
        json!({
            "document_count": self.document_count,
            "dialog_count": self.dialog_count,
            "question_count": self.question_count,
            "unanswerable_count": self.unanswerable_count,
            "unanswerable_rate": self.unanswerable_rate,
            "yesno_count": self.yesno_count,
            "yesno_rate": self.yesno_rate,
            "sentence_coverage": self.sentence_coverage,
            "answer_coverage": self.answer_coverage,
            "rationale_coverage": self.rationale_coverage,
            "mean_answer_length_tokens": self.mean_answer_length_tokens,
        })
    }

    pub fn to_table(&self) -> String {
        let pct = |v: Option<Score>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.1}"));
        let rows = [
            ("documents", self.document_count.to_string()),
            ("dialogs", self.dialog_count.to_string()),
            ("questions", self.question_count.to_string()),
            ("unanswerable", format!("{} ({:.1}%)", self.unanswerable_count, self.unanswerable_rate)),
            ("yes/no", format!("{} ({:.1}%)", self.yesno_count, self.yesno_rate)),
            ("sentence coverage", pct(self.sentence_coverage)),
            ("  answer spans", pct(self.answer_coverage)),
            ("  rationale spans", pct(self.rationale_coverage)),
            ("mean answer tokens", format!("{:.2}", self.mean_answer_length_tokens)),
        ];
        rows.iter().map(|(k, v)| format!("{k:<20}{v}\n")).collect()
    }
}
