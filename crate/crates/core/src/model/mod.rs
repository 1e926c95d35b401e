//! Format-neutral corpus model.
//!
//! A corpus is a list of context documents; each document holds dialogs of
//! turns over its shared context. A single-question dataset such as SQuAD is
//! represented with one single-turn dialog per question. Values are plain
//! data: build them once, then share them freely between readers.

mod validate;

pub use validate::validate_corpus;

use serde_json::{Map, Value};
use std::fmt;

/// Unknown source fields kept verbatim for re-emission.
pub type Extras = Map<String, Value>;

/// Layout a corpus was read from, or `Synthetic` once its dialogs were
/// regrouped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceFormat {
    Squad2,
    Quac,
    Coqa,
    Synthetic,
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceFormat::Squad2 => "SQUAD2",
            SourceFormat::Quac => "QUAC",
            SourceFormat::Coqa => "COQA",
            SourceFormat::Synthetic => "SYNTHETIC",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedCorpus {
    pub corpus_id: String,
    pub source_format: SourceFormat,
    pub documents: Vec<ContextDocument>,
    /// Top-level fields other than `data` (e.g. `version`).
    pub extras: Extras,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextDocument {
    pub doc_id: String,
    pub title: String,
    /// Source label such as a CoQA `source`; empty for SQuAD and QuAC.
    pub domain: String,
    pub context_text: String,
    pub dialogs: Vec<Dialog>,
    pub provenance: DocProvenance,
}

/// Source layout details needed to write a document back out.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DocProvenance {
    /// Index of the enclosing SQuAD article.
    pub article: Option<usize>,
    /// Unknown fields of the enclosing article (SQuAD) or dialog record (QuAC).
    pub article_extras: Extras,
    /// Unknown fields of the paragraph or story itself.
    pub extras: Extras,
    /// Exact trailing text stripped from a QuAC context, e.g. `" CANNOTANSWER"`.
    pub sentinel: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dialog {
    pub dialog_id: String,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FollowupFlag {
    Yes,
    No,
    Maybe,
    #[default]
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum YesNoFlag {
    Yes,
    No,
    Neither,
    #[default]
    Unspecified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub question_id: String,
    /// 1-based position within the dialog.
    pub turn_index: u32,
    pub question_text: String,
    pub references: Vec<Reference>,
    pub followup_flag: FollowupFlag,
    pub yesno_flag: YesNoFlag,
    /// SQuAD 2.0 plausible answers of an unanswerable question.
    pub plausible_answers: Vec<Reference>,
    pub provenance: TurnProvenance,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TurnProvenance {
    /// Turn id as written in the source, when it differs from `turn_index`.
    pub orig_turn_id: Option<i64>,
    /// Which reference is QuAC's `orig_answer`.
    pub orig_answer_index: Option<usize>,
    /// Unknown fields of the question record.
    pub extras: Extras,
}

impl Turn {
    /// The reference used as a single training target: QuAC's original
    /// answer when known, otherwise the first reference.
    pub fn primary_reference(&self) -> &Reference {
        self.provenance
            .orig_answer_index
            .and_then(|i| self.references.get(i))
            .unwrap_or(&self.references[0])
    }

    /// No-answer under the majority rule: at least as many no-answer
    /// references as answer references.
    pub fn is_unanswerable(&self) -> bool {
        let none = self.references.iter().filter(|r| r.is_no_answer()).count();
        none > 0 && none >= self.references.len() - none
    }

    /// True if the question is marked yes/no, either by flag (QuAC) or by a
    /// majority of yes/no references (CoQA).
    pub fn is_yes_no(&self) -> bool {
        if matches!(self.yesno_flag, YesNoFlag::Yes | YesNoFlag::No) {
            return true;
        }
        let yn = self
            .references
            .iter()
            .filter(|r| matches!(r.special, Some(SpecialClass::Yes | SpecialClass::No)))
            .count();
        yn > 0 && 2 * yn >= self.references.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceKind {
    Extractive,
    Abstractive,
    Special,
}

/// Answer classes that are not a span of the context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpecialClass {
    Yes,
    No,
    /// CoQA `unknown`.
    Unknown,
    /// QuAC `CANNOTANSWER`.
    CannotAnswer,
    /// SQuAD 2.0 `is_impossible`.
    Unanswerable,
}

impl SpecialClass {
    pub fn is_no_answer(self) -> bool {
        matches!(
            self,
            SpecialClass::Unknown | SpecialClass::CannotAnswer | SpecialClass::Unanswerable
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpecialClass::Yes => "YES",
            SpecialClass::No => "NO",
            SpecialClass::Unknown => "UNKNOWN",
            SpecialClass::CannotAnswer => "CANNOT_ANSWER",
            SpecialClass::Unanswerable => "UNANSWERABLE",
        }
    }
}

impl fmt::Display for SpecialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Half-open character range `[start, end)` into a context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Self {
        CharSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub kind: ReferenceKind,
    pub text: String,
    pub span: Option<CharSpan>,
    pub rationale: Option<CharSpan>,
    pub special: Option<SpecialClass>,
    pub provenance: RefProvenance,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RefProvenance {
    /// Source offset of an answer whose text does not match the context there.
    pub answer_start: Option<i64>,
    /// CoQA `span_text` when it differs from the rationale slice.
    pub span_text: Option<String>,
    /// CoQA span offsets that do not form a valid rationale (e.g. `-1`).
    pub raw_rationale: Option<(i64, i64)>,
    /// CoQA `additional_answers` key this reference came from.
    pub additional_key: Option<String>,
    /// Text before an extractive projection replaced it.
    pub original_text: Option<String>,
    /// Unknown fields of the answer record.
    pub extras: Extras,
}

impl Reference {
    pub fn extractive(text: impl Into<String>, span: CharSpan) -> Self {
        Reference {
            kind: ReferenceKind::Extractive,
            text: text.into(),
            span: Some(span),
            rationale: None,
            special: None,
            provenance: RefProvenance::default(),
        }
    }

    pub fn abstractive(text: impl Into<String>, rationale: Option<CharSpan>) -> Self {
        Reference {
            kind: ReferenceKind::Abstractive,
            text: text.into(),
            span: None,
            rationale,
            special: None,
            provenance: RefProvenance::default(),
        }
    }

    pub fn special(
        class: SpecialClass,
        text: impl Into<String>,
        rationale: Option<CharSpan>,
    ) -> Self {
        Reference {
            kind: ReferenceKind::Special,
            text: text.into(),
            span: None,
            rationale,
            special: Some(class),
            provenance: RefProvenance::default(),
        }
    }

    pub fn is_no_answer(&self) -> bool {
        self.special.is_some_and(SpecialClass::is_no_answer)
    }

    /// Answer span if present, otherwise the rationale.
    pub fn evidence_span(&self) -> Option<CharSpan> {
        self.span.or(self.rationale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

/// A located complaint about input data.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Location, e.g. `documents[3].dialogs[0].turns[2]`.
    pub path: String,
    /// Stable rule identifier, e.g. `span-text-mismatch`.
    pub rule: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(path: impl Into<String>, rule: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            path: path.into(),
            rule: rule.to_string(),
            message: message.into(),
        }
    }

    pub fn warning(path: impl Into<String>, rule: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(path, rule, message)
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] {}: {}", self.rule, self.path, self.message)
    }
}

/// Borrowed view of one turn with its enclosing document and dialog.
#[derive(Debug, Clone, Copy)]
pub struct TurnRef<'a> {
    pub document: &'a ContextDocument,
    pub dialog: &'a Dialog,
    pub turn: &'a Turn,
}

impl UnifiedCorpus {
    pub fn new(corpus_id: impl Into<String>, source_format: SourceFormat) -> Self {
        UnifiedCorpus {
            corpus_id: corpus_id.into(),
            source_format,
            documents: Vec::new(),
            extras: Extras::new(),
        }
    }

    /// Every turn in document, dialog, turn order.
    pub fn turns(&self) -> impl Iterator<Item = TurnRef<'_>> {
        self.documents.iter().flat_map(|document| {
            document.dialogs.iter().flat_map(move |dialog| {
                dialog.turns.iter().map(move |turn| TurnRef {
                    document,
                    dialog,
                    turn,
                })
            })
        })
    }

    pub fn question_count(&self) -> usize {
        self.documents
            .iter()
            .flat_map(|d| &d.dialogs)
            .map(|d| d.turns.len())
            .sum()
    }

    pub fn dialog_count(&self) -> usize {
        self.documents.iter().map(|d| d.dialogs.len()).sum()
    }
}

impl ContextDocument {
    pub fn new(doc_id: impl Into<String>, context_text: impl Into<String>) -> Self {
        ContextDocument {
            doc_id: doc_id.into(),
            title: String::new(),
            domain: String::new(),
            context_text: context_text.into(),
            dialogs: Vec::new(),
            provenance: DocProvenance::default(),
        }
    }
}

impl Turn {
    pub fn new(
        question_id: impl Into<String>,
        turn_index: u32,
        question_text: impl Into<String>,
        references: Vec<Reference>,
    ) -> Self {
        Turn {
            question_id: question_id.into(),
            turn_index,
            question_text: question_text.into(),
            references,
            followup_flag: FollowupFlag::Unspecified,
            yesno_flag: YesNoFlag::Unspecified,
            plausible_answers: Vec::new(),
            provenance: TurnProvenance::default(),
        }
    }
}
