//! Scoring predictions against a gold corpus under the SQuAD 2.0, QuAC and
//! CoQA protocols.
//!
//! Every protocol shares [`normalize`] and reproduces its reference scorer
//! operation for operation, so per-question scores are bit-identical to the
//! Python scripts. Two deliberate departures from those scripts:
//!
//! - a gold question without a prediction scores 0 and stays in every
//!   denominator (the SQuAD script drops it);
//! - a prediction for a question absent from the gold corpus is an error.
//!
//! Metric values are percentages kept at full precision; rounding to one
//! decimal happens only when a report is displayed.

pub mod normalize;
mod predictions;
mod protocols;

pub use normalize::{exact_match, is_punctuation, normalize, normalize_answer, overlap, token_f1, token_f1_in};
pub use predictions::{PredictedClass, Prediction, PredictionSet};
pub use protocols::{handle_cannot, human_f1, quac_f1, COQA_IN_DOMAIN, COQA_OUT_DOMAIN, QUAC_MIN_F1};

use crate::model::{Diagnostic, UnifiedCorpus};
use crate::Score;
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const F1: &str = "F1";
pub const EM: &str = "EM";
pub const HEQQ: &str = "HEQQ";
pub const HEQD: &str = "HEQD";
pub const IN_F1: &str = "in-F1";
pub const OUT_F1: &str = "out-F1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Squad2,
    Quac,
    Coqa,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Squad2, Protocol::Quac, Protocol::Coqa];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Squad2 => "SQUAD2",
            Protocol::Quac => "QUAC",
            Protocol::Coqa => "COQA",
        }
    }

    /// Headline metrics in display order.
    pub fn headline(self) -> &'static [&'static str] {
        match self {
            Protocol::Squad2 => &[F1, EM],
            Protocol::Quac => &[F1, HEQQ, HEQD],
            Protocol::Coqa => &[IN_F1, OUT_F1, F1, EM],
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_', '.'], "").as_str() {
            "squad2" | "squad" | "squad20" | "squadv2" => Ok(Protocol::Squad2),
            "quac" => Ok(Protocol::Quac),
            "coqa" => Ok(Protocol::Coqa),
            _ => Err(format!("unknown protocol {s:?} (expected squad2, quac or coqa)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("prediction for unknown question id {0:?}")]
    UnknownQuestionId(String),
    #[error("{protocol} protocol cannot score this corpus: {message}")]
    ProtocolMismatch { protocol: Protocol, message: String },
    #[error("malformed predictions: {0}")]
    MalformedPredictions(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// QuAC: questions whose human F1 falls below this are left out of F1
    /// and HEQ. `None` scores every question.
    pub quac_min_f1: Option<Score>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            quac_min_f1: Some(QUAC_MIN_F1),
        }
    }
}

/// Per-question outcome, scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionScore {
    pub f1: Score,
    pub em: Option<Score>,
    /// QuAC only: leave-one-out agreement among the gold answers.
    pub human_f1: Option<Score>,
    /// QuAC only: left out by the low-agreement filter.
    pub excluded: bool,
    pub missing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub protocol: Protocol,
    /// Percentages in `[0, 100]`, unrounded.
    pub metrics: BTreeMap<String, Score>,
    pub per_domain: BTreeMap<String, Score>,
    pub per_question: BTreeMap<String, QuestionScore>,
    /// Secondary figures the reference scorers also print, e.g. QuAC's
    /// unfiltered F1 and yes/no accuracy.
    pub auxiliary: BTreeMap<String, Score>,
    pub missing: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// One decimal, as in published result tables.
pub fn round1(x: Score) -> Score {
    (x * 10.0).round() / 10.0
}

impl EvalReport {
    fn new(protocol: Protocol) -> Self {
        EvalReport {
            protocol,
            metrics: BTreeMap::new(),
            per_domain: BTreeMap::new(),
            per_question: BTreeMap::new(),
            auxiliary: BTreeMap::new(),
            missing: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn metric(&self, name: &str) -> Option<Score> {
        self.metrics.get(name).copied()
    }

    pub fn rounded(&self, name: &str) -> Option<Score> {
        self.metric(name).map(round1)
    }

    pub fn to_json(&self) -> Value {
        let per_question: Map<String, Value> = self
            .per_question
            .iter()
            .map(|(qid, s)| {
                let mut o = Map::new();
                o.insert("f1".into(), json!(s.f1));
                if let Some(em) = s.em {
                    o.insert("em".into(), json!(em));
                }
                if let Some(h) = s.human_f1 {
                    o.insert("human_f1".into(), json!(h));
                }
                if s.excluded {
                    o.insert("excluded".into(), json!(true));
                }
                if s.missing {
                    o.insert("missing".into(), json!(true));
                }
                (qid.clone(), Value::Object(o))
            })
            .collect();
        let headline: Map<String, Value> = self
            .protocol
            .headline()
            .iter()
            .filter_map(|m| Some((m.to_string(), json!(self.metric(m)?))))
            .collect();
        json!({
            "protocol": self.protocol.name(),
            "metrics": headline,
            "per_domain": self.per_domain,
            "auxiliary": self.auxiliary,
            "missing": self.missing,
            "diagnostics": self.diagnostics.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "per_question": per_question,
        })
    }

    /// Aligned two-column table with one-decimal values.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![("protocol".into(), self.protocol.name().into())];
        for m in self.protocol.headline() {
            if let Some(v) = self.metric(m) {
                rows.push((m.to_string(), format!("{:.1}", round1(v))));
            }
        }
        for (d, v) in &self.per_domain {
            rows.push((format!("domain {d}"), format!("{:.1}", round1(*v))));
        }
        for (k, v) in &self.auxiliary {
            rows.push((k.clone(), format!("{:.1}", round1(*v))));
        }
        rows.push(("questions".into(), self.per_question.len().to_string()));
        rows.push(("missing".into(), self.missing.len().to_string()));
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:<width$}  {v:>7}\n"))
            .collect()
    }
}

/// Score `predictions` against `gold` under `protocol`.
pub fn evaluate(
    predictions: &PredictionSet,
    gold: &UnifiedCorpus,
    protocol: Protocol,
    options: EvalOptions,
) -> Result<EvalReport, EvalError> {
    let known: HashSet<&str> = gold.turns().map(|t| t.turn.question_id.as_str()).collect();
    if let Some(qid) = predictions.answers.keys().find(|q| !known.contains(q.as_str())) {
        return Err(EvalError::UnknownQuestionId(qid.clone()));
    }
    let mut report = EvalReport::new(protocol);
    match protocol {
        Protocol::Squad2 => protocols::squad2(predictions, gold, &mut report),
        Protocol::Quac => protocols::quac(predictions, gold, options, &mut report),
        Protocol::Coqa => protocols::coqa(predictions, gold, &mut report)?,
    }
    if !report.missing.is_empty() {
        report.diagnostics.push(Diagnostic::warning(
            "predictions",
            "missing-prediction",
            format!("{} gold questions have no prediction and score 0", report.missing.len()),
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
