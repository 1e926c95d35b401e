use super::StatsError;
use crate::model::{Diagnostic, UnifiedCorpus};
use crate::Score;
use serde::Deserialize;
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Taxonomy {
    Unanswerable,
    DialogAct,
    Abstractive,
}

impl Taxonomy {
    pub const ALL: [Taxonomy; 3] = [Taxonomy::Unanswerable, Taxonomy::DialogAct, Taxonomy::Abstractive];

    pub fn name(self) -> &'static str {
        match self {
            Taxonomy::Unanswerable => "UNANSWERABLE",
            Taxonomy::DialogAct => "DIALOG_ACT",
            Taxonomy::Abstractive => "ABSTRACTIVE",
        }
    }

    /// Closed label set, in table column order.
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Taxonomy::Unanswerable => &[
                "entity_salad",
                "false_premise",
                "topic_error",
                "missing_information",
                "content_negation",
                "answerable",
            ],
            Taxonomy::DialogAct => &["topic_shift", "drill_down", "topic_return", "clarification", "definition"],
            Taxonomy::Abstractive => &["yes_no", "coref", "counting", "picking", "fluency"],
        }
    }
}

impl fmt::Display for Taxonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Taxonomy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Taxonomy::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown taxonomy {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub question_id: String,
    pub taxonomy: Taxonomy,
    pub label: String,
}

impl AnnotationRecord {
    /// Fails when `label` is outside the taxonomy's label set.
    pub fn new(question_id: impl Into<String>, taxonomy: Taxonomy, label: &str) -> Result<Self, String> {
        if !taxonomy.labels().contains(&label) {
            return Err(format!("label {label:?} is not in the {taxonomy} set"));
        }
        Ok(AnnotationRecord {
            question_id: question_id.into(),
            taxonomy,
            label: label.to_string(),
        })
    }
}

#[derive(Deserialize)]
struct RawRecord {
    question_id: String,
    taxonomy: String,
    label: String,
}

/// One JSON object per line: `{"question_id", "taxonomy", "label"}`.
pub fn load_annotations(payload: &[u8]) -> Result<Vec<AnnotationRecord>, StatsError> {
    let text = std::str::from_utf8(payload).map_err(|e| StatsError::InvalidRecord {
        line: 0,
        message: format!("invalid UTF-8 at byte {}", e.valid_up_to()),
    })?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let invalid = |message: String| StatsError::InvalidRecord { line: n + 1, message };
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| invalid(e.to_string()))?;
        let taxonomy = raw.taxonomy.parse().map_err(invalid)?;
        out.push(AnnotationRecord::new(raw.question_id, taxonomy, &raw.label).map_err(invalid)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomySummary {
    pub taxonomy: Taxonomy,
    /// One entry per label, in label-set order.
    pub counts: Vec<(&'static str, usize)>,
    pub total: usize,
}

impl TaxonomySummary {
    /// Percentage of records per label, rounded to one decimal.
    pub fn percentages(&self) -> Vec<(&'static str, Score)> {
        self.counts
            .iter()
            .map(|(l, c)| {
                let p = if self.total == 0 {
                    0.0
                } else {
                    100.0 * *c as Score / self.total as Score
                };
                (*l, crate::eval::round1(p))
            })
            .collect()
    }

    pub fn percentage(&self, label: &str) -> Option<Score> {
        self.percentages().into_iter().find(|(l, _)| *l == label).map(|(_, p)| p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationTable {
    pub taxonomies: Vec<TaxonomySummary>,
    /// Duplicate annotations that were overridden by a later record.
    pub diagnostics: Vec<Diagnostic>,
}

impl AnnotationTable {
    pub fn get(&self, taxonomy: Taxonomy) -> &TaxonomySummary {
        self.taxonomies.iter().find(|t| t.taxonomy == taxonomy).expect("every taxonomy is present")
    }

    pub fn to_json(&self) -> Value {
        let tables: serde_json::Map<String, Value> = self
            .taxonomies
            .iter()
            .map(|t| {
                let mut row: serde_json::Map<String, Value> =
                    t.percentages().into_iter().map(|(l, p)| (l.to_string(), json!(p))).collect();
                row.insert("total".into(), json!(t.total));
                (t.taxonomy.name().to_string(), Value::Object(row))
            })
            .collect();
        json!({
            "taxonomies": tables,
            "diagnostics": self.diagnostics.iter().map(ToString::to_string).collect::<Vec<_>>(),
        })
    }

    /// One block per taxonomy with labels as columns.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for t in &self.taxonomies {
            let pct = t.percentages();
            let widths: Vec<usize> = pct.iter().map(|(l, _)| l.len().max(5)).collect();
            out.push_str(&format!("{:<14}", t.taxonomy.name()));
            for ((l, _), w) in pct.iter().zip(&widths) {
                out.push_str(&format!("  {l:>w$}"));
            }
            out.push_str("  total\n");
            out.push_str(&format!("{:<14}", ""));
            for ((_, p), w) in pct.iter().zip(&widths) {
                out.push_str(&format!("  {:>w$}", format!("{p:.1}")));
            }
            out.push_str(&format!("  {:>5}\n", t.total));
        }
        out
    }
}

/// Label percentages per taxonomy. A second label for the same question and
/// taxonomy replaces the first and is reported.
pub fn aggregate_annotations(records: &[AnnotationRecord], corpus: &UnifiedCorpus) -> Result<AnnotationTable, StatsError> {
    let known: HashSet<&str> = corpus.turns().map(|t| t.turn.question_id.as_str()).collect();
    let mut latest: BTreeMap<(Taxonomy, &str), &str> = BTreeMap::new();
    let mut diagnostics = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if !known.contains(r.question_id.as_str()) {
            return Err(StatsError::UnknownQuestionId(r.question_id.clone()));
        }
        if let Some(prev) = latest.insert((r.taxonomy, &r.question_id), &r.label) {
            diagnostics.push(Diagnostic::warning(
                format!("records[{i}]"),
                "duplicate-annotation",
                format!("{} {} relabelled {prev} -> {}", r.question_id, r.taxonomy, r.label),
            ));
        }
    }
    let taxonomies = Taxonomy::ALL
        .into_iter()
        .map(|taxonomy| {
            let labels: Vec<&str> = latest.iter().filter(|((t, _), _)| *t == taxonomy).map(|(_, l)| *l).collect();
            TaxonomySummary {
                taxonomy,
                counts: taxonomy.labels().iter().map(|l| (*l, labels.iter().filter(|x| *x == l).count())).collect(),
                total: labels.len(),
            }
        })
        .collect();
    Ok(AnnotationTable { taxonomies, diagnostics })
}
