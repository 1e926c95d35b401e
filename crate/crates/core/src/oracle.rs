//! Max-F1 extractive span search and the dataset-level extractive upper bound.
//!
//! Candidate spans are whitespace-token aligned. Normalization never crosses
//! whitespace, so the normalized tokens of a span are the concatenation of
//! the normalized tokens of its whitespace tokens and a span can be scored
//! incrementally while it grows.
//!
//! Growing a span from a fixed start only adds predicted tokens, so its F1
//! can never exceed `2g / (p + g)` where `p` is the predicted token count so
//! far and `g` the reference token count. The search stops extending once
//! that bound can no longer beat (or tie with a shorter span) the best span
//! found so far; the result is identical to exhaustive enumeration.

use crate::eval::normalize::normalize;
use crate::eval::token_f1;
use crate::model::{CharSpan, ReferenceKind, UnifiedCorpus};
use crate::text::{whitespace_tokens, CharIndex};
use crate::{ExactScore, Score};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("reference normalizes to zero tokens")]
    EmptyReference,
    #[error("context has no tokens")]
    EmptyContext,
}

/// Best span for a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanMatch {
    pub span: CharSpan,
    /// `token_f1(context[span], reference)`.
    pub f1: Score,
    /// Whitespace-token range `[first, last)` of the span.
    pub tokens: std::ops::Range<usize>,
}

/// Best contiguous token span of `context` against `reference`.
///
/// Ties on F1 go to the span with fewer tokens, then the earlier start.
pub fn max_f1_span(context: &str, reference: &str) -> Result<SpanMatch, OracleError> {
    let gold = normalize(reference);
    if gold.is_empty() {
        return Err(OracleError::EmptyReference);
    }
    let tokens = whitespace_tokens(context);
    if tokens.is_empty() {
        return Err(OracleError::EmptyContext);
    }
    let index = CharIndex::new(context);

    // Map gold vocabulary to dense ids; context tokens outside it count only
    // towards the predicted length.
    let mut vocab: HashMap<&str, usize> = HashMap::new();
    let mut gold_counts: Vec<usize> = Vec::new();
    for t in &gold {
        let next = vocab.len();
        let id = *vocab.entry(t.as_str()).or_insert(next);
        if id == gold_counts.len() {
            gold_counts.push(0);
        }
        gold_counts[id] += 1;
    }
    let g = gold.len() as u64;
    let pieces: Vec<(usize, Vec<usize>)> = tokens
        .iter()
        .map(|t| {
            let norm = normalize(index.slice(*t).expect("token inside context"));
            let ids = norm.iter().filter_map(|w| vocab.get(w.as_str()).copied()).collect();
            (norm.len(), ids)
        })
        .collect();

    let f1_of = |common: u64, predicted: u64| -> ExactScore {
        if common == 0 || predicted == 0 {
            ExactScore::from_integer(0)
        } else {
            ExactScore::new(2 * common, predicted + g)
        }
    };

    let n = tokens.len();
    let mut best = (ExactScore::from_integer(0), 0usize, 1usize); // (f1, start, len)
    let mut counts = vec![0usize; gold_counts.len()];
    for start in 0..n {
        // An optimal span (under the shorter-wins tie-break) starts on a
        // token that contributes a gold token.
        if pieces[start].1.is_empty() {
            continue;
        }
        counts.iter_mut().for_each(|c| *c = 0);
        let (mut common, mut predicted) = (0u64, 0u64);
        for end in start..n {
            let (len, ids) = &pieces[end];
            predicted += *len as u64;
            for &id in ids {
                if counts[id] < gold_counts[id] {
                    counts[id] += 1;
                    common += 1;
                }
            }
            let f1 = f1_of(common, predicted);
            let span_len = end - start + 1;
            if f1 > best.0 || (f1 == best.0 && span_len < best.2) {
                best = (f1, start, span_len);
            }
            let bound = if predicted == 0 {
                ExactScore::from_integer(1)
            } else {
                ExactScore::new(2 * g, predicted + g)
            };
            if bound < best.0 || (bound == best.0 && span_len + 1 >= best.2) {
                break;
            }
        }
    }

    let (_, start, len) = best;
    let span = CharSpan::new(tokens[start].start, tokens[start + len - 1].end);
    let text = index.slice(span).expect("span inside context");
    Ok(SpanMatch {
        span,
        f1: token_f1(text, reference),
        tokens: start..start + len,
    })
}

/// Which references of a turn the upper bound maximises over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferencePolicy {
    #[default]
    AllReferences,
    PrimaryOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundReport {
    /// Per-question bound in `[0, 100]`, keyed by question id.
    pub per_question: BTreeMap<String, Score>,
    /// Mean of `per_question`.
    pub overall: Score,
    /// Questions scored 100 because a reference is yes/no/unknown/no-answer.
    pub yes_no_unknown_count: usize,
    pub policy: ReferencePolicy,
}

impl UpperBoundReport {
    /// Overall value rounded to one decimal.
    pub fn overall_rounded(&self) -> Score {
        (self.overall * 10.0).round() / 10.0
    }
}

/// Best F1 (×100) any span-or-class system can reach on each question.
pub fn upper_bound_report(corpus: &UnifiedCorpus, policy: ReferencePolicy) -> UpperBoundReport {
    let mut per_question = BTreeMap::new();
    let mut special = 0;
    for t in corpus.turns() {
        let turn = t.turn;
        let refs: Vec<_> = match policy {
            ReferencePolicy::AllReferences => turn.references.iter().collect(),
            ReferencePolicy::PrimaryOnly => vec![turn.primary_reference()],
        };
        let score = if refs.iter().any(|r| r.kind == ReferenceKind::Special) {
            special += 1;
            100.0
        } else {
            100.0
                * refs
                    .iter()
                    .map(|r| reference_bound(&t.document.context_text, r))
                    .fold(0.0, Score::max)
        };
        per_question.insert(turn.question_id.clone(), score);
    }
    let overall = if per_question.is_empty() {
        0.0
    } else {
        per_question.values().sum::<Score>() / per_question.len() as Score
    };
    UpperBoundReport {
        per_question,
        overall,
        yes_no_unknown_count: special,
        policy,
    }
}

fn reference_bound(context: &str, r: &crate::model::Reference) -> Score {
    match r.kind {
        // The answer span itself is a context span.
        ReferenceKind::Extractive => token_f1(&r.text, &r.text),
        _ => match max_f1_span(context, &r.text) {
            Ok(m) => m.f1,
            // A reference with no scorable tokens is matched only by a span
            // that also normalizes to nothing.
            Err(OracleError::EmptyReference) => {
                let idx = CharIndex::new(context);
                let any_empty = whitespace_tokens(context)
                    .iter()
                    .any(|s| normalize(idx.slice(*s).unwrap_or("")).is_empty());
                if any_empty {
                    1.0
                } else {
                    0.0
                }
            }
            Err(OracleError::EmptyContext) => 0.0,
        },
    }
}
