use super::ConvertError;
use crate::model::{CharSpan, ReferenceKind, SpecialClass, Turn, UnifiedCorpus};
use crate::oracle::max_f1_span;
use crate::text::{tokens_overlapping, whitespace_tokens, CharIndex};
use serde_json::{json, Value};
use std::io::{self, Write};

/// What the model should predict for a marked turn. Yes/no answers carry both
/// the class and, when present, the rationale span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedTarget {
    /// Character span in the context.
    pub span: Option<CharSpan>,
    pub class: Option<SpecialClass>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedInstance {
    pub question_id: String,
    pub context_tokens: Vec<String>,
    /// `d > 0` marks a token inside the answer of the turn `d` steps back.
    pub markers: Vec<u32>,
    pub question_text: String,
    pub target: MarkedTarget,
}

impl MarkedInstance {
    pub fn to_json(&self) -> Value {
        json!({
            "question_id": self.question_id,
            "context_tokens": self.context_tokens,
            "markers": self.markers,
            "question": self.question_text,
            "target_start": self.target.span.map(|s| s.start),
            "target_end": self.target.span.map(|s| s.end),
            "special_class": self.target.class.map(SpecialClass::as_str),
        })
    }
}

/// Previous-answer span used for marking. No-answer turns have nothing to
/// mark and yield `Ok(None)`.
fn answer_span(turn: &Turn) -> Result<Option<CharSpan>, ConvertError> {
    let r = turn.primary_reference();
    match r.evidence_span() {
        Some(s) => Ok(Some(s)),
        None if r.is_no_answer() => Ok(None),
        None => Err(ConvertError::UnmarkableReference {
            question_id: turn.question_id.clone(),
        }),
    }
}

fn target(turn: &Turn, context: &str) -> MarkedTarget {
    let r = turn.primary_reference();
    let span = match r.kind {
        ReferenceKind::Abstractive if r.span.is_none() => r
            .rationale
            .or_else(|| max_f1_span(context, &r.text).ok().map(|m| m.span)),
        _ => r.evidence_span(),
    };
    MarkedTarget {
        span,
        class: r.special,
    }
}

/// One instance per turn, with the previous `k` answers marked on the
/// whitespace tokens of the context. A token inside several previous answers
/// gets the smallest distance.
pub fn mark_context(corpus: &UnifiedCorpus, k: usize) -> Result<Vec<MarkedInstance>, ConvertError> {
    let mut out = Vec::with_capacity(corpus.question_count());
    for doc in &corpus.documents {
        let index = CharIndex::new(&doc.context_text);
        let tokens = whitespace_tokens(&doc.context_text);
        let words: Vec<String> = tokens
            .iter()
            .map(|t| index.slice(*t).unwrap_or_default().to_string())
            .collect();
        for dialog in &doc.dialogs {
            for (t, turn) in dialog.turns.iter().enumerate() {
                let mut markers = vec![0u32; tokens.len()];
                // Farthest first so nearer turns overwrite.
                for d in (1..=k.min(t)).rev() {
                    if let Some(span) = answer_span(&dialog.turns[t - d])? {
                        for m in &mut markers[tokens_overlapping(&tokens, span)] {
                            *m = d as u32;
                        }
                    }
                }
                out.push(MarkedInstance {
                    question_id: turn.question_id.clone(),
                    context_tokens: words.clone(),
                    markers,
                    question_text: turn.question_text.clone(),
                    target: target(turn, &doc.context_text),
                });
            }
        }
    }
    Ok(out)
}

/// Write one JSON object per line with the fixed export field order.
pub fn write_marked_jsonl<W: Write>(instances: &[MarkedInstance], mut w: W) -> io::Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut w, &inst.to_json())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
