//! Answer normalization shared by every scorer and by the span oracle:
//! lowercase, drop ASCII punctuation, drop the articles `a`/`an`/`the`,
//! split on whitespace.

use crate::scalar::{Overlap, Scalar};
use crate::Score;
use std::collections::HashMap;

/// ASCII punctuation, the set the reference scorers strip.
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Normalized answer string: tokens joined by single spaces.
pub fn normalize_answer(text: &str) -> String {
    normalize(text).join(" ")
}

/// Normalized tokens of `text`.
pub fn normalize(text: &str) -> Vec<String> {
    let lowered: String = text
        .to_lowercase()
        .chars()
        .filter(|c| !is_punctuation(*c))
        .collect();
    // Articles are whole word runs, equivalent to `\b(a|an|the)\b`.
    let mut cleaned = String::with_capacity(lowered.len());
    let mut run = String::new();
    let flush = |run: &mut String, out: &mut String| {
        if matches!(run.as_str(), "a" | "an" | "the") {
            out.push(' ');
        } else {
            out.push_str(run);
        }
        run.clear();
    };
    for c in lowered.chars() {
        if is_word_char(c) {
            run.push(c);
        } else {
            flush(&mut run, &mut cleaned);
            cleaned.push(c);
        }
    }
    flush(&mut run, &mut cleaned);
    cleaned.split_whitespace().map(str::to_owned).collect()
}

/// Multiset overlap between two token lists.
pub fn overlap(prediction: &[String], gold: &[String]) -> Overlap {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in gold {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let mut common = 0;
    for t in prediction {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    Overlap::new(common, prediction.len(), gold.len())
}

/// Token F1 over normalized multisets, in any scalar.
pub fn token_f1_in<T: Scalar>(prediction: &str, gold: &str) -> T {
    overlap(&normalize(prediction), &normalize(gold)).f1()
}

/// Token F1 in `[0, 1]`; 1 when both sides normalize to nothing, 0 when one does.
pub fn token_f1(prediction: &str, gold: &str) -> Score {
    token_f1_in(prediction, gold)
}

/// 1 when the normalized strings are identical.
pub fn exact_match(prediction: &str, gold: &str) -> Score {
    if normalize(prediction) == normalize(gold) {
        1.0
    } else {
        0.0
    }
}
