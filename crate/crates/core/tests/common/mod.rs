//! Shared helpers for the integration tests: fixture loading, an exhaustive
//! span search, and random corpus generators.
#![allow(dead_code)]

use proptest::prelude::*;
use qaconv::eval::{normalize, overlap};
use qaconv::formats::{self, FormatTag};
use qaconv::model::{CharSpan, ContextDocument, Dialog, Reference, SourceFormat, SpecialClass, Turn, UnifiedCorpus};
use qaconv::text::{whitespace_tokens, CharIndex};
use qaconv::ExactScore;
use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn read_fixture(name: &str) -> Vec<u8> {
    std::fs::read(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn sample_name(format: FormatTag) -> &'static str {
    match format {
        FormatTag::Squad2 => "squad2_sample.json",
        FormatTag::Quac => "quac_sample.json",
        FormatTag::Coqa => "coqa_sample.json",
    }
}

pub fn sample(format: FormatTag) -> UnifiedCorpus {
    formats::parse(format, &read_fixture(sample_name(format))).expect("bundled sample parses")
}

pub fn golden(name: &str) -> serde_json::Value {
    serde_json::from_slice(&read_fixture(&format!("golden/{name}"))).expect("golden file is JSON")
}

/// Every token span scored exactly; best F1, then fewer tokens, then the
/// earlier start. `None` when the reference has no normalized tokens.
pub fn brute_force(context: &str, reference: &str) -> Option<(ExactScore, std::ops::Range<usize>)> {
    let gold = normalize(reference);
    if gold.is_empty() {
        return None;
    }
    let tokens = whitespace_tokens(context);
    let index = CharIndex::new(context);
    let mut best: Option<(ExactScore, std::ops::Range<usize>)> = None;
    for len in 1..=tokens.len() {
        for start in 0..=tokens.len() - len {
            let span = CharSpan::new(tokens[start].start, tokens[start + len - 1].end);
            let f1: ExactScore = overlap(&normalize(index.slice(span).unwrap()), &gold).f1();
            if best.as_ref().is_none_or(|(b, _)| f1 > *b) {
                best = Some((f1, start..start + len));
            }
        }
    }
    best
}

const WORDS: &[&str] = &[
    "the", "a", "an", "cat", "Cat", "sat", "on", "mat", "dog", "ran", "far", "away", "big", "red",
    "car", "cat,", "mat.", "(dog)", "Ran!", "-", "…", "x", "yes", "no", "1937", "über", "The",
];

pub fn words(max: usize) -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(prop::sample::select(WORDS), 1..=max)
}

/// Context up to 30 tokens, reference up to 8 tokens.
pub fn oracle_case() -> impl Strategy<Value = (String, String)> {
    (words(30), words(8), prop::collection::vec(prop::sample::select(&[" ", " ", "  ", "\t", "\n"][..]), 30))
        .prop_map(|(c, r, seps)| {
            let mut context = String::new();
            for (i, w) in c.iter().enumerate() {
                if i > 0 {
                    context.push_str(seps[i % seps.len()]);
                }
                context.push_str(w);
            }
            (context, r.join(" "))
        })
}

#[derive(Debug, Clone)]
enum RefShape {
    Extractive(usize, usize),
    Abstractive(Vec<&'static str>, Option<(usize, usize)>),
    Special(SpecialClass, Option<(usize, usize)>),
}

fn ref_shape() -> impl Strategy<Value = RefShape> {
    let pair = (0usize..64, 1usize..5);
    prop_oneof![
        4 => pair.clone().prop_map(|(s, l)| RefShape::Extractive(s, l)),
        2 => (words(4), prop::option::of(pair.clone())).prop_map(|(w, r)| RefShape::Abstractive(w, r)),
        1 => (
            prop::sample::select(&[SpecialClass::Yes, SpecialClass::No, SpecialClass::Unanswerable][..]),
            prop::option::of(pair)
        )
            .prop_map(|(c, r)| RefShape::Special(c, r)),
    ]
}

fn token_span(tokens: &[CharSpan], (start, len): (usize, usize)) -> CharSpan {
    let s = start % tokens.len();
    let e = (s + len).min(tokens.len()) - 1;
    CharSpan::new(tokens[s].start, tokens[e].end)
}

/// Flat corpora (one question per dialog) of 1–4 documents with 1–12
/// questions each.
pub fn flat_corpus() -> impl Strategy<Value = UnifiedCorpus> {
    let doc = (words(40), prop::collection::vec(prop::collection::vec(ref_shape(), 1..4), 1..=12));
    prop::collection::vec(doc, 1..=4).prop_map(|docs| {
        let mut corpus = UnifiedCorpus::new("random", SourceFormat::Squad2);
        for (d, (ctx_words, questions)) in docs.into_iter().enumerate() {
            let context = ctx_words.join(" ");
            let tokens = whitespace_tokens(&context);
            let index = CharIndex::new(&context);
            let mut doc = ContextDocument::new(format!("{d}_0"), context.clone());
            for (q, shapes) in questions.into_iter().enumerate() {
                let refs = shapes
                    .into_iter()
                    .map(|s| match s {
                        RefShape::Extractive(a, b) => {
                            let span = token_span(&tokens, (a, b));
                            Reference::extractive(index.slice(span).unwrap(), span)
                        }
                        RefShape::Abstractive(w, r) => Reference::abstractive(w.join(" "), r.map(|r| token_span(&tokens, r))),
                        RefShape::Special(c, r) => {
                            let text = match c {
                                SpecialClass::Yes => "yes",
                                SpecialClass::No => "no",
                                _ => "",
                            };
                            Reference::special(c, text, r.map(|r| token_span(&tokens, r)))
                        }
                    })
                    .collect();
                let id = format!("d{d}q{q}");
                doc.dialogs.push(Dialog {
                    dialog_id: id.clone(),
                    turns: vec![Turn::new(id, 1, format!("question {q} of {d}?"), refs)],
                });
            }
            corpus.documents.push(doc);
        }
        corpus
    })
}

/// Sorted `(question_id, question_text, references)` triples.
pub fn question_multiset(corpus: &UnifiedCorpus) -> Vec<(String, String, String)> {
    let mut v: Vec<_> = corpus
        .turns()
        .map(|t| (t.turn.question_id.clone(), t.turn.question_text.clone(), format!("{:?}", t.turn.references)))
        .collect();
    v.sort();
    v
}

pub fn question_texts(corpus: &UnifiedCorpus) -> Vec<String> {
    let mut v: Vec<_> = corpus.turns().map(|t| t.turn.question_text.clone()).collect();
    v.sort();
    v
}
