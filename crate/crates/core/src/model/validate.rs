use super::{
    CharSpan, Diagnostic, Reference, ReferenceKind, SourceFormat, UnifiedCorpus,
};
use crate::text::CharIndex;
use std::collections::HashSet;

/// Check every structural invariant of the model; one [`Diagnostic`] per
/// violation, empty iff the corpus is well formed.
pub fn validate_corpus(corpus: &UnifiedCorpus) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut doc_ids = HashSet::new();
    let mut question_ids = HashSet::new();

    for (di, doc) in corpus.documents.iter().enumerate() {
        let dpath = format!("documents[{di}]");
        if !doc_ids.insert(doc.doc_id.as_str()) {
            out.push(Diagnostic::error(
                &dpath,
                "duplicate-doc-id",
                format!("document id {:?} is not unique", doc.doc_id),
            ));
        }
        if doc.context_text.is_empty() {
            out.push(Diagnostic::error(&dpath, "empty-context", "context text is empty"));
        }
        if corpus.source_format == SourceFormat::Coqa && doc.domain.is_empty() {
            out.push(Diagnostic::error(
                &dpath,
                "missing-domain",
                "CoQA documents need a domain label",
            ));
        }
        let index = CharIndex::new(&doc.context_text);

        for (gi, dialog) in doc.dialogs.iter().enumerate() {
            let gpath = format!("{dpath}.dialogs[{gi}]");
            if corpus.source_format == SourceFormat::Squad2 && dialog.turns.len() > 1 {
                out.push(Diagnostic::error(
                    &gpath,
                    "squad-multi-turn",
                    "a SQuAD corpus holds single-turn dialogs only",
                ));
            }
            for (ti, turn) in dialog.turns.iter().enumerate() {
                let tpath = format!("{gpath}.turns[{ti}]");
                if turn.turn_index as usize != ti + 1 {
                    out.push(Diagnostic::error(
                        &tpath,
                        "turn-index",
                        format!("turn index {} at position {}", turn.turn_index, ti + 1),
                    ));
                }
                if !question_ids.insert(turn.question_id.as_str()) {
                    out.push(Diagnostic::error(
                        &tpath,
                        "duplicate-question-id",
                        format!("question id {:?} is not unique", turn.question_id),
                    ));
                }
                if turn.references.is_empty() {
                    out.push(Diagnostic::error(
                        &tpath,
                        "empty-references",
                        "turn has no reference answers",
                    ));
                }
                for (ri, r) in turn.references.iter().enumerate() {
                    check_reference(r, &index, &format!("{tpath}.references[{ri}]"), &mut out);
                }
                for (ri, r) in turn.plausible_answers.iter().enumerate() {
                    check_reference(
                        r,
                        &index,
                        &format!("{tpath}.plausible_answers[{ri}]"),
                        &mut out,
                    );
                }
            }
        }
    }
    out
}

fn check_reference(r: &Reference, index: &CharIndex<'_>, path: &str, out: &mut Vec<Diagnostic>) {
    match (r.kind, r.special) {
        (ReferenceKind::Special, None) => out.push(Diagnostic::error(
            path,
            "special-class-missing",
            "SPECIAL reference without a class",
        )),
        (ReferenceKind::Extractive | ReferenceKind::Abstractive, Some(c)) => {
            out.push(Diagnostic::error(
                path,
                "special-class-unexpected",
                format!("non-SPECIAL reference carries class {c}"),
            ))
        }
        _ => {}
    }
    for (name, span) in [("span", r.span), ("rationale", r.rationale)] {
        let Some(span) = span else { continue };
        check_span(span, index, &format!("{path}.{name}"), out);
    }
    if r.kind == ReferenceKind::Extractive {
        match r.span {
            None => out.push(Diagnostic::error(
                path,
                "extractive-without-span",
                "EXTRACTIVE reference has no span",
            )),
            Some(span) => {
                if let Some(slice) = index.slice(span) {
                    if slice != r.text {
                        out.push(Diagnostic::error(
                            path,
                            "span-text-mismatch",
                            format!("context[{}..{}] is {slice:?}, text is {:?}", span.start, span.end, r.text),
                        ));
                    }
                }
            }
        }
    }
}

fn check_span(span: CharSpan, index: &CharIndex<'_>, path: &str, out: &mut Vec<Diagnostic>) {
    if span.start >= span.end {
        out.push(Diagnostic::error(
            path,
            "empty-span",
            format!("span {}..{} is empty", span.start, span.end),
        ));
    }
    if span.end > index.len() {
        out.push(Diagnostic::error(
            path,
            "span-bounds",
            format!("span end {} exceeds context length {}", span.end, index.len()),
        ));
    }
}
