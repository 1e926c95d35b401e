use super::json::{extend, Obj};
use super::{FormatError, FormatTag};
use crate::model::{
    CharSpan, ContextDocument, Dialog, DocProvenance, Reference, ReferenceKind, SourceFormat,
    SpecialClass, Turn, TurnProvenance, UnifiedCorpus,
};
use crate::text::CharIndex;
use serde_json::{json, Map, Value};

pub(super) fn parse(root: Value) -> Result<UnifiedCorpus, FormatError> {
    let top = Obj::new(&root, "")?;
    let mut corpus = UnifiedCorpus::new("squad2", SourceFormat::Squad2);
    corpus.extras = top.extras(&["data"]);

    for (ai, article) in top.array("data")?.iter().enumerate() {
        let apath = format!("data[{ai}]");
        let art = Obj::new(article, &apath)?;
        let title = art.opt_str("title")?.unwrap_or_default();
        let article_extras = art.extras(&["title", "paragraphs"]);
        for (pi, paragraph) in art.array("paragraphs")?.iter().enumerate() {
            let ppath = format!("{apath}.paragraphs[{pi}]");
            let para = Obj::new(paragraph, &ppath)?;
            let context = para.str("context")?;
            let index = CharIndex::new(&context);
            let mut dialogs = Vec::new();
            for (qi, qa) in para.array("qas")?.iter().enumerate() {
                let qpath = format!("{ppath}.qas[{qi}]");
                dialogs.push(parse_qa(Obj::new(qa, &qpath)?, &index)?);
            }
            let mut doc = ContextDocument::new(format!("{ai}_{pi}"), context.clone());
            doc.title = title.clone();
            doc.dialogs = dialogs;
            doc.provenance = DocProvenance {
                article: Some(ai),
                article_extras: article_extras.clone(),
                extras: para.extras(&["context", "qas"]),
                sentinel: None,
            };
            corpus.documents.push(doc);
        }
    }
    Ok(corpus)
}

fn parse_qa(qa: Obj<'_, '_>, index: &CharIndex<'_>) -> Result<Dialog, FormatError> {
    let id = qa.str("id")?;
    let question = qa.str("question")?;
    let impossible = qa.opt_bool("is_impossible")?.unwrap_or(false);
    let answers = parse_answers(&qa, "answers", index)?;
    let plausible = parse_answers(&qa, "plausible_answers", index)?;

    let references = if impossible {
        if !answers.is_empty() {
            return Err(FormatError::schema(
                qa.child_path("answers"),
                "unanswerable question lists answers",
            ));
        }
        vec![Reference::special(SpecialClass::Unanswerable, "", None)]
    } else {
        if answers.is_empty() {
            return Err(FormatError::schema(
                qa.child_path("answers"),
                "answerable question has no answers",
            ));
        }
        answers
    };
    let mut turn = Turn::new(id.clone(), 1, question, references);
    turn.plausible_answers = plausible;
    turn.provenance = TurnProvenance {
        extras: qa.extras(&["question", "id", "answers", "is_impossible", "plausible_answers"]),
        ..TurnProvenance::default()
    };
    Ok(Dialog {
        dialog_id: id,
        turns: vec![turn],
    })
}

fn parse_answers(
    qa: &Obj<'_, '_>,
    key: &str,
    index: &CharIndex<'_>,
) -> Result<Vec<Reference>, FormatError> {
    let base = qa.child_path(key);
    qa.opt_array(key)?
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let path = format!("{base}[{i}]");
            parse_span_answer(Obj::new(a, &path)?, index)
        })
        .collect()
}

/// `{text, answer_start}` answer shared by SQuAD and QuAC.
pub(super) fn parse_span_answer(
    answer: Obj<'_, '_>,
    index: &CharIndex<'_>,
) -> Result<Reference, FormatError> {
    let text = answer.str("text")?;
    let start = answer.int("answer_start")?;
    let len = crate::text::char_len(&text);
    let out_of_bounds = || FormatError::SpanOutOfBounds {
        path: answer.child_path("answer_start"),
        offset: start,
        len: index.len(),
    };
    if start < 0 || start as usize + len > index.len() {
        return Err(out_of_bounds());
    }
    let span = CharSpan::new(start as usize, start as usize + len);
    let mut reference = if len > 0 && index.slice(span) == Some(text.as_str()) {
        Reference::extractive(text, span)
    } else {
        log::warn!(
            "{}: answer text does not match the context at its offset",
            answer.path
        );
        let mut r = Reference::abstractive(text, (len > 0).then_some(span));
        r.provenance.answer_start = Some(start);
        r
    };
    reference.provenance.extras = answer.extras(&["text", "answer_start"]);
    Ok(reference)
}

/// Inverse of [`parse_span_answer`]; `None` if the reference has no offset.
pub(super) fn span_answer(r: &Reference, keep_extras: bool) -> Option<Value> {
    let start = match (r.kind, r.span, r.provenance.answer_start) {
        (ReferenceKind::Extractive, Some(span), _) => span.start as i64,
        (ReferenceKind::Abstractive, _, Some(start)) => start,
        _ => return None,
    };
    let mut map = Map::new();
    map.insert("text".into(), json!(r.text));
    map.insert("answer_start".into(), json!(start));
    if keep_extras {
        extend(&mut map, &r.provenance.extras);
    }
    Some(Value::Object(map))
}

pub(super) fn serialize(corpus: &UnifiedCorpus) -> Result<Value, FormatError> {
    let keep = corpus.source_format == SourceFormat::Squad2;
    let mut data: Vec<Value> = Vec::new();
    let mut current: Option<(usize, Map<String, Value>, Vec<Value>)> = None;

    for (di, doc) in corpus.documents.iter().enumerate() {
        let dpath = format!("documents[{di}]");
        let mut qas = Vec::new();
        for (gi, dialog) in doc.dialogs.iter().enumerate() {
            let gpath = format!("{dpath}.dialogs[{gi}]");
            if dialog.turns.len() > 1 {
                return Err(FormatError::inexpressible(
                    FormatTag::Squad2,
                    gpath,
                    "multi-turn dialog; flatten it first",
                ));
            }
            for turn in &dialog.turns {
                qas.push(serialize_turn(turn, keep, &format!("{gpath}.turns[0]"))?);
            }
        }
        let mut para = Map::new();
        para.insert("qas".into(), Value::Array(qas));
        para.insert("context".into(), json!(doc.context_text));
        if keep {
            extend(&mut para, &doc.provenance.extras);
        }

        let same_article = matches!((&current, doc.provenance.article),
            (Some((a, _, _)), Some(b)) if *a == b);
        if !same_article {
            if let Some((_, art, paras)) = current.take() {
                data.push(finish_article(art, paras));
            }
            let mut art = Map::new();
            art.insert("title".into(), json!(doc.title));
            if keep {
                extend(&mut art, &doc.provenance.article_extras);
            }
            current = Some((doc.provenance.article.unwrap_or(usize::MAX), art, Vec::new()));
        }
        if let Some((_, _, paras)) = current.as_mut() {
            paras.push(Value::Object(para));
        }
    }
    if let Some((_, art, paras)) = current {
        data.push(finish_article(art, paras));
    }

    let mut root = Map::new();
    if keep {
        extend(&mut root, &corpus.extras);
    } else {
        root.insert("version".into(), json!("v2.0"));
    }
    root.insert("data".into(), Value::Array(data));
    Ok(Value::Object(root))
}

fn finish_article(mut art: Map<String, Value>, paras: Vec<Value>) -> Value {
    // paragraphs after title, before article extras
    let mut out = Map::new();
    out.insert("title".into(), art.remove("title").unwrap_or(json!("")));
    out.insert("paragraphs".into(), Value::Array(paras));
    out.extend(art);
    Value::Object(out)
}

fn serialize_turn(turn: &Turn, keep: bool, path: &str) -> Result<Value, FormatError> {
    let unanswerable = turn.is_unanswerable();
    let mut answers = Vec::new();
    let mut from_refs = Vec::new();
    for (ri, r) in turn.references.iter().enumerate() {
        if r.is_no_answer() {
            continue;
        }
        if r.kind == ReferenceKind::Special {
            return Err(FormatError::inexpressible(
                FormatTag::Squad2,
                format!("{path}.references[{ri}]"),
                "yes/no answer; project to extractive first",
            ));
        }
        let a = span_answer(r, keep).ok_or_else(|| {
            FormatError::inexpressible(
                FormatTag::Squad2,
                format!("{path}.references[{ri}]"),
                "abstractive answer without a span; project to extractive first",
            )
        })?;
        from_refs.push(a);
    }
    let mut plausible: Vec<Value> = turn
        .plausible_answers
        .iter()
        .filter_map(|r| span_answer(r, keep))
        .collect();
    if unanswerable {
        if plausible.is_empty() {
            plausible = from_refs;
        }
    } else {
        answers = from_refs;
    }

    let mut qa = Map::new();
    qa.insert("question".into(), json!(turn.question_text));
    qa.insert("id".into(), json!(turn.question_id));
    qa.insert("answers".into(), Value::Array(answers));
    qa.insert("is_impossible".into(), json!(unanswerable));
    if !plausible.is_empty() {
        qa.insert("plausible_answers".into(), Value::Array(plausible));
    }
    if keep {
        extend(&mut qa, &turn.provenance.extras);
    }
    Ok(Value::Object(qa))
}
