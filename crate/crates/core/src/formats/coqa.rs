use super::json::{extend, Obj};
use super::{trim_answer, FormatError, FormatTag};
use crate::model::{
    CharSpan, ContextDocument, Dialog, DocProvenance, Reference, ReferenceKind, SourceFormat,
    SpecialClass, Turn, TurnProvenance, UnifiedCorpus,
};
use crate::text::CharIndex;
use serde_json::{json, Map, Value};

const STORY_FIELDS: &[&str] = &[
    "source",
    "id",
    "story",
    "questions",
    "answers",
    "additional_answers",
];
const ANSWER_FIELDS: &[&str] = &["span_start", "span_end", "span_text", "input_text", "turn_id"];

pub(super) fn parse(root: Value) -> Result<UnifiedCorpus, FormatError> {
    let top = Obj::new(&root, "")?;
    let mut corpus = UnifiedCorpus::new("coqa", SourceFormat::Coqa);
    corpus.extras = top.extras(&["data"]);
    for (si, story) in top.array("data")?.iter().enumerate() {
        let path = format!("data[{si}]");
        corpus.documents.push(parse_story(Obj::new(story, &path)?)?);
    }
    Ok(corpus)
}

fn parse_story(story: Obj<'_, '_>) -> Result<ContextDocument, FormatError> {
    let id = story.str("id")?;
    let source = story.str("source")?;
    let text = story.str("story")?;
    let index = CharIndex::new(&text);
    let questions = story.array("questions")?;
    let answers = story.array("answers")?;
    if answers.len() != questions.len() {
        return Err(FormatError::schema(
            story.child_path("answers"),
            format!("{} answers for {} questions", answers.len(), questions.len()),
        ));
    }

    // Extra human references, one aligned list per key.
    let mut additional: Vec<(String, &[Value])> = Vec::new();
    if let Some(extra) = story.map.get("additional_answers") {
        let apath = story.child_path("additional_answers");
        let extra = Obj::new(extra, &apath)?;
        for key in extra.map.keys() {
            let list = extra.array(key)?;
            if list.len() != questions.len() {
                return Err(FormatError::schema(
                    extra.child_path(key),
                    format!("{} answers for {} questions", list.len(), questions.len()),
                ));
            }
            additional.push((key.clone(), list));
        }
    }

    let mut turns = Vec::with_capacity(questions.len());
    for (i, q) in questions.iter().enumerate() {
        let qpath = format!("{}[{i}]", story.child_path("questions"));
        let q = Obj::new(q, &qpath)?;
        let turn_id = q.int("turn_id")?;

        let apath = format!("{}[{i}]", story.child_path("answers"));
        let mut references = vec![parse_answer(Obj::new(&answers[i], &apath)?, &index, turn_id)?];
        for (key, list) in &additional {
            let p = format!("{}.{key}[{i}]", story.child_path("additional_answers"));
            let mut r = parse_answer(Obj::new(&list[i], &p)?, &index, turn_id)?;
            r.provenance.additional_key = Some(key.clone());
            references.push(r);
        }

        let position = i as u32 + 1;
        let mut turn = Turn::new(
            format!("{id}#{turn_id}"),
            position,
            q.str("input_text")?,
            references,
        );
        turn.provenance = TurnProvenance {
            orig_turn_id: (turn_id != position as i64).then_some(turn_id),
            orig_answer_index: None,
            extras: q.extras(&["input_text", "turn_id"]),
        };
        turns.push(turn);
    }

    let mut doc = ContextDocument::new(id.clone(), text);
    doc.domain = source;
    doc.dialogs.push(Dialog {
        dialog_id: id,
        turns,
    });
    doc.provenance = DocProvenance {
        extras: story.extras(STORY_FIELDS),
        ..DocProvenance::default()
    };
    Ok(doc)
}

fn parse_answer(
    answer: Obj<'_, '_>,
    index: &CharIndex<'_>,
    turn_id: i64,
) -> Result<Reference, FormatError> {
    let input = answer.str("input_text")?;
    let start = answer.int("span_start")?;
    let end = answer.int("span_end")?;
    let span_text = answer.opt_str("span_text")?;
    if answer.has("turn_id") && answer.int("turn_id")? != turn_id {
        log::warn!("{}: answer turn_id differs from its question", answer.path);
    }
    for (key, value) in [("span_start", start), ("span_end", end)] {
        if value > index.len() as i64 {
            return Err(FormatError::SpanOutOfBounds {
                path: answer.child_path(key),
                offset: value,
                len: index.len(),
            });
        }
    }
    let rationale = (start >= 0 && start < end).then(|| CharSpan::new(start as usize, end as usize));

    let class = match trim_answer(&input).as_str() {
        "yes" => Some(SpecialClass::Yes),
        "no" => Some(SpecialClass::No),
        "unknown" => Some(SpecialClass::Unknown),
        _ => None,
    };
    let mut r = match class {
        Some(c) => Reference::special(c, input, rationale),
        None => Reference::abstractive(input, rationale),
    };
    if rationale.is_none() {
        r.provenance.raw_rationale = Some((start, end));
    }
    let slice = rationale.and_then(|s| index.slice(s));
    if span_text.is_some() && span_text.as_deref() != slice {
        r.provenance.span_text = span_text;
    }
    r.provenance.extras = answer.extras(ANSWER_FIELDS);
    Ok(r)
}

pub(super) fn serialize(corpus: &UnifiedCorpus) -> Result<Value, FormatError> {
    let keep = corpus.source_format == SourceFormat::Coqa;
    let mut data = Vec::new();
    for (di, doc) in corpus.documents.iter().enumerate() {
        if doc.domain.is_empty() {
            return Err(FormatError::inexpressible(
                FormatTag::Coqa,
                format!("documents[{di}]"),
                "CoQA stories need a source domain",
            ));
        }
        for (gi, dialog) in doc.dialogs.iter().enumerate() {
            let path = format!("documents[{di}].dialogs[{gi}]");
            data.push(serialize_story(doc, dialog, keep, &path)?);
        }
    }
    let mut root = Map::new();
    if keep {
        extend(&mut root, &corpus.extras);
    } else {
        root.insert("version".into(), json!("1.0"));
    }
    root.insert("data".into(), Value::Array(data));
    Ok(Value::Object(root))
}

/// Key each reference is written under: `None` for the primary answer.
fn answer_keys(turn: &Turn) -> Vec<Option<String>> {
    let mut keys = Vec::with_capacity(turn.references.len());
    let mut primary_taken = false;
    let mut generated = 0usize;
    for r in &turn.references {
        match &r.provenance.additional_key {
            Some(k) => keys.push(Some(k.clone())),
            None if !primary_taken => {
                primary_taken = true;
                keys.push(None);
            }
            None => {
                keys.push(Some(generated.to_string()));
                generated += 1;
            }
        }
    }
    if !primary_taken {
        if let Some(first) = keys.first_mut() {
            *first = None;
        }
    }
    keys
}

/// Number of additional-answer slots filled by repeating the primary answer.
pub fn padded_answer_count(corpus: &UnifiedCorpus) -> usize {
    let mut padded = 0;
    for dialog in corpus.documents.iter().flat_map(|d| &d.dialogs) {
        let keys = story_keys(dialog);
        for turn in &dialog.turns {
            let have: Vec<_> = answer_keys(turn).into_iter().flatten().collect();
            padded += keys.iter().filter(|k| !have.contains(k)).count();
        }
    }
    padded
}

fn story_keys(dialog: &Dialog) -> Vec<String> {
    let mut keys: Vec<String> = Vec::new();
    for turn in &dialog.turns {
        for k in answer_keys(turn).into_iter().flatten() {
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    keys
}

fn serialize_story(
    doc: &ContextDocument,
    dialog: &Dialog,
    keep: bool,
    path: &str,
) -> Result<Value, FormatError> {
    let index = CharIndex::new(&doc.context_text);
    let keys = story_keys(dialog);
    let mut questions = Vec::new();
    let mut answers = Vec::new();
    let mut additional: Vec<Vec<Value>> = vec![Vec::new(); keys.len()];

    for (ti, turn) in dialog.turns.iter().enumerate() {
        let turn_id = turn.provenance.orig_turn_id.unwrap_or(turn.turn_index as i64);
        let mut q = Map::new();
        q.insert("input_text".into(), json!(turn.question_text));
        q.insert("turn_id".into(), json!(turn_id));
        if keep {
            extend(&mut q, &turn.provenance.extras);
        }
        questions.push(Value::Object(q));

        let tkeys = answer_keys(turn);
        let mut primary = None;
        let mut by_key: Vec<Option<Value>> = vec![None; keys.len()];
        for (ri, (r, k)) in turn.references.iter().zip(&tkeys).enumerate() {
            let rpath = format!("{path}.turns[{ti}].references[{ri}]");
            let value = serialize_answer(r, &index, turn_id, keep, &rpath)?;
            match k {
                None => primary = Some(value),
                Some(k) => {
                    let slot = keys.iter().position(|x| x == k).expect("key collected");
                    by_key[slot] = Some(value);
                }
            }
        }
        let primary = primary.ok_or_else(|| {
            FormatError::inexpressible(FormatTag::Coqa, format!("{path}.turns[{ti}]"), "turn has no answer")
        })?;
        for (slot, value) in by_key.into_iter().enumerate() {
            additional[slot].push(value.unwrap_or_else(|| primary.clone()));
        }
        answers.push(primary);
    }

    let mut story = Map::new();
    story.insert("source".into(), json!(doc.domain));
    story.insert("id".into(), json!(dialog.dialog_id));
    story.insert("story".into(), json!(doc.context_text));
    story.insert("questions".into(), Value::Array(questions));
    story.insert("answers".into(), Value::Array(answers));
    if !keys.is_empty() {
        let extra: Map<String, Value> = keys
            .into_iter()
            .zip(additional)
            .map(|(k, v)| (k, Value::Array(v)))
            .collect();
        story.insert("additional_answers".into(), Value::Object(extra));
    }
    if keep {
        extend(&mut story, &doc.provenance.extras);
    }
    Ok(Value::Object(story))
}

fn serialize_answer(
    r: &Reference,
    index: &CharIndex<'_>,
    turn_id: i64,
    keep: bool,
    path: &str,
) -> Result<Value, FormatError> {
    let evidence = match r.kind {
        ReferenceKind::Extractive => r.rationale.or(r.span),
        _ => r.rationale,
    };
    let (start, end) = match (evidence, r.provenance.raw_rationale) {
        (Some(s), _) => (s.start as i64, s.end as i64),
        (None, Some(raw)) => raw,
        (None, None) => (-1, -1),
    };
    let input = match r.special {
        Some(c) if c.is_no_answer() && trim_answer(&r.text) != "unknown" => "unknown".to_string(),
        Some(SpecialClass::Yes) if r.text.is_empty() => "yes".to_string(),
        Some(SpecialClass::No) if r.text.is_empty() => "no".to_string(),
        _ => r.text.clone(),
    };
    if input.is_empty() {
        return Err(FormatError::inexpressible(FormatTag::Coqa, path, "empty answer text"));
    }
    let span_text = match (&r.provenance.span_text, evidence) {
        (Some(t), _) => t.clone(),
        (None, Some(s)) => index.slice(s).unwrap_or_default().to_string(),
        (None, None) => "unknown".to_string(),
    };
    let mut a = Map::new();
    a.insert("span_start".into(), json!(start));
    a.insert("span_end".into(), json!(end));
    a.insert("span_text".into(), json!(span_text));
    a.insert("input_text".into(), json!(input));
    a.insert("turn_id".into(), json!(turn_id));
    if keep {
        extend(&mut a, &r.provenance.extras);
    }
    Ok(Value::Object(a))
}
