use super::json::{extend, Obj};
use super::squad::{parse_span_answer, span_answer};
use super::{FormatError, FormatTag, QUAC_SENTINEL};
use crate::model::{
    ContextDocument, Dialog, DocProvenance, FollowupFlag, Reference, ReferenceKind, SourceFormat,
    SpecialClass, Turn, TurnProvenance, UnifiedCorpus, YesNoFlag,
};
use crate::text::{char_len, CharIndex};
use serde_json::{json, Map, Value};

const DEFAULT_SENTINEL: &str = " CANNOTANSWER";

pub(super) fn parse(root: Value) -> Result<UnifiedCorpus, FormatError> {
    let top = Obj::new(&root, "")?;
    let mut corpus = UnifiedCorpus::new("quac", SourceFormat::Quac);
    corpus.extras = top.extras(&["data"]);

    for (ri, record) in top.array("data")?.iter().enumerate() {
        let rpath = format!("data[{ri}]");
        let rec = Obj::new(record, &rpath)?;
        let title = rec.opt_str("title")?.unwrap_or_default();
        let record_extras = rec.extras(&["paragraphs", "title"]);
        for (pi, paragraph) in rec.array("paragraphs")?.iter().enumerate() {
            let ppath = format!("{rpath}.paragraphs[{pi}]");
            let para = Obj::new(paragraph, &ppath)?;
            let raw = para.str("context")?;
            let id = para.str("id")?;
            let (context, sentinel) = match raw.strip_suffix(QUAC_SENTINEL) {
                Some(prefix) => match prefix.strip_suffix(' ') {
                    Some(p) => (p.to_string(), Some(DEFAULT_SENTINEL.to_string())),
                    None => (prefix.to_string(), Some(QUAC_SENTINEL.to_string())),
                },
                None => (raw.clone(), None),
            };
            let sentinel_start = sentinel
                .as_ref()
                .map(|s| (char_len(&context) + char_len(s) - char_len(QUAC_SENTINEL)) as i64);
            let index = CharIndex::new(&context);

            let mut turns = Vec::new();
            for (qi, qa) in para.array("qas")?.iter().enumerate() {
                let qpath = format!("{ppath}.qas[{qi}]");
                let qa = Obj::new(qa, &qpath)?;
                turns.push(parse_qa(qa, qi, &index, sentinel_start)?);
            }

            let mut doc = ContextDocument::new(id.clone(), context);
            doc.title = title.clone();
            doc.dialogs.push(Dialog {
                dialog_id: id,
                turns,
            });
            doc.provenance = DocProvenance {
                article: Some(ri),
                article_extras: record_extras.clone(),
                extras: para.extras(&["context", "id", "qas"]),
                sentinel,
            };
            corpus.documents.push(doc);
        }
    }
    Ok(corpus)
}

fn parse_answer(
    answer: Obj<'_, '_>,
    index: &CharIndex<'_>,
    sentinel_start: Option<i64>,
) -> Result<Reference, FormatError> {
    if answer.str("text")? == QUAC_SENTINEL {
        let start = answer.int("answer_start")?;
        let mut r = Reference::special(SpecialClass::CannotAnswer, QUAC_SENTINEL, None);
        if sentinel_start != Some(start) {
            r.provenance.answer_start = Some(start);
        }
        r.provenance.extras = answer.extras(&["text", "answer_start"]);
        return Ok(r);
    }
    parse_span_answer(answer, index)
}

fn parse_qa(
    qa: Obj<'_, '_>,
    position: usize,
    index: &CharIndex<'_>,
    sentinel_start: Option<i64>,
) -> Result<Turn, FormatError> {
    let apath = qa.child_path("answers");
    let references = qa
        .array("answers")?
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let p = format!("{apath}[{i}]");
            parse_answer(Obj::new(a, &p)?, index, sentinel_start)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if references.is_empty() {
        return Err(FormatError::schema(apath, "question has no answers"));
    }

    let mut known = vec!["followup", "yesno", "question", "answers", "id"];
    let mut orig_answer_index = None;
    if qa.has("orig_answer") {
        let opath = qa.child_path("orig_answer");
        let orig = parse_answer(
            Obj::new(&qa.map["orig_answer"], &opath)?,
            index,
            sentinel_start,
        )?;
        // The original annotator's answer is normally the last in the list.
        orig_answer_index = references.iter().rposition(|r| *r == orig);
        if orig_answer_index.is_some() {
            known.push("orig_answer");
        }
    }

    let yesno_flag = match qa.opt_str("yesno")?.as_deref() {
        None => YesNoFlag::Unspecified,
        Some("y") => YesNoFlag::Yes,
        Some("n") => YesNoFlag::No,
        Some("x") => YesNoFlag::Neither,
        Some(other) => {
            return Err(FormatError::schema(
                qa.child_path("yesno"),
                format!("unknown yesno marker {other:?}"),
            ))
        }
    };
    let followup_flag = match qa.opt_str("followup")?.as_deref() {
        None => FollowupFlag::Unspecified,
        Some("y") => FollowupFlag::Yes,
        Some("n") => FollowupFlag::No,
        Some("m") => FollowupFlag::Maybe,
        Some(other) => {
            return Err(FormatError::schema(
                qa.child_path("followup"),
                format!("unknown followup marker {other:?}"),
            ))
        }
    };

    let mut turn = Turn::new(
        qa.str("id")?,
        position as u32 + 1,
        qa.str("question")?,
        references,
    );
    turn.yesno_flag = yesno_flag;
    turn.followup_flag = followup_flag;
    turn.provenance = TurnProvenance {
        orig_turn_id: None,
        orig_answer_index,
        extras: qa.extras(&known),
    };
    Ok(turn)
}

pub(super) fn serialize(corpus: &UnifiedCorpus) -> Result<Value, FormatError> {
    let keep = corpus.source_format == SourceFormat::Quac;
    let mut data: Vec<Value> = Vec::new();
    let mut current: Option<(usize, Vec<Value>, &ContextDocument)> = None;

    for (di, doc) in corpus.documents.iter().enumerate() {
        let sentinel = doc
            .provenance
            .sentinel
            .as_deref()
            .filter(|s| s.ends_with(QUAC_SENTINEL))
            .unwrap_or(DEFAULT_SENTINEL);
        let context = format!("{}{sentinel}", doc.context_text);
        let sentinel_start = (char_len(&context) - char_len(QUAC_SENTINEL)) as i64;

        let mut paragraphs = Vec::new();
        for (gi, dialog) in doc.dialogs.iter().enumerate() {
            let gpath = format!("documents[{di}].dialogs[{gi}]");
            let qas = dialog
                .turns
                .iter()
                .enumerate()
                .map(|(ti, t)| serialize_turn(t, keep, sentinel_start, &format!("{gpath}.turns[{ti}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let mut para = Map::new();
            para.insert("context".into(), json!(context));
            para.insert("id".into(), json!(dialog.dialog_id));
            para.insert("qas".into(), Value::Array(qas));
            if keep {
                extend(&mut para, &doc.provenance.extras);
            }
            paragraphs.push(Value::Object(para));
        }

        let same = matches!((&current, doc.provenance.article),
            (Some((a, _, _)), Some(b)) if *a == b);
        if !same {
            if let Some((_, paras, first)) = current.take() {
                data.push(record(paras, first, keep));
            }
            current = Some((doc.provenance.article.unwrap_or(usize::MAX), Vec::new(), doc));
        }
        if let Some((_, paras, _)) = current.as_mut() {
            paras.extend(paragraphs);
        }
    }
    if let Some((_, paras, first)) = current {
        data.push(record(paras, first, keep));
    }

    let mut root = Map::new();
    root.insert("data".into(), Value::Array(data));
    if keep {
        extend(&mut root, &corpus.extras);
    }
    Ok(Value::Object(root))
}

fn record(paragraphs: Vec<Value>, doc: &ContextDocument, keep: bool) -> Value {
    let mut rec = Map::new();
    rec.insert("paragraphs".into(), Value::Array(paragraphs));
    if keep {
        extend(&mut rec, &doc.provenance.article_extras);
    }
    rec.insert("title".into(), json!(doc.title));
    Value::Object(rec)
}

fn serialize_answer(
    r: &Reference,
    keep: bool,
    sentinel_start: i64,
    path: &str,
) -> Result<Value, FormatError> {
    if r.is_no_answer() {
        let mut map = Map::new();
        map.insert("text".into(), json!(QUAC_SENTINEL));
        map.insert(
            "answer_start".into(),
            json!(r.provenance.answer_start.unwrap_or(sentinel_start)),
        );
        if keep {
            extend(&mut map, &r.provenance.extras);
        }
        return Ok(Value::Object(map));
    }
    if r.kind == ReferenceKind::Special {
        return Err(FormatError::inexpressible(
            FormatTag::Quac,
            path,
            "yes/no answer; project to extractive first",
        ));
    }
    span_answer(r, keep).ok_or_else(|| {
        FormatError::inexpressible(
            FormatTag::Quac,
            path,
            "abstractive answer without a span; project to extractive first",
        )
    })
}

fn serialize_turn(
    turn: &Turn,
    keep: bool,
    sentinel_start: i64,
    path: &str,
) -> Result<Value, FormatError> {
    let answers = turn
        .references
        .iter()
        .enumerate()
        .map(|(ri, r)| serialize_answer(r, keep, sentinel_start, &format!("{path}.references[{ri}]")))
        .collect::<Result<Vec<_>, _>>()?;

    let mut qa = Map::new();
    qa.insert(
        "followup".into(),
        json!(match turn.followup_flag {
            FollowupFlag::Yes => "y",
            FollowupFlag::No => "n",
            FollowupFlag::Maybe | FollowupFlag::Unspecified => "m",
        }),
    );
    qa.insert(
        "yesno".into(),
        json!(match turn.yesno_flag {
            YesNoFlag::Yes => "y",
            YesNoFlag::No => "n",
            YesNoFlag::Neither | YesNoFlag::Unspecified => "x",
        }),
    );
    qa.insert("question".into(), json!(turn.question_text));
    let orig = match turn.provenance.orig_answer_index {
        Some(i) => answers.get(i).cloned(),
        // Re-emitted verbatim from extras, or absent in the source.
        None if keep => None,
        None => answers.last().cloned(),
    };
    qa.insert("answers".into(), Value::Array(answers));
    qa.insert("id".into(), json!(turn.question_id));
    if let Some(orig) = orig {
        qa.insert("orig_answer".into(), orig);
    }
    if keep {
        extend(&mut qa, &turn.provenance.extras);
    }
    Ok(Value::Object(qa))
}
