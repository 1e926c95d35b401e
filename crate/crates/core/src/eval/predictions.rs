use super::EvalError;
use crate::model::FollowupFlag;
use serde_json::Value;
use std::collections::BTreeMap;

/// Answer class a model may emit instead of, or alongside, a text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictedClass {
    Yes,
    No,
    Unanswerable,
}

impl PredictedClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictedClass::Yes => "YES",
            PredictedClass::No => "NO",
            PredictedClass::Unanswerable => "UNANSWERABLE",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "YES" | "Y" => Some(PredictedClass::Yes),
            "NO" | "N" => Some(PredictedClass::No),
            "UNANSWERABLE" | "UNKNOWN" | "CANNOTANSWER" | "CANNOT_ANSWER" => {
                Some(PredictedClass::Unanswerable)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Prediction {
    pub text: String,
    pub class: Option<PredictedClass>,
    /// Dialog-act prediction, only read by the QuAC protocol.
    pub followup: Option<FollowupFlag>,
}

impl Prediction {
    pub fn text(text: impl Into<String>) -> Self {
        Prediction {
            text: text.into(),
            ..Default::default()
        }
    }

    pub fn class(class: PredictedClass) -> Self {
        Prediction {
            class: Some(class),
            ..Default::default()
        }
    }
}

/// Predictions keyed by question id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredictionSet {
    pub answers: BTreeMap<String, Prediction>,
}

impl FromIterator<(String, Prediction)> for PredictionSet {
    fn from_iter<I: IntoIterator<Item = (String, Prediction)>>(iter: I) -> Self {
        PredictionSet {
            answers: iter.into_iter().collect(),
        }
    }
}

impl PredictionSet {
    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    pub fn get(&self, question_id: &str) -> Option<&Prediction> {
        self.answers.get(question_id)
    }

    pub fn insert(&mut self, question_id: impl Into<String>, prediction: Prediction) {
        self.answers.insert(question_id.into(), prediction);
    }

    /// Read any of the accepted layouts:
    ///
    /// - an object mapping question id to an answer string, or to
    ///   `{"answer": str, "class": "YES"|"NO"|"UNANSWERABLE"}`;
    /// - a CoQA-style array of `{"id", "turn_id", "answer"}`, keyed
    ///   `<id>#<turn_id>` like parsed CoQA questions;
    /// - QuAC-style lines of `{"qid": [..], "best_span_str": [..],
    ///   "yesno": [..], "followup": [..]}`.
    pub fn from_slice(payload: &[u8]) -> Result<Self, EvalError> {
        let text = std::str::from_utf8(payload)
            .map_err(|e| malformed(format!("invalid UTF-8 at byte {}", e.valid_up_to())))?;
        match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(map)) if !map.contains_key("qid") => map
                .into_iter()
                .map(|(qid, v)| Ok((qid.clone(), map_entry(&qid, &v)?)))
                .collect(),
            Ok(Value::Array(items)) => items.iter().enumerate().map(|(i, v)| coqa_entry(i, v)).collect(),
            Ok(Value::Object(_)) | Err(_) => quac_lines(text),
            Ok(_) => Err(malformed("expected an object, an array or JSON lines")),
        }
    }

    /// Object layout written back by [`PredictionSet::from_slice`].
    pub fn to_json(&self) -> Value {
        let map = self
            .answers
            .iter()
            .map(|(qid, p)| {
                let v = match p.class {
                    None => Value::String(p.text.clone()),
                    Some(c) => serde_json::json!({"answer": p.text, "class": c.as_str()}),
                };
                (qid.clone(), v)
            })
            .collect();
        Value::Object(map)
    }
}

fn malformed(message: impl Into<String>) -> EvalError {
    EvalError::MalformedPredictions(message.into())
}

fn map_entry(qid: &str, v: &Value) -> Result<Prediction, EvalError> {
    match v {
        Value::String(s) => Ok(Prediction::text(s.as_str())),
        Value::Object(o) => {
            let text = o.get("answer").and_then(Value::as_str).unwrap_or_default();
            let class = match o.get("class") {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) => Some(
                    PredictedClass::parse(s).ok_or_else(|| malformed(format!("{qid}: unknown class {s:?}")))?,
                ),
                Some(_) => return Err(malformed(format!("{qid}: class must be a string"))),
            };
            if o.get("answer").is_some_and(|a| !a.is_string()) {
                return Err(malformed(format!("{qid}: answer must be a string")));
            }
            Ok(Prediction {
                text: text.to_string(),
                class,
                followup: None,
            })
        }
        _ => Err(malformed(format!("{qid}: expected a string or an object"))),
    }
}

fn coqa_entry(i: usize, v: &Value) -> Result<(String, Prediction), EvalError> {
    let id = v.get("id").and_then(Value::as_str);
    let turn = v.get("turn_id").and_then(Value::as_i64);
    let answer = v.get("answer").and_then(Value::as_str);
    match (id, turn, answer) {
        (Some(id), Some(turn), Some(answer)) => Ok((format!("{id}#{turn}"), Prediction::text(answer))),
        _ => Err(malformed(format!("[{i}]: expected id, turn_id and answer"))),
    }
}

fn quac_lines(text: &str) -> Result<PredictionSet, EvalError> {
    let mut out = PredictionSet::default();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v: Value = serde_json::from_str(line).map_err(|e| malformed(format!("line {}: {e}", n + 1)))?;
        let list = |key: &str| -> Result<Vec<&str>, EvalError> {
            v.get(key)
                .and_then(Value::as_array)
                .and_then(|a| a.iter().map(Value::as_str).collect::<Option<Vec<_>>>())
                .ok_or_else(|| malformed(format!("line {}: {key} must be a list of strings", n + 1)))
        };
        let qids = list("qid")?;
        let spans = list("best_span_str")?;
        let yesno = v.get("yesno").map(|_| list("yesno")).transpose()?;
        let followup = v.get("followup").map(|_| list("followup")).transpose()?;
        if spans.len() != qids.len()
            || yesno.as_ref().is_some_and(|y| y.len() != qids.len())
            || followup.as_ref().is_some_and(|f| f.len() != qids.len())
        {
            return Err(malformed(format!("line {}: list lengths differ", n + 1)));
        }
        for (i, qid) in qids.iter().enumerate() {
            let class = match yesno.as_ref().map(|y| y[i]) {
                Some("y") => Some(PredictedClass::Yes),
                Some("n") => Some(PredictedClass::No),
                _ => None,
            };
            let followup = followup.as_ref().map(|f| match f[i] {
                "y" => FollowupFlag::Yes,
                "n" => FollowupFlag::No,
                "m" => FollowupFlag::Maybe,
                _ => FollowupFlag::Unspecified,
            });
            out.insert(
                *qid,
                Prediction {
                    text: spans[i].to_string(),
                    class,
                    followup,
                },
            );
        }
    }
    Ok(out)
}
