//! Readers and writers for the official SQuAD 2.0, QuAC and CoQA JSON files.
//!
//! Parsing is whole-file: the payload is decoded into a JSON tree first and
//! then walked with path-tracking accessors, so schema errors name the
//! offending element (`data[3].paragraphs[0].qas[7].answers`). Fields the
//! model does not know are kept verbatim in `extras` maps and written back
//! when the output format matches the source format.
//!
//! The schemas themselves are documented in `docs/formats.md` at the
//! repository root.

mod coqa;
pub use coqa::padded_answer_count as coqa_padded_answers;
mod json;
mod quac;
mod squad;

use crate::model::{SourceFormat, UnifiedCorpus};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// The three supported file layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormatTag {
    Squad2,
    Quac,
    Coqa,
}

impl FormatTag {
    pub const ALL: [FormatTag; 3] = [FormatTag::Squad2, FormatTag::Quac, FormatTag::Coqa];

    pub fn name(self) -> &'static str {
        match self {
            FormatTag::Squad2 => "squad2",
            FormatTag::Quac => "quac",
            FormatTag::Coqa => "coqa",
        }
    }

    pub fn source_format(self) -> SourceFormat {
        match self {
            FormatTag::Squad2 => SourceFormat::Squad2,
            FormatTag::Quac => SourceFormat::Quac,
            FormatTag::Coqa => SourceFormat::Coqa,
        }
    }

    pub fn from_source(format: SourceFormat) -> Option<FormatTag> {
        match format {
            SourceFormat::Squad2 => Some(FormatTag::Squad2),
            SourceFormat::Quac => Some(FormatTag::Quac),
            SourceFormat::Coqa => Some(FormatTag::Coqa),
            SourceFormat::Synthetic => None,
        }
    }
}

impl fmt::Display for FormatTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormatTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "squad2" | "squad" | "squad2.0" => Ok(FormatTag::Squad2),
            "quac" => Ok(FormatTag::Quac),
            "coqa" => Ok(FormatTag::Coqa),
            other => Err(format!("unknown format {other:?} (expected squad2, quac or coqa)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("malformed input at byte {offset}: {message}")]
    MalformedInput { offset: usize, message: String },
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("span out of bounds at {path}: offset {offset} exceeds context length {len}")]
    SpanOutOfBounds { path: String, offset: i64, len: usize },
    #[error("cannot express in {format}: {path}: {message}")]
    Inexpressible {
        format: FormatTag,
        path: String,
        message: String,
    },
}

impl FormatError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::SchemaViolation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn inexpressible(
        format: FormatTag,
        path: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        FormatError::Inexpressible {
            format,
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Parse an official-format payload into a corpus.
pub fn parse(format: FormatTag, payload: &[u8]) -> Result<UnifiedCorpus, FormatError> {
    let root = json::decode(payload)?;
    match format {
        FormatTag::Squad2 => squad::parse(root),
        FormatTag::Quac => quac::parse(root),
        FormatTag::Coqa => coqa::parse(root),
    }
}

/// Write a corpus in an official layout. Output bytes depend only on the corpus.
pub fn serialize(format: FormatTag, corpus: &UnifiedCorpus) -> Result<Vec<u8>, FormatError> {
    let value = match format {
        FormatTag::Squad2 => squad::serialize(corpus)?,
        FormatTag::Quac => quac::serialize(corpus)?,
        FormatTag::Coqa => coqa::serialize(corpus)?,
    };
    Ok(serde_json::to_vec(&value).expect("JSON values always serialize"))
}

/// Guess the layout of a payload from its structure.
pub fn detect(payload: &[u8]) -> Result<FormatTag, FormatError> {
    let root = json::decode(payload)?;
    let first = root
        .get("data")
        .and_then(|d| d.as_array())
        .and_then(|d| d.first())
        .ok_or_else(|| FormatError::schema("data", "expected a non-empty data array"))?;
    if first.get("story").is_some() {
        return Ok(FormatTag::Coqa);
    }
    let qa = first
        .get("paragraphs")
        .and_then(|p| p.get(0))
        .and_then(|p| p.get("qas"))
        .and_then(|q| q.get(0));
    match qa {
        Some(qa) if qa.get("followup").is_some() || qa.get("yesno").is_some() => Ok(FormatTag::Quac),
        Some(_) => Ok(FormatTag::Squad2),
        None => Err(FormatError::schema("data[0]", "cannot tell the format of this file")),
    }
}

/// The official no-answer sentinel appended to every QuAC context.
pub const QUAC_SENTINEL: &str = "CANNOTANSWER";

/// Lowercase and trim whitespace and punctuation, for yes/no/unknown detection.
pub fn trim_answer(text: &str) -> String {
    text.trim_matches(|c: char| c.is_whitespace() || c.is_ascii_punctuation())
        .to_lowercase()
}
