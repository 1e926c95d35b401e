//! Unified data model, converters, extractive oracle, corpus statistics and
//! official-protocol scorers for the SQuAD 2.0, QuAC and CoQA reading
//! comprehension corpora.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: the format-neutral corpus model and its structural validator.
//! - [`formats`]: readers and writers for the three official JSON layouts.
//! - [`convert`]: dialog synthesis/flattening, extractive projection and
//!   previous-answer marking.
//! - [`oracle`]: max-F1 span search and the extractive upper bound.
//! - [`eval`]: answer normalization, token F1 and the three scoring protocols.
//! - [`stats`]: corpus profiles and annotation aggregation.
//!
//! Overlap arithmetic is generic over [`scalar::Scalar`]; scoring runs in
//! [`Score`] while the span search compares candidates exactly in
//! [`ExactScore`].

pub mod convert;
pub mod eval;
pub mod formats;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod stats;
pub mod text;

/// Floating point type used for every reported score.
pub type Score = f64;

/// Exact rational type used where score ties must be decided without rounding.
pub type ExactScore = num_rational::Ratio<u64>;

pub use formats::FormatTag;
pub use model::{
    CharSpan, ContextDocument, Diagnostic, Dialog, Reference, ReferenceKind, Severity,
    SourceFormat, SpecialClass, Turn, UnifiedCorpus,
};
