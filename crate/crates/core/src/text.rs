//! Character-offset helpers. All offsets in this crate count unicode scalar
//! values, never bytes.

use crate::model::CharSpan;

/// Byte positions of every character boundary of a string.
#[derive(Debug, Clone)]
pub struct CharIndex<'a> {
    text: &'a str,
    bytes: Vec<usize>,
}

impl<'a> CharIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        CharIndex { text, bytes }
    }

    /// Number of characters.
    pub fn len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Substring for a span, or `None` if the span leaves the text.
    pub fn slice(&self, span: CharSpan) -> Option<&'a str> {
        if span.start > span.end || span.end > self.len() {
            return None;
        }
        Some(&self.text[self.bytes[span.start]..self.bytes[span.end]])
    }

    /// Substring between two character offsets, clamped to the text.
    pub fn slice_range(&self, start: usize, end: usize) -> &'a str {
        let end = end.min(self.len());
        let start = start.min(end);
        &self.text[self.bytes[start]..self.bytes[end]]
    }
}

/// Number of unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Whitespace-delimited tokens of `text` as character spans.
pub fn whitespace_tokens(text: &str) -> Vec<CharSpan> {
    let mut out = Vec::new();
    let mut start = None;
    let mut pos = 0;
    for ch in text.chars() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(CharSpan { start: s, end: pos });
            }
        } else if start.is_none() {
            start = Some(pos);
        }
        pos += 1;
    }
    if let Some(s) = start {
        out.push(CharSpan { start: s, end: pos });
    }
    out
}

/// Indices of tokens sharing at least one character with `span`.
pub fn tokens_overlapping(tokens: &[CharSpan], span: CharSpan) -> std::ops::Range<usize> {
    let first = tokens.partition_point(|t| t.end <= span.start);
    let last = tokens.partition_point(|t| t.start < span.end);
    first..last.max(first)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_carry_char_offsets() {
        let t = whitespace_tokens("  héllo wörld\tx ");
        let idx = CharIndex::new("  héllo wörld\tx ");
        let words: Vec<_> = t.iter().map(|s| idx.slice(*s).unwrap()).collect();
        assert_eq!(words, ["héllo", "wörld", "x"]);
        assert_eq!(t[1], CharSpan { start: 8, end: 13 });
    }

    #[test]
    fn overlap_any_character() {
        let t = whitespace_tokens("aa bb cc dd");
        assert_eq!(tokens_overlapping(&t, CharSpan { start: 4, end: 7 }), 1..3);
        assert_eq!(tokens_overlapping(&t, CharSpan { start: 2, end: 3 }), 1..1);
        assert_eq!(tokens_overlapping(&t, CharSpan { start: 0, end: 11 }), 0..4);
    }

    #[test]
    fn slice_out_of_range() {
        let idx = CharIndex::new("abc");
        assert_eq!(idx.slice(CharSpan { start: 1, end: 4 }), None);
        assert_eq!(idx.slice(CharSpan { start: 1, end: 3 }), Some("bc"));
    }
}
