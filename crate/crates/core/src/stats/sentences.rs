use crate::model::CharSpan;

/// Tokens ending in `.` that do not end a sentence. Single letters followed
/// by a period (initials) are also treated as abbreviations.
pub const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.", "ft.", "gen.", "gov.", "sen.",
    "rep.", "rev.", "capt.", "col.", "lt.", "sgt.", "vs.", "etc.", "e.g.", "i.e.", "u.s.", "u.k.",
    "inc.", "ltd.", "co.", "corp.", "no.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.",
    "sep.", "sept.", "oct.", "nov.", "dec.", "approx.", "dept.", "est.", "fig.", "vol.",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '”', '’', '»'];

fn is_abbreviation(word: &str) -> bool {
    let w = word.trim_start_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
    let mut chars = w.chars();
    let initial = matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_alphabetic());
    initial || ABBREVIATIONS.contains(&w.as_str())
}

/// Sentence spans (character offsets, surrounding whitespace excluded).
///
/// A sentence ends at `.`, `!` or `?`, optionally followed by closing quotes
/// or brackets, when the next character is whitespace or the text ends. A
/// period closing an abbreviation does not end a sentence.
pub fn split_sentences(text: &str) -> Vec<CharSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = None;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if start.is_none() && !c.is_whitespace() {
            start = Some(i);
        }
        if let (Some(s), '.' | '!' | '?') = (start, c) {
            let mut end = i + 1;
            while end < chars.len() && (CLOSERS.contains(&chars[end]) || matches!(chars[end], '.' | '!' | '?')) {
                end += 1;
            }
            let boundary = end == chars.len() || chars[end].is_whitespace();
            let word_start = chars[..=i].iter().rposition(|c| c.is_whitespace()).map_or(0, |p| p + 1);
            let word: String = chars[word_start.max(s)..=i].iter().collect();
            if boundary && !(c == '.' && is_abbreviation(&word)) {
                out.push(CharSpan::new(s, end));
                start = None;
            }
            i = end;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        let end = chars.iter().rposition(|c| !c.is_whitespace()).map_or(s, |p| p + 1);
        out.push(CharSpan::new(s, end));
    }
    out
}
