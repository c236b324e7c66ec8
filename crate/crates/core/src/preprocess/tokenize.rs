use std::ops::Range;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

/// A word token. Offsets are byte offsets into the normalized text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
    /// Position of the token in the whole document.
    pub index: usize,
    pub sentence: usize,
}

fn is_word(segment: &str) -> bool {
    segment.chars().any(char::is_alphanumeric)
}

/// Splits `text[span]` into word tokens following the Unicode word-boundary
/// rules. Segments without a letter or digit (punctuation, whitespace) are
/// dropped. Token indices start at `first_index`.
pub fn tokenize(text: &str, span: Range<usize>, sentence: usize, first_index: usize) -> Vec<Token> {
    let base = span.start;
    text[span]
        .split_word_bound_indices()
        .filter(|(_, seg)| is_word(seg))
        .enumerate()
        .map(|(i, (off, seg))| Token {
            text: seg.to_string(),
            start: base + off,
            end: base + off + seg.len(),
            index: first_index + i,
            sentence,
        })
        .collect()
}

/// Word segments of an arbitrary string, case-folded.
pub fn folded_words(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split_word_bounds().filter(|seg| is_word(seg)).map(str::to_lowercase)
}

/// The dictionary lookup key for a surface form: case-folded word tokens
/// joined by single spaces.
pub fn surface_key(s: &str) -> String {
    let mut key = String::with_capacity(s.len());
    for word in folded_words(s) {
        if !key.is_empty() {
            key.push(' ');
        }
        key.push_str(&word);
    }
    key
}
