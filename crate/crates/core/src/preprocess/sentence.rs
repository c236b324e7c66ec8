use std::collections::HashSet;
use std::fs;
use std::ops::Range;
use std::path::Path;

use crate::error::{EdlError, Result};

const DEFAULT_EN: &str = include_str!("../../data/abbrev/en.txt");
const DEFAULT_ES: &str = include_str!("../../data/abbrev/es.txt");
const DEFAULT_FR: &str = include_str!("../../data/abbrev/fr.txt");
const DEFAULT_DE: &str = include_str!("../../data/abbrev/de.txt");
const DEFAULT_AR: &str = include_str!("../../data/abbrev/ar.txt");
const DEFAULT_JA: &str = include_str!("../../data/abbrev/ja.txt");

/// Lower-cased abbreviations, each including its final period ("dr.").
#[derive(Debug, Clone, Default)]
pub struct Abbreviations {
    entries: HashSet<String>,
}

impl Abbreviations {
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let mut e = l.to_lowercase();
                if !e.ends_with('.') {
                    e.push('.');
                }
                e
            })
            .collect();
        Abbreviations { entries }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| EdlError::io(format!("reading {}", path.display()), e))?;
        Ok(Self::parse(&text))
    }

    /// Built-in list for one of the default languages; empty otherwise.
    pub fn default_for(language: &str) -> Self {
        let text = match language {
            "en" => DEFAULT_EN,
            "es" => DEFAULT_ES,
            "fr" => DEFAULT_FR,
            "de" => DEFAULT_DE,
            "ar" => DEFAULT_AR,
            "ja" => DEFAULT_JA,
            _ => "",
        };
        Self::parse(text)
    }

    pub fn contains(&self, word_with_period: &str) -> bool {
        self.entries.contains(&word_with_period.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '。' | '！' | '？' | '؟' | '۔' | '…')
}

/// Terminators that end a sentence even without following whitespace.
fn is_fullwidth_terminator(c: char) -> bool {
    matches!(c, '。' | '！' | '？')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '’' | '”' | '»' | '」' | '』' | '）' | '`')
}

/// The whitespace-delimited word ending just before byte `dot`, stripped of
/// leading brackets and quotes, with the period appended.
fn word_before(text: &str, from: usize, dot: usize) -> String {
    let head = &text[from..dot];
    let start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let word = head[start..].trim_start_matches(|c: char| !c.is_alphanumeric());
    format!("{word}.")
}

fn trimmed(text: &str, span: Range<usize>) -> Option<Range<usize>> {
    let s = &text[span.clone()];
    let lead = s.len() - s.trim_start().len();
    let trail = s.len() - s.trim_end().len();
    let out = span.start + lead..span.end - trail;
    (out.start < out.end).then_some(out)
}

/// Splits normalized text into sentence spans (byte ranges, trimmed of
/// surrounding whitespace).
///
/// A run of terminators, optionally followed by closing quotes or brackets,
/// ends a sentence when it is followed by whitespace or the end of the text.
/// A single period does not end a sentence when the word before it is a
/// listed abbreviation. Periods inside numbers never qualify because they are
/// followed by a digit.
pub fn break_sentences(text: &str, abbreviations: &Abbreviations) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        let single_period = j - run_start == 1 && c == '.';
        let fullwidth = chars[run_start..j].iter().any(|&(_, t)| is_fullwidth_terminator(t));
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map(|&(p, _)| p).unwrap_or(text.len());
        let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
        let abbreviated = single_period && abbreviations.contains(&word_before(text, start, pos));
        if (at_boundary || fullwidth) && !abbreviated {
            if let Some(span) = trimmed(text, start..end) {
                spans.push(span);
            }
            start = end;
        }
        i = j.max(i + 1);
    }
    if let Some(span) = trimmed(text, start..text.len()) {
        spans.push(span);
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentences(s: &str) -> Vec<&str> {
        break_sentences(s, &Abbreviations::default_for("en"))
            .into_iter()
            .map(|r| &s[r])
            .collect()
    }

    #[test]
    fn abbreviation_does_not_break() {
        assert_eq!(sentences("I met Dr. Smith. He left."), vec!["I met Dr. Smith.", "He left."]);
    }

    #[test]
    fn number_period_does_not_break() {
        assert_eq!(sentences("Pi is 3.14. Tau is 6.28."), vec!["Pi is 3.14.", "Tau is 6.28."]);
    }

    #[test]
    fn no_terminator_is_one_sentence() {
        assert_eq!(sentences("  just some words "), vec!["just some words"]);
        assert!(sentences("   ").is_empty());
    }

    #[test]
    fn closing_quotes_stay_with_sentence() {
        let s = "He said 'the defining fight of the tech industry.' Then left!";
        assert_eq!(
            sentences(s),
            vec!["He said 'the defining fight of the tech industry.'", "Then left!"]
        );
    }

    #[test]
    fn vs_abbreviation() {
        let s = "Apple and Google and iOS vs.  Android is big.";
        assert_eq!(sentences(s), vec![s]);
    }

    #[test]
    fn multiple_terminators() {
        assert_eq!(sentences("Really?! Yes..."), vec!["Really?!", "Yes..."]);
    }

    #[test]
    fn fullwidth_terminators_break_without_space() {
        let s = "東京に行った。楽しかった！";
        assert_eq!(sentences(s), vec!["東京に行った。", "楽しかった！"]);
    }

    #[test]
    fn custom_abbreviations() {
        let abbrev = Abbreviations::parse("# comment\nAprox\nsr.\n");
        assert_eq!(abbrev.len(), 2);
        assert!(abbrev.contains("aprox."));
        assert!(abbrev.contains("Sr."));
        let s = "El Sr. Pérez llegó. Luego se fue.";
        let got: Vec<_> = break_sentences(s, &abbrev).into_iter().map(|r| &s[r]).collect();
        assert_eq!(got, vec!["El Sr. Pérez llegó.", "Luego se fue."]);
    }

    #[test]
    fn spans_cover_all_non_whitespace() {
        let s = " A b. (C d.) E? f ";
        let spans = break_sentences(s, &Abbreviations::default());
        let covered: usize = spans.iter().map(|r| s[r.clone()].chars().filter(|c| !c.is_whitespace()).count()).sum();
        assert_eq!(covered, s.chars().filter(|c| !c.is_whitespace()).count());
    }
}
