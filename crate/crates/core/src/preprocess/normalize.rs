//! Text normalization.
//!
//! Two rules apply. HTML character entities (`&amp;`, `&#233;`, `&#xE9;`)
//! are decoded for every language. For English only, non-ASCII punctuation
//! becomes a space and accented Latin letters lose their diacritics.
//!
//! Every byte of the normalized text remembers the byte range of the
//! original text it came from, so spans found later can be mapped back.

use std::ops::Range;

use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::char::decompose_canonical;

#[derive(Debug, Clone)]
pub struct NormalizedText {
    pub text: String,
    orig_start: Vec<u32>,
    orig_end: Vec<u32>,
    original_len: usize,
}

impl NormalizedText {
    /// Maps a byte span of the normalized text back to a byte span of the
    /// original text.
    pub fn original_span(&self, span: Range<usize>) -> Range<usize> {
        if span.start >= span.end {
            let at = self
                .orig_start
                .get(span.start)
                .map(|&v| v as usize)
                .unwrap_or(self.original_len);
            return at..at;
        }
        let start = self.orig_start[span.start] as usize;
        let end = self.orig_end[span.end - 1] as usize;
        start..end
    }

    fn push(&mut self, s: &str, from: Range<usize>) {
        self.text.push_str(s);
        for _ in 0..s.len() {
            self.orig_start.push(from.start as u32);
            self.orig_end.push(from.end as u32);
        }
    }
}

fn named_entity(name: &str) -> Option<char> {
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "ndash" => '\u{2013}',
        "mdash" => '\u{2014}',
        "lsquo" => '\u{2018}',
        "rsquo" => '\u{2019}',
        "ldquo" => '\u{201c}',
        "rdquo" => '\u{201d}',
        "hellip" => '\u{2026}',
        "copy" => '\u{a9}',
        "reg" => '\u{ae}',
        "eacute" => 'é',
        "egrave" => 'è',
        "aacute" => 'á',
        "agrave" => 'à',
        "iacute" => 'í',
        "oacute" => 'ó',
        "uacute" => 'ú',
        "ntilde" => 'ñ',
        "ccedil" => 'ç',
        "uuml" => 'ü',
        "ouml" => 'ö',
        "auml" => 'ä',
        "szlig" => 'ß',
        _ => return None,
    })
}

/// Decodes the entity starting at `s` (which begins with `&`). Returns the
/// character and the byte length consumed.
fn decode_entity(s: &str) -> Option<(char, usize)> {
    let semi = s[1..].find(';')? + 1;
    if semi > 12 {
        return None;
    }
    let body = &s[1..semi];
    let c = if let Some(num) = body.strip_prefix('#') {
        let code = match num.strip_prefix(['x', 'X']) {
            Some(hex) => u32::from_str_radix(hex, 16).ok()?,
            None => num.parse::<u32>().ok()?,
        };
        char::from_u32(code)?
    } else {
        named_entity(body)?
    };
    Some((c, semi + 1))
}

fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
    )
}

fn special_fold(c: char) -> Option<&'static str> {
    Some(match c {
        'ß' => "ss",
        'æ' => "ae",
        'Æ' => "AE",
        'œ' => "oe",
        'Œ' => "OE",
        'ø' => "o",
        'Ø' => "O",
        'đ' | 'ð' => "d",
        'Đ' | 'Ð' => "D",
        'ł' => "l",
        'Ł' => "L",
        'þ' => "th",
        'Þ' => "TH",
        'ı' => "i",
        _ => return None,
    })
}

fn fold_english(c: char, out: &mut String) {
    if c.is_ascii() {
        out.push(c);
        return;
    }
    if is_punctuation(c) {
        out.push(' ');
        return;
    }
    if let Some(s) = special_fold(c) {
        out.push_str(s);
        return;
    }
    let mut base = String::new();
    let mut ascii = true;
    decompose_canonical(c, |d| {
        if get_general_category(d) != GeneralCategory::NonspacingMark {
            ascii &= d.is_ascii();
            base.push(d);
        }
    });
    if ascii && !base.is_empty() {
        out.push_str(&base);
    } else {
        out.push(c);
    }
}

pub fn normalize(text: &str, language: &str) -> NormalizedText {
    let english = language == "en";
    let mut out = NormalizedText {
        text: String::with_capacity(text.len()),
        orig_start: Vec::with_capacity(text.len()),
        orig_end: Vec::with_capacity(text.len()),
        original_len: text.len(),
    };
    let mut buf = String::new();
    let mut pos = 0;
    while pos < text.len() {
        let rest = &text[pos..];
        let (c, width) = match rest.starts_with('&').then(|| decode_entity(rest)).flatten() {
            Some(decoded) => decoded,
            None => {
                let c = rest.chars().next().expect("non-empty");
                (c, c.len_utf8())
            }
        };
        buf.clear();
        if english {
            fold_english(c, &mut buf);
        } else {
            buf.push(c);
        }
        out.push(&buf, pos..pos + width);
        pos += width;
    }
    out
}
