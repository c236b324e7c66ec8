//! Character trigram naive-Bayes language identification.
//!
//! Text is lower-cased and split into letter runs; each run is padded with a
//! space on both sides and every character trigram is counted. A profile
//! stores add-one smoothed log-probabilities per trigram plus the
//! log-probability of an unseen trigram.
//!
//! Profile files are plain text:
//!
//! ```text
//! @language<TAB>en
//! @unseen<TAB>-11.52
//! <trigram><TAB><log-probability>
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{EdlError, Result};

type Gram = u64;

fn pack(a: char, b: char, c: char) -> Gram {
    ((a as u64) << 42) | ((b as u64) << 21) | c as u64
}

fn unpack(g: Gram) -> String {
    let mask = (1u64 << 21) - 1;
    [g >> 42, (g >> 21) & mask, g & mask]
        .iter()
        .map(|&v| char::from_u32(v as u32).unwrap_or(' '))
        .collect()
}

fn for_each_gram(text: &str, mut f: impl FnMut(Gram)) {
    let mut window = [' ', ' ', ' '];
    let mut in_word = false;
    let mut len = 0;
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphabetic() {
            if !in_word {
                window = [' ', ' ', ' '];
                in_word = true;
                len = 0;
            }
            window = [window[1], window[2], c];
            len += 1;
            if len >= 2 {
                f(pack(window[0], window[1], window[2]));
            }
        } else if in_word {
            window = [window[1], window[2], ' '];
            f(pack(window[0], window[1], window[2]));
            in_word = false;
        }
    }
    if in_word {
        window = [window[1], window[2], ' '];
        f(pack(window[0], window[1], window[2]));
    }
}

#[derive(Debug, Clone)]
pub struct LanguageProfile {
    pub language: String,
    log_probs: HashMap<Gram, f64>,
    unseen: f64,
}

impl LanguageProfile {
    fn log_prob(&self, g: Gram) -> f64 {
        self.log_probs.get(&g).copied().unwrap_or(self.unseen)
    }

    pub fn gram_count(&self) -> usize {
        self.log_probs.len()
    }

    pub fn to_text(&self) -> String {
        let sorted: BTreeMap<String, f64> =
            self.log_probs.iter().map(|(&g, &lp)| (unpack(g), lp)).collect();
        let mut out = format!("@language\t{}\n@unseen\t{}\n", self.language, self.unseen);
        for (gram, lp) in sorted {
            out.push_str(&format!("{gram}\t{lp}\n"));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut language = None;
        let mut unseen = None;
        let mut log_probs = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let lineno = n + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| EdlError::parse(path, lineno, "expected two tab-separated fields"))?;
            let number = || {
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| EdlError::parse(path, lineno, format!("bad number {value:?}")))
            };
            match key {
                "@language" => language = Some(value.trim().to_string()),
                "@unseen" => unseen = Some(number()?),
                gram => {
                    let chars: Vec<char> = gram.chars().collect();
                    if chars.len() != 3 {
                        return Err(EdlError::parse(path, lineno, format!("trigram {gram:?} is not 3 characters")));
                    }
                    log_probs.insert(pack(chars[0], chars[1], chars[2]), number()?);
                }
            }
        }
        let language = language.ok_or_else(|| EdlError::parse(path, 1, "missing @language header"))?;
        let unseen = unseen.ok_or_else(|| EdlError::parse(path, 1, "missing @unseen header"))?;
        Ok(LanguageProfile { language, log_probs, unseen })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| EdlError::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, path)
    }
}

/// Trains one profile per language from `(language, sample text)` pairs.
/// Several samples may share a language. Profiles come back sorted by
/// language code.
pub fn train_profiles<'a>(samples: impl IntoIterator<Item = (&'a str, &'a str)>) -> Vec<LanguageProfile> {
    let mut counts: BTreeMap<String, HashMap<Gram, u64>> = BTreeMap::new();
    for (lang, text) in samples {
        let table = counts.entry(lang.to_string()).or_default();
        for_each_gram(text, |g| *table.entry(g).or_insert(0) += 1);
    }
    let vocabulary: HashSet<Gram> = counts.values().flat_map(|t| t.keys().copied()).collect();
    let v = vocabulary.len() as f64;
    counts
        .into_iter()
        .map(|(language, table)| {
            let total: u64 = table.values().sum();
            let denom = (total as f64 + v).ln();
            let log_probs = table
                .into_iter()
                .map(|(g, c)| (g, (c as f64 + 1.0).ln() - denom))
                .collect();
            LanguageProfile { language, log_probs, unseen: -denom }
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct LanguageDetector {
    profiles: Vec<LanguageProfile>,
}

impl LanguageDetector {
    pub fn new(mut profiles: Vec<LanguageProfile>) -> Self {
        profiles.sort_by(|a, b| a.language.cmp(&b.language));
        LanguageDetector { profiles }
    }

    pub fn profiles(&self) -> &[LanguageProfile] {
        &self.profiles
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.profiles.iter().map(|p| p.language.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Returns the most probable language and its posterior probability
    /// under a uniform prior over the trained languages.
    pub fn detect(&self, text: &str) -> Result<(String, f64)> {
        if text.trim().is_empty() {
            return Err(EdlError::EmptyText);
        }
        if self.profiles.is_empty() {
            return Err(EdlError::NoProfiles);
        }
        let mut grams: HashMap<Gram, u32> = HashMap::new();
        for_each_gram(text, |g| *grams.entry(g).or_insert(0) += 1);
        let scores: Vec<f64> = self
            .profiles
            .iter()
            .map(|p| grams.iter().map(|(&g, &n)| n as f64 * p.log_prob(g)).sum())
            .collect();
        let (best, &top) = scores
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, (i, s)| if *s > *acc.1 { (i, s) } else { acc });
        let norm: f64 = scores.iter().map(|s| (s - top).exp()).sum();
        Ok((self.profiles[best].language.clone(), 1.0 / norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trigrams_are_padded_per_word() {
        let mut seen = Vec::new();
        for_each_gram("Ab, c", |g| seen.push(unpack(g)));
        assert_eq!(seen, vec![" ab", "ab ", " c "]);
    }

    #[test]
    fn pack_round_trips() {
        assert_eq!(unpack(pack(' ', 'é', '東')), " é東");
    }

    #[test]
    fn profile_text_round_trip() {
        let profiles = train_profiles([("en", "the cat"), ("es", "el gato")]);
        let text = profiles[0].to_text();
        let back = LanguageProfile::parse(&text, Path::new("en.prof")).unwrap();
        assert_eq!(back.language, "en");
        assert_eq!(back.unseen, profiles[0].unseen);
        assert_eq!(back.log_probs, profiles[0].log_probs);
    }

    #[test]
    fn errors() {
        let det = LanguageDetector::default();
        assert!(matches!(det.detect("hello"), Err(EdlError::NoProfiles)));
        let det = LanguageDetector::new(train_profiles([("en", "hello")]));
        assert!(matches!(det.detect("  "), Err(EdlError::EmptyText)));
        assert!(LanguageProfile::parse("@unseen\t-1\n", Path::new("x")).is_err());
        assert!(LanguageProfile::parse("@language\ten\n@unseen\t-1\nab\t-2\n", Path::new("x")).is_err());
    }
}
