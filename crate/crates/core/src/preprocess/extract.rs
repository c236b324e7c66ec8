use std::sync::Arc;

use super::tokenize::Token;
use crate::kb::{Candidate, MentionEntityPriorDict};

pub const MAX_MENTION_TOKENS: usize = 6;

/// A dictionary match over consecutive tokens of one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Mention {
    /// Normalized text covered by the mention.
    pub surface: String,
    /// Document-level index of the first token.
    pub token_start: usize,
    pub token_len: usize,
    /// Byte span in the normalized text.
    pub start: usize,
    pub end: usize,
    pub candidates: Arc<[Candidate]>,
}

impl Mention {
    pub fn token_span(&self) -> std::ops::Range<usize> {
        self.token_start..self.token_start + self.token_len
    }
}

/// Greedy left-to-right longest match. At each token the longest n-gram
/// (n from `max_len` down to 1) whose key is found by `lookup` becomes a
/// mention and its tokens are consumed. `tokens` must come from one
/// sentence of `text`.
pub fn extract_with<F>(tokens: &[Token], text: &str, max_len: usize, lookup: F) -> Vec<Mention>
where
    F: Fn(&str) -> Option<Arc<[Candidate]>>,
{
    let folded: Vec<String> = tokens.iter().map(|t| t.text.to_lowercase()).collect();
    let mut mentions = Vec::new();
    let mut key = String::new();
    let mut bounds = Vec::with_capacity(max_len);
    let mut i = 0;
    while i < tokens.len() {
        let longest = max_len.min(tokens.len() - i);
        key.clear();
        bounds.clear();
        for word in &folded[i..i + longest] {
            if !key.is_empty() {
                key.push(' ');
            }
            key.push_str(word);
            bounds.push(key.len());
        }
        let hit = (1..=longest)
            .rev()
            .find_map(|n| lookup(&key[..bounds[n - 1]]).map(|c| (n, c)));
        match hit {
            Some((n, candidates)) => {
                let first = &tokens[i];
                let last = &tokens[i + n - 1];
                mentions.push(Mention {
                    surface: text[first.start..last.end].to_string(),
                    token_start: first.index,
                    token_len: n,
                    start: first.start,
                    end: last.end,
                    candidates,
                });
                i += n;
            }
            None => i += 1,
        }
    }
    mentions
}

pub fn extract_mentions(
    tokens: &[Token],
    text: &str,
    priors: &MentionEntityPriorDict,
    language: &str,
) -> Vec<Mention> {
    extract_with(tokens, text, MAX_MENTION_TOKENS, |key| priors.get(key, language).cloned())
}
