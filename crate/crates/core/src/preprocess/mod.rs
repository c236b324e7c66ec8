//! Text preprocessing: language detection, normalization, sentence
//! breaking, tokenization and dictionary mention extraction.

mod extract;
mod langid;
mod normalize;
mod sentence;
mod tokenize;

pub use extract::{extract_mentions, extract_with, Mention, MAX_MENTION_TOKENS};
pub use langid::{train_profiles, LanguageDetector, LanguageProfile};
pub use normalize::{normalize, NormalizedText};
pub use sentence::{break_sentences, Abbreviations};
pub use tokenize::{folded_words, surface_key, tokenize, Token};
