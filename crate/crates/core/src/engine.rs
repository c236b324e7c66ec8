//! The annotation pipeline: language detection, normalization, sentence
//! breaking, tokenization, mention extraction and both disambiguation
//! passes, producing one [`DocumentRecord`] per text.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::classify::{LabeledExample, ModelPair};
use crate::disambig::{candidate_features, disambiguate, easy_context, first_pass, Hyperparameters, Resolution};
use crate::error::{EdlError, Result};
use crate::kb::DictionarySet;
use crate::preprocess::{
    break_sentences, extract_mentions, normalize, tokenize, Abbreviations, LanguageDetector, Mention, NormalizedText,
    Token,
};
use crate::record::{CandidateRecord, CharIndex, DocumentRecord, GoldDocument, InputDocument, MentionRecord};

const BUILTIN_ABBREVIATION_LANGUAGES: [&str; 6] = ["en", "es", "fr", "de", "ar", "ja"];

/// Language used for a document that has no text to detect from.
pub const UNDETERMINED_LANGUAGE: &str = "und";

/// Everything before disambiguation. Holds no dictionaries itself.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    detector: LanguageDetector,
    abbreviations: HashMap<String, Abbreviations>,
    forced_language: Option<String>,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor::new(LanguageDetector::default())
    }
}

/// A document after preprocessing.
#[derive(Debug, Clone)]
pub struct PreparedDocument {
    pub language: String,
    pub original: String,
    pub normalized: NormalizedText,
    pub sentences: usize,
    pub tokens: Vec<Token>,
    pub mentions: Vec<Mention>,
}

impl PreparedDocument {
    /// Character span of a mention in the original text.
    pub fn char_span(&self, mention: &Mention, index: &CharIndex) -> (usize, usize) {
        let bytes = self.normalized.original_span(mention.start..mention.end);
        (index.char_offset(bytes.start), index.char_offset(bytes.end))
    }
}

impl Preprocessor {
    pub fn new(detector: LanguageDetector) -> Self {
        let abbreviations = BUILTIN_ABBREVIATION_LANGUAGES
            .iter()
            .map(|&l| (l.to_string(), Abbreviations::default_for(l)))
            .collect();
        Preprocessor {
            detector,
            abbreviations,
            forced_language: None,
        }
    }

    /// Skips detection and treats every document as `language`.
    pub fn with_language(mut self, language: Option<String>) -> Self {
        self.forced_language = language;
        self
    }

    pub fn with_abbreviations(mut self, language: &str, abbreviations: Abbreviations) -> Self {
        self.abbreviations.insert(language.to_string(), abbreviations);
        self
    }

    pub fn detector(&self) -> &LanguageDetector {
        &self.detector
    }

    /// Picks the document language: an explicit hint, then the configured
    /// language, then the detector. Without a detector a dictionary with a
    /// single language is used as is.
    pub fn resolve_language(&self, text: &str, hint: Option<&str>, dicts: &DictionarySet) -> Result<String> {
        if let Some(l) = hint.or(self.forced_language.as_deref()) {
            return Ok(l.to_string());
        }
        if !self.detector.is_empty() {
            return self.detector.detect(text).map(|(l, _)| l);
        }
        match dicts.priors.languages().as_slice() {
            [only] => Ok(only.to_string()),
            _ => Err(EdlError::NoProfiles),
        }
    }

    pub fn prepare(&self, text: &str, hint: Option<&str>, dicts: &DictionarySet) -> Result<PreparedDocument> {
        if text.trim().is_empty() {
            let language = hint
                .or(self.forced_language.as_deref())
                .unwrap_or(UNDETERMINED_LANGUAGE)
                .to_string();
            return Ok(PreparedDocument {
                normalized: normalize(text, &language),
                language,
                original: text.to_string(),
                sentences: 0,
                tokens: Vec::new(),
                mentions: Vec::new(),
            });
        }
        let language = self.resolve_language(text, hint, dicts)?;
        if !dicts.priors.has_language(&language) {
            return Err(EdlError::UnsupportedLanguage(language));
        }
        let normalized = normalize(text, &language);
        let empty = Abbreviations::default();
        let abbreviations = self.abbreviations.get(&language).unwrap_or(&empty);
        let spans = break_sentences(&normalized.text, abbreviations);
        let mut tokens = Vec::new();
        for (i, span) in spans.iter().enumerate() {
            let first = tokens.len();
            tokens.extend(tokenize(&normalized.text, span.clone(), i, first));
        }
        // Mentions never cross sentences, so extract per sentence.
        let mut mentions = Vec::new();
        let mut start = 0;
        while start < tokens.len() {
            let sentence = tokens[start].sentence;
            let end = start + tokens[start..].iter().take_while(|t| t.sentence == sentence).count();
            mentions.extend(extract_mentions(&tokens[start..end], &normalized.text, &dicts.priors, &language));
            start = end;
        }
        Ok(PreparedDocument {
            language,
            original: text.to_string(),
            normalized,
            sentences: spans.len(),
            tokens,
            mentions,
        })
    }
}

/// Wall time spent per stage of one annotation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes {
    pub preprocess: Duration,
    pub disambiguation: Duration,
}

impl StageTimes {
    pub fn total(&self) -> Duration {
        self.preprocess + self.disambiguation
    }
}

/// Loaded resource sizes, reported by the service health endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineStats {
    pub entities: usize,
    pub surface_forms: BTreeMap<String, usize>,
    pub cooccurrence_pairs: usize,
    pub topics: usize,
    pub importance_entries: usize,
    pub languages_detected: Vec<String>,
    pub approximate_bytes: usize,
}

/// Shared, immutable annotation engine.
#[derive(Debug, Clone)]
pub struct Engine {
    dicts: Arc<DictionarySet>,
    models: Arc<ModelPair>,
    preprocessor: Preprocessor,
    hp: Hyperparameters,
}

impl Engine {
    pub fn new(dicts: Arc<DictionarySet>, models: ModelPair, preprocessor: Preprocessor, hp: Hyperparameters) -> Result<Self> {
        hp.validate()?;
        Ok(Engine {
            dicts,
            models: Arc::new(models),
            preprocessor,
            hp,
        })
    }

    pub fn dictionaries(&self) -> &DictionarySet {
        &self.dicts
    }

    pub fn models(&self) -> &ModelPair {
        &self.models
    }

    pub fn preprocessor(&self) -> &Preprocessor {
        &self.preprocessor
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hp
    }

    pub fn prepare(&self, doc: &InputDocument) -> Result<PreparedDocument> {
        self.preprocessor.prepare(&doc.text, doc.language.as_deref(), &self.dicts)
    }

    pub fn resolve(&self, prepared: &PreparedDocument, hp: &Hyperparameters) -> Result<Vec<Resolution>> {
        disambiguate(&prepared.mentions, &self.models, &self.dicts, hp)
    }

    pub fn annotate(&self, text: &str) -> Result<DocumentRecord> {
        self.annotate_document(&InputDocument {
            text: text.to_string(),
            ..Default::default()
        })
    }

    pub fn annotate_document(&self, doc: &InputDocument) -> Result<DocumentRecord> {
        self.annotate_with(doc, &self.hp)
    }

    pub fn annotate_with(&self, doc: &InputDocument, hp: &Hyperparameters) -> Result<DocumentRecord> {
        let prepared = self.prepare(doc)?;
        let resolutions = self.resolve(&prepared, hp)?;
        Ok(render(doc.id.clone(), &prepared, &resolutions))
    }

    pub fn annotate_timed(&self, doc: &InputDocument) -> Result<(DocumentRecord, StageTimes)> {
        let t0 = Instant::now();
        let prepared = self.prepare(doc)?;
        let t1 = Instant::now();
        let resolutions = self.resolve(&prepared, &self.hp)?;
        let t2 = Instant::now();
        let record = render(doc.id.clone(), &prepared, &resolutions);
        Ok((
            record,
            StageTimes {
                preprocess: t1 - t0,
                disambiguation: t2 - t1,
            },
        ))
    }

    /// Like [`Engine::annotate_document`] but failures become error records.
    pub fn annotate_or_error(&self, doc: &InputDocument) -> DocumentRecord {
        self.annotate_document(doc)
            .unwrap_or_else(|e| DocumentRecord::failed(doc.id.clone(), &e))
    }

    pub fn stats(&self) -> EngineStats {
        let d = &self.dicts;
        EngineStats {
            entities: d.entity_count(),
            surface_forms: d
                .priors
                .languages()
                .into_iter()
                .map(|l| (l.to_string(), d.priors.surface_count(l)))
                .collect(),
            cooccurrence_pairs: d.cooccurrence.pair_count(),
            topics: d.ontology.topic_count(),
            importance_entries: d.importance.len(),
            languages_detected: self.preprocessor.detector.languages().map(str::to_string).collect(),
            approximate_bytes: d.approximate_bytes(),
        }
    }
}

/// Builds the output record for a prepared document.
pub fn render(id: Option<String>, prepared: &PreparedDocument, resolutions: &[Resolution]) -> DocumentRecord {
    let index = CharIndex::new(&prepared.original);
    let mentions = resolutions
        .iter()
        .map(|r| {
            let m = &prepared.mentions[r.mention];
            let bytes = prepared.normalized.original_span(m.start..m.end);
            let (char_start, char_end) = (index.char_offset(bytes.start), index.char_offset(bytes.end));
            let candidates = m
                .candidates
                .iter()
                .enumerate()
                .map(|(k, c)| CandidateRecord {
                    entity: c.entity.clone(),
                    prior: c.prior,
                    label: r.judged.get(k).map(|j| j.label),
                    score: r.judged.get(k).map(|j| j.score),
                })
                .collect();
            MentionRecord {
                surface: prepared.original[bytes].to_string(),
                char_start,
                char_end,
                entity: r.entity.clone(),
                score: r.score(),
                pass: Some(r.pass),
                candidates,
            }
        })
        .collect();
    DocumentRecord {
        id,
        language: Some(prepared.language.clone()),
        text: None,
        mentions,
        error: None,
    }
}

/// Labeled examples from gold documents: every hard mention whose span
/// matches a gold span contributes one example per candidate, labeled True
/// exactly for the gold entity.
pub fn training_examples(
    preprocessor: &Preprocessor,
    dicts: &DictionarySet,
    gold: &[GoldDocument],
    hp: &Hyperparameters,
) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::new();
    for doc in gold {
        let prepared = preprocessor.prepare(&doc.text, doc.language.as_deref(), dicts)?;
        let first = first_pass(&prepared.mentions, hp)?;
        let context = easy_context(&prepared.mentions, &first);
        let index = CharIndex::new(&prepared.original);
        let spans: HashMap<(usize, usize), &crate::entity::EntityId> =
            doc.mentions.iter().map(|m| (m.span(), &m.entity)).collect();
        for &h in &first.hard {
            let mention = &prepared.mentions[h];
            let Some(&gold_entity) = spans.get(&prepared.char_span(mention, &index)) else {
                continue;
            };
            let features = candidate_features(mention, &context, dicts, hp)?;
            out.extend(features.into_iter().zip(mention.candidates.iter()).map(|(f, c)| LabeledExample {
                features: f,
                label: &c.entity == gold_entity,
            }));
        }
    }
    if out.is_empty() {
        return Err(EdlError::Training("no hard mentions match the gold annotations".into()));
    }
    Ok(out)
}
