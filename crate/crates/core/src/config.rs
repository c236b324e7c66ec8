//! Engine configuration file: flat TOML key/value pairs. Relative paths are
//! resolved against the directory holding the file.
//!
//! ```toml
//! dictionaries = "dicts"        # directory with the conventional file names
//! models = "models"             # directory with tree.json / logistic.json
//! profiles = ["profiles/en.txt", "profiles/es.txt"]
//! language = "en"               # optional: skip language detection
//! abbreviations = { en = "abbrev/en.txt" }
//! lambda1 = 0.75
//! lambda2 = 0.9
//! lambda3 = 0.5
//! window = 400
//! workers = 4
//! ```
//!
//! Individual dictionary files (`priors`, `cooccurrence`, `importance`,
//! `topic_parents`, `entity_topics`, `names`) and model files (`tree`,
//! `logistic`) may be given instead of, or on top of, the directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::classify::ModelPair;
use crate::disambig::Hyperparameters;
use crate::engine::{Engine, Preprocessor};
use crate::error::{EdlError, Result};
use crate::kb::{CooccurLimits, DictionaryPaths, DictionarySet};
use crate::preprocess::{Abbreviations, LanguageDetector, LanguageProfile};

pub const TREE_FILE: &str = "tree.json";
pub const LOGISTIC_FILE: &str = "logistic.json";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dictionaries: Option<PathBuf>,
    priors: Option<PathBuf>,
    cooccurrence: Option<PathBuf>,
    importance: Option<PathBuf>,
    topic_parents: Option<PathBuf>,
    entity_topics: Option<PathBuf>,
    names: Option<PathBuf>,
    models: Option<PathBuf>,
    tree: Option<PathBuf>,
    logistic: Option<PathBuf>,
    #[serde(default)]
    profiles: Vec<PathBuf>,
    language: Option<String>,
    #[serde(default)]
    abbreviations: BTreeMap<String, PathBuf>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    lambda3: Option<f64>,
    window: Option<usize>,
    workers: Option<usize>,
    cooccurrence_top_k: Option<usize>,
    cooccurrence_min_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub dictionaries: Option<DictionaryPaths>,
    pub tree: Option<PathBuf>,
    pub logistic: Option<PathBuf>,
    pub profiles: Vec<PathBuf>,
    pub language: Option<String>,
    pub abbreviations: BTreeMap<String, PathBuf>,
    pub hyperparameters: Hyperparameters,
    pub workers: usize,
    pub cooccurrence_limits: CooccurLimits,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            dictionaries: None,
            tree: None,
            logistic: None,
            profiles: Vec::new(),
            language: None,
            abbreviations: BTreeMap::new(),
            hyperparameters: Hyperparameters::default(),
            workers: 1,
            cooccurrence_limits: CooccurLimits::default(),
        }
    }
}

impl EngineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| EdlError::io(format!("reading {}", path.display()), e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            EdlError::Config(m) => EdlError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| EdlError::Config(e.message().to_string()))?;
        let at = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        let dir_paths = raw.dictionaries.as_ref().map(|d| DictionaryPaths::in_dir(&at(d)));
        let any_file = raw.priors.is_some()
            || raw.cooccurrence.is_some()
            || raw.importance.is_some()
            || raw.topic_parents.is_some()
            || raw.entity_topics.is_some();
        let dictionaries = if dir_paths.is_some() || any_file {
            let pick = |explicit: &Option<PathBuf>, from_dir: Option<PathBuf>, key: &str| -> Result<PathBuf> {
                explicit
                    .as_ref()
                    .map(at)
                    .or(from_dir)
                    .ok_or_else(|| EdlError::Config(format!("missing dictionary path {key:?}")))
            };
            let d = dir_paths.clone();
            Some(DictionaryPaths {
                priors: pick(&raw.priors, d.as_ref().map(|d| d.priors.clone()), "priors")?,
                cooccurrence: pick(&raw.cooccurrence, d.as_ref().map(|d| d.cooccurrence.clone()), "cooccurrence")?,
                importance: pick(&raw.importance, d.as_ref().map(|d| d.importance.clone()), "importance")?,
                topic_parents: pick(&raw.topic_parents, d.as_ref().map(|d| d.topic_parents.clone()), "topic_parents")?,
                entity_topics: pick(&raw.entity_topics, d.as_ref().map(|d| d.entity_topics.clone()), "entity_topics")?,
                names: raw.names.as_ref().map(at).or(d.and_then(|d| d.names)),
            })
        } else {
            None
        };
        let models_dir = raw.models.as_ref().map(at);
        let defaults = Hyperparameters::default();
        let hyperparameters = Hyperparameters {
            lambda1: raw.lambda1.unwrap_or(defaults.lambda1),
            lambda2: raw.lambda2.unwrap_or(defaults.lambda2),
            lambda3: raw.lambda3.unwrap_or(defaults.lambda3),
            window: raw.window.unwrap_or(defaults.window),
        };
        hyperparameters.validate()?;
        let workers = raw.workers.unwrap_or(1);
        if workers == 0 {
            return Err(EdlError::Config("workers must be at least 1".into()));
        }
        let limits = CooccurLimits::default();
        Ok(EngineConfig {
            dictionaries,
            tree: raw.tree.as_ref().map(at).or(models_dir.as_ref().map(|d| d.join(TREE_FILE))),
            logistic: raw.logistic.as_ref().map(at).or(models_dir.as_ref().map(|d| d.join(LOGISTIC_FILE))),
            profiles: raw.profiles.iter().map(at).collect(),
            language: raw.language,
            abbreviations: raw.abbreviations.iter().map(|(k, v)| (k.clone(), at(v))).collect(),
            hyperparameters,
            workers,
            cooccurrence_limits: CooccurLimits {
                top_k: raw.cooccurrence_top_k.unwrap_or(limits.top_k),
                min_count: raw.cooccurrence_min_count.unwrap_or(limits.min_count),
            },
        })
    }

    /// Every referenced file that does not exist.
    pub fn missing_paths(&self) -> Vec<PathBuf> {
        let mut all: Vec<&PathBuf> = Vec::new();
        if let Some(d) = &self.dictionaries {
            all.extend([&d.priors, &d.cooccurrence, &d.importance, &d.topic_parents, &d.entity_topics]);
            all.extend(d.names.as_ref());
        }
        all.extend(self.tree.as_ref());
        all.extend(self.logistic.as_ref());
        all.extend(self.profiles.iter());
        all.extend(self.abbreviations.values());
        all.into_iter().filter(|p| !p.exists()).cloned().collect()
    }

    pub fn check_paths(&self) -> Result<()> {
        let missing = self.missing_paths();
        if missing.is_empty() {
            return Ok(());
        }
        let list: Vec<String> = missing.iter().map(|p| p.display().to_string()).collect();
        Err(EdlError::Config(format!("missing files: {}", list.join(", "))))
    }

    pub fn load_dictionaries(&self) -> Result<DictionarySet> {
        let paths = self
            .dictionaries
            .as_ref()
            .ok_or_else(|| EdlError::Config("no dictionaries configured".into()))?;
        DictionarySet::load(paths, self.cooccurrence_limits)
    }

    pub fn preprocessor(&self) -> Result<Preprocessor> {
        let profiles = self
            .profiles
            .iter()
            .map(|p| LanguageProfile::load(p))
            .collect::<Result<Vec<_>>>()?;
        let mut pre = Preprocessor::new(LanguageDetector::new(profiles)).with_language(self.language.clone());
        for (lang, path) in &self.abbreviations {
            pre = pre.with_abbreviations(lang, Abbreviations::load(path)?);
        }
        Ok(pre)
    }

    pub fn load_models(&self) -> Result<ModelPair> {
        match (&self.tree, &self.logistic) {
            (Some(t), Some(l)) => ModelPair::load(t, l),
            _ => Err(EdlError::Config("no model files configured".into())),
        }
    }

    pub fn build_engine(&self) -> Result<Engine> {
        self.check_paths()?;
        Engine::new(
            Arc::new(self.load_dictionaries()?),
            self.load_models()?,
            self.preprocessor()?,
            self.hyperparameters,
        )
    }
}
