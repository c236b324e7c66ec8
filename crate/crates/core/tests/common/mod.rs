//! Fixture loading shared by the integration tests.
#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use edl_core::classify::{ModelPair, TrainingParams};
use edl_core::disambig::Hyperparameters;
use edl_core::engine::{training_examples, Preprocessor};
use edl_core::kb::{load_dictionaries, DictionaryPaths, DictionarySet};
use edl_core::preprocess::{train_profiles, LanguageDetector};
use edl_core::record::{read_gold, GoldDocument};
use edl_core::Engine;

pub const DEMO_TEXT: &str = "Google CEO Eric Schmidt said that the competition between Apple and Google and iOS vs.  Android is 'the defining fight of the tech industry.'";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn demo_dir() -> PathBuf {
    fixtures().join("demo")
}

pub fn demo_dicts() -> Arc<DictionarySet> {
    static DICTS: OnceLock<Arc<DictionarySet>> = OnceLock::new();
    DICTS
        .get_or_init(|| Arc::new(load_dictionaries(&DictionaryPaths::in_dir(&demo_dir())).expect("demo dictionaries")))
        .clone()
}

pub fn language_samples() -> Vec<(String, String)> {
    ["en", "es", "fr"]
        .iter()
        .flat_map(|lang| {
            let text = fs::read_to_string(fixtures().join("lang").join(format!("{lang}.txt"))).expect("samples");
            text.lines().map(|l| (lang.to_string(), l.to_string())).collect::<Vec<_>>()
        })
        .collect()
}

pub fn detector() -> LanguageDetector {
    let samples = language_samples();
    LanguageDetector::new(train_profiles(samples.iter().map(|(l, t)| (l.as_str(), t.as_str()))))
}

pub fn preprocessor() -> Preprocessor {
    Preprocessor::new(detector())
}

pub fn train_gold() -> Vec<GoldDocument> {
    read_gold(&demo_dir().join("train.jsonl")).expect("training corpus")
}

pub fn validation_gold() -> Vec<GoldDocument> {
    read_gold(&demo_dir().join("validation.jsonl")).expect("validation corpus")
}

pub fn demo_models() -> ModelPair {
    static MODELS: OnceLock<ModelPair> = OnceLock::new();
    MODELS
        .get_or_init(|| {
            let examples = training_examples(&preprocessor(), &demo_dicts(), &train_gold(), &Hyperparameters::default())
                .expect("training examples");
            ModelPair::train(&examples, &TrainingParams::default()).expect("training")
        })
        .clone()
}

pub fn demo_engine() -> Engine {
    Engine::new(demo_dicts(), demo_models(), preprocessor(), Hyperparameters::default()).expect("engine")
}
