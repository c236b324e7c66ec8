//! Shared setup: language profiles and models trained from the core demo
//! fixtures, written into a temporary directory.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::io::Write;

use edl_core::classify::{ModelPair, TrainingParams};
use edl_core::disambig::Hyperparameters;
use edl_core::engine::{training_examples, Preprocessor};
use edl_core::kb::{load_dictionaries, DictionaryPaths};
use edl_core::preprocess::{train_profiles, LanguageDetector};
use edl_core::record::read_gold;
use edl_core::Engine;

pub const DEMO_TEXT: &str = "Google CEO Eric Schmidt said that the competition between Apple and Google and iOS vs.  Android is 'the defining fight of the tech industry.'";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn demo_dir() -> PathBuf {
    fixtures().join("demo")
}

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let profiles = dir.path().join("profiles");
        fs::create_dir(&profiles).unwrap();
        for p in detector().profiles() {
            fs::write(profiles.join(format!("{}.profile", p.language)), p.to_text()).unwrap();
        }
        let models = dir.path().join("models");
        fs::create_dir(&models).unwrap();
        let dicts = load_dictionaries(&DictionaryPaths::in_dir(&demo_dir())).unwrap();
        let gold = read_gold(&demo_dir().join("train.jsonl")).unwrap();
        let examples =
            training_examples(&Preprocessor::new(detector()), &dicts, &gold, &Hyperparameters::default()).unwrap();
        ModelPair::train(&examples, &TrainingParams::default())
            .unwrap()
            .save(&models.join("tree.json"), &models.join("logistic.json"), None)
            .unwrap();
        Workspace { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Flags selecting the demo dictionaries and the trained artifacts.
    pub fn engine_flags(&self) -> Vec<String> {
        vec![
            "--dicts".into(),
            demo_dir().display().to_string(),
            "--models".into(),
            self.path("models").display().to_string(),
            "--profiles".into(),
            self.path("profiles").display().to_string(),
        ]
    }

    pub fn engine(&self) -> Engine {
        let dicts = load_dictionaries(&DictionaryPaths::in_dir(&demo_dir())).unwrap();
        let models = ModelPair::load(&self.path("models/tree.json"), &self.path("models/logistic.json")).unwrap();
        Engine::new(dicts.into(), models, Preprocessor::new(detector()), Hyperparameters::default()).unwrap()
    }
}

pub fn detector() -> LanguageDetector {
    let mut samples = Vec::new();
    for lang in ["en", "es", "fr"] {
        let text = fs::read_to_string(fixtures().join("lang").join(format!("{lang}.txt"))).unwrap();
        samples.extend(text.lines().map(|l| (lang, l.to_string())).collect::<Vec<_>>());
    }
    LanguageDetector::new(train_profiles(samples.iter().map(|(l, t)| (*l, t.as_str()))))
}

/// Runs the `edl` binary with `args`, feeding `stdin`.
pub fn edl<S: AsRef<str>>(args: &[S], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_edl"))
        .args(args.iter().map(|a| a.as_ref()))
        .env("RUST_LOG", "warn")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

pub fn path_arg(p: &Path) -> String {
    p.display().to_string()
}
