//! Command-line front end and HTTP service for the `edl` engine.

pub mod commands;
pub mod service;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use edl_core::config::{EngineConfig, LOGISTIC_FILE, TREE_FILE};
use edl_core::kb::DictionaryPaths;
use edl_core::EdlError;

/// Raised when `--strict` turns per-document failures into a failed run.
#[derive(Debug, thiserror::Error)]
#[error("{0} document(s) failed")]
pub struct StrictFailure(pub usize);

#[derive(Debug, Parser)]
#[command(name = "edl", version, about = "Entity disambiguation and linking")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Engine configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads for bulk work; overrides the config file.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,
    /// Fail on per-document errors; use strict span alignment in eval and sweep.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Directory holding the dictionary files; overrides the config file.
    #[arg(long, global = true, value_name = "DIR")]
    pub dicts: Option<PathBuf>,
    /// Directory holding tree.json and logistic.json; overrides the config file.
    #[arg(long, global = true, value_name = "DIR")]
    pub models: Option<PathBuf>,
    /// Directory of *.profile language profiles; overrides the config file.
    #[arg(long, global = true, value_name = "DIR")]
    pub profiles: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the prior and co-occurrence dictionaries from an annotated corpus.
    BuildDicts(commands::BuildDictsArgs),
    /// Train character-trigram language profiles from sample text.
    TrainLangProfiles(commands::TrainProfilesArgs),
    /// Train the decision tree and logistic regression on a gold corpus.
    Train(commands::TrainArgs),
    /// Annotate documents (JSON lines, or plain text with --plain).
    Annotate(commands::AnnotateArgs),
    /// Score predictions against gold annotations.
    Eval(commands::EvalArgs),
    /// Grid-search the hyperparameters on a validation corpus.
    Sweep(commands::SweepArgs),
    /// Report annotation time against document length.
    Profile(commands::ProfileArgs),
    /// Run the HTTP annotation service.
    Serve(commands::ServeArgs),
}

impl GlobalArgs {
    /// The config file (or defaults) with command-line overrides applied.
    pub fn engine_config(&self) -> edl_core::Result<EngineConfig> {
        let mut config = match &self.config {
            Some(path) => EngineConfig::load(path)?,
            None => EngineConfig::default(),
        };
        if let Some(dir) = &self.dicts {
            config.dictionaries = Some(DictionaryPaths::in_dir(dir));
        }
        if let Some(dir) = &self.models {
            config.tree = Some(dir.join(TREE_FILE));
            config.logistic = Some(dir.join(LOGISTIC_FILE));
        }
        if let Some(dir) = &self.profiles {
            config.profiles = profile_files(dir)?;
        }
        if let Some(w) = self.workers {
            config.workers = w as usize;
        }
        Ok(config)
    }
}

fn profile_files(dir: &Path) -> edl_core::Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| EdlError::Config(format!("reading {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "profile"))
        .collect();
    files.sort();
    Ok(files)
}

/// 2 for bad input (unreadable or malformed files, configuration, empty
/// corpora), 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<EdlError>() {
        Some(
            EdlError::Parse { .. }
            | EdlError::Io { .. }
            | EdlError::Config(_)
            | EdlError::EmptyCorpus
            | EdlError::Grid(_)
            | EdlError::Json(_)
            | EdlError::ModelVersion { .. }
            | EdlError::PriorSum { .. }
            | EdlError::Invariant(_)
            | EdlError::OntologyCycle(_)
            | EdlError::UnknownTopic(_),
        ) => 2,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let g = &cli.global;
    match cli.command {
        Command::BuildDicts(args) => commands::build_dicts(g, &args, &mut out),
        Command::TrainLangProfiles(args) => commands::train_lang_profiles(&args, &mut out),
        Command::Train(args) => commands::train(g, &args, &mut out),
        Command::Annotate(args) => commands::annotate(g, &args, &mut std::io::stdin().lock(), &mut out),
        Command::Eval(args) => commands::eval(g, &args, &mut out),
        Command::Sweep(args) => commands::sweep(g, &args, &mut out),
        Command::Profile(args) => commands::profile(g, &args, &mut out),
        Command::Serve(args) => service::serve(g, &args),
    }
}
