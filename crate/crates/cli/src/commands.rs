//! Implementations of the batch verbs. Each writes its report to `out`;
//! progress goes to the log.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use edl_core::builder::{build_dictionaries, read_corpus, BuildOptions, DEFAULT_WINDOW_TOKENS};
use edl_core::bulk::annotate_bulk;
use edl_core::classify::{LogisticParams, ModelPair, TrainingParams, TreeParams};
use edl_core::config::{EngineConfig, LOGISTIC_FILE, TREE_FILE};
use edl_core::engine::training_examples;
use edl_core::eval::{evaluate, AlignmentPolicy};
use edl_core::kb::{CooccurLimits, DEFAULT_MIN_COUNT, DEFAULT_TOP_K};
use edl_core::preprocess::train_profiles;
use edl_core::profile::profile as profile_engine;
use edl_core::record::{parse_jsonl, read_gold, read_jsonl, DocumentRecord, InputDocument};
use edl_core::sweep::{config_fragment, parameter_sweep, Grid};
use edl_core::{EdlError, Engine};

use crate::{GlobalArgs, StrictFailure};

#[derive(Debug, Args)]
pub struct BuildDictsArgs {
    /// Annotated corpus, one JSON document per line.
    pub corpus: PathBuf,
    /// Output directory for priors.tsv and cooccurrence.tsv.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Sliding window size in tokens.
    #[arg(long, default_value_t = DEFAULT_WINDOW_TOKENS)]
    pub window: usize,
    /// Neighbours kept per entity.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    pub top_k: usize,
    /// Smallest co-occurrence count kept.
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    /// Propagate unambiguous links to unlinked repeats before counting.
    #[arg(long)]
    pub densify: bool,
}

pub fn build_dicts(_g: &GlobalArgs, args: &BuildDictsArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let corpus = read_corpus(&args.corpus)?;
    let opts = BuildOptions {
        window: args.window,
        limits: CooccurLimits { top_k: args.top_k, min_count: args.min_count },
        densify: args.densify,
    };
    let summary = build_dictionaries(&corpus, &args.out, &opts)?;
    writeln!(out, "documents\t{}", summary.documents)?;
    writeln!(out, "annotations\t{}", summary.annotations)?;
    writeln!(out, "entities\t{}", summary.entities)?;
    for (lang, n) in &summary.surface_forms {
        writeln!(out, "surface_forms[{lang}]\t{n}")?;
    }
    writeln!(out, "cooccurrence_pairs\t{}", summary.cooccurrence_pairs)?;
    writeln!(out, "priors\t{}", summary.priors_path.display())?;
    writeln!(out, "cooccurrence\t{}", summary.cooccurrence_path.display())?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct TrainProfilesArgs {
    /// Training text per language as LANG=PATH; each line is one sample.
    #[arg(required = true, value_name = "LANG=PATH")]
    pub samples: Vec<String>,
    /// Output directory; one LANG.profile file per language.
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn train_lang_profiles(args: &TrainProfilesArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut texts = Vec::new();
    for spec in &args.samples {
        let (lang, path) = spec
            .split_once('=')
            .filter(|(l, p)| !l.is_empty() && !p.is_empty())
            .ok_or_else(|| EdlError::Config(format!("expected LANG=PATH, got {spec:?}")))?;
        let text = fs::read_to_string(path).map_err(|e| EdlError::Config(format!("reading {path}: {e}")))?;
        texts.push((lang.to_string(), text));
    }
    let profiles = train_profiles(texts.iter().flat_map(|(l, t)| t.lines().map(move |line| (l.as_str(), line))));
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for p in &profiles {
        let path = args.out.join(format!("{}.profile", p.language));
        fs::write(&path, p.to_text()).with_context(|| format!("writing {}", path.display()))?;
        writeln!(out, "{}\t{} trigrams\t{}", p.language, p.gram_count(), path.display())?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Gold corpus in the annotated JSON-lines format.
    pub gold: PathBuf,
    /// Output directory for tree.json and logistic.json.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Maximum tree depth; 0 grows the tree until leaves are pure.
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
    /// Smallest number of examples in a tree leaf.
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    /// L2 penalty on the logistic regression weights.
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    /// Train on the raw class frequencies instead of balanced weights.
    #[arg(long)]
    pub no_balance: bool,
}

fn require_dictionaries(config: &EngineConfig) -> anyhow::Result<()> {
    let Some(d) = &config.dictionaries else {
        return Err(EdlError::Config("no dictionaries configured (use --dicts or --config)".into()).into());
    };
    let missing: Vec<String> = [&d.priors, &d.cooccurrence, &d.importance, &d.topic_parents, &d.entity_topics]
        .into_iter()
        .chain(&config.profiles)
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(EdlError::Config(format!("missing files: {}", missing.join(", "))).into());
    }
    Ok(())
}

pub fn train(g: &GlobalArgs, args: &TrainArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let config = g.engine_config()?;
    require_dictionaries(&config)?;
    let dicts = config.load_dictionaries()?;
    let pre = config.preprocessor()?;
    let gold = read_gold(&args.gold)?;
    let examples = training_examples(&pre, &dicts, &gold, &config.hyperparameters)?;
    let balance = !args.no_balance;
    let params = TrainingParams {
        tree: TreeParams {
            max_depth: (args.max_depth > 0).then_some(args.max_depth),
            min_leaf: args.min_leaf,
            balance_classes: balance,
        },
        logistic: LogisticParams {
            learning_rate: args.learning_rate,
            epochs: args.epochs,
            l2: args.l2,
            balance_classes: balance,
        },
    };
    let models = ModelPair::train(&examples, &params)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    models.save(&args.out.join(TREE_FILE), &args.out.join(LOGISTIC_FILE), Some(&params))?;

    let n = examples.len();
    let positives = examples.iter().filter(|e| e.label).count();
    let tree_ok = examples.iter().filter(|e| models.tree.predict(&e.features) == e.label).count();
    let lr_ok = examples
        .iter()
        .filter(|e| (models.logistic.score(&e.features) >= 0.5) == e.label)
        .count();
    writeln!(out, "examples\t{n}")?;
    writeln!(out, "positive\t{positives}")?;
    writeln!(out, "tree_depth\t{}", models.tree.depth())?;
    writeln!(out, "tree_training_accuracy\t{:.4}", tree_ok as f64 / n as f64)?;
    writeln!(out, "logistic_training_accuracy\t{:.4}", lr_ok as f64 / n as f64)?;
    writeln!(out, "models\t{}", args.out.display())?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Input file; standard input when absent or "-".
    pub input: Option<PathBuf>,
    /// Treat every non-blank input line as the text of one document.
    #[arg(long)]
    pub plain: bool,
    /// Copy each document's text into its output record.
    #[arg(long)]
    pub with_text: bool,
}

fn read_documents(args: &AnnotateArgs, stdin: &mut dyn BufRead) -> anyhow::Result<Vec<InputDocument>> {
    let (text, origin) = match args.input.as_deref().filter(|p| *p != Path::new("-")) {
        Some(path) => (
            fs::read_to_string(path).map_err(|e| EdlError::Config(format!("reading {}: {e}", path.display())))?,
            path.to_path_buf(),
        ),
        None => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).context("reading standard input")?;
            (s, PathBuf::from("<stdin>"))
        }
    };
    if args.plain {
        return Ok(text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| InputDocument { id: None, text: l.to_string(), language: None })
            .collect());
    }
    Ok(parse_jsonl::<InputDocument>(text.as_bytes(), &origin)?.into_iter().map(|(_, d)| d).collect())
}

pub fn annotate(g: &GlobalArgs, args: &AnnotateArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> anyhow::Result<()> {
    let config = g.engine_config()?;
    let engine = config.build_engine()?;
    let docs = read_documents(args, stdin)?;
    log::info!("annotating {} documents on {} worker(s)", docs.len(), config.workers);
    let mut records = annotate_bulk(&engine, &docs, config.workers)?;
    if args.with_text {
        for (r, d) in records.iter_mut().zip(&docs) {
            r.text = Some(d.text.clone());
        }
    }
    for r in &records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    out.flush()?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} document(s) failed");
        if g.strict {
            return Err(StrictFailure(failed).into());
        }
    }
    Ok(())
}

fn policy(g: &GlobalArgs) -> AlignmentPolicy {
    if g.strict {
        AlignmentPolicy::Strict
    } else {
        AlignmentPolicy::Lenient
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Output of `edl annotate`.
    pub predictions: PathBuf,
    /// Gold corpus, paired with the predictions line by line.
    pub gold: PathBuf,
}

pub fn eval(g: &GlobalArgs, args: &EvalArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let predictions: Vec<DocumentRecord> = read_jsonl(&args.predictions)?.into_iter().map(|(_, r)| r).collect();
    let gold = read_gold(&args.gold)?;
    let m = evaluate(&predictions, &gold, policy(g))?;
    let c = m.counts;
    for (name, value) in [("tp", c.tp), ("fp", c.fp), ("fn", c.fn_), ("tn", c.tn)] {
        writeln!(out, "{name}\t{value}")?;
    }
    for (name, value) in [("precision", m.precision), ("recall", m.recall), ("f1", m.f1), ("accuracy", m.accuracy)] {
        writeln!(out, "{name}\t{value:.6}")?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Validation corpus in the gold format.
    pub validation: PathBuf,
    /// Grid such as "lambda1=0.5:0.05:0.95;lambda3=0.3,0.5".
    #[arg(long)]
    pub grid: String,
    /// Write the best hyperparameters here as a config fragment.
    #[arg(long, value_name = "PATH")]
    pub best: Option<PathBuf>,
}

pub fn sweep(g: &GlobalArgs, args: &SweepArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let config = g.engine_config()?;
    let engine = config.build_engine()?;
    let grid = Grid::parse(&args.grid, engine.hyperparameters())?;
    let validation = read_gold(&args.validation)?;
    log::info!("sweeping {} grid points over {} documents", grid.len(), validation.len());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .context("starting worker pool")?;
    let result = pool.install(|| parameter_sweep(&validation, &grid, &engine, policy(g)))?;
    write!(out, "{}", result.to_table())?;
    let fragment = config_fragment(&result.best.hp);
    match &args.best {
        Some(path) => {
            fs::write(path, &fragment).with_context(|| format!("writing {}", path.display()))?;
            log::info!("best point written to {} (f1 {:.4})", path.display(), result.best.metrics.f1);
        }
        None => eprint!("best point (f1 {:.4}):\n{fragment}", result.best.metrics.f1),
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Documents to time, one JSON document per line.
    pub input: PathBuf,
    /// Runs per document; the fastest is kept.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}

pub fn profile(g: &GlobalArgs, args: &ProfileArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let engine: Engine = g.engine_config()?.build_engine()?;
    let docs: Vec<InputDocument> = read_jsonl(&args.input)?.into_iter().map(|(_, d)| d).collect();
    let report = profile_engine(&engine, &docs, args.repeats);
    write!(out, "{}", report.to_table())?;
    if let Some(fit) = report.fit {
        writeln!(
            out,
            "# total_ms = {:.6e} * bytes + {:.6}  (r_squared {:.4})",
            fit.slope, fit.intercept, fit.r_squared
        )?;
    }
    if report.failed > 0 {
        log::warn!("{} document(s) failed and were not timed", report.failed);
        if g.strict {
            bail!(StrictFailure(report.failed));
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}
