//! Offline construction of the prior and co-occurrence dictionaries from an
//! annotated corpus.
//!
//! Corpus format: one JSON object per line,
//! `{"language": "en", "tokens": [...], "annotations": [{"start": 0, "end": 2, "entity": "X"}]}`
//! where `start..end` is a token range and a `null` entity marks an
//! unlinked occurrence (counted towards NIL).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entity::EntityId;
use crate::error::{EdlError, Result};
use crate::kb::{lookup_key, CooccurLimits, EntityCooccurDict, MentionEntityPriorDict};
use crate::record::parse_jsonl;

pub const DEFAULT_WINDOW_TOKENS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub start: usize,
    pub end: usize,
    pub entity: Option<EntityId>,
}

impl Annotation {
    /// The entity, with unlinked occurrences mapped to NIL.
    pub fn target(&self) -> EntityId {
        self.entity.clone().unwrap_or(EntityId::Nil)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub language: String,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
}

impl AnnotatedDocument {
    /// Annotations must be non-empty token ranges inside the document that
    /// do not overlap.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut spans: Vec<(usize, usize)> = self.annotations.iter().map(|a| (a.start, a.end)).collect();
        spans.sort_unstable();
        for &(s, e) in &spans {
            if s >= e || e > self.tokens.len() {
                return Err(format!("annotation {s}..{e} outside {} tokens", self.tokens.len()));
            }
        }
        if let Some(w) = spans.windows(2).find(|w| w[0].1 > w[1].0) {
            return Err(format!("annotations {}..{} and {}..{} overlap", w[0].0, w[0].1, w[1].0, w[1].1));
        }
        Ok(())
    }

    pub fn surface(&self, a: &Annotation) -> String {
        self.tokens[a.start..a.end].join(" ")
    }
}

pub fn parse_corpus(text: &str, origin: &Path) -> Result<Vec<AnnotatedDocument>> {
    let docs = parse_jsonl::<AnnotatedDocument>(text.as_bytes(), origin)?;
    docs.into_iter()
        .map(|(line, d)| d.validate().map(|_| d).map_err(|m| EdlError::parse(origin, line, m)))
        .collect()
}

pub fn read_corpus(path: &Path) -> Result<Vec<AnnotatedDocument>> {
    let text = fs::read_to_string(path).map_err(|e| EdlError::io(format!("reading {}", path.display()), e))?;
    parse_corpus(&text, path)
}

type SurfaceCounts = HashMap<(String, String), HashMap<EntityId, u64>>;

/// `count(M -> E) / count(M)` per (language, surface key), over all
/// annotations including unlinked ones.
pub fn build_mention_entity_priors(corpus: &[AnnotatedDocument]) -> Result<MentionEntityPriorDict> {
    let counts = corpus
        .par_iter()
        .fold(SurfaceCounts::new, |mut acc, doc| {
            for a in &doc.annotations {
                let key = lookup_key(&doc.surface(a), &doc.language);
                if key.is_empty() {
                    continue;
                }
                *acc.entry((doc.language.clone(), key)).or_default().entry(a.target()).or_insert(0) += 1;
            }
            acc
        })
        .reduce(SurfaceCounts::new, |mut a, b| {
            for (k, m) in b {
                let slot = a.entry(k).or_default();
                for (e, c) in m {
                    *slot.entry(e).or_insert(0) += c;
                }
            }
            a
        });
    let mut entries = Vec::new();
    for ((lang, key), per_entity) in counts {
        let total: u64 = per_entity.values().sum();
        for (entity, c) in per_entity {
            entries.push((lang.clone(), key.clone(), entity, c as f64 / total as f64));
        }
    }
    MentionEntityPriorDict::from_entries(entries)
}

pub type PairCounts = HashMap<(EntityId, EntityId), u64>;

/// Raw symmetric co-occurrence counts. Two linked occurrences co-occur when
/// their first tokens lie within one window of `window` consecutive tokens,
/// i.e. at most `window - 1` apart. Each pair of occurrences counts once,
/// however many windows contain it. Sentinels and self pairs are skipped.
pub fn count_cooccurrences(corpus: &[AnnotatedDocument], window: usize) -> PairCounts {
    let reach = window.saturating_sub(1);
    corpus
        .par_iter()
        .fold(PairCounts::new, |mut acc, doc| {
            let mut occ: Vec<(usize, &EntityId)> = doc
                .annotations
                .iter()
                .filter_map(|a| a.entity.as_ref().filter(|e| !e.is_sentinel()).map(|e| (a.start, e)))
                .collect();
            occ.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
            for i in 0..occ.len() {
                for j in i + 1..occ.len() {
                    if occ[j].0 - occ[i].0 > reach {
                        break;
                    }
                    let (a, b) = (occ[i].1, occ[j].1);
                    if a != b {
                        *acc.entry((a.clone(), b.clone())).or_insert(0) += 1;
                        *acc.entry((b.clone(), a.clone())).or_insert(0) += 1;
                    }
                }
            }
            acc
        })
        .reduce(PairCounts::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            a
        })
}

/// Keeps, per entity, the neighbours with at least `min_count`
/// co-occurrences, then the `top_k` largest (ties by id).
pub fn prune_cooccurrences(counts: &PairCounts, limits: CooccurLimits) -> Result<EntityCooccurDict> {
    let mut neighbors: HashMap<EntityId, Vec<(EntityId, u64)>> = HashMap::new();
    for ((a, b), &c) in counts {
        if c >= limits.min_count {
            neighbors.entry(a.clone()).or_default().push((b.clone(), c));
        }
    }
    for list in neighbors.values_mut() {
        list.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        list.truncate(limits.top_k);
    }
    EntityCooccurDict::from_neighbors(neighbors, limits)
}

pub fn build_entity_cooccurrence(
    corpus: &[AnnotatedDocument],
    window: usize,
    limits: CooccurLimits,
) -> Result<EntityCooccurDict> {
    if window == 0 {
        return Err(EdlError::Config("window must be at least 1 token".into()));
    }
    prune_cooccurrences(&count_cooccurrences(corpus, window), limits)
}

/// Links unannotated occurrences of surfaces that are annotated with a
/// single entity elsewhere in the same document. Surfaces linked to more
/// than one entity (NIL included) are left alone, as are tokens already
/// covered by an annotation. Longer surfaces are tried first at each
/// position, scanning left to right.
pub fn densify_document(doc: &AnnotatedDocument) -> AnnotatedDocument {
    let mut by_surface: HashMap<Vec<&str>, HashSet<EntityId>> = HashMap::new();
    for a in &doc.annotations {
        let words: Vec<&str> = doc.tokens[a.start..a.end].iter().map(String::as_str).collect();
        by_surface.entry(words).or_default().insert(a.target());
    }
    let mut unambiguous: Vec<(Vec<&str>, EntityId)> = by_surface
        .into_iter()
        .filter_map(|(words, set)| {
            (set.len() == 1)
                .then(|| set.into_iter().next().expect("one entity"))
                .filter(|e| !e.is_sentinel())
                .map(|e| (words, e))
        })
        .collect();
    unambiguous.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
    let mut covered = vec![false; doc.tokens.len()];
    for a in &doc.annotations {
        covered[a.start..a.end].iter_mut().for_each(|c| *c = true);
    }
    let mut out = doc.clone();
    let mut i = 0;
    while i < doc.tokens.len() {
        let hit = unambiguous.iter().find(|(words, _)| {
            let end = i + words.len();
            end <= doc.tokens.len()
                && !covered[i..end].iter().any(|&c| c)
                && doc.tokens[i..end].iter().zip(words.iter()).all(|(t, w)| t == w)
        });
        match hit {
            Some((words, entity)) => {
                let end = i + words.len();
                covered[i..end].iter_mut().for_each(|c| *c = true);
                out.annotations.push(Annotation { start: i, end, entity: Some(entity.clone()) });
                i = end;
            }
            None => i += 1,
        }
    }
    out.annotations.sort_by_key(|a| (a.start, a.end));
    out
}

pub fn densify(corpus: &[AnnotatedDocument]) -> Vec<AnnotatedDocument> {
    corpus.par_iter().map(densify_document).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub window: usize,
    pub limits: CooccurLimits,
    pub densify: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            window: DEFAULT_WINDOW_TOKENS,
            limits: CooccurLimits::default(),
            densify: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildSummary {
    pub documents: usize,
    pub annotations: usize,
    /// Surface forms per language.
    pub surface_forms: BTreeMap<String, usize>,
    pub entities: usize,
    pub cooccurrence_pairs: usize,
    pub priors_path: PathBuf,
    pub cooccurrence_path: PathBuf,
}

/// Builds both dictionaries and writes `priors.tsv` and
/// `cooccurrence.tsv` into `out_dir`.
pub fn build_dictionaries(corpus: &[AnnotatedDocument], out_dir: &Path, opts: &BuildOptions) -> Result<BuildSummary> {
    if corpus.is_empty() {
        return Err(EdlError::EmptyCorpus);
    }
    let densified;
    let corpus = if opts.densify {
        densified = densify(corpus);
        &densified[..]
    } else {
        corpus
    };
    let priors = build_mention_entity_priors(corpus)?;
    let cooccur = build_entity_cooccurrence(corpus, opts.window, opts.limits)?;
    fs::create_dir_all(out_dir).map_err(|e| EdlError::io(format!("creating {}", out_dir.display()), e))?;
    let priors_path = out_dir.join("priors.tsv");
    let cooccurrence_path = out_dir.join("cooccurrence.tsv");
    fs::write(&priors_path, priors.to_tsv()).map_err(|e| EdlError::io(format!("writing {}", priors_path.display()), e))?;
    fs::write(&cooccurrence_path, cooccur.to_tsv())
        .map_err(|e| EdlError::io(format!("writing {}", cooccurrence_path.display()), e))?;
    let entities: HashSet<&EntityId> = corpus
        .iter()
        .flat_map(|d| d.annotations.iter().filter_map(|a| a.entity.as_ref()))
        .filter(|e| !e.is_sentinel())
        .collect();
    Ok(BuildSummary {
        documents: corpus.len(),
        annotations: corpus.iter().map(|d| d.annotations.len()).sum(),
        surface_forms: priors.languages().into_iter().map(|l| (l.to_string(), priors.surface_count(l))).collect(),
        entities: entities.len(),
        cooccurrence_pairs: cooccur.pair_count(),
        priors_path,
        cooccurrence_path,
    })
}
