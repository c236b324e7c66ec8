//! Knowledge-base dictionaries consulted at annotation time.

mod cooccur;
mod ontology;
mod priors;
pub(crate) mod tsv;

use std::borrow::Cow;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

pub use cooccur::{CooccurLimits, EntityCooccurDict, DEFAULT_MIN_COUNT, DEFAULT_TOP_K};
pub(crate) use ontology::min_over;
pub use ontology::{OntologyBuilder, TopicIdx, TopicOntology, UNREACHABLE};
pub use priors::{lookup_key, Candidate, MentionEntityPriorDict, PRIOR_SUM_TOLERANCE};

use crate::entity::EntityId;
use crate::error::{EdlError, Result};

/// Global importance score per KB entity, in [0,1].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntityImportanceDict {
    scores: HashMap<EntityId, f64>,
}

impl EntityImportanceDict {
    pub fn from_scores(scores: HashMap<EntityId, f64>) -> Result<Self> {
        for (entity, &score) in &scores {
            if entity.is_sentinel() {
                return Err(EdlError::Invariant(format!("sentinel {entity} has an importance score")));
            }
            if !(0.0..=1.0).contains(&score) {
                return Err(EdlError::Invariant(format!("importance {score} of {entity} outside [0,1]")));
            }
        }
        Ok(EntityImportanceDict { scores })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = tsv::read(path)?;
        let mut scores = HashMap::new();
        for rec in tsv::records(&text, path, 2..=2)? {
            let entity = EntityId::parse(rec.fields[0].trim())
                .ok_or_else(|| EdlError::parse(path, rec.line, "empty entity id"))?;
            let score = tsv::parse_f64(path, rec.line, rec.fields[1])?;
            if scores.insert(entity.clone(), score).is_some() {
                return Err(EdlError::parse(path, rec.line, format!("duplicate entry for {entity}")));
            }
        }
        Self::from_scores(scores)
    }

    /// Stored score, 0 when absent.
    pub fn get(&self, entity: &EntityId) -> f64 {
        self.scores.get(entity).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Optional display names. Entities without one are shown as their id with
/// underscores turned into spaces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DisplayNames {
    names: HashMap<EntityId, String>,
}

impl DisplayNames {
    pub fn load(path: &Path) -> Result<Self> {
        let text = tsv::read(path)?;
        let mut names = HashMap::new();
        for rec in tsv::records(&text, path, 2..=2)? {
            let entity = EntityId::parse(rec.fields[0].trim())
                .ok_or_else(|| EdlError::parse(path, rec.line, "empty entity id"))?;
            names.insert(entity, rec.fields[1].trim().to_string());
        }
        Ok(DisplayNames { names })
    }

    pub fn insert(&mut self, entity: EntityId, name: impl Into<String>) {
        self.names.insert(entity, name.into());
    }

    pub fn display_name<'a>(&'a self, entity: &'a EntityId) -> Cow<'a, str> {
        match self.names.get(entity) {
            Some(name) => Cow::Borrowed(name),
            None => Cow::Owned(entity.as_str().replace('_', " ")),
        }
    }
}

/// Locations of the dictionary files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictionaryPaths {
    pub priors: PathBuf,
    pub cooccurrence: PathBuf,
    pub importance: PathBuf,
    pub topic_parents: PathBuf,
    pub entity_topics: PathBuf,
    pub names: Option<PathBuf>,
}

impl DictionaryPaths {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        let names = dir.join("names.tsv");
        DictionaryPaths {
            priors: dir.join("priors.tsv"),
            cooccurrence: dir.join("cooccurrence.tsv"),
            importance: dir.join("importance.tsv"),
            topic_parents: dir.join("topic_parents.tsv"),
            entity_topics: dir.join("entity_topics.tsv"),
            names: names.exists().then_some(names),
        }
    }
}

/// The five loaded dictionaries plus display names. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct DictionarySet {
    pub priors: MentionEntityPriorDict,
    pub cooccurrence: EntityCooccurDict,
    pub importance: EntityImportanceDict,
    pub ontology: TopicOntology,
    pub names: DisplayNames,
}

impl DictionarySet {
    pub fn load(paths: &DictionaryPaths, limits: CooccurLimits) -> Result<Self> {
        let priors = MentionEntityPriorDict::load(&paths.priors)?;
        let cooccurrence = EntityCooccurDict::load(&paths.cooccurrence, limits)?;
        let importance = EntityImportanceDict::load(&paths.importance)?;
        let ontology = TopicOntology::load(&paths.topic_parents, &paths.entity_topics)?;
        let names = match &paths.names {
            Some(p) => DisplayNames::load(p)?,
            None => DisplayNames::default(),
        };
        Ok(DictionarySet {
            priors,
            cooccurrence,
            importance,
            ontology,
            names,
        })
    }

    /// Distinct KB entities referenced anywhere in the dictionaries.
    pub fn entity_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        for (_, _, cands) in self.priors.iter() {
            for c in cands {
                if !c.entity.is_sentinel() {
                    seen.insert(&c.entity);
                }
            }
        }
        seen.extend(self.importance.scores.keys());
        seen.len()
    }

    /// Rough resident size of the dictionaries in bytes.
    pub fn approximate_bytes(&self) -> usize {
        let candidate = std::mem::size_of::<Candidate>() + 16;
        let priors: usize = self
            .priors
            .iter()
            .map(|(_, surface, c)| surface.len() + 48 + c.len() * candidate)
            .sum();
        let cooccur = self.cooccurrence.pair_count() * 40 + self.cooccurrence.entity_count() * 48;
        let importance = self.importance.len() * 48;
        let ontology = self.ontology.topic_count() * 64 + self.ontology.edge_count() * 8
            + self.ontology.mapped_entity_count() * 56;
        priors + cooccur + importance + ontology
    }
}

/// `load_dictionaries` with the default co-occurrence limits (top 30,
/// minimum count 10).
pub fn load_dictionaries(paths: &DictionaryPaths) -> Result<DictionarySet> {
    DictionarySet::load(paths, CooccurLimits::default())
}
