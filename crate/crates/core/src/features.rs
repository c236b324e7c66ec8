//! The five disambiguation features, each in [0,1].
//!
//! Context-independent: mention-entity prior, mention/name Jaccard, entity
//! importance. Context-dependent (computed against the window of easy
//! entities around a hard mention): averaged entity co-occurrence and
//! topic similarity.

use std::collections::{HashMap, HashSet};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::entity::EntityId;
use crate::error::{EdlError, Result};
use crate::kb::{min_over, DictionarySet, EntityCooccurDict, EntityImportanceDict, TopicOntology};
use crate::preprocess::{folded_words, Mention};

pub const FEATURE_COUNT: usize = 5;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "mention_entity_cooccurr",
    "mention_entity_jaccard",
    "entity_importance",
    "entity_entity_cooccurr",
    "entity_entity_topic_sim",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mention_entity_cooccurr: f64,
    pub mention_entity_jaccard: f64,
    pub entity_importance: f64,
    pub entity_entity_cooccurr: f64,
    pub entity_entity_topic_sim: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.mention_entity_cooccurr,
            self.mention_entity_jaccard,
            self.entity_importance,
            self.entity_entity_cooccurr,
            self.entity_entity_topic_sim,
        ]
    }

    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector {
            mention_entity_cooccurr: v[0],
            mention_entity_jaccard: v[1],
            entity_importance: v[2],
            entity_entity_cooccurr: v[3],
            entity_entity_topic_sim: v[4],
        }
    }

    pub fn get(&self, index: usize) -> f64 {
        self.to_array()[index]
    }

    pub fn in_range(&self) -> bool {
        self.to_array().iter().all(|v| (0.0..=1.0).contains(v))
    }
}

/// An easy entity resolved in the first pass, at the document-level token
/// index where its mention starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EasyEntity {
    pub entity: EntityId,
    pub position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairScores {
    pub cooccurrence: u64,
    pub topic_distance: Option<u32>,
}

/// Easy entities of one document plus a cache of candidate/easy-entity pair
/// scores. Reads are concurrent; inserts are serialized by the lock and
/// identical keys always carry identical values.
#[derive(Debug, Default)]
pub struct DocumentContext {
    easy: Vec<EasyEntity>,
    cache: RwLock<HashMap<(EntityId, EntityId), PairScores>>,
}

impl DocumentContext {
    /// Sentinel entities are dropped; the rest are kept ordered by position.
    pub fn new(easy: impl IntoIterator<Item = EasyEntity>) -> Self {
        let mut easy: Vec<EasyEntity> = easy.into_iter().filter(|e| !e.entity.is_sentinel()).collect();
        easy.sort_by_key(|e| e.position);
        DocumentContext {
            easy,
            cache: RwLock::default(),
        }
    }

    pub fn easy_entities(&self) -> &[EasyEntity] {
        &self.easy
    }

    pub fn cached_pairs(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    /// Pair scores of `candidate` against each listed easy entity, using and
    /// filling the cache.
    pub fn pair_scores(&self, candidate: &EntityId, window: &[usize], dicts: &DictionarySet) -> Vec<PairScores> {
        let mut out = Vec::with_capacity(window.len());
        let mut missing = Vec::new();
        {
            let cache = self.cache.read().expect("cache lock");
            for (slot, &i) in window.iter().enumerate() {
                let key = (candidate.clone(), self.easy[i].entity.clone());
                match cache.get(&key) {
                    Some(s) => out.push(*s),
                    None => {
                        out.push(PairScores { cooccurrence: 0, topic_distance: None });
                        missing.push(slot);
                    }
                }
            }
        }
        if missing.is_empty() {
            return out;
        }
        let topics = dicts.ontology.topics_of(candidate);
        let distances = (!topics.is_empty()).then(|| dicts.ontology.distances_from(topics));
        let mut fresh = Vec::with_capacity(missing.len());
        for slot in missing {
            let other = &self.easy[window[slot]].entity;
            let scores = PairScores {
                cooccurrence: dicts.cooccurrence.count(candidate, other),
                topic_distance: distances
                    .as_ref()
                    .and_then(|d| min_over(d, dicts.ontology.topics_of(other))),
            };
            out[slot] = scores;
            fresh.push(((candidate.clone(), other.clone()), scores));
        }
        self.cache.write().expect("cache lock").extend(fresh);
        out
    }
}

/// Context of one candidate of a hard mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityContext {
    /// Token index of the hard mention.
    pub position: usize,
    pub candidate_index: usize,
    /// Indices into [`DocumentContext::easy_entities`], nearest first.
    pub window: Vec<usize>,
}

impl EntityContext {
    pub fn new(doc: &DocumentContext, position: usize, candidate_index: usize, window_size: usize) -> Self {
        EntityContext {
            position,
            candidate_index,
            window: nearest_easy(doc.easy_entities(), position, window_size),
        }
    }
}

/// Up to `limit` easy entities closest to `position` by token distance;
/// equal distances go to the earlier entity.
fn nearest_easy(easy: &[EasyEntity], position: usize, limit: usize) -> Vec<usize> {
    let split = easy.partition_point(|e| e.position < position);
    let mut left = split;
    let mut right = split;
    let mut out = Vec::with_capacity(limit.min(easy.len()));
    while out.len() < limit {
        let l = (left > 0).then(|| position - easy[left - 1].position);
        let r = (right < easy.len()).then(|| easy[right].position - position);
        match (l, r) {
            (Some(dl), Some(dr)) if dl <= dr => {
                left -= 1;
                out.push(left);
            }
            (Some(_), None) => {
                left -= 1;
                out.push(left);
            }
            (_, Some(_)) => {
                out.push(right);
                right += 1;
            }
            (None, None) => break,
        }
    }
    out
}

pub fn mention_entity_cooccurr(mention: &Mention, candidate: &EntityId) -> Result<f64> {
    mention
        .candidates
        .iter()
        .find(|c| &c.entity == candidate)
        .map(|c| c.prior)
        .ok_or_else(|| EdlError::NotACandidate {
            surface: mention.surface.clone(),
            entity: candidate.to_string(),
        })
}

/// Jaccard similarity of the case-folded word sets; 0 if either is empty.
pub fn mention_entity_jaccard(mention: &str, entity_name: &str) -> f64 {
    let a: HashSet<String> = folded_words(mention).collect();
    let b: HashSet<String> = folded_words(entity_name).collect();
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(&b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

pub fn entity_importance(candidate: &EntityId, importance: &EntityImportanceDict) -> f64 {
    if candidate.is_sentinel() {
        0.0
    } else {
        importance.get(candidate)
    }
}

/// Maps a non-negative value into [0,1) monotonically.
pub fn squash(x: f64) -> f64 {
    x / (x + 1.0)
}

/// Summed co-occurrence counts with the window entities, divided by the
/// window budget `w`, squashed into [0,1).
pub fn cooccurrence_feature(counts: impl IntoIterator<Item = u64>, w: usize) -> f64 {
    let total: u64 = counts.into_iter().sum();
    if total == 0 || w == 0 {
        return 0.0;
    }
    squash(total as f64 / w as f64)
}

pub fn entity_entity_cooccurr<'a>(
    candidate: &EntityId,
    window: impl IntoIterator<Item = &'a EntityId>,
    cooccur: &EntityCooccurDict,
    w: usize,
) -> f64 {
    if candidate.is_sentinel() {
        return 0.0;
    }
    cooccurrence_feature(window.into_iter().map(|e| cooccur.count(candidate, e)), w)
}

/// 1/distance, with a shared topic (distance 0) giving 1.
pub fn distance_similarity(distance: Option<u32>) -> f64 {
    match distance {
        Some(0) => 1.0,
        Some(d) => 1.0 / d as f64,
        None => 0.0,
    }
}

pub fn entity_entity_topic_sim<'a>(
    candidate: &EntityId,
    window: impl IntoIterator<Item = &'a EntityId>,
    ontology: &TopicOntology,
) -> f64 {
    if candidate.is_sentinel() {
        return 0.0;
    }
    window
        .into_iter()
        .map(|e| distance_similarity(ontology.entity_distance(candidate, e)))
        .fold(0.0, f64::max)
}

/// All five features for the candidate selected by `context`. Pair scores
/// against the window go through the document cache.
pub fn compute_feature_vector(
    mention: &Mention,
    context: &EntityContext,
    doc: &DocumentContext,
    dicts: &DictionarySet,
    window_size: usize,
) -> Result<FeatureVector> {
    let candidate = mention
        .candidates
        .get(context.candidate_index)
        .ok_or_else(|| EdlError::NotACandidate {
            surface: mention.surface.clone(),
            entity: format!("#{}", context.candidate_index),
        })?;
    let entity = &candidate.entity;
    if entity.is_sentinel() {
        return Ok(FeatureVector {
            mention_entity_cooccurr: candidate.prior,
            ..FeatureVector::default()
        });
    }
    let pairs = doc.pair_scores(entity, &context.window, dicts);
    let cooccurrence = cooccurrence_feature(pairs.iter().map(|p| p.cooccurrence), window_size);
    let topic_sim = pairs
        .iter()
        .map(|p| distance_similarity(p.topic_distance))
        .fold(0.0, f64::max);
    Ok(FeatureVector {
        mention_entity_cooccurr: candidate.prior,
        mention_entity_jaccard: mention_entity_jaccard(&mention.surface, &dicts.names.display_name(entity)),
        entity_importance: entity_importance(entity, &dicts.importance),
        entity_entity_cooccurr: cooccurrence,
        entity_entity_topic_sim: topic_sim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{CooccurLimits, Candidate};
    use std::sync::Arc;

    fn e(s: &str) -> EntityId {
        EntityId::kb(s)
    }

    fn easy(list: &[(&str, usize)]) -> DocumentContext {
        DocumentContext::new(list.iter().map(|&(n, p)| EasyEntity { entity: e(n), position: p }))
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(mention_entity_jaccard("Marvel", "Marvel Comics"), 0.5);
        assert_eq!(mention_entity_jaccard("Marvel", "Marvel Entertainment"), 0.5);
        assert_eq!(mention_entity_jaccard("Tech Industry", "tech industry"), 1.0);
        assert_eq!(mention_entity_jaccard("", "x"), 0.0);
        assert_eq!(mention_entity_jaccard("a b c", "c d"), 0.25);
    }

    #[test]
    fn cooccurrence_formula() {
        // counts {12, 0}, W = 2 -> raw 6 -> 6/7
        let v = cooccurrence_feature([12, 0], 2);
        assert!((v - 6.0 / 7.0).abs() < 1e-15);
        assert_eq!(cooccurrence_feature([0, 0], 2), 0.0);
        assert_eq!(cooccurrence_feature([], 400), 0.0);
    }

    #[test]
    fn cooccurrence_through_dictionary() {
        let mut n = HashMap::new();
        n.insert(e("A"), vec![(e("B"), 12)]);
        let dict = EntityCooccurDict::from_neighbors(n, CooccurLimits::default()).unwrap();
        let v = entity_entity_cooccurr(&e("A"), [&e("B"), &e("C")], &dict, 2);
        assert!((v - 6.0 / 7.0).abs() < 1e-15);
        assert_eq!(entity_entity_cooccurr(&EntityId::Nil, [&e("B")], &dict, 2), 0.0);
    }

    #[test]
    fn similarity_from_distance() {
        assert_eq!(distance_similarity(Some(0)), 1.0);
        assert_eq!(distance_similarity(Some(4)), 0.25);
        assert_eq!(distance_similarity(Some(5)), 0.2);
        assert_eq!(distance_similarity(None), 0.0);
    }

    #[test]
    fn window_prefers_nearest_then_earlier() {
        let doc = easy(&[("A", 1), ("B", 4), ("C", 8), ("D", 20)]);
        // position 6: B at 2, C at 2 -> B (earlier) first, then C
        let ctx = EntityContext::new(&doc, 6, 0, 2);
        assert_eq!(ctx.window, vec![1, 2]);
        let ctx = EntityContext::new(&doc, 6, 0, 1);
        assert_eq!(ctx.window, vec![1]);
        let ctx = EntityContext::new(&doc, 6, 0, 400);
        assert_eq!(ctx.window, vec![1, 2, 0, 3]);
        let ctx = EntityContext::new(&easy(&[]), 6, 0, 400);
        assert!(ctx.window.is_empty());
    }

    #[test]
    fn sentinels_are_not_context() {
        let doc = DocumentContext::new(vec![
            EasyEntity { entity: EntityId::Nil, position: 0 },
            EasyEntity { entity: e("A"), position: 3 },
        ]);
        assert_eq!(doc.easy_entities().len(), 1);
    }

    #[test]
    fn nil_candidate_only_has_prior() {
        let mention = Mention {
            surface: "Google".into(),
            token_start: 0,
            token_len: 1,
            start: 0,
            end: 6,
            candidates: Arc::from(vec![
                Candidate { entity: e("Google_Inc."), prior: 0.7 },
                Candidate { entity: EntityId::Nil, prior: 0.3 },
            ]),
        };
        let doc = easy(&[]);
        let ctx = EntityContext::new(&doc, 0, 1, 400);
        let v = compute_feature_vector(&mention, &ctx, &doc, &DictionarySet::default(), 400).unwrap();
        assert_eq!(v, FeatureVector { mention_entity_cooccurr: 0.3, ..Default::default() });
        assert_eq!(mention_entity_cooccurr(&mention, &EntityId::Nil).unwrap(), 0.3);
        assert!(mention_entity_cooccurr(&mention, &EntityId::Misc).is_err());
    }
}
