//! The two-pass disambiguation algorithm.
//!
//! The first pass resolves easy mentions from their priors alone. The
//! second pass scores every candidate of each hard mention with the
//! decision tree (label) and logistic regression (score), using the easy
//! entities as context, and picks one candidate per mention.

use serde::{Deserialize, Serialize};

use crate::classify::ModelPair;
use crate::entity::EntityId;
use crate::error::{EdlError, Result};
use crate::features::{compute_feature_vector, DocumentContext, EasyEntity, EntityContext, FeatureVector};
use crate::kb::{Candidate, DictionarySet};
use crate::preprocess::Mention;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Easy threshold for two-candidate mentions where one candidate is
    /// NIL or MISC.
    pub lambda1: f64,
    /// Easy threshold for mentions with three or more candidates.
    pub lambda2: f64,
    /// Margin a NIL/MISC winner needs over the runner-up.
    pub lambda3: f64,
    /// Maximum number of easy entities in a hard mention's context.
    pub window: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            lambda1: 0.75,
            lambda2: 0.9,
            lambda3: 0.5,
            window: 400,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2), ("lambda3", self.lambda3)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(EdlError::Config(format!("{name} must be in [0,1], got {v}")));
            }
        }
        if self.window == 0 {
            return Err(EdlError::Config("window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which pass resolved a mention. Serialized as the number 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pass {
    First,
    Second,
}

impl Pass {
    pub fn number(self) -> u8 {
        match self {
            Pass::First => 1,
            Pass::Second => 2,
        }
    }
}

impl Serialize for Pass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for Pass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match u8::deserialize(d)? {
            1 => Ok(Pass::First),
            2 => Ok(Pass::Second),
            n => Err(serde::de::Error::custom(format!("pass must be 1 or 2, got {n}"))),
        }
    }
}

/// A second-pass candidate after labeling and scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgedCandidate {
    pub entity: EntityId,
    pub label: bool,
    pub score: f64,
}

/// Outcome for one mention. `judged` is empty for first-pass mentions and
/// parallel to the mention's candidate list otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub mention: usize,
    pub chosen: usize,
    pub entity: EntityId,
    pub pass: Pass,
    pub judged: Vec<JudgedCandidate>,
}

impl Resolution {
    pub fn score(&self) -> Option<f64> {
        self.judged.get(self.chosen).map(|j| j.score)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FirstPassOutcome {
    /// Mention index and chosen candidate index.
    pub easy: Vec<(usize, usize)>,
    /// Indices of mentions left for the second pass, in document order.
    pub hard: Vec<usize>,
}

fn argmax_by<T>(items: impl IntoIterator<Item = (usize, T)>, key: impl Fn(&T) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, item) in items {
        let v = key(&item);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// The easy-mention rule for one candidate list. Returns the chosen
/// candidate index, or `None` if the mention is hard.
pub fn easy_choice(candidates: &[Candidate], hp: &Hyperparameters) -> Option<usize> {
    match candidates.len() {
        0 => None,
        1 => Some(0),
        2 => {
            let sentinels = candidates.iter().filter(|c| c.entity.is_sentinel()).count();
            if sentinels != 1 {
                return None;
            }
            let other = candidates.iter().position(|c| !c.entity.is_sentinel())?;
            (candidates[other].prior > hp.lambda1).then_some(other)
        }
        _ => {
            let best = argmax_by(candidates.iter().enumerate(), |c| c.prior)?;
            (candidates[best].prior > hp.lambda2).then_some(best)
        }
    }
}

pub fn first_pass(mentions: &[Mention], hp: &Hyperparameters) -> Result<FirstPassOutcome> {
    let mut out = FirstPassOutcome::default();
    for (i, m) in mentions.iter().enumerate() {
        if m.candidates.is_empty() {
            return Err(EdlError::NoCandidates(m.surface.clone()));
        }
        match easy_choice(&m.candidates, hp) {
            Some(c) => out.easy.push((i, c)),
            None => out.hard.push(i),
        }
    }
    Ok(out)
}

/// Picks one candidate from labeled, scored candidates and returns its
/// index.
///
/// With exactly one True label that candidate wins. With several, the
/// highest-scoring True candidate wins; with none, the highest-scoring
/// candidate overall. If that provisional winner is NIL or MISC, the best
/// non-sentinel candidate of the same pool replaces it unless the winner
/// leads by at least `lambda3`. Score ties go to the lower index.
pub fn final_disambiguation(candidates: &[JudgedCandidate], hp: &Hyperparameters) -> Result<usize> {
    if candidates.is_empty() {
        return Err(EdlError::NoCandidates(String::new()));
    }
    let trues: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].label).collect();
    if trues.len() == 1 {
        return Ok(trues[0]);
    }
    let pool: Vec<usize> = if trues.is_empty() { (0..candidates.len()).collect() } else { trues };
    let score = |i: &usize| candidates[*i].score;
    let provisional = argmax_by(pool.iter().map(|&i| (i, i)), score).expect("non-empty pool");
    if !candidates[provisional].entity.is_sentinel() {
        return Ok(provisional);
    }
    let runner_up = argmax_by(
        pool.iter()
            .filter(|&&i| i != provisional && !candidates[i].entity.is_sentinel())
            .map(|&i| (i, i)),
        score,
    );
    match runner_up {
        Some(r) if candidates[provisional].score - candidates[r].score < hp.lambda3 => Ok(r),
        _ => Ok(provisional),
    }
}

/// Document context built from the first-pass results.
pub fn easy_context(mentions: &[Mention], first: &FirstPassOutcome) -> DocumentContext {
    DocumentContext::new(first.easy.iter().map(|&(m, c)| EasyEntity {
        entity: mentions[m].candidates[c].entity.clone(),
        position: mentions[m].token_start,
    }))
}

pub fn build_entity_context(mention: &Mention, candidate_index: usize, doc: &DocumentContext, window: usize) -> EntityContext {
    EntityContext::new(doc, mention.token_start, candidate_index, window)
}

/// Feature vectors for every candidate of a hard mention.
pub fn candidate_features(
    mention: &Mention,
    doc: &DocumentContext,
    dicts: &DictionarySet,
    hp: &Hyperparameters,
) -> Result<Vec<FeatureVector>> {
    (0..mention.candidates.len())
        .map(|k| {
            let ctx = build_entity_context(mention, k, doc, hp.window);
            compute_feature_vector(mention, &ctx, doc, dicts, hp.window)
        })
        .collect()
}

pub fn second_pass(
    mentions: &[Mention],
    hard: &[usize],
    doc: &DocumentContext,
    models: &ModelPair,
    dicts: &DictionarySet,
    hp: &Hyperparameters,
) -> Result<Vec<Resolution>> {
    hard.iter()
        .map(|&m| {
            let mention = &mentions[m];
            let judged: Vec<JudgedCandidate> = candidate_features(mention, doc, dicts, hp)?
                .iter()
                .zip(mention.candidates.iter())
                .map(|(v, c)| JudgedCandidate {
                    entity: c.entity.clone(),
                    label: models.tree.predict(v),
                    score: models.logistic.score(v),
                })
                .collect();
            let chosen = final_disambiguation(&judged, hp)?;
            Ok(Resolution {
                mention: m,
                chosen,
                entity: judged[chosen].entity.clone(),
                pass: Pass::Second,
                judged,
            })
        })
        .collect()
}

/// Runs both passes and returns one resolution per mention, in mention
/// order.
pub fn disambiguate(
    mentions: &[Mention],
    models: &ModelPair,
    dicts: &DictionarySet,
    hp: &Hyperparameters,
) -> Result<Vec<Resolution>> {
    let first = first_pass(mentions, hp)?;
    let doc = easy_context(mentions, &first);
    let mut out: Vec<Resolution> = first
        .easy
        .iter()
        .map(|&(m, c)| Resolution {
            mention: m,
            chosen: c,
            entity: mentions[m].candidates[c].entity.clone(),
            pass: Pass::First,
            judged: Vec::new(),
        })
        .collect();
    out.extend(second_pass(mentions, &first.hard, &doc, models, dicts, hp)?);
    out.sort_by_key(|r| r.mention);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cands(list: &[(&str, f64)]) -> Vec<Candidate> {
        list.iter()
            .map(|&(e, p)| Candidate { entity: EntityId::parse(e).unwrap(), prior: p })
            .collect()
    }

    fn judged(list: &[(&str, bool, f64)]) -> Vec<JudgedCandidate> {
        list.iter()
            .map(|&(e, label, score)| JudgedCandidate { entity: EntityId::parse(e).unwrap(), label, score })
            .collect()
    }

    const HP: Hyperparameters = Hyperparameters { lambda1: 0.75, lambda2: 0.9, lambda3: 0.5, window: 400 };

    #[test]
    fn easy_rules() {
        assert_eq!(easy_choice(&cands(&[("Technology", 1.0)]), &HP), Some(0));
        assert_eq!(easy_choice(&cands(&[("Eric_Schmidt", 0.8), ("__NIL__", 0.2)]), &HP), Some(0));
        assert_eq!(easy_choice(&cands(&[("__NIL__", 0.2), ("Eric_Schmidt", 0.8)]), &HP), Some(1));
        assert_eq!(easy_choice(&cands(&[("Google_Inc.", 0.7), ("__NIL__", 0.3)]), &HP), None);
        assert_eq!(easy_choice(&cands(&[("X", 0.75), ("__MISC__", 0.25)]), &HP), None);
        assert_eq!(easy_choice(&cands(&[("A", 0.8), ("B", 0.2)]), &HP), None);
        assert_eq!(easy_choice(&cands(&[("__NIL__", 0.8), ("__MISC__", 0.2)]), &HP), None);
        let apple = cands(&[("Apple_Inc.", 0.6), ("Apple_(fruit)", 0.25), ("__NIL__", 0.1), ("Apple_Records", 0.05)]);
        assert_eq!(easy_choice(&apple, &HP), None);
        assert_eq!(easy_choice(&cands(&[("A", 0.95), ("B", 0.03), ("C", 0.02)]), &HP), Some(0));
        assert_eq!(easy_choice(&cands(&[("A", 0.03), ("B", 0.95), ("C", 0.02)]), &HP), Some(1));
    }

    #[test]
    fn single_true_wins() {
        let j = judged(&[("Apple_Inc.", true, 0.9), ("Apple_(fruit)", false, 0.95), ("__NIL__", false, 0.2)]);
        assert_eq!(final_disambiguation(&j, &HP).unwrap(), 0);
        let j = judged(&[("__NIL__", true, 0.3), ("X", false, 0.29)]);
        assert_eq!(final_disambiguation(&j, &HP).unwrap(), 0);
    }

    #[test]
    fn nil_margin_rule() {
        let j = judged(&[("__NIL__", true, 0.70), ("Android_(OS)", true, 0.55)]);
        assert_eq!(final_disambiguation(&j, &HP).unwrap(), 1);
        let j = judged(&[("__NIL__", false, 0.99), ("X", false, 0.10)]);
        assert_eq!(final_disambiguation(&j, &HP).unwrap(), 0);
        let j = judged(&[("__MISC__", false, 0.6), ("X", false, 0.2)]);
        assert_eq!(final_disambiguation(&j, &HP).unwrap(), 1);
        // runner-up only from the True pool
        let j = judged(&[("__NIL__", true, 0.7), ("__MISC__", true, 0.6), ("X", false, 0.69)]);
        assert_eq!(final_disambiguation(&j, &HP).unwrap(), 0);
    }

    #[test]
    fn highest_true_and_ties() {
        let j = judged(&[("A", true, 0.4), ("B", true, 0.6), ("C", false, 0.9)]);
        assert_eq!(final_disambiguation(&j, &HP).unwrap(), 1);
        let j = judged(&[("A", false, 0.5), ("B", false, 0.5)]);
        assert_eq!(final_disambiguation(&j, &HP).unwrap(), 0);
        assert!(final_disambiguation(&[], &HP).is_err());
    }

    #[test]
    fn hyperparameter_validation() {
        assert!(Hyperparameters::default().validate().is_ok());
        assert!(Hyperparameters { lambda1: 1.5, ..HP }.validate().is_err());
        assert!(Hyperparameters { window: 0, ..HP }.validate().is_err());
    }

    #[test]
    fn pass_serializes_as_number() {
        assert_eq!(serde_json::to_string(&Pass::Second).unwrap(), "2");
        assert_eq!(serde_json::from_str::<Pass>("1").unwrap(), Pass::First);
        assert!(serde_json::from_str::<Pass>("3").is_err());
    }
}
