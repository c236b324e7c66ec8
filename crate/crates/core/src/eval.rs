//! Scoring predicted annotations against gold.
//!
//! Each aligned (prediction, gold) pair falls in one cell:
//!
//! | predicted \ gold | entity E            | NIL |
//! |------------------|---------------------|-----|
//! | E                | TP                  | FP  |
//! | other entity     | FP                  | FP  |
//! | NIL              | FN                  | TN  |
//!
//! MISC predictions count as a wrong entity against a KB gold entity and as
//! NIL against gold NIL.

use std::collections::BTreeMap;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::entity::EntityId;
use crate::error::{EdlError, Result};
use crate::record::{DocumentRecord, GoldDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    TruePositive,
    FalsePositive,
    FalseNegative,
    TrueNegative,
}

pub fn classify_pair(predicted: &EntityId, gold: &EntityId) -> Outcome {
    match (predicted, gold) {
        (EntityId::Nil, EntityId::Nil) | (EntityId::Misc, EntityId::Nil) => Outcome::TrueNegative,
        (EntityId::Nil, _) => Outcome::FalseNegative,
        (_, EntityId::Nil) => Outcome::FalsePositive,
        (p, g) if p == g && !p.is_sentinel() => Outcome::TruePositive,
        _ => Outcome::FalsePositive,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn add(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::TruePositive => self.tp += 1,
            Outcome::FalsePositive => self.fp += 1,
            Outcome::FalseNegative => self.fn_ += 1,
            Outcome::TrueNegative => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn metrics(&self) -> Metrics {
        Metrics::from_counts(*self)
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(flatten)]
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

impl Metrics {
    /// Standard formulas; any division by zero yields 0.
    pub fn from_counts(c: ConfusionCounts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            counts: c,
            precision,
            recall,
            f1,
            accuracy: ratio(c.tp + c.tn, c.total()),
        }
    }
}

/// How predicted and gold mention sets are matched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum AlignmentPolicy {
    /// Unmatched predictions are scored against NIL; unmatched gold
    /// mentions as if NIL had been predicted.
    #[default]
    Lenient,
    /// Any span present on only one side is an error.
    Strict,
}

pub type Span = (usize, usize);

/// Confusion counts for one document, aligning by exact character span.
pub fn evaluate_spans(
    predicted: &[(Span, EntityId)],
    gold: &[(Span, EntityId)],
    policy: AlignmentPolicy,
) -> Result<ConfusionCounts> {
    let pred: BTreeMap<Span, &EntityId> = predicted.iter().map(|(s, e)| (*s, e)).collect();
    let gold: BTreeMap<Span, &EntityId> = gold.iter().map(|(s, e)| (*s, e)).collect();
    if policy == AlignmentPolicy::Strict {
        let only_pred: Vec<String> = pred.keys().filter(|s| !gold.contains_key(s)).map(fmt_span).collect();
        let only_gold: Vec<String> = gold.keys().filter(|s| !pred.contains_key(s)).map(fmt_span).collect();
        if !only_pred.is_empty() || !only_gold.is_empty() {
            return Err(EdlError::Alignment(format!(
                "predicted only [{}]; gold only [{}]",
                only_pred.join(", "),
                only_gold.join(", ")
            )));
        }
    }
    let mut counts = ConfusionCounts::default();
    for (span, p) in &pred {
        let g = gold.get(span).copied().unwrap_or(&EntityId::Nil);
        counts.add(classify_pair(p, g));
    }
    for (span, g) in &gold {
        if !pred.contains_key(span) {
            counts.add(classify_pair(&EntityId::Nil, g));
        }
    }
    Ok(counts)
}

fn fmt_span(s: &Span) -> String {
    format!("{}..{}", s.0, s.1)
}

fn record_spans(r: &DocumentRecord) -> Vec<(Span, EntityId)> {
    r.mentions.iter().map(|m| (m.span(), m.entity.clone())).collect()
}

/// Scores predicted records against gold documents, paired by position.
/// When both sides carry an id they must agree.
pub fn evaluate(predictions: &[DocumentRecord], gold: &[GoldDocument], policy: AlignmentPolicy) -> Result<Metrics> {
    if predictions.len() != gold.len() {
        return Err(EdlError::Alignment(format!(
            "{} predicted documents but {} gold documents",
            predictions.len(),
            gold.len()
        )));
    }
    let mut total = ConfusionCounts::default();
    for (i, (p, g)) in predictions.iter().zip(gold).enumerate() {
        if let (Some(a), Some(b)) = (&p.id, &g.id) {
            if a != b {
                return Err(EdlError::Alignment(format!("document {i}: predicted id {a:?}, gold id {b:?}")));
            }
        }
        let gold_spans: Vec<(Span, EntityId)> = g.mentions.iter().map(|m| (m.span(), m.entity.clone())).collect();
        total += evaluate_spans(&record_spans(p), &gold_spans, policy)
            .map_err(|e| EdlError::Alignment(format!("document {i}: {e}")))?;
    }
    Ok(total.metrics())
}
