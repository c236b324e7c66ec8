//! CART decision tree with weighted Gini impurity.
//!
//! Splits are `feature <= threshold` (left) / `> threshold` (right), with
//! thresholds at midpoints between consecutive distinct values. Among
//! equally good splits the lowest feature index wins, then the lowest
//! threshold. An impure node is split even when the best gain is zero, so
//! an unbounded tree separates any dataset without contradictory
//! duplicates.

use serde::{Deserialize, Serialize};

use super::{class_weights, LabeledExample};
use crate::error::{EdlError, Result};
use crate::features::{FeatureVector, FEATURE_COUNT};

const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub balance_classes: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: Some(8),
            min_leaf: 5,
            balance_classes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        label: bool,
        /// Weighted fraction of the majority class.
        purity: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub root: TreeNode,
}

impl DecisionTreeModel {
    pub fn leaf(label: bool) -> Self {
        DecisionTreeModel {
            root: TreeNode::Leaf { label, purity: 1.0, samples: 0 },
        }
    }

    pub fn predict(&self, v: &FeatureVector) -> bool {
        let x = v.to_array();
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label, .. } => return *label,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

pub fn dt_predict(model: &DecisionTreeModel, v: &FeatureVector) -> bool {
    model.predict(v)
}

struct Trainer<'a> {
    x: Vec<[f64; FEATURE_COUNT]>,
    y: Vec<bool>,
    w: Vec<f64>,
    params: &'a TreeParams,
}

#[derive(Clone, Copy)]
struct Tally {
    pos: f64,
    neg: f64,
    pos_n: usize,
    neg_n: usize,
}

impl Tally {
    fn total(&self) -> f64 {
        self.pos + self.neg
    }

    fn gini(&self) -> f64 {
        let t = self.total();
        if t <= 0.0 {
            return 0.0;
        }
        let p = self.pos / t;
        2.0 * p * (1.0 - p)
    }

    fn label(&self) -> bool {
        if self.pos != self.neg {
            self.pos > self.neg
        } else {
            self.pos_n > self.neg_n
        }
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Trainer<'_> {
    fn tally(&self, idx: &[usize]) -> Tally {
        let mut t = Tally { pos: 0.0, neg: 0.0, pos_n: 0, neg_n: 0 };
        for &i in idx {
            if self.y[i] {
                t.pos += self.w[i];
                t.pos_n += 1;
            } else {
                t.neg += self.w[i];
                t.neg_n += 1;
            }
        }
        t
    }

    fn best_split(&self, idx: &[usize], parent: &Tally) -> Option<Split> {
        let min_leaf = self.params.min_leaf.max(1);
        let total = parent.total();
        let parent_gini = parent.gini();
        let mut best: Option<Split> = None;
        let mut order = idx.to_vec();
        for f in 0..FEATURE_COUNT {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = Tally { pos: 0.0, neg: 0.0, pos_n: 0, neg_n: 0 };
            for k in 0..order.len() - 1 {
                let i = order[k];
                if self.y[i] {
                    left.pos += self.w[i];
                    left.pos_n += 1;
                } else {
                    left.neg += self.w[i];
                    left.neg_n += 1;
                }
                let here = self.x[i][f];
                let next = self.x[order[k + 1]][f];
                if here == next {
                    continue;
                }
                let n_left = k + 1;
                if n_left < min_leaf || order.len() - n_left < min_leaf {
                    continue;
                }
                let right = Tally {
                    pos: parent.pos - left.pos,
                    neg: parent.neg - left.neg,
                    pos_n: parent.pos_n - left.pos_n,
                    neg_n: parent.neg_n - left.neg_n,
                };
                let child = (left.total() * left.gini() + right.total() * right.gini()) / total;
                let gain = parent_gini - child;
                let mut threshold = here + (next - here) / 2.0;
                if threshold >= next {
                    threshold = here;
                }
                if best.as_ref().is_none_or(|b| gain > b.gain + GAIN_EPS) {
                    best = Some(Split { feature: f, threshold, gain });
                }
            }
        }
        best
    }

    fn grow(&self, idx: &[usize], depth: usize) -> TreeNode {
        let tally = self.tally(idx);
        let leaf = || {
            let label = tally.label();
            let t = tally.total();
            let purity = if t > 0.0 { tally.pos.max(tally.neg) / t } else { 1.0 };
            TreeNode::Leaf { label, purity, samples: idx.len() }
        };
        let pure = tally.pos_n == 0 || tally.neg_n == 0;
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || idx.len() < 2 {
            return leaf();
        }
        let Some(split) = self.best_split(idx, &tally) else {
            return leaf();
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[i][split.feature] <= split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(&l, depth + 1)),
            right: Box::new(self.grow(&r, depth + 1)),
        }
    }
}

pub fn train_decision_tree(data: &[LabeledExample], params: &TreeParams) -> Result<DecisionTreeModel> {
    if data.is_empty() {
        return Err(EdlError::Training("no examples".into()));
    }
    let y: Vec<bool> = data.iter().map(|e| e.label).collect();
    let trainer = Trainer {
        x: data.iter().map(|e| e.features.to_array()).collect(),
        w: class_weights(&y, params.balance_classes),
        y,
        params,
    };
    let idx: Vec<usize> = (0..data.len()).collect();
    Ok(DecisionTreeModel { root: trainer.grow(&idx, 0) })
}
