//! Candidate classifiers: a decision tree that labels each candidate
//! True/False and a logistic regression that scores it.

mod logistic;
mod tree;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use logistic::{
    gradient_check, lr_score, sigmoid, train_logistic_regression, train_logistic_regression_traced,
    LogisticParams, LogisticRegressionModel, Objective, TrainingTrace,
};
pub use tree::{dt_predict, train_decision_tree, DecisionTreeModel, TreeNode, TreeParams};

use crate::error::{EdlError, Result};
use crate::features::FeatureVector;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub features: FeatureVector,
    pub label: bool,
}

/// Inverse-frequency weights (`n / (2 n_class)`) when `balance` is set and
/// both classes occur; otherwise all ones.
pub(crate) fn class_weights(labels: &[bool], balance: bool) -> Vec<f64> {
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = n - pos;
    if !balance || pos == 0.0 || neg == 0.0 {
        return vec![1.0; labels.len()];
    }
    let (wp, wn) = (n / (2.0 * pos), n / (2.0 * neg));
    labels.iter().map(|&l| if l { wp } else { wn }).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingParams {
    pub tree: TreeParams,
    pub logistic: LogisticParams,
}

/// The labeler/scorer ensemble used in the second pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPair {
    pub tree: DecisionTreeModel,
    pub logistic: LogisticRegressionModel,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    format_version: u32,
    kind: String,
    params: Option<TreeParams>,
    root: TreeNode,
}

#[derive(Serialize, Deserialize)]
struct LogisticFile {
    format_version: u32,
    kind: String,
    params: Option<LogisticParams>,
    weights: Vec<f64>,
    bias: f64,
}

const TREE_KIND: &str = "decision_tree";
const LOGISTIC_KIND: &str = "logistic_regression";

fn check_version(found: u32) -> Result<()> {
    if found != MODEL_FORMAT_VERSION {
        return Err(EdlError::ModelVersion { found, expected: MODEL_FORMAT_VERSION });
    }
    Ok(())
}

impl ModelPair {
    pub fn train(data: &[LabeledExample], params: &TrainingParams) -> Result<Self> {
        Ok(ModelPair {
            tree: train_decision_tree(data, &params.tree)?,
            logistic: train_logistic_regression(data, &params.logistic)?,
        })
    }

    pub fn tree_to_json(&self, params: Option<&TreeParams>) -> String {
        let file = TreeFile {
            format_version: MODEL_FORMAT_VERSION,
            kind: TREE_KIND.into(),
            params: params.copied(),
            root: self.tree.root.clone(),
        };
        serde_json::to_string_pretty(&file).expect("tree serializes") + "\n"
    }

    pub fn logistic_to_json(&self, params: Option<&LogisticParams>) -> String {
        let file = LogisticFile {
            format_version: MODEL_FORMAT_VERSION,
            kind: LOGISTIC_KIND.into(),
            params: params.copied(),
            weights: self.logistic.weights.to_vec(),
            bias: self.logistic.bias,
        };
        serde_json::to_string_pretty(&file).expect("weights serialize") + "\n"
    }

    pub fn tree_from_json(text: &str) -> Result<DecisionTreeModel> {
        let file: TreeFile = serde_json::from_str(text)?;
        check_version(file.format_version)?;
        if file.kind != TREE_KIND {
            return Err(EdlError::Config(format!("expected a {TREE_KIND} model, found {}", file.kind)));
        }
        Ok(DecisionTreeModel { root: file.root })
    }

    pub fn logistic_from_json(text: &str) -> Result<LogisticRegressionModel> {
        let file: LogisticFile = serde_json::from_str(text)?;
        check_version(file.format_version)?;
        if file.kind != LOGISTIC_KIND {
            return Err(EdlError::Config(format!("expected a {LOGISTIC_KIND} model, found {}", file.kind)));
        }
        let weights: [f64; 5] = file
            .weights
            .try_into()
            .map_err(|w: Vec<f64>| EdlError::Config(format!("expected 5 weights, found {}", w.len())))?;
        let model = LogisticRegressionModel { weights, bias: file.bias };
        if !model.is_finite() {
            return Err(EdlError::Config("non-finite logistic weights".into()));
        }
        Ok(model)
    }

    pub fn save(&self, tree_path: &Path, logistic_path: &Path, params: Option<&TrainingParams>) -> Result<()> {
        let write = |path: &Path, text: String| {
            fs::write(path, text).map_err(|e| EdlError::io(format!("writing {}", path.display()), e))
        };
        write(tree_path, self.tree_to_json(params.map(|p| &p.tree)))?;
        write(logistic_path, self.logistic_to_json(params.map(|p| &p.logistic)))
    }

    pub fn load(tree_path: &Path, logistic_path: &Path) -> Result<Self> {
        let read = |path: &Path| {
            fs::read_to_string(path).map_err(|e| EdlError::io(format!("reading {}", path.display()), e))
        };
        Ok(ModelPair {
            tree: Self::tree_from_json(&read(tree_path)?)?,
            logistic: Self::logistic_from_json(&read(logistic_path)?)?,
        })
    }
}
