//! Logistic regression trained by full-batch gradient descent on the
//! weighted, L2-regularized mean log-loss. The bias is not regularized.

use serde::{Deserialize, Serialize};

use super::{class_weights, LabeledExample};
use crate::error::{EdlError, Result};
use crate::features::{FeatureVector, FEATURE_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub balance_classes: bool,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
            balance_classes: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegressionModel {
    pub weights: [f64; FEATURE_COUNT],
    pub bias: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticRegressionModel {
    pub fn logit(&self, v: &[f64; FEATURE_COUNT]) -> f64 {
        self.weights.iter().zip(v).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    pub fn score(&self, v: &FeatureVector) -> f64 {
        sigmoid(self.logit(&v.to_array()))
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }

    fn params(&self) -> [f64; FEATURE_COUNT + 1] {
        let mut p = [0.0; FEATURE_COUNT + 1];
        p[..FEATURE_COUNT].copy_from_slice(&self.weights);
        p[FEATURE_COUNT] = self.bias;
        p
    }

    fn from_params(p: [f64; FEATURE_COUNT + 1]) -> Self {
        let mut weights = [0.0; FEATURE_COUNT];
        weights.copy_from_slice(&p[..FEATURE_COUNT]);
        LogisticRegressionModel { weights, bias: p[FEATURE_COUNT] }
    }
}

pub fn lr_score(model: &LogisticRegressionModel, v: &FeatureVector) -> f64 {
    model.score(v)
}

/// Training objective with explicit per-example weights.
pub struct Objective {
    x: Vec<[f64; FEATURE_COUNT]>,
    y: Vec<f64>,
    w: Vec<f64>,
    weight_sum: f64,
    l2: f64,
}

impl Objective {
    pub fn new(data: &[LabeledExample], l2: f64, balance_classes: bool) -> Self {
        let labels: Vec<bool> = data.iter().map(|e| e.label).collect();
        let w = class_weights(&labels, balance_classes);
        Objective {
            x: data.iter().map(|e| e.features.to_array()).collect(),
            y: labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect(),
            weight_sum: w.iter().sum(),
            w,
            l2,
        }
    }

    pub fn loss(&self, model: &LogisticRegressionModel) -> f64 {
        let data: f64 = self
            .x
            .iter()
            .zip(&self.y)
            .zip(&self.w)
            .map(|((x, &y), &w)| {
                let z = model.logit(x);
                // -[y log σ(z) + (1-y) log(1-σ(z))] = softplus(z) - y z
                w * (softplus(z) - y * z)
            })
            .sum();
        let reg: f64 = model.weights.iter().map(|w| w * w).sum();
        data / self.weight_sum + 0.5 * self.l2 * reg
    }

    /// Analytic gradient: weights first, bias last.
    pub fn gradient(&self, model: &LogisticRegressionModel) -> [f64; FEATURE_COUNT + 1] {
        let mut g = [0.0; FEATURE_COUNT + 1];
        for ((x, &y), &w) in self.x.iter().zip(&self.y).zip(&self.w) {
            let r = w * (sigmoid(model.logit(x)) - y);
            for (gj, xj) in g.iter_mut().zip(x) {
                *gj += r * xj;
            }
            g[FEATURE_COUNT] += r;
        }
        for gj in g.iter_mut() {
            *gj /= self.weight_sum;
        }
        for (gj, wj) in g.iter_mut().zip(&model.weights) {
            *gj += self.l2 * wj;
        }
        g
    }
}

pub struct TrainingTrace {
    pub model: LogisticRegressionModel,
    /// Loss before the first step and after every epoch.
    pub losses: Vec<f64>,
}

pub fn train_logistic_regression_traced(data: &[LabeledExample], params: &LogisticParams) -> Result<TrainingTrace> {
    if data.is_empty() {
        return Err(EdlError::Training("no examples".into()));
    }
    let positives = data.iter().filter(|e| e.label).count();
    if positives == 0 || positives == data.len() {
        return Err(EdlError::Training("logistic regression needs both labels".into()));
    }
    let objective = Objective::new(data, params.l2, params.balance_classes);
    let mut p = [0.0; FEATURE_COUNT + 1];
    let mut losses = Vec::with_capacity(params.epochs + 1);
    losses.push(objective.loss(&LogisticRegressionModel::from_params(p)));
    for _ in 0..params.epochs {
        let g = objective.gradient(&LogisticRegressionModel::from_params(p));
        for (pj, gj) in p.iter_mut().zip(g) {
            *pj -= params.learning_rate * gj;
        }
        losses.push(objective.loss(&LogisticRegressionModel::from_params(p)));
    }
    let model = LogisticRegressionModel::from_params(p);
    if !model.is_finite() {
        return Err(EdlError::Training("weights diverged".into()));
    }
    Ok(TrainingTrace { model, losses })
}

pub fn train_logistic_regression(data: &[LabeledExample], params: &LogisticParams) -> Result<LogisticRegressionModel> {
    train_logistic_regression_traced(data, params).map(|t| t.model)
}

/// Compares the analytic gradient of `objective` at `model` against central
/// finite differences with step `h`. Returns the largest relative error
/// `|a - n| / max(|a|, |n|, 1e-6)` over all parameters.
pub fn gradient_check(model: &LogisticRegressionModel, objective: &Objective, h: f64) -> f64 {
    let analytic = objective.gradient(model);
    let base = model.params();
    let mut worst: f64 = 0.0;
    for j in 0..base.len() {
        let mut plus = base;
        let mut minus = base;
        plus[j] += h;
        minus[j] -= h;
        let numeric = (objective.loss(&LogisticRegressionModel::from_params(plus))
            - objective.loss(&LogisticRegressionModel::from_params(minus)))
            / (2.0 * h);
        let denom = analytic[j].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[j] - numeric).abs() / denom);
    }
    worst
}
