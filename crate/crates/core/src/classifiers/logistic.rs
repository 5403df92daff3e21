//! L2-regularized logistic regression trained by full-batch gradient descent
//! with backtracking on the step size, keeping the loss non-increasing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub l2_strength: f64,
    pub epochs: usize,
    /// Stop early when the gradient norm falls below this.
    pub gradient_tolerance: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> TrainingConfig {
        TrainingConfig {
            learning_rate: 1.0,
            l2_strength: 1e-4,
            epochs: 200,
            gradient_tolerance: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: TrainingConfig,
    /// Mean regularized log loss after each epoch.
    pub loss_history: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn dot(features: &FeatureVector, weights: &[f64], bias: f64) -> f64 {
    features
        .entries()
        .map(|(idx, value)| weights[idx] * value)
        .sum::<f64>()
        + bias
}

/// Mean log loss plus L2 penalty, and its gradient in (weights, bias).
pub fn loss_and_gradient(
    features: &[FeatureVector],
    labels: &[bool],
    weights: &[f64],
    bias: f64,
    l2_strength: f64,
) -> (f64, Vec<f64>, f64) {
    let n = features.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &label) in features.iter().zip(labels) {
        let z = dot(row, weights, bias);
        let p = sigmoid(z);
        let y = if label { 1.0 } else { 0.0 };
        // log loss written through log1p for stability at extreme z
        loss += if label {
            (1.0 + (-z).exp()).ln()
        } else {
            (1.0 + z.exp()).ln()
        };
        let residual = p - y;
        for (idx, value) in row.entries() {
            grad_w[idx] += residual * value;
        }
        grad_b += residual;
    }
    loss /= n;
    grad_b /= n;
    for (w, g) in weights.iter().zip(grad_w.iter_mut()) {
        *g = *g / n + l2_strength * w;
        loss += 0.5 * l2_strength * w * w;
    }
    (loss, grad_w, grad_b)
}

/// Trains on sparse feature rows of dimension `dimension`. Requires both
/// classes present. Deterministic given the config.
pub fn train_logistic(
    features: &[FeatureVector],
    labels: &[bool],
    dimension: usize,
    config: TrainingConfig,
) -> Result<LogisticModel> {
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: features.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives < 1 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    let mut weights = vec![0.0; dimension];
    let mut bias = 0.0;
    let mut loss_history = Vec::with_capacity(config.epochs);
    let (mut loss, mut grad_w, mut grad_b) =
        loss_and_gradient(features, labels, &weights, bias, config.l2_strength);
    let mut step = config.learning_rate;
    for _ in 0..config.epochs {
        let grad_norm = (grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt();
        if grad_norm < config.gradient_tolerance {
            loss_history.push(loss);
            break;
        }
        // backtracking keeps the epoch-to-epoch loss monotone
        let mut accepted = false;
        for _ in 0..40 {
            let candidate_w: Vec<f64> = weights
                .iter()
                .zip(&grad_w)
                .map(|(w, g)| w - step * g)
                .collect();
            let candidate_b = bias - step * grad_b;
            let (candidate_loss, candidate_gw, candidate_gb) = loss_and_gradient(
                features,
                labels,
                &candidate_w,
                candidate_b,
                config.l2_strength,
            );
            if candidate_loss <= loss {
                weights = candidate_w;
                bias = candidate_b;
                loss = candidate_loss;
                grad_w = candidate_gw;
                grad_b = candidate_gb;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        loss_history.push(loss);
        if !accepted {
            break;
        }
        // gentle growth so a conservative step can recover
        step = (step * 1.1).min(config.learning_rate);
    }
    Ok(LogisticModel {
        weights,
        bias,
        config,
        loss_history,
    })
}

/// sigmoid(w·x + b); errors when the feature indices exceed the model
/// dimension.
pub fn predict_proba(model: &LogisticModel, features: &FeatureVector) -> Result<f64> {
    if let Some((max_idx, _)) = features.entries().max_by_key(|(idx, _)| *idx) {
        if max_idx >= model.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: model.weights.len(),
                got: max_idx + 1,
            });
        }
    }
    Ok(sigmoid(dot(features, &model.weights, model.bias)))
}
