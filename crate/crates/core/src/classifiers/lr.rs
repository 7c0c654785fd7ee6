use serde::{Deserialize, Serialize};

use super::{check_dimension, logistic_loss, sigmoid, LabeledMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LrParams {
    pub l2: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once the gradient's Euclidean norm is at most this.
    pub tol: f64,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            l2: 1e-4,
            learning_rate: 0.1,
            max_iters: 5000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value before each update.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_history: Vec<f64>,
}

impl LrModel {
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        check_dimension(self.weights.len(), x.len())?;
        Ok(self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }

    /// P(accepted | x).
    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        self.decision_value(x).map(sigmoid)
    }
}

/// Mean negative log-likelihood plus (l2 / 2)·‖w‖², with its gradient with
/// respect to (w, b). The bias is not regularized.
pub fn lr_objective(weights: &[f64], bias: f64, data: &LabeledMatrix, l2: f64) -> (f64, Vec<f64>, f64) {
    let n = data.len() as f64;
    let targets = data.targets();
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &t) in data.rows.iter().zip(&targets) {
        let z = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
        loss += logistic_loss(z, t);
        let r = sigmoid(z) - t;
        for (g, v) in grad_w.iter_mut().zip(row) {
            *g += r * v;
        }
        grad_b += r;
    }
    loss /= n;
    grad_b /= n;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

/// Full-batch gradient descent from zero weights.
pub fn train_lr(data: &LabeledMatrix, params: &LrParams) -> Result<LrModel> {
    data.require_both_classes()?;
    if !(params.learning_rate > 0.0) || !(params.l2 >= 0.0) {
        return Err(Error::Training("learning_rate must be positive and l2 non-negative".into()));
    }
    let mut weights = vec![0.0; data.dim()];
    let mut bias = 0.0;
    let mut history = Vec::with_capacity(params.max_iters.min(10_000));
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iters {
        let (loss, gw, gb) = lr_objective(&weights, bias, data, params.l2);
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if norm <= params.tol {
            converged = true;
            break;
        }
        history.push(loss);
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= params.learning_rate * g;
        }
        bias -= params.learning_rate * gb;
        iterations += 1;
    }
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::Training("logistic regression diverged".into()));
    }
    if !converged {
        log::debug!("logistic regression stopped at max_iters={}", params.max_iters);
    }
    Ok(LrModel {
        weights,
        bias,
        l2: params.l2,
        iterations,
        converged,
        loss_history: history,
    })
}
