//! Support vector machine trained with sequential minimal optimization.
//!
//! Each step picks the maximal violating pair using second-order
//! information and solves the two-variable subproblem analytically.
//! Training stops once the largest violation of the optimality conditions
//! drops below `tol`, which bounds every KKT residual by the same amount.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dimension, Kernel, LabeledMatrix};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `gamma: None` uses 1 / (number of features).
    Rbf { gamma: Option<f64> },
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelSpec,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: KernelSpec::Rbf { gamma: None },
            tol: 1e-3,
            max_iter: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// alpha_i * y_i for each stored support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    pub fn input_dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if !self.support_vectors.is_empty() {
            check_dimension(self.input_dim(), x.len())?;
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, coef)| coef * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// Dual variables of the stored support vectors.
    pub fn alphas(&self) -> Vec<f64> {
        self.dual_coef.iter().map(|c| c.abs()).collect()
    }
}

/// Full dual solution over the training rows, kept for diagnostics.
#[derive(Debug, Clone)]
pub struct SvmSolution {
    pub model: SvmModel,
    /// Dual variable of every training row, in input order.
    pub alpha: Vec<f64>,
}

pub fn train_svm(data: &LabeledMatrix, params: &SvmParams) -> Result<SvmModel> {
    Ok(solve_svm(data, params)?.model)
}

pub fn solve_svm(data: &LabeledMatrix, params: &SvmParams) -> Result<SvmSolution> {
    data.require_both_classes()?;
    if !(params.c > 0.0) || !params.c.is_finite() {
        return Err(Error::Training(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) {
        return Err(Error::Training(format!("tol must be positive, got {}", params.tol)));
    }
    let kernel = match params.kernel {
        KernelSpec::Linear => Kernel::Linear,
        KernelSpec::Rbf { gamma } => {
            let g = gamma.unwrap_or(1.0 / data.dim().max(1) as f64);
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::Training(format!("gamma must be positive, got {g}")));
            }
            Kernel::Rbf { gamma: g }
        }
    };

    // Seeded permutation of the rows; the solver's tie-breaking follows it.
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let x: Vec<&[f64]> = order.iter().map(|&i| data.rows[i].as_slice()).collect();
    let y: Vec<f64> = order.iter().map(|&i| data.labels[i].sign()).collect();

    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| kernel.eval(x[i], x[j])).collect())
        .collect();
    let c = params.c;
    let mut alpha = vec![0.0f64; n];
    let mut grad = vec![-1.0f64; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        // i: maximal -y_t G_t over the "up" set.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if in_up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };
        // j: second-order choice over the "low" set.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut obj_min = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let v = y[t] * grad[t];
            gmax2 = gmax2.max(v);
            let diff = gmax + v;
            if diff > 0.0 {
                let quad = k[i][i] + k[t][t] - 2.0 * k[i][t];
                let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= obj_min {
                    obj_min = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < params.tol {
            converged = true;
            break;
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (k[i][i] + k[j][j] - 2.0 * k[i][j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (k[i][i] + k[j][j] - 2.0 * k[i][j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[i][t] * di + y[j] * k[j][t] * dj);
        }
    }
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations without reaching tol {}", params.tol);
    }

    // Bias: average over free vectors, else the midpoint of the feasible range.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 { free_sum / free_n as f64 } else { (ub + lb) / 2.0 };

    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    let mut alpha_in_order = vec![0.0; n];
    for t in 0..n {
        alpha_in_order[order[t]] = alpha[t];
    }
    for (orig, &a) in alpha_in_order.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(data.rows[orig].clone());
            dual_coef.push(a * data.labels[orig].sign());
        }
    }
    Ok(SvmSolution {
        model: SvmModel {
            kernel,
            c,
            support_vectors,
            dual_coef,
            bias: -rho,
            iterations,
            converged,
        },
        alpha: alpha_in_order,
    })
}

/// Largest KKT residual over the training rows for a solved problem:
/// alpha = 0 needs y f >= 1, 0 < alpha < C needs y f = 1, alpha = C needs
/// y f <= 1.
pub fn max_kkt_violation(solution: &SvmSolution, data: &LabeledMatrix) -> Result<f64> {
    let c = solution.model.c;
    let mut worst = 0.0f64;
    for (row, (&a, label)) in data.rows.iter().zip(solution.alpha.iter().zip(&data.labels)) {
        let margin = label.sign() * solution.model.decision_value(row)?;
        let v = if a <= 0.0 {
            (1.0 - margin).max(0.0)
        } else if a >= c {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn xor() -> LabeledMatrix {
        LabeledMatrix::new(
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![Label::Rejected, Label::Accepted, Label::Accepted, Label::Rejected],
        )
        .unwrap()
    }

    #[test]
    fn xor_rbf_separates() {
        let data = xor();
        let params = SvmParams {
            c: 10.0,
            kernel: KernelSpec::Rbf { gamma: Some(1.0) },
            ..Default::default()
        };
        let sol = solve_svm(&data, &params).unwrap();
        for (row, label) in data.rows.iter().zip(&data.labels) {
            assert_eq!(Label::from_decision(sol.model.decision_value(row).unwrap()), *label);
        }
        assert!(sol.model.converged);
        assert!(max_kkt_violation(&sol, &data).unwrap() <= params.tol);
    }

    #[test]
    fn single_class_rejected() {
        let data = LabeledMatrix::new(vec![vec![0.0], vec![1.0]], vec![Label::Accepted; 2]).unwrap();
        assert!(matches!(train_svm(&data, &SvmParams::default()), Err(Error::Training(_))));
    }

    #[test]
    fn free_support_vectors_sit_on_margin() {
        let data = LabeledMatrix::new(
            vec![vec![-2.0, 0.0], vec![-1.0, 0.5], vec![1.0, -0.5], vec![2.0, 0.0], vec![0.5, 2.0]],
            vec![Label::Rejected, Label::Rejected, Label::Accepted, Label::Accepted, Label::Accepted],
        )
        .unwrap();
        let params = SvmParams {
            c: 100.0,
            kernel: KernelSpec::Linear,
            ..Default::default()
        };
        let sol = solve_svm(&data, &params).unwrap();
        let mut checked = 0;
        for (row, (&a, label)) in data.rows.iter().zip(sol.alpha.iter().zip(&data.labels)) {
            if a > 0.0 && a < params.c {
                let f = sol.model.decision_value(row).unwrap();
                assert!((f - label.sign()).abs() <= params.tol, "{f}");
                checked += 1;
            }
        }
        assert!(checked > 0);
        let balance: f64 = sol.model.dual_coef.iter().sum();
        assert!(balance.abs() < 1e-9);
    }
}
