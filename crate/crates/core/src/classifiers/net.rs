//! Fully connected networks with a single logistic output unit, trained
//! full-batch by backpropagation.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dimension, logistic_loss, sigmoid, LabeledMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn derivative(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::Training(format!("unknown activation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Optimizer {
    Gd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// `MlpSplit` keeps the final-epoch parameters; `FfnnTuned` early-stops on a
/// tuning set and keeps the parameters with the lowest tuning loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetVariant {
    MlpSplit,
    FfnnTuned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetParams {
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub patience: usize,
    pub l2: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    pub variant: NetVariant,
}

impl Default for NetParams {
    fn default() -> Self {
        NetParams {
            hidden_sizes: vec![32],
            activation: Activation::Tanh,
            learning_rate: 0.01,
            epochs: 500,
            patience: 25,
            l2: 1e-4,
            optimizer: Optimizer::adam(),
            seed: 0,
            variant: NetVariant::MlpSplit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Row j holds the incoming weights of unit j.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(input).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetModel {
    /// Input width, hidden widths, then 1.
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub variant: NetVariant,
    pub params: NetParams,
    pub epochs_run: usize,
    /// Training objective before each update.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tune_history: Vec<f64>,
}

impl NetModel {
    /// Freshly initialized network. With no hidden layers all weights start
    /// at zero, which makes the model coincide with logistic regression.
    pub fn init(input_dim: usize, params: &NetParams) -> Self {
        let mut sizes = vec![input_dim];
        sizes.extend(&params.hidden_sizes);
        sizes.push(1);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let zero = params.hidden_sizes.is_empty();
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out).max(1) as f64).sqrt();
                Layer {
                    weights: (0..fan_out)
                        .map(|_| {
                            (0..fan_in)
                                .map(|_| if zero { 0.0 } else { rng.random_range(-bound..bound) })
                                .collect()
                        })
                        .collect(),
                    biases: vec![0.0; fan_out],
                }
            })
            .collect();
        NetModel {
            layer_sizes: sizes,
            layers,
            activation: params.activation,
            variant: params.variant,
            params: params.clone(),
            epochs_run: 0,
            loss_history: Vec::new(),
            tune_history: Vec::new(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    /// Activations of every layer; the last entry is the output logit.
    fn forward_all(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(acts.last().unwrap());
            if i + 1 == self.layers.len() {
                acts.push(z);
            } else {
                acts.push(z.into_iter().map(|v| self.activation.apply(v)).collect());
            }
        }
        acts
    }

    /// Output logit; positive means accepted.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        check_dimension(self.input_dim(), x.len())?;
        Ok(self.forward_all(x).last().unwrap()[0])
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        self.decision_value(x).map(sigmoid)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.biases.len() * (1 + l.weights.first().map_or(0, Vec::len))).sum()
    }

    /// All parameters, layer by layer: weights row-major, then biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            for row in &l.weights {
                out.extend(row);
            }
            out.extend(&l.biases);
        }
        out
    }

    pub fn set_parameters(&mut self, flat: &[f64]) -> Result<()> {
        check_dimension(self.parameter_count(), flat.len())?;
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            for row in &mut l.weights {
                for w in row.iter_mut() {
                    *w = it.next().unwrap();
                }
            }
            for b in &mut l.biases {
                *b = it.next().unwrap();
            }
        }
        Ok(())
    }

    /// Mean cross-entropy without the weight penalty.
    pub fn data_loss(&self, data: &LabeledMatrix) -> f64 {
        let targets = data.targets();
        data.rows
            .iter()
            .zip(&targets)
            .map(|(row, &t)| logistic_loss(self.forward_all(row).last().unwrap()[0], t))
            .sum::<f64>()
            / data.len() as f64
    }

    /// Mean cross-entropy plus (l2 / 2)·Σ‖W‖² and its gradient, flattened in
    /// the order of [`NetModel::parameters`]. Biases are not penalized.
    pub fn loss_and_gradient(&self, data: &LabeledMatrix, l2: f64) -> (f64, Vec<f64>) {
        let n = data.len() as f64;
        let targets = data.targets();
        let mut gw: Vec<Vec<Vec<f64>>> = self
            .layers
            .iter()
            .map(|l| l.weights.iter().map(|r| vec![0.0; r.len()]).collect())
            .collect();
        let mut gb: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect();
        let mut loss = 0.0;
        for (row, &t) in data.rows.iter().zip(&targets) {
            let acts = self.forward_all(row);
            let z = acts.last().unwrap()[0];
            loss += logistic_loss(z, t);
            let mut delta = vec![sigmoid(z) - t];
            for li in (0..self.layers.len()).rev() {
                let input = &acts[li];
                for (j, d) in delta.iter().enumerate() {
                    for (g, x) in gw[li][j].iter_mut().zip(input) {
                        *g += d * x;
                    }
                    gb[li][j] += d;
                }
                if li > 0 {
                    let layer = &self.layers[li];
                    delta = (0..input.len())
                        .map(|k| {
                            let back: f64 = delta.iter().zip(&layer.weights).map(|(d, w)| d * w[k]).sum();
                            back * self.activation.derivative(input[k])
                        })
                        .collect();
                }
            }
        }
        loss /= n;
        let mut penalty = 0.0;
        let mut flat = Vec::with_capacity(self.parameter_count());
        for (li, layer) in self.layers.iter().enumerate() {
            for (grow, wrow) in gw[li].iter().zip(&layer.weights) {
                for (g, w) in grow.iter().zip(wrow) {
                    flat.push(g / n + l2 * w);
                    penalty += w * w;
                }
            }
            flat.extend(gb[li].iter().map(|g| g / n));
        }
        (loss + 0.5 * l2 * penalty, flat)
    }
}

pub fn train_net(train: &LabeledMatrix, tune: Option<&LabeledMatrix>, params: &NetParams) -> Result<NetModel> {
    train.require_both_classes()?;
    if !(params.learning_rate > 0.0) || !(params.l2 >= 0.0) {
        return Err(Error::Training("learning_rate must be positive and l2 non-negative".into()));
    }
    if params.hidden_sizes.contains(&0) {
        return Err(Error::Training("hidden layers must have at least one unit".into()));
    }
    let tune = match (params.variant, tune) {
        (NetVariant::FfnnTuned, None) => {
            return Err(Error::Training("the tuned feed-forward network needs a tuning set".into()))
        }
        (NetVariant::FfnnTuned, Some(t)) if t.is_empty() => {
            return Err(Error::Training("tuning set is empty".into()))
        }
        (NetVariant::FfnnTuned, Some(t)) => {
            LabeledMatrix::new(t.rows.clone(), t.labels.clone())?;
            check_dimension(train.dim(), t.dim())?;
            Some(t)
        }
        (NetVariant::MlpSplit, _) => None,
    };

    let mut model = NetModel::init(train.dim(), params);
    let mut theta = model.parameters();
    let mut m = vec![0.0; theta.len()];
    let mut v = vec![0.0; theta.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut since_best = 0;
    let mut epochs_run = 0;
    for epoch in 0..params.epochs {
        model.set_parameters(&theta)?;
        if let Some(t) = tune {
            let tl = model.data_loss(t);
            model.tune_history.push(tl);
            if best.as_ref().is_none_or(|(b, _)| tl < *b) {
                best = Some((tl, theta.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best > params.patience {
                    break;
                }
            }
        }
        let (loss, grad) = model.loss_and_gradient(train, params.l2);
        model.loss_history.push(loss);
        match params.optimizer {
            Optimizer::Gd => {
                for (p, g) in theta.iter_mut().zip(&grad) {
                    *p -= params.learning_rate * g;
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let step = (epoch + 1) as i32;
                let c1 = 1.0 - beta1.powi(step);
                let c2 = 1.0 - beta2.powi(step);
                for i in 0..theta.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                    theta[i] -= params.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                }
            }
        }
        epochs_run += 1;
    }
    model.set_parameters(&theta)?;
    if let Some(t) = tune {
        let tl = model.data_loss(t);
        if best.as_ref().is_none_or(|(b, _)| tl < *b) {
            best = Some((tl, theta.clone()));
        }
        if let Some((_, params)) = best {
            model.set_parameters(&params)?;
        }
    }
    model.epochs_run = epochs_run;
    if model.parameters().iter().any(|p| !p.is_finite()) {
        return Err(Error::Training("network training diverged".into()));
    }
    Ok(model)
}
