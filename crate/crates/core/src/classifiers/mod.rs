//! Binary classifiers over dense feature rows. Accepted is the positive
//! class; every model exposes a real decision value whose sign gives the
//! label, with zero resolving to rejected.

mod forest;
mod kernel;
mod lr;
mod net;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

pub use forest::{train_rfdt, ForestModel, ForestParams, Node, Tree};
pub use kernel::{rbf_kernel, Kernel};
pub use lr::{lr_objective, train_lr, LrModel, LrParams};
pub use net::{train_net, Activation, Layer, NetModel, NetParams, NetVariant, Optimizer};
pub use svm::{max_kkt_violation, solve_svm, train_svm, KernelSpec, SvmModel, SvmParams, SvmSolution};

/// Training rows with their gold labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl LabeledMatrix {
    /// Checks that rows are rectangular, finite, and match the label count.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        validate_rows(&rows, labels.len())?;
        Ok(LabeledMatrix { rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledMatrix {
        LabeledMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn with_flipped_labels(&self) -> LabeledMatrix {
        LabeledMatrix {
            rows: self.rows.clone(),
            labels: self.labels.iter().map(|l| l.flipped()).collect(),
        }
    }

    /// Shape, finiteness and class-balance checks shared by every trainer.
    pub(crate) fn require_both_classes(&self) -> Result<()> {
        validate_rows(&self.rows, self.labels.len())?;
        let acc = self.labels.iter().filter(|&&l| l == Label::Accepted).count();
        if acc == 0 || acc == self.labels.len() {
            return Err(Error::Training(
                "training data must contain both accepted and rejected rows".into(),
            ));
        }
        Ok(())
    }

    /// 1.0 for accepted, 0.0 for rejected.
    pub(crate) fn targets(&self) -> Vec<f64> {
        self.labels
            .iter()
            .map(|&l| if l == Label::Accepted { 1.0 } else { 0.0 })
            .collect()
    }
}

fn validate_rows(rows: &[Vec<f64>], n_labels: usize) -> Result<()> {
    if rows.len() != n_labels {
        return Err(Error::Training(format!("{} rows but {n_labels} labels", rows.len())));
    }
    if let Some(first) = rows.first() {
        let dim = first.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Training(format!(
                    "ragged matrix: row {i} has {} columns, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Training(format!("row {i} has a non-finite feature")));
            }
        }
    }
    Ok(())
}

pub(crate) fn check_dimension(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of a logit against a 0/1 target, stable for large |z|.
pub(crate) fn logistic_loss(z: f64, target: f64) -> f64 {
    z.max(0.0) - z * target + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Svm,
    Lr,
    Rfdt,
    Mlp,
    Ffnn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Svm,
        ClassifierKind::Lr,
        ClassifierKind::Rfdt,
        ClassifierKind::Mlp,
        ClassifierKind::Ffnn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Lr => "lr",
            ClassifierKind::Rfdt => "rfdt",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Ffnn => "ffnn",
        }
    }

    /// Display name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Lr => "LR",
            ClassifierKind::Rfdt => "RFDT",
            ClassifierKind::Mlp => "MLP",
            ClassifierKind::Ffnn => "FFNN",
        }
    }

    /// Tree ensembles split on raw values; everything else sees standardized rows.
    pub fn standardizes(self) -> bool {
        self != ClassifierKind::Rfdt
    }

    pub fn needs_tune_set(self) -> bool {
        self == ClassifierKind::Ffnn
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Training(format!("unknown classifier {s:?} (expected svm, lr, rfdt, mlp or ffnn)")))
    }
}

/// Which classifier to train and with what hyperparameters. Only the block
/// matching `kind` is used; the others keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub svm: SvmParams,
    pub lr: LrParams,
    pub forest: ForestParams,
    pub net: NetParams,
    /// Fraction of a training fold held back as the FFNN tuning set.
    pub tune_fraction: f64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec {
            kind: ClassifierKind::Svm,
            svm: SvmParams::default(),
            lr: LrParams::default(),
            forest: ForestParams::default(),
            net: NetParams::default(),
            tune_fraction: 0.25,
        }
    }
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierSpec {
            kind,
            ..Default::default()
        }
    }

    /// Copy of the spec with every seeded component reseeded.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.svm.seed = seed;
        self.forest.seed = seed;
        self.net.seed = seed;
        self
    }

    pub fn train(&self, train: &LabeledMatrix, tune: Option<&LabeledMatrix>) -> Result<Model> {
        match self.kind {
            ClassifierKind::Svm => train_svm(train, &self.svm).map(Model::Svm),
            ClassifierKind::Lr => train_lr(train, &self.lr).map(Model::Lr),
            ClassifierKind::Rfdt => train_rfdt(train, &self.forest).map(Model::Forest),
            ClassifierKind::Mlp => {
                let params = NetParams {
                    variant: NetVariant::MlpSplit,
                    ..self.net.clone()
                };
                train_net(train, None, &params).map(Model::Net)
            }
            ClassifierKind::Ffnn => {
                let params = NetParams {
                    variant: NetVariant::FfnnTuned,
                    ..self.net.clone()
                };
                train_net(train, tune, &params).map(Model::Net)
            }
        }
    }
}

/// A trained classifier of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum Model {
    Svm(SvmModel),
    Lr(LrModel),
    Forest(ForestModel),
    Net(NetModel),
}

impl Model {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Model::Svm(_) => ClassifierKind::Svm,
            Model::Lr(_) => ClassifierKind::Lr,
            Model::Forest(_) => ClassifierKind::Rfdt,
            Model::Net(n) => match n.variant {
                NetVariant::MlpSplit => ClassifierKind::Mlp,
                NetVariant::FfnnTuned => ClassifierKind::Ffnn,
            },
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Model::Svm(m) => m.input_dim(),
            Model::Lr(m) => m.weights.len(),
            Model::Forest(m) => m.input_dim,
            Model::Net(m) => m.input_dim(),
        }
    }

    /// Signed score: positive means accepted. For forests this is
    /// (accepted votes - rejected votes) / trees.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Svm(m) => m.decision_value(x),
            Model::Lr(m) => m.decision_value(x),
            Model::Forest(m) => m.decision_value(x),
            Model::Net(m) => m.decision_value(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.decision_value(x).map(Label::from_decision)
    }

    /// Structural consistency of a deserialized model, so that prediction
    /// cannot index out of bounds.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Training(format!("invalid model: {m}")));
        match self {
            Model::Svm(m) => {
                let d = m.input_dim();
                if m.support_vectors.is_empty() || m.support_vectors.len() != m.dual_coef.len() {
                    return bad("support vectors and coefficients disagree".into());
                }
                if m.support_vectors.iter().any(|sv| sv.len() != d) {
                    return bad("ragged support vectors".into());
                }
            }
            Model::Lr(_) => {}
            Model::Forest(m) => {
                if m.trees.is_empty() {
                    return bad("forest without trees".into());
                }
                for t in &m.trees {
                    if t.nodes.is_empty() {
                        return bad("empty tree".into());
                    }
                    for (i, node) in t.nodes.iter().enumerate() {
                        if let Node::Split { feature, left, right, .. } = *node {
                            if feature >= m.input_dim
                                || left <= i
                                || right <= i
                                || left >= t.nodes.len()
                                || right >= t.nodes.len()
                            {
                                return bad(format!("tree node {i} points outside the tree"));
                            }
                        }
                    }
                }
            }
            Model::Net(m) => {
                if m.layer_sizes.len() != m.layers.len() + 1 || m.layer_sizes.last() != Some(&1) {
                    return bad("layer sizes do not match the layers".into());
                }
                for (l, w) in m.layers.iter().zip(m.layer_sizes.windows(2)) {
                    if l.weights.len() != w[1] || l.biases.len() != w[1] || l.weights.iter().any(|r| r.len() != w[0]) {
                        return bad("layer shape mismatch".into());
                    }
                }
            }
        }
        Ok(())
    }

    /// Models that did not meet their stopping criterion; surfaced as warnings.
    pub fn convergence_note(&self) -> Option<String> {
        match self {
            Model::Svm(m) if !m.converged => Some(format!("SMO hit the iteration cap ({})", m.iterations)),
            Model::Lr(m) if !m.converged => Some(format!("logistic regression hit max_iters ({})", m.iterations)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_matrix_validation() {
        assert!(LabeledMatrix::new(vec![vec![1.0], vec![1.0, 2.0]], vec![Label::Accepted, Label::Rejected]).is_err());
        assert!(LabeledMatrix::new(vec![vec![f64::NAN]], vec![Label::Accepted]).is_err());
        assert!(LabeledMatrix::new(vec![vec![1.0]], vec![]).is_err());
    }

    #[test]
    fn stable_loss_matches_naive() {
        for &z in &[-3.0, -0.5, 0.0, 0.7, 4.0] {
            for &t in &[0.0, 1.0] {
                let p = sigmoid(z);
                let naive = -(t * p.ln() + (1.0 - t) * (1.0 - p).ln());
                assert!((logistic_loss(z, t) - naive).abs() < 1e-12);
            }
        }
        assert!(logistic_loss(-800.0, 1.0).is_finite());
    }

    #[test]
    fn kind_round_trip() {
        for kind in ClassifierKind::ALL {
            assert_eq!(kind.as_str().parse::<ClassifierKind>().unwrap(), kind);
        }
        assert!("knn".parse::<ClassifierKind>().is_err());
    }
}
