use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel of a trained SVM. The RBF width is always concrete here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

impl Kernel {
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => (-gamma * squared_distance(x, z)).exp(),
            Kernel::Linear => x.iter().zip(z).map(|(a, b)| a * b).sum(),
        }
    }
}

fn squared_distance(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// exp(-gamma * ||x - z||^2).
pub fn rbf_kernel(x: &[f64], z: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: z.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(Error::Training(format!("gamma must be positive, got {gamma}")));
    }
    Ok((-gamma * squared_distance(x, z)).exp())
}
