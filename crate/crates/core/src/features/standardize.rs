use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column mean and population standard deviation of a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

fn check_rectangular(matrix: &[Vec<f64>], width: usize) -> Result<()> {
    match matrix.iter().position(|r| r.len() != width) {
        Some(i) => Err(Error::Features(format!(
            "ragged matrix: row {i} has {} columns, expected {width}",
            matrix[i].len()
        ))),
        None => Ok(()),
    }
}

/// Treated as zero variance: numerically constant columns.
fn is_constant(mean: f64, std: f64) -> bool {
    std <= 1e-12 * mean.abs().max(1.0)
}

pub fn fit_standardizer(train: &[Vec<f64>]) -> Result<Standardizer> {
    let Some(first) = train.first() else {
        return Err(Error::Features("cannot fit a standardizer on zero rows".into()));
    };
    let width = first.len();
    check_rectangular(train, width)?;
    let n = train.len() as f64;
    let mut mean = vec![0.0; width];
    for row in train {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; width];
    for row in train {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    Ok(Standardizer { mean, std })
}

impl Standardizer {
    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                actual: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if is_constant(*m, *s) { 0.0 } else { (v - m) / s })
            .collect())
    }
}

pub fn apply_standardizer(std: &Standardizer, matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    matrix.iter().map(|r| std.transform_row(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_two_three() {
        let m = vec![vec![1.0], vec![2.0], vec![3.0]];
        let s = fit_standardizer(&m).unwrap();
        assert!((s.std[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let t = apply_standardizer(&s, &m).unwrap();
        let expected = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!((t[0][0] + expected).abs() < 1e-12);
        assert_eq!(t[1][0], 0.0);
        assert!((t[2][0] - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let m = vec![vec![5.0, 0.1], vec![5.0, 0.1], vec![5.0, 0.1]];
        let s = fit_standardizer(&m).unwrap();
        let t = apply_standardizer(&s, &[vec![5.0, 0.1], vec![9.0, 4.0]]).unwrap();
        assert_eq!(t, vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
    }

    #[test]
    fn refit_is_identity_like() {
        let m = vec![vec![1.0, -3.0], vec![4.0, 2.5], vec![0.5, 7.0], vec![2.0, 2.0]];
        let s = fit_standardizer(&m).unwrap();
        let t = apply_standardizer(&s, &m).unwrap();
        let s2 = fit_standardizer(&t).unwrap();
        for j in 0..2 {
            assert!(s2.mean[j].abs() < 1e-9);
            assert!((s2.std[j] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ragged_and_empty() {
        assert!(fit_standardizer(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(fit_standardizer(&[]).is_err());
        let s = fit_standardizer(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(s.transform_row(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }
}
