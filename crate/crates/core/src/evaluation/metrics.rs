use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Counts with accepted as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp_acc: u64,
    pub fn_acc: u64,
    pub fp_acc: u64,
    pub tn_acc: u64,
}

impl ConfusionMatrix {
    pub fn new(tp_acc: u64, fn_acc: u64, fp_acc: u64, tn_acc: u64) -> Self {
        ConfusionMatrix {
            tp_acc,
            fn_acc,
            fp_acc,
            tn_acc,
        }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a Label, &'a Label)>) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (gold, predicted) in pairs {
            cm.record(*gold, *predicted);
        }
        cm
    }

    pub fn record(&mut self, gold: Label, predicted: Label) {
        match (gold, predicted) {
            (Label::Accepted, Label::Accepted) => self.tp_acc += 1,
            (Label::Accepted, Label::Rejected) => self.fn_acc += 1,
            (Label::Rejected, Label::Accepted) => self.fp_acc += 1,
            (Label::Rejected, Label::Rejected) => self.tn_acc += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp_acc + self.fn_acc + self.fp_acc + self.tn_acc
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.tp_acc += other.tp_acc;
        self.fn_acc += other.fn_acc;
        self.fp_acc += other.fp_acc;
        self.tn_acc += other.tn_acc;
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp_acc + self.tn_acc) as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub accepted: ClassMetrics,
    pub rejected: ClassMetrics,
    /// Unweighted class means of precision, recall and F1.
    pub macro_avg: ClassMetrics,
    pub accuracy: f64,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<MetricsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Per-class precision, recall and F1 from one confusion matrix. A class
/// never predicted gets precision 0, a class never present recall 0; both
/// come with a warning.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    if cm.total() == 0 {
        return Err(Error::Evaluation("confusion matrix is empty".into()));
    }
    let mut warnings = Vec::new();
    let mut class = |name: &str, tp: u64, fp: u64, fn_: u64| {
        let precision = ratio(tp, tp + fp).unwrap_or_else(|| {
            warnings.push(format!("no documents predicted {name}; precision set to 0"));
            0.0
        });
        let recall = ratio(tp, tp + fn_).unwrap_or_else(|| {
            warnings.push(format!("no {name} documents in the gold labels; recall set to 0"));
            0.0
        });
        ClassMetrics {
            precision,
            recall,
            f1: harmonic(precision, recall),
        }
    };
    let accepted = class("accepted", cm.tp_acc, cm.fp_acc, cm.fn_acc);
    let rejected = class("rejected", cm.tn_acc, cm.fn_acc, cm.fp_acc);
    Ok(MetricsReport {
        confusion: *cm,
        accepted,
        rejected,
        macro_avg: ClassMetrics {
            precision: (accepted.precision + rejected.precision) / 2.0,
            recall: (accepted.recall + rejected.recall) / 2.0,
            f1: (accepted.f1 + rejected.f1) / 2.0,
        },
        accuracy: cm.accuracy(),
        warnings,
        folds: Vec::new(),
        config_hash: None,
        seed: None,
    })
}

/// Averages each metric over per-fold reports instead of pooling counts.
/// The confusion matrix is still the pooled one.
pub fn average_reports(folds: &[MetricsReport]) -> Result<MetricsReport> {
    if folds.is_empty() {
        return Err(Error::Evaluation("no folds to average".into()));
    }
    let n = folds.len() as f64;
    let mean = |f: &dyn Fn(&MetricsReport) -> f64| folds.iter().map(f).sum::<f64>() / n;
    let class = |pick: &dyn Fn(&MetricsReport) -> ClassMetrics| ClassMetrics {
        precision: mean(&|r| pick(r).precision),
        recall: mean(&|r| pick(r).recall),
        f1: mean(&|r| pick(r).f1),
    };
    let mut confusion = ConfusionMatrix::default();
    for f in folds {
        confusion.add(&f.confusion);
    }
    let mut warnings: Vec<String> = folds.iter().flat_map(|f| f.warnings.iter().cloned()).collect();
    warnings.sort();
    warnings.dedup();
    Ok(MetricsReport {
        confusion,
        accepted: class(&|r| r.accepted),
        rejected: class(&|r| r.rejected),
        macro_avg: class(&|r| r.macro_avg),
        accuracy: mean(&|r| r.accuracy),
        warnings,
        folds: Vec::new(),
        config_hash: None,
        seed: None,
    })
}

/// Half-up rounding to `places` decimals for display. The small nudge keeps
/// values such as 0.125 (stored just below) rounding up.
pub fn round_half_up(x: f64, places: i32) -> f64 {
    let scale = 10f64.powi(places);
    ((x * scale) + 0.5 + 1e-9).floor() / scale
}

pub fn format_2dp(x: f64) -> String {
    format!("{:.2}", round_half_up(x, 2))
}

/// Accuracy as an integer percent, half-up.
pub fn percent(x: f64) -> u32 {
    round_half_up(x * 100.0, 0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let r = metrics(&ConfusionMatrix::new(5, 0, 0, 5)).unwrap();
        for v in [r.accepted, r.rejected, r.macro_avg] {
            assert_eq!((v.precision, v.recall, v.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(r.accuracy, 1.0);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn everything_accepted() {
        let r = metrics(&ConfusionMatrix::new(25, 0, 25, 0)).unwrap();
        assert_eq!(r.accepted.recall, 1.0);
        assert_eq!(r.accepted.precision, 0.5);
        assert_eq!(r.rejected.recall, 0.0);
        assert_eq!(r.rejected.f1, 0.0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        assert!(metrics(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(format_2dp(0.125), "0.13");
        assert_eq!(format_2dp(0.8888), "0.89");
        assert_eq!(format_2dp(0.915), "0.92");
        assert_eq!(percent(0.92), 92);
        assert_eq!(percent(0.785), 79);
    }
}
