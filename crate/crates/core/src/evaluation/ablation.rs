use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{evaluate, EvalOptions, Protocol};
use super::metrics::{percent, MetricsReport};
use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::error::{Error, Result};
use crate::features::{feature_names, sets_label, FeatureConfig, FeatureSet};
use crate::pipeline::AnalyzedCorpus;

use FeatureSet::{SE, T, WE};

/// Row order of the grid.
pub const ABLATION_ROWS: [&[FeatureSet]; 7] = [&[T], &[WE], &[SE], &[T, WE], &[T, SE], &[WE, SE], &[T, WE, SE]];

pub const ABLATION_COLUMNS: [Protocol; 4] = [
    Protocol::KFold { k: 2 },
    Protocol::KFold { k: 5 },
    Protocol::KFold { k: 10 },
    Protocol::Holdout { train_fraction: 0.5 },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub accuracy: f64,
    pub percent: u32,
    /// Population standard deviation of the accuracy percent over the main
    /// and extra seeds, when extra seeds were requested.
    pub seed_std: Option<f64>,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub label: String,
    pub sets: Vec<FeatureSet>,
    pub dimension: usize,
    pub cells: Vec<AblationCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationGrid {
    pub classifier: ClassifierKind,
    pub columns: Vec<String>,
    pub rows: Vec<AblationRow>,
    pub seed: u64,
    pub extra_seeds: Vec<u64>,
    pub base_config_hash: String,
    /// Index of the row with the best 10-fold accuracy (first on ties).
    pub winner: usize,
}

impl AblationGrid {
    pub fn row(&self, label: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == label)
    }
}

/// Runs every feature-set combination under every protocol with the same
/// seed, so cells differ only in their feature configuration. With
/// `extra_seeds`, each cell is rerun per seed to report its spread.
pub fn ablate(
    data: &AnalyzedCorpus,
    base: &FeatureConfig,
    spec: &ClassifierSpec,
    seed: u64,
    extra_seeds: &[u64],
) -> Result<AblationGrid> {
    if ![T, WE, SE].iter().all(|s| base.has(*s)) {
        return Err(Error::Evaluation("ablation needs T, WE and SE enabled in the base configuration".into()));
    }
    let seeds: Vec<u64> = std::iter::once(seed).chain(extra_seeds.iter().copied()).collect();
    let mut jobs = Vec::new();
    for r in 0..ABLATION_ROWS.len() {
        for c in 0..ABLATION_COLUMNS.len() {
            jobs.extend(seeds.iter().map(|&s| (r, c, s)));
        }
    }
    let results = jobs
        .par_iter()
        .map(|&(r, c, s)| {
            let sets: BTreeSet<FeatureSet> = ABLATION_ROWS[r].iter().copied().collect();
            let config = base.restricted_to(&sets);
            let opts = EvalOptions {
                protocol: ABLATION_COLUMNS[c],
                seed: s,
                per_fold_average: false,
                audit: true,
            };
            evaluate(data, &config, &spec.clone().with_seed(s), &opts)
                .map(|rep| rep.metrics)
                .map_err(|e| Error::Evaluation(format!("{} / {}: {e}", sets_label(&sets), ABLATION_COLUMNS[c].label())))
        })
        .collect::<Result<Vec<_>>>()?;

    let per_cell = seeds.len();
    let mut rows = Vec::with_capacity(ABLATION_ROWS.len());
    for (r, sets) in ABLATION_ROWS.iter().enumerate() {
        let set: BTreeSet<FeatureSet> = sets.iter().copied().collect();
        let config = base.restricted_to(&set);
        let cells = (0..ABLATION_COLUMNS.len())
            .map(|c| {
                let start = (r * ABLATION_COLUMNS.len() + c) * per_cell;
                let runs = &results[start..start + per_cell];
                let main = runs[0].clone();
                let seed_std = (per_cell > 1).then(|| {
                    let pct: Vec<f64> = runs.iter().map(|m| m.accuracy * 100.0).collect();
                    let mean = pct.iter().sum::<f64>() / pct.len() as f64;
                    (pct.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / pct.len() as f64).sqrt()
                });
                AblationCell {
                    accuracy: main.accuracy,
                    percent: percent(main.accuracy),
                    seed_std,
                    metrics: main,
                }
            })
            .collect();
        rows.push(AblationRow {
            label: sets_label(&set),
            sets: sets.to_vec(),
            dimension: feature_names(&config, if set.contains(&WE) { data.we_dimension } else { 0 }).len(),
            cells,
        });
    }
    let ten_fold = ABLATION_COLUMNS
        .iter()
        .position(|p| *p == Protocol::KFold { k: 10 })
        .expect("10-fold column");
    let mut winner = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.cells[ten_fold].accuracy > rows[winner].cells[ten_fold].accuracy {
            winner = i;
        }
    }
    Ok(AblationGrid {
        classifier: spec.kind,
        columns: ABLATION_COLUMNS.iter().map(Protocol::label).collect(),
        rows,
        seed,
        extra_seeds: extra_seeds.to_vec(),
        base_config_hash: base.hash(),
        winner,
    })
}
