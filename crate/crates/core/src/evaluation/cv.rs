use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{average_reports, metrics, ConfusionMatrix, MetricsReport};
use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::corpus::{holdout_split, stratified_kfold, Corpus, Label};
use crate::error::{Error, Result};
use crate::features::{sets_label, FeatureConfig, FeatureResources};
use crate::pipeline::{analyze_corpus, fit_partition, AnalyzedCorpus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Protocol {
    KFold { k: usize },
    /// Stratified split; the tuned network additionally halves the held-out
    /// part into tune and test.
    Holdout { train_fraction: f64 },
}

impl Protocol {
    pub fn label(&self) -> String {
        match self {
            Protocol::KFold { k } => format!("{k}-F"),
            Protocol::Holdout { train_fraction } => format!("{}% Split", (train_fraction * 100.0).round()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub protocol: Protocol,
    /// Seed for fold assignment and splits; classifier seeds live in the spec.
    pub seed: u64,
    /// Average per-fold metrics instead of pooling confusion counts.
    pub per_fold_average: bool,
    /// Recompute reference and standardizer for every fold and fail on any
    /// difference.
    pub audit: bool,
}

impl EvalOptions {
    pub fn kfold(k: usize, seed: u64) -> Self {
        EvalOptions {
            protocol: Protocol::KFold { k },
            seed,
            per_fold_average: false,
            audit: true,
        }
    }

    pub fn holdout(train_fraction: f64, seed: u64) -> Self {
        EvalOptions {
            protocol: Protocol::Holdout { train_fraction },
            seed,
            per_fold_average: false,
            audit: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub fold: usize,
    pub gold: Label,
    pub predicted: Label,
    pub decision_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: ClassifierKind,
    pub feature_sets: String,
    pub protocol: Protocol,
    pub options: EvalOptions,
    pub config_hash: String,
    /// Pooled (or fold-averaged) metrics; `metrics.folds` holds each fold.
    pub metrics: MetricsReport,
    pub predictions: Vec<Prediction>,
    /// Model-level notes such as hitting an iteration cap, per fold.
    pub notes: Vec<String>,
}

struct Partition {
    train: Vec<usize>,
    tune: Option<Vec<usize>>,
    test: Vec<usize>,
}

/// Splits `indices` of the corpus into (kept, held-back) with the stratified
/// holdout used everywhere else.
fn carve(data: &AnalyzedCorpus, indices: &[usize], keep_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let sub = data.corpus.subset(indices);
    let split = holdout_split(&sub, keep_fraction, seed, None)?;
    Ok((
        split.train.iter().map(|&i| indices[i]).collect(),
        split.test.iter().map(|&i| indices[i]).collect(),
    ))
}

fn partitions(data: &AnalyzedCorpus, spec: &ClassifierSpec, opts: &EvalOptions) -> Result<Vec<Partition>> {
    match opts.protocol {
        Protocol::KFold { k } => {
            let folds = stratified_kfold(&data.corpus, k, opts.seed)?;
            (0..k)
                .map(|f| {
                    let train = folds.train_indices(f);
                    if spec.kind.needs_tune_set() {
                        let (train, tune) = carve(data, &train, 1.0 - spec.tune_fraction, opts.seed ^ f as u64)
                            .map_err(|e| e.in_fold(f))?;
                        Ok(Partition {
                            train,
                            tune: Some(tune),
                            test: folds.test_indices(f),
                        })
                    } else {
                        Ok(Partition {
                            train,
                            tune: None,
                            test: folds.test_indices(f),
                        })
                    }
                })
                .collect()
        }
        Protocol::Holdout { train_fraction } => {
            let tune_fraction = spec.kind.needs_tune_set().then_some(0.5);
            let split = holdout_split(&data.corpus, train_fraction, opts.seed, tune_fraction)?;
            Ok(vec![Partition {
                train: split.train,
                tune: split.tune,
                test: split.test,
            }])
        }
    }
}

/// Evaluates `spec` on an analyzed corpus under `opts.protocol`. Each
/// partition fits its own reference, standardizer and model; partitions run
/// in parallel and are reduced in order.
pub fn evaluate(
    data: &AnalyzedCorpus,
    config: &FeatureConfig,
    spec: &ClassifierSpec,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    data.corpus.ensure_labeled()?;
    let parts = partitions(data, spec, opts)?;
    let outcomes = parts
        .par_iter()
        .enumerate()
        .map(|(f, p)| run_partition(data, config, spec, opts, f, p).map_err(|e| e.in_fold(f)))
        .collect::<Result<Vec<_>>>()?;

    let mut pooled = ConfusionMatrix::default();
    let mut fold_reports = Vec::with_capacity(outcomes.len());
    let mut predictions = Vec::with_capacity(data.len());
    let mut notes = Vec::new();
    for (f, (preds, note)) in outcomes.into_iter().enumerate() {
        let cm = ConfusionMatrix::from_pairs(preds.iter().map(|p| (&p.gold, &p.predicted)));
        pooled.add(&cm);
        fold_reports.push(metrics(&cm)?);
        predictions.extend(preds);
        if let Some(n) = note {
            notes.push(format!("fold {f}: {n}"));
        }
    }
    let mut report = if opts.per_fold_average {
        average_reports(&fold_reports)?
    } else {
        metrics(&pooled)?
    };
    report.folds = fold_reports;
    let hash = config.hash();
    report.config_hash = Some(hash.clone());
    report.seed = Some(opts.seed);
    Ok(EvalReport {
        classifier: spec.kind,
        feature_sets: sets_label(&config.sets),
        protocol: opts.protocol,
        options: *opts,
        config_hash: hash,
        metrics: report,
        predictions,
        notes,
    })
}

fn run_partition(
    data: &AnalyzedCorpus,
    config: &FeatureConfig,
    spec: &ClassifierSpec,
    opts: &EvalOptions,
    fold: usize,
    part: &Partition,
) -> Result<(Vec<Prediction>, Option<String>)> {
    let fitted = fit_partition(data, config, spec, &part.train, part.tune.as_deref())?;
    if opts.audit {
        fitted.audit(data, fold)?;
    }
    let mut preds = Vec::with_capacity(part.test.len());
    for &i in &part.test {
        let doc = &data.corpus.documents()[i];
        let decision_value = fitted.decision_value(data, i)?;
        preds.push(Prediction {
            id: doc.id.clone(),
            fold,
            gold: doc.label.ok_or_else(|| Error::Unlabeled(doc.id.clone()))?,
            predicted: Label::from_decision(decision_value),
            decision_value,
        });
    }
    Ok((preds, fitted.model.convergence_note()))
}

/// Analyzes `corpus` for `config` and runs stratified k-fold evaluation.
pub fn cross_validate(
    corpus: &Corpus,
    config: &FeatureConfig,
    spec: &ClassifierSpec,
    k: usize,
    seed: u64,
    res: &FeatureResources,
) -> Result<EvalReport> {
    let data = analyze_corpus(corpus, config, res)?;
    evaluate(&data, config, spec, &EvalOptions::kfold(k, seed))
}
