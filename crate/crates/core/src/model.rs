//! Persisted models: classifier payload plus everything needed to turn a new
//! essay into the exact feature row the classifier was trained on.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{ClassifierSpec, Model};
use crate::corpus::{holdout_split, Label, ReferenceCorpus};
use crate::error::{Error, Result};
use crate::features::{
    analyze, assemble, cosine_to_reference, FeatureConfig, FeatureResources, FeatureSet, Standardizer,
};
use crate::pipeline::{fit_partition, AnalyzedCorpus};

pub const MODEL_FORMAT: &str = "sopcheck-model";
pub const MODEL_VERSION: u32 = 1;

/// Share of out-of-vocabulary word tokens above which a response warns.
pub const HIGH_OOV_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub documents: usize,
    pub class_counts: BTreeMap<String, usize>,
    /// Rows held back for early stopping.
    pub tune_documents: usize,
    pub provenance: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub model_id: String,
    pub feature_config: FeatureConfig,
    pub config_hash: String,
    pub feature_names: Vec<String>,
    pub classifier: ClassifierSpec,
    pub standardizer: Option<Standardizer>,
    pub reference: Option<ReferenceCorpus>,
    pub model: Model,
    pub training: TrainingInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBreakdown {
    pub name: String,
    pub raw: f64,
    /// Value after standardization; absent for classifiers fed raw values.
    pub standardized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResponse {
    pub label: Label,
    /// Signed margin (not a probability); zero resolves to rejected.
    pub decision_value: f64,
    pub feature_breakdown: Vec<FeatureBreakdown>,
    pub warnings: Vec<String>,
    pub model_id: String,
}

/// Trains on every document of `data`. Classifiers that early-stop carve a
/// stratified tuning set out of the corpus first.
pub fn train_model(
    data: &AnalyzedCorpus,
    config: &FeatureConfig,
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<TrainedModel> {
    let all: Vec<usize> = (0..data.len()).collect();
    let (train, tune) = if spec.kind.needs_tune_set() {
        let split = holdout_split(&data.corpus, 1.0 - spec.tune_fraction, seed, None)?;
        (split.train, Some(split.test))
    } else {
        (all, None)
    };
    let fitted = fit_partition(data, config, spec, &train, tune.as_deref())?;
    let mut model = fitted.model;
    strip_histories(&mut model);
    let labels = data.labels_of(&train)?;
    let mut class_counts = BTreeMap::new();
    for l in labels {
        *class_counts.entry(l.to_string()).or_insert(0) += 1;
    }
    let mut trained = TrainedModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        model_id: String::new(),
        config_hash: fitted.config.hash(),
        feature_config: fitted.config,
        feature_names: fitted.names.iter().map(ToString::to_string).collect(),
        classifier: spec.clone(),
        standardizer: fitted.standardizer,
        reference: fitted.reference,
        model,
        training: TrainingInfo {
            documents: train.len(),
            class_counts,
            tune_documents: tune.map_or(0, |t| t.len()),
            provenance: data.corpus.provenance.clone(),
            seed,
        },
    };
    trained.model_id = trained.compute_id();
    Ok(trained)
}

fn strip_histories(model: &mut Model) {
    match model {
        Model::Lr(m) => m.loss_history.clear(),
        Model::Net(m) => {
            m.loss_history.clear();
            m.tune_history.clear();
        }
        _ => {}
    }
}

impl TrainedModel {
    /// First 16 hex digits of the SHA-256 of the file body with an empty id.
    fn compute_id(&self) -> String {
        let mut copy = self.clone();
        copy.model_id.clear();
        let body = serde_json::to_string(&copy).expect("model serializes");
        hex::encode(Sha256::digest(body.as_bytes()))[..16].to_string()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_model(&text)
    }

    pub fn input_dim(&self) -> usize {
        self.feature_names.len()
    }

    /// Decision value for a raw (unstandardized) feature row.
    pub fn decision_value_raw(&self, raw: &[f64]) -> Result<f64> {
        if raw.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: raw.len(),
            });
        }
        match &self.standardizer {
            Some(s) => self.model.decision_value(&s.transform_row(raw)?),
            None => self.model.decision_value(raw),
        }
    }

    /// Scores one essay. The essay is compared against the full training
    /// reference, as any unseen document would be.
    pub fn evaluate(&self, text: &str, res: &FeatureResources) -> Result<EvaluationResponse> {
        let config = &self.feature_config;
        let analysis = analyze(text, config, res)?;
        let cosine = match (&self.reference, config.uses_reference()) {
            (Some(r), true) => Some(cosine_to_reference(&analysis.terms, r, config.weighting)),
            (None, true) => return Err(Error::ModelFormat("model lacks its reference corpus".into())),
            _ => None,
        };
        let vector = assemble(&analysis, cosine, config)?;
        let names: Vec<String> = vector.names.iter().map(ToString::to_string).collect();
        if names != self.feature_names {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                actual: names.len(),
            });
        }
        let standardized = match &self.standardizer {
            Some(s) => Some(s.transform_row(&vector.values)?),
            None => None,
        };
        let decision_value = match &standardized {
            Some(x) => self.model.decision_value(x)?,
            None => self.model.decision_value(&vector.values)?,
        };
        let mut warnings = Vec::new();
        if config.has(FeatureSet::WE) && analysis.average.as_ref().is_some_and(|a| a.degenerate) {
            warnings.push("no word had an embedding; the average vector is all zeros".to_string());
        }
        if let Some(frac) = analysis.oov_fraction() {
            if frac > HIGH_OOV_FRACTION {
                warnings.push(format!(
                    "{:.0}% of words are missing from the embedding table",
                    frac * 100.0
                ));
            }
        }
        if analysis.adjacent.is_some_and(|a| a.degenerate) {
            warnings.push("no adjacent sentence pair had content words on both sides".to_string());
        }
        let feature_breakdown = names
            .into_iter()
            .enumerate()
            .map(|(i, name)| FeatureBreakdown {
                name,
                raw: vector.values[i],
                standardized: standardized.as_ref().map(|s| s[i]),
            })
            .collect();
        Ok(EvaluationResponse {
            label: Label::from_decision(decision_value),
            decision_value,
            feature_breakdown,
            warnings,
            model_id: self.model_id.clone(),
        })
    }
}

/// Parses a model file, checking the format tag and version before the body.
pub fn parse_model(text: &str) -> Result<TrainedModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(format!("not a model file: {e}")))?;
    let format = value.get("format").and_then(|v| v.as_str());
    if format != Some(MODEL_FORMAT) {
        return Err(Error::ModelFormat(format!("unknown format tag {format:?}")));
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(MODEL_VERSION) => {}
        other => {
            return Err(Error::ModelFormat(format!(
                "unsupported version {other:?}, this build reads version {MODEL_VERSION}"
            )))
        }
    }
    let model: TrainedModel =
        serde_json::from_value(value).map_err(|e| Error::ModelFormat(e.to_string()))?;
    model.model.validate().map_err(|e| Error::ModelFormat(e.to_string()))?;
    if model.feature_names.len() != model.model.input_dim() {
        return Err(Error::ModelFormat(format!(
            "{} feature names for a model of dimension {}",
            model.feature_names.len(),
            model.model.input_dim()
        )));
    }
    if let Some(s) = &model.standardizer {
        if s.width() != model.feature_names.len() || s.std.len() != s.mean.len() {
            return Err(Error::ModelFormat("standardizer width does not match the features".into()));
        }
    }
    Ok(model)
}
