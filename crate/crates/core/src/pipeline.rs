//! Per-partition fitting: reference corpus, standardizer and classifier are
//! all learned from the training indices alone.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::classifiers::{ClassifierSpec, LabeledMatrix, Model};
use crate::corpus::{build_reference, reference_from_terms, Corpus, Label, ReferenceCorpus};
use crate::error::{Error, Result};
use crate::features::{
    analyze, assemble, cosine_to_reference, feature_names, fit_standardizer, DocumentAnalysis,
    FeatureConfig, FeatureMatrix, FeatureName, FeatureResources, ReferenceMode, Standardizer,
};

/// A corpus with every partition-independent extractor already run.
#[derive(Debug, Clone)]
pub struct AnalyzedCorpus {
    pub corpus: Corpus,
    /// The configuration analyses were computed for. Fitting may use any
    /// configuration whose sets are a subset of it.
    pub config: FeatureConfig,
    pub analyses: Vec<DocumentAnalysis>,
    pub we_dimension: usize,
}

/// Analyzes every document in parallel; results keep corpus order.
pub fn analyze_corpus(corpus: &Corpus, config: &FeatureConfig, res: &FeatureResources) -> Result<AnalyzedCorpus> {
    config.validate()?;
    res.check(config)?;
    let analyses = corpus
        .documents()
        .par_iter()
        .map(|d| {
            analyze(&d.text, config, res)
                .map_err(|e| Error::Features(format!("document {:?}: {e}", d.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalyzedCorpus {
        corpus: corpus.clone(),
        config: config.clone(),
        analyses,
        we_dimension: res.we_dimension(config),
    })
}

impl AnalyzedCorpus {
    pub fn len(&self) -> usize {
        self.analyses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.analyses.is_empty()
    }

    fn label(&self, i: usize) -> Result<Label> {
        let d = &self.corpus.documents()[i];
        d.label.ok_or_else(|| Error::Unlabeled(d.id.clone()))
    }

    pub fn labels_of(&self, indices: &[usize]) -> Result<Vec<Label>> {
        indices.iter().map(|&i| self.label(i)).collect()
    }

    /// Reference over the given documents, built from cached term lists.
    pub fn reference(&self, indices: &[usize]) -> Result<ReferenceCorpus> {
        let docs = indices
            .iter()
            .map(|&i| Ok((self.corpus.documents()[i].id.as_str(), self.label(i)?, self.analyses[i].terms.as_slice())))
            .collect::<Result<Vec<_>>>()?;
        reference_from_terms(docs, &BTreeSet::new())
    }

    fn check_config(&self, config: &FeatureConfig) -> Result<()> {
        config.validate()?;
        if !config.sets.is_subset(&self.config.sets)
            || (config.uses_reference() && !self.config.uses_reference())
        {
            return Err(Error::Features(format!(
                "configuration {} was not analyzed for this corpus",
                crate::features::sets_label(&config.sets)
            )));
        }
        Ok(())
    }
}

/// Whole-corpus feature matrix for export. Every labeled document is part
/// of the reference and is compared against it with itself left out;
/// unlabeled documents are compared against the full reference.
pub fn feature_matrix(data: &AnalyzedCorpus, config: &FeatureConfig) -> Result<FeatureMatrix> {
    data.check_config(config)?;
    let base: Vec<usize> = (0..data.len())
        .filter(|&i| data.corpus.documents()[i].label.is_some())
        .collect();
    let reference = if config.uses_reference() {
        Some(data.reference(&base)?)
    } else {
        None
    };
    let rows = (0..data.len())
        .into_par_iter()
        .map(|i| raw_row(data, config, reference.as_ref(), &base, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        ids: data.corpus.documents().iter().map(|d| d.id.clone()).collect(),
        names: feature_names(config, data.we_dimension),
        rows,
    })
}

/// Everything learned from one training partition.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    pub config: FeatureConfig,
    pub spec: ClassifierSpec,
    pub names: Vec<FeatureName>,
    /// Documents the reference was built from; each of them is compared
    /// against the reference with itself left out.
    pub reference_base: Vec<usize>,
    pub reference: Option<ReferenceCorpus>,
    pub standardizer: Option<Standardizer>,
    pub model: Model,
    pub train: Vec<usize>,
    /// Unstandardized training rows, in `train` order.
    pub train_rows: Vec<Vec<f64>>,
}

/// Raw feature row of document `i` against `reference`, leaving `i` out of
/// it when `i` belongs to `base`.
fn raw_row(
    data: &AnalyzedCorpus,
    config: &FeatureConfig,
    reference: Option<&ReferenceCorpus>,
    base: &[usize],
    i: usize,
) -> Result<Vec<f64>> {
    let analysis = &data.analyses[i];
    let cosine = match reference {
        Some(r) => {
            let doc = &data.corpus.documents()[i];
            let own;
            let against = if base.contains(&i) {
                own = r.without(&doc.id, data.label(i)?, &analysis.terms)?;
                &own
            } else {
                r
            };
            Some(cosine_to_reference(&analysis.terms, against, config.weighting))
        }
        None => None,
    };
    Ok(assemble(analysis, cosine, config)?.values)
}

/// Fits reference, standardizer and classifier on `train`. `tune` rows are
/// only passed to classifiers that early-stop on them.
pub fn fit_partition(
    data: &AnalyzedCorpus,
    config: &FeatureConfig,
    spec: &ClassifierSpec,
    train: &[usize],
    tune: Option<&[usize]>,
) -> Result<FittedPipeline> {
    data.check_config(config)?;
    let mut config = config.clone();
    config.canonicalize();
    let names = feature_names(&config, if config.has(crate::features::FeatureSet::WE) { data.we_dimension } else { 0 });
    let reference_base: Vec<usize> = match config.reference_mode {
        ReferenceMode::TrainingFold => train.to_vec(),
        ReferenceMode::AllAccepted => (0..data.len()).collect(),
    };
    let reference = if config.uses_reference() {
        Some(data.reference(&reference_base)?)
    } else {
        None
    };
    let train_rows = train
        .iter()
        .map(|&i| raw_row(data, &config, reference.as_ref(), &reference_base, i))
        .collect::<Result<Vec<_>>>()?;
    let standardizer = if spec.kind.standardizes() {
        Some(fit_standardizer(&train_rows)?)
    } else {
        None
    };
    let scale = |rows: Vec<Vec<f64>>| -> Result<Vec<Vec<f64>>> {
        match &standardizer {
            Some(s) => rows.iter().map(|r| s.transform_row(r)).collect(),
            None => Ok(rows),
        }
    };
    let train_matrix = LabeledMatrix::new(scale(train_rows.clone())?, data.labels_of(train)?)?;
    let tune_matrix = match tune {
        Some(idx) => {
            let rows = idx
                .iter()
                .map(|&i| raw_row(data, &config, reference.as_ref(), &reference_base, i))
                .collect::<Result<Vec<_>>>()?;
            Some(LabeledMatrix::new(scale(rows)?, data.labels_of(idx)?)?)
        }
        None => None,
    };
    let model = spec.train(&train_matrix, tune_matrix.as_ref())?;
    Ok(FittedPipeline {
        config,
        spec: spec.clone(),
        names,
        reference_base,
        reference,
        standardizer,
        model,
        train: train.to_vec(),
        train_rows,
    })
}

impl FittedPipeline {
    /// Raw and model-space rows for corpus document `i`.
    pub fn rows_for(&self, data: &AnalyzedCorpus, i: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let raw = raw_row(data, &self.config, self.reference.as_ref(), &self.reference_base, i)?;
        let scaled = match &self.standardizer {
            Some(s) => s.transform_row(&raw)?,
            None => raw.clone(),
        };
        Ok((raw, scaled))
    }

    pub fn decision_value(&self, data: &AnalyzedCorpus, i: usize) -> Result<f64> {
        let (_, x) = self.rows_for(data, i)?;
        self.model.decision_value(&x)
    }

    /// Recomputes reference and standardizer from the training documents'
    /// text and compares them bit for bit with the fitted ones.
    pub fn audit(&self, data: &AnalyzedCorpus, fold: usize) -> Result<()> {
        let leak = |what: String| Error::Leakage { fold, what };
        if let Some(fitted) = &self.reference {
            let base = data.corpus.subset(&self.reference_base);
            let rebuilt = build_reference(&base, &BTreeSet::new())?;
            if rebuilt.term_counts != fitted.term_counts
                || rebuilt.doc_freq != fitted.doc_freq
                || rebuilt.n_docs != fitted.n_docs
                || rebuilt.members != fitted.members
            {
                return Err(leak("reference corpus differs from its recomputation".into()));
            }
            if self.config.reference_mode == ReferenceMode::TrainingFold {
                let train_ids: BTreeSet<&str> =
                    self.train.iter().map(|&i| data.corpus.documents()[i].id.as_str()).collect();
                if let Some(m) = fitted.members.iter().find(|m| !train_ids.contains(m.as_str())) {
                    return Err(leak(format!("reference includes non-training document {m:?}")));
                }
            }
        }
        // Training rows again, each with its own from-scratch reference.
        let mut rows = Vec::with_capacity(self.train.len());
        for &i in &self.train {
            let analysis = &data.analyses[i];
            let cosine = if self.reference.is_some() {
                let base: Vec<usize> = self.reference_base.iter().copied().filter(|&j| j != i).collect();
                let r = data.reference(&base)?;
                Some(cosine_to_reference(&analysis.terms, &r, self.config.weighting))
            } else {
                None
            };
            rows.push(assemble(analysis, cosine, &self.config)?.values);
        }
        if !bits_equal(&rows, &self.train_rows) {
            return Err(leak("training rows differ from their recomputation".into()));
        }
        if let Some(fitted) = &self.standardizer {
            let again = fit_standardizer(&rows)?;
            let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
            if !same(&again.mean, &fitted.mean) || !same(&again.std, &fitted.std) {
                return Err(leak("standardizer differs from its recomputation".into()));
            }
        }
        Ok(())
    }
}

fn bits_equal(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(r, s)| r.len() == s.len() && r.iter().zip(s).all(|(x, y)| x.to_bits() == y.to_bits()))
}
