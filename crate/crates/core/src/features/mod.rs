//! Assembles per-document feature vectors from the configured sets,
//! computes the reference-corpus similarity and standardizes matrices.

mod config;
mod matrix;
mod similarity;
mod standardize;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use config::{
    parse_sets, sets_label, FeatureConfig, FeatureSet, ReferenceMode, ResourcePaths, SeFeature,
    TableSource, TextualFeature, Weighting,
};
pub use matrix::{parse_matrix_csv, FeatureMatrix};
pub use similarity::{cosine_to_reference, smoothed_idf};
pub use standardize::{apply_standardizer, fit_standardizer, Standardizer};

use crate::corpus::ReferenceCorpus;
use crate::embedding::{
    adjacent_sentence_similarity, avg_word_vector, oov_count, AdjacentSimilarity, AverageVector,
    EmbeddingTable,
};
use crate::error::{Error, Result};
use crate::text::{tokenize, LexicalResources, TextualFeatures};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureName {
    pub set: FeatureSet,
    pub name: String,
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.set, self.name)
    }
}

impl std::str::FromStr for FeatureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (set, name) = s
            .split_once(':')
            .ok_or_else(|| Error::Features(format!("feature name {s:?} lacks a set prefix")))?;
        if name.is_empty() {
            return Err(Error::Features(format!("feature name {s:?} is empty")));
        }
        Ok(FeatureName {
            set: set.parse()?,
            name: name.to_string(),
        })
    }
}

/// Ordered feature names for a configuration: T scalars, then WE
/// components, then SE scalars.
pub fn feature_names(config: &FeatureConfig, we_dimension: usize) -> Vec<FeatureName> {
    let mut c = config.clone();
    c.canonicalize();
    let mut names = Vec::new();
    if c.has(FeatureSet::T) {
        names.extend(c.textual.iter().map(|f| FeatureName {
            set: FeatureSet::T,
            name: f.name().to_string(),
        }));
    }
    if c.has(FeatureSet::WE) {
        let width = we_dimension.saturating_sub(1).to_string().len().max(3);
        names.extend((0..we_dimension).map(|i| FeatureName {
            set: FeatureSet::WE,
            name: format!("we_{i:0width$}"),
        }));
    }
    if c.has(FeatureSet::SE) {
        names.extend(c.similarity_error.iter().map(|f| FeatureName {
            set: FeatureSet::SE,
            name: f.name().to_string(),
        }));
    }
    names
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub names: Vec<FeatureName>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, set: FeatureSet, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n.set == set && n.name == name)
            .map(|i| self.values[i])
    }
}

/// Shared read-only inputs for extraction.
#[derive(Debug, Clone)]
pub struct FeatureResources {
    pub lexical: Arc<LexicalResources>,
    pub embeddings: Option<Arc<EmbeddingTable>>,
    pub glove: Option<Arc<EmbeddingTable>>,
}

impl FeatureResources {
    pub fn new(
        lexical: Arc<LexicalResources>,
        embeddings: Option<Arc<EmbeddingTable>>,
        glove: Option<Arc<EmbeddingTable>>,
    ) -> Self {
        FeatureResources {
            lexical,
            embeddings,
            glove,
        }
    }

    /// Bundled lexical resources with one table serving both roles.
    pub fn with_table(table: Arc<EmbeddingTable>) -> Self {
        FeatureResources {
            lexical: LexicalResources::bundled_shared(),
            embeddings: Some(Arc::clone(&table)),
            glove: Some(table),
        }
    }

    fn table(&self, source: TableSource) -> Result<&EmbeddingTable> {
        let (table, name) = match source {
            TableSource::Embeddings => (&self.embeddings, "embeddings"),
            TableSource::Glove => (&self.glove, "glove"),
        };
        table
            .as_deref()
            .ok_or_else(|| Error::MissingResource(format!("{name} table")))
    }

    /// Fails naming the first resource the configuration needs but lacks.
    pub fn check(&self, config: &FeatureConfig) -> Result<()> {
        if config.has(FeatureSet::WE) {
            self.table(TableSource::Embeddings)?;
        }
        if config.has(FeatureSet::SE) {
            for f in &config.similarity_error {
                match f {
                    SeFeature::OovCount => {
                        self.table(config.oov_source)?;
                    }
                    SeFeature::AdjSimMean | SeFeature::AdjSimMax => {
                        self.table(config.adjacent_source)?;
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn we_dimension(&self, config: &FeatureConfig) -> usize {
        if config.has(FeatureSet::WE) {
            self.embeddings.as_ref().map_or(0, |t| t.dimension())
        } else {
            0
        }
    }
}

/// Everything about a document that does not depend on the training
/// partition. The reference cosine is added later, per fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentAnalysis {
    pub word_count: u64,
    pub token_count: u64,
    pub terms: Vec<String>,
    pub textual: TextualFeatures,
    pub average: Option<AverageVector>,
    pub oov_count: Option<u64>,
    pub adjacent: Option<AdjacentSimilarity>,
}

impl DocumentAnalysis {
    pub fn oov_fraction(&self) -> Option<f64> {
        self.oov_count.map(|c| c as f64 / self.word_count.max(1) as f64)
    }
}

/// Tokenizes and runs every extractor the configuration needs.
pub fn analyze(text: &str, config: &FeatureConfig, res: &FeatureResources) -> Result<DocumentAnalysis> {
    res.check(config)?;
    let doc = tokenize(text)?;
    let with_ne = config.textual.contains(&TextualFeature::NeCount);
    let textual = TextualFeatures::compute(&doc, &res.lexical, with_ne);
    let average = if config.has(FeatureSet::WE) {
        Some(avg_word_vector(&doc, res.table(TableSource::Embeddings)?))
    } else {
        None
    };
    let se = |f: SeFeature| config.has(FeatureSet::SE) && config.similarity_error.contains(&f);
    let oov = if se(SeFeature::OovCount) {
        Some(oov_count(&doc, res.table(config.oov_source)?))
    } else {
        None
    };
    let adjacent = if se(SeFeature::AdjSimMean) || se(SeFeature::AdjSimMax) {
        Some(adjacent_sentence_similarity(
            &doc,
            res.table(config.adjacent_source)?,
            &res.lexical,
        ))
    } else {
        None
    };
    Ok(DocumentAnalysis {
        word_count: doc.word_count() as u64,
        token_count: doc.token_count() as u64,
        terms: doc.words().map(|t| t.text.to_lowercase()).collect(),
        textual,
        average,
        oov_count: oov,
        adjacent,
    })
}

/// Concatenates T, WE and SE values in canonical order. `cosine` must be
/// given when the configuration uses the reference similarity.
pub fn assemble(
    analysis: &DocumentAnalysis,
    cosine: Option<f64>,
    config: &FeatureConfig,
) -> Result<FeatureVector> {
    let mut c = config.clone();
    c.canonicalize();
    let per_1000 = |count: u64| -> f64 {
        if c.normalize_counts {
            count as f64 * 1000.0 / analysis.word_count.max(1) as f64
        } else {
            count as f64
        }
    };
    let mut values = Vec::new();
    if c.has(FeatureSet::T) {
        let t = &analysis.textual;
        for f in &c.textual {
            values.push(match f {
                TextualFeature::NounRatio => t.noun_ratio,
                TextualFeature::AdjRatio => t.adj_ratio,
                TextualFeature::AdvRatio => t.adv_ratio,
                TextualFeature::VerbRatio => t.verb_ratio,
                TextualFeature::DiscourseCount => per_1000(t.discourse_count),
                TextualFeature::Fres => t.fres,
                TextualFeature::WordsPerSentence => t.avg_words_per_sentence,
                TextualFeature::WordsPerParagraph => t.avg_words_per_paragraph,
                TextualFeature::WordLength => t.avg_word_length,
                TextualFeature::CorefDistance => t.coref_distance as f64,
                TextualFeature::PolysemyDegree => t.polysemy_degree,
                TextualFeature::NeCount => per_1000(
                    t.ne_count
                        .ok_or_else(|| Error::Features("ne_count was not computed".into()))?,
                ),
            });
        }
    }
    let mut we_dim = 0;
    if c.has(FeatureSet::WE) {
        let avg = analysis
            .average
            .as_ref()
            .ok_or_else(|| Error::MissingResource("embeddings table".into()))?;
        we_dim = avg.values.len();
        values.extend_from_slice(&avg.values);
    }
    if c.has(FeatureSet::SE) {
        for f in &c.similarity_error {
            values.push(match f {
                SeFeature::CosineToReference => {
                    cosine.ok_or_else(|| Error::MissingResource("reference corpus".into()))?
                }
                SeFeature::SpellErrors => per_1000(analysis.textual.spell_errors),
                SeFeature::OovCount => per_1000(
                    analysis
                        .oov_count
                        .ok_or_else(|| Error::MissingResource("embeddings table".into()))?,
                ),
                SeFeature::AdjSimMean | SeFeature::AdjSimMax => {
                    let adj = analysis
                        .adjacent
                        .ok_or_else(|| Error::MissingResource("glove table".into()))?;
                    if *f == SeFeature::AdjSimMean {
                        adj.mean
                    } else {
                        adj.max
                    }
                }
            });
        }
    }
    let names = feature_names(&c, we_dim);
    debug_assert_eq!(names.len(), values.len());
    Ok(FeatureVector { names, values })
}

/// Full single-document extraction. `reference` is required when the
/// configuration includes the reference cosine.
pub fn extract(
    text: &str,
    config: &FeatureConfig,
    res: &FeatureResources,
    reference: Option<&ReferenceCorpus>,
) -> Result<FeatureVector> {
    config.validate()?;
    let analysis = analyze(text, config, res)?;
    let cosine = if config.uses_reference() {
        let r = reference.ok_or_else(|| Error::MissingResource("reference corpus".into()))?;
        Some(cosine_to_reference(&analysis.terms, r, config.weighting))
    } else {
        None
    };
    assemble(&analysis, cosine, config)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::corpus::{build_reference, Corpus, Document, Label};

    fn table(dim: usize) -> Arc<EmbeddingTable> {
        let words = ["my", "research", "interest", "is", "learning", "machine"];
        Arc::new(
            EmbeddingTable::from_rows(words.iter().enumerate().map(|(i, w)| {
                (w.to_string(), (0..dim).map(|j| ((i * dim + j) % 7) as f32 - 3.0).collect())
            }))
            .unwrap(),
        )
    }

    fn reference() -> ReferenceCorpus {
        let c = Corpus::new(
            vec![Document::new("a", "My research interest is machine learning.", Some(Label::Accepted))],
            "",
        )
        .unwrap();
        build_reference(&c, &BTreeSet::new()).unwrap()
    }

    const ESSAY: &str = "My research interest is machine learning. I recieve data.";

    #[test]
    fn we_only_length_matches_dimension() {
        let res = FeatureResources::with_table(table(300));
        let v = extract(ESSAY, &FeatureConfig::with_sets([FeatureSet::WE]), &res, None).unwrap();
        assert_eq!(v.len(), 300);
        assert_eq!(v.names[0].to_string(), "WE:we_000");
    }

    #[test]
    fn se_only_has_three_features() {
        let res = FeatureResources::with_table(table(4));
        let r = reference();
        let v = extract(ESSAY, &FeatureConfig::with_sets([FeatureSet::SE]), &res, Some(&r)).unwrap();
        assert_eq!(v.len(), 3);
        let names: Vec<String> = v.names.iter().map(|n| n.to_string()).collect();
        assert_eq!(names, ["SE:cosine_to_reference", "SE:spell_errors", "SE:oov_count"]);
        assert_eq!(v.get(FeatureSet::SE, "spell_errors"), Some(1.0));
        // "I", "recieve", "data" are missing from the table.
        assert_eq!(v.get(FeatureSet::SE, "oov_count"), Some(3.0));
    }

    #[test]
    fn all_sets_concatenate() {
        let res = FeatureResources::with_table(table(300));
        let r = reference();
        let v = extract(ESSAY, &FeatureConfig::default(), &res, Some(&r)).unwrap();
        assert_eq!(v.len(), 11 + 300 + 3);
        let unique: std::collections::HashSet<_> = v.names.iter().collect();
        assert_eq!(unique.len(), v.len());
    }

    #[test]
    fn missing_resources_are_named() {
        let res = FeatureResources::new(LexicalResources::bundled_shared(), None, None);
        let err = extract(ESSAY, &FeatureConfig::with_sets([FeatureSet::WE]), &res, None).unwrap_err();
        assert!(err.to_string().contains("embeddings"), "{err}");
        let res = FeatureResources::with_table(table(4));
        let err = extract(ESSAY, &FeatureConfig::with_sets([FeatureSet::SE]), &res, None).unwrap_err();
        assert!(err.to_string().contains("reference"), "{err}");
        let mut cfg = FeatureConfig::with_sets([FeatureSet::SE]);
        cfg.set_adjacent_similarity(true);
        let res = FeatureResources::new(LexicalResources::bundled_shared(), Some(table(4)), None);
        let err = extract(ESSAY, &cfg, &res, Some(&reference())).unwrap_err();
        assert!(err.to_string().contains("glove"), "{err}");
    }

    #[test]
    fn normalized_counts() {
        let res = FeatureResources::with_table(table(4));
        let mut cfg = FeatureConfig::with_sets([FeatureSet::SE]);
        cfg.normalize_counts = true;
        let v = extract(ESSAY, &cfg, &res, Some(&reference())).unwrap();
        // 9 word tokens, 1 misspelling.
        assert_eq!(v.get(FeatureSet::SE, "spell_errors"), Some(1000.0 / 9.0));
    }

    #[test]
    fn feature_name_parse() {
        let n: FeatureName = "SE:oov_count".parse().unwrap();
        assert_eq!(n.set, FeatureSet::SE);
        assert!("oov_count".parse::<FeatureName>().is_err());
        assert!("XX:a".parse::<FeatureName>().is_err());
    }
}
