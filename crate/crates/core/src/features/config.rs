use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The three feature families: textual (T), word-embedding average (WE),
/// and similarity/error based (SE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureSet {
    T,
    WE,
    SE,
}

impl FeatureSet {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::T => "T",
            FeatureSet::WE => "WE",
            FeatureSet::SE => "SE",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T" => Ok(FeatureSet::T),
            "WE" => Ok(FeatureSet::WE),
            "SE" => Ok(FeatureSet::SE),
            other => Err(Error::Features(format!("unknown feature set {other:?}"))),
        }
    }
}

/// Parses "T+WE", "SE,WE" or "t we" into a set.
pub fn parse_sets(spec: &str) -> Result<BTreeSet<FeatureSet>> {
    let sets = spec
        .split(|c: char| c == '+' || c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<BTreeSet<_>>>()?;
    if sets.is_empty() {
        return Err(Error::Features("no feature set given".into()));
    }
    Ok(sets)
}

/// Display label such as "T + WE + SE" in the fixed T, WE, SE order except
/// that "SE + WE" keeps the conventional ordering for that pair.
pub fn sets_label(sets: &BTreeSet<FeatureSet>) -> String {
    let v: Vec<FeatureSet> = sets.iter().copied().collect();
    match v.as_slice() {
        [FeatureSet::WE, FeatureSet::SE] => "SE + WE".to_string(),
        _ => v.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" + "),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextualFeature {
    NounRatio,
    AdjRatio,
    AdvRatio,
    VerbRatio,
    DiscourseCount,
    Fres,
    WordsPerSentence,
    WordsPerParagraph,
    WordLength,
    CorefDistance,
    PolysemyDegree,
    NeCount,
}

impl TextualFeature {
    pub const DEFAULT: [TextualFeature; 11] = [
        TextualFeature::NounRatio,
        TextualFeature::AdjRatio,
        TextualFeature::AdvRatio,
        TextualFeature::VerbRatio,
        TextualFeature::DiscourseCount,
        TextualFeature::Fres,
        TextualFeature::WordsPerSentence,
        TextualFeature::WordsPerParagraph,
        TextualFeature::WordLength,
        TextualFeature::CorefDistance,
        TextualFeature::PolysemyDegree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TextualFeature::NounRatio => "noun_ratio",
            TextualFeature::AdjRatio => "adj_ratio",
            TextualFeature::AdvRatio => "adv_ratio",
            TextualFeature::VerbRatio => "verb_ratio",
            TextualFeature::DiscourseCount => "discourse_count",
            TextualFeature::Fres => "fres",
            TextualFeature::WordsPerSentence => "avg_words_per_sentence",
            TextualFeature::WordsPerParagraph => "avg_words_per_paragraph",
            TextualFeature::WordLength => "avg_word_length",
            TextualFeature::CorefDistance => "coref_distance",
            TextualFeature::PolysemyDegree => "polysemy_degree",
            TextualFeature::NeCount => "ne_count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeFeature {
    CosineToReference,
    SpellErrors,
    OovCount,
    AdjSimMean,
    AdjSimMax,
}

impl SeFeature {
    pub const DEFAULT: [SeFeature; 3] = [
        SeFeature::CosineToReference,
        SeFeature::SpellErrors,
        SeFeature::OovCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeFeature::CosineToReference => "cosine_to_reference",
            SeFeature::SpellErrors => "spell_errors",
            SeFeature::OovCount => "oov_count",
            SeFeature::AdjSimMean => "adj_sim_mean",
            SeFeature::AdjSimMax => "adj_sim_max",
        }
    }
}

/// Document weighting for the reference-corpus cosine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    TfIdf,
    Tf,
}

/// Which documents feed the accepted-essay reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// Accepted essays of the training partition only; each training essay
    /// is compared against a reference that leaves it out.
    #[default]
    TrainingFold,
    /// Accepted essays of the whole corpus, test essays included, each essay
    /// left out of its own reference. Leaks test labels; kept for
    /// comparison with the original protocol.
    AllAccepted,
}

/// Which loaded table serves a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableSource {
    Embeddings,
    Glove,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourcePaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glove: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource_dir: Option<PathBuf>,
}

fn default_oov_source() -> TableSource {
    TableSource::Embeddings
}

fn default_adjacent_source() -> TableSource {
    TableSource::Glove
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub sets: BTreeSet<FeatureSet>,
    #[serde(default = "default_textual")]
    pub textual: Vec<TextualFeature>,
    #[serde(default = "default_se")]
    pub similarity_error: Vec<SeFeature>,
    /// Report raw counts per 1000 word tokens instead of absolute counts.
    #[serde(default)]
    pub normalize_counts: bool,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default)]
    pub reference_mode: ReferenceMode,
    #[serde(default = "default_oov_source")]
    pub oov_source: TableSource,
    #[serde(default = "default_adjacent_source")]
    pub adjacent_source: TableSource,
    /// Where resources were loaded from. Not part of the configuration hash.
    #[serde(default)]
    pub resources: ResourcePaths,
}

fn default_textual() -> Vec<TextualFeature> {
    TextualFeature::DEFAULT.to_vec()
}

fn default_se() -> Vec<SeFeature> {
    SeFeature::DEFAULT.to_vec()
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::with_sets([FeatureSet::T, FeatureSet::WE, FeatureSet::SE])
    }
}

impl FeatureConfig {
    pub fn with_sets(sets: impl IntoIterator<Item = FeatureSet>) -> Self {
        FeatureConfig {
            sets: sets.into_iter().collect(),
            textual: default_textual(),
            similarity_error: default_se(),
            normalize_counts: false,
            weighting: Weighting::TfIdf,
            reference_mode: ReferenceMode::TrainingFold,
            oov_source: TableSource::Embeddings,
            adjacent_source: TableSource::Glove,
            resources: ResourcePaths::default(),
        }
    }

    pub fn has(&self, set: FeatureSet) -> bool {
        self.sets.contains(&set)
    }

    /// Same settings with a different set selection.
    pub fn restricted_to(&self, sets: &BTreeSet<FeatureSet>) -> Self {
        FeatureConfig {
            sets: sets.clone(),
            ..self.clone()
        }
    }

    pub fn set_ne_count(&mut self, enabled: bool) {
        self.textual.retain(|f| *f != TextualFeature::NeCount);
        if enabled {
            self.textual.push(TextualFeature::NeCount);
        }
        self.canonicalize();
    }

    /// Adds the adjacent-sentence mean/max similarity to the SE set.
    pub fn set_adjacent_similarity(&mut self, enabled: bool) {
        self.similarity_error
            .retain(|f| !matches!(f, SeFeature::AdjSimMean | SeFeature::AdjSimMax));
        if enabled {
            self.similarity_error.extend([SeFeature::AdjSimMean, SeFeature::AdjSimMax]);
        }
        self.canonicalize();
    }

    /// Sorts and deduplicates feature lists so ordering depends only on
    /// which features are enabled.
    pub fn canonicalize(&mut self) {
        self.textual.sort();
        self.textual.dedup();
        self.similarity_error.sort();
        self.similarity_error.dedup();
    }

    pub fn validate(&self) -> Result<()> {
        if self.sets.is_empty() {
            return Err(Error::Features("at least one feature set must be enabled".into()));
        }
        if self.has(FeatureSet::T) && self.textual.is_empty() {
            return Err(Error::Features("set T enabled with no textual features".into()));
        }
        if self.has(FeatureSet::SE) && self.similarity_error.is_empty() {
            return Err(Error::Features("set SE enabled with no SE features".into()));
        }
        Ok(())
    }

    pub fn uses_reference(&self) -> bool {
        self.has(FeatureSet::SE) && self.similarity_error.contains(&SeFeature::CosineToReference)
    }

    /// Canonical JSON without resource paths.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.canonicalize();
        c.resources = ResourcePaths::default();
        serde_json::to_string(&c).expect("config serializes")
    }

    /// Hex SHA-256 of [`canonical_json`](Self::canonical_json).
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(input: &str) -> Result<Self> {
        let mut c: FeatureConfig =
            serde_json::from_str(input).map_err(|e| Error::Features(format!("config: {e}")))?;
        c.canonicalize();
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_order_and_paths() {
        let mut a = FeatureConfig::default();
        let mut b = FeatureConfig::default();
        b.textual.reverse();
        b.resources.embeddings = Some("/tmp/vectors.txt".into());
        a.canonicalize();
        assert_eq!(a.hash(), b.hash());
        b.normalize_counts = true;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn json_roundtrip_and_defaults() {
        let c = FeatureConfig::from_json(r#"{"sets":["SE","WE"]}"#).unwrap();
        assert_eq!(c.textual.len(), 11);
        assert_eq!(c.similarity_error, SeFeature::DEFAULT.to_vec());
        assert_eq!(FeatureConfig::from_json(&c.to_json_pretty()).unwrap(), c);
        assert!(FeatureConfig::from_json(r#"{"sets":[]}"#).is_err());
        assert!(FeatureConfig::from_json(r#"{"sets":["T"],"bogus":1}"#).is_err());
    }

    #[test]
    fn set_parsing_and_labels() {
        let s = parse_sets("se+we").unwrap();
        assert_eq!(sets_label(&s), "SE + WE");
        assert_eq!(sets_label(&parse_sets("T,WE,SE").unwrap()), "T + WE + SE");
        assert_eq!(sets_label(&parse_sets("SE T").unwrap()), "T + SE");
        assert!(parse_sets("XY").is_err());
        assert!(parse_sets("").is_err());
    }

    #[test]
    fn toggles() {
        let mut c = FeatureConfig::default();
        c.set_ne_count(true);
        assert_eq!(c.textual.len(), 12);
        c.set_ne_count(false);
        assert_eq!(c.textual.len(), 11);
        c.set_adjacent_similarity(true);
        assert_eq!(c.similarity_error.len(), 5);
    }
}
