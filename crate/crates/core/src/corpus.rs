//! Labeled essay collections: loading, validation, stratified folds and
//! holdouts, and the accepted-essay reference corpus used for similarity.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::tokenize;

/// Gold outcome of an application. Accepted is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Accepted,
    Rejected,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Accepted, Label::Rejected];

    /// +1 for accepted, -1 for rejected.
    pub fn sign(self) -> f64 {
        match self {
            Label::Accepted => 1.0,
            Label::Rejected => -1.0,
        }
    }

    /// Positive values map to accepted; zero and below to rejected.
    pub fn from_decision(value: f64) -> Label {
        if value > 0.0 {
            Label::Accepted
        } else {
            Label::Rejected
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Accepted => Label::Rejected,
            Label::Rejected => Label::Accepted,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Accepted => "accepted",
            Label::Rejected => "rejected",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "accepted" => Ok(Label::Accepted),
            "rejected" => Ok(Label::Rejected),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    pub provenance: String,
}

impl Corpus {
    /// Validates ids (non-empty, unique) and texts (non-blank).
    pub fn new(documents: Vec<Document>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if doc.id.is_empty() {
                return Err(Error::Split("document id must be non-empty".into()));
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
            if doc.text.trim().is_empty() {
                return Err(Error::EmptyText(doc.id.clone()));
            }
        }
        Ok(Corpus {
            documents,
            provenance: provenance.into(),
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Fails with the first unlabeled document.
    pub fn ensure_labeled(&self) -> Result<()> {
        match self.documents.iter().find(|d| d.label.is_none()) {
            Some(doc) => Err(Error::Unlabeled(doc.id.clone())),
            None => Ok(()),
        }
    }

    pub fn labels(&self) -> Result<Vec<Label>> {
        self.documents
            .iter()
            .map(|d| d.label.ok_or_else(|| Error::Unlabeled(d.id.clone())))
            .collect()
    }

    pub fn class_counts(&self) -> BTreeMap<Label, usize> {
        let mut counts = BTreeMap::new();
        for label in self.documents.iter().filter_map(|d| d.label) {
            *counts.entry(label).or_insert(0) += 1;
        }
        counts
    }

    /// A new corpus holding the documents at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Serializes to the line-delimited record format read by [`parse_corpus`].
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&serde_json::to_string(doc).expect("documents always serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Deserialize)]
struct Record {
    id: String,
    text: String,
    #[serde(default)]
    label: Option<String>,
}

/// Parses one JSON object per line with fields `id`, `text` and optional
/// `label` ("accepted" | "rejected"). Blank lines are skipped.
pub fn parse_corpus(input: &str, provenance: impl Into<String>) -> Result<Corpus> {
    let mut documents = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            message: e.to_string(),
        })?;
        let label = match record.label.as_deref() {
            None => None,
            Some(s) => Some(s.parse().map_err(|message| Error::MalformedRecord {
                line: line_no,
                message,
            })?),
        };
        if record.id.is_empty() {
            return Err(Error::MalformedRecord {
                line: line_no,
                message: "empty id".into(),
            });
        }
        documents.push(Document {
            id: record.id,
            text: record.text,
            label,
        });
    }
    Corpus::new(documents, provenance)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let input = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&input, path.display().to_string())
}

/// Fold index per document, parallel to the corpus order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    ids: Vec<String>,
    folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id).map(|i| self.folds[i])
    }

    /// Fold index for each corpus position.
    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    pub fn assignment(&self) -> BTreeMap<&str, usize> {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.folds.iter().copied())
            .collect()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != fold).collect()
    }
}

/// Document positions of each class, shuffled with the given rng.
fn shuffled_by_class(labels: &[Label], rng: &mut ChaCha8Rng) -> Vec<(Label, Vec<usize>)> {
    Label::ALL
        .iter()
        .map(|&label| {
            let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
            members.shuffle(rng);
            (label, members)
        })
        .collect()
}

/// Sorts by class, shuffles within class, then deals round-robin. The dealing
/// position carries over from one class to the next so fold totals stay
/// balanced as well as per-class counts.
pub fn stratified_kfold(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldAssignment> {
    let labels = corpus.labels()?;
    if k < 2 {
        return Err(Error::Split(format!("k must be at least 2, got {k}")));
    }
    let counts = corpus.class_counts();
    let smallest = Label::ALL
        .iter()
        .map(|l| counts.get(l).copied().unwrap_or(0))
        .min()
        .unwrap_or(0);
    if k > smallest {
        return Err(Error::Split(format!(
            "k = {k} exceeds the smallest class size {smallest}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for (_, members) in shuffled_by_class(&labels, &mut rng) {
        for idx in members {
            folds[idx] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment {
        k,
        ids: corpus.documents.iter().map(|d| d.id.clone()).collect(),
        folds,
    })
}

/// Index partition of a corpus produced by [`holdout_split`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Holdout {
    pub train: Vec<usize>,
    pub tune: Option<Vec<usize>>,
    pub test: Vec<usize>,
}

/// Per-class quotas that sum to `round(total * fraction)`, largest remainder
/// first (accepted wins ties).
fn class_quotas(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let target = (total as f64 * fraction).round() as usize;
    let exact: Vec<f64> = sizes.iter().map(|&n| n as f64 * fraction).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut assigned: usize = quotas.iter().sum();
    for &c in order.iter().cycle().take(sizes.len() * 2) {
        if assigned >= target {
            break;
        }
        if quotas[c] < sizes[c] {
            quotas[c] += 1;
            assigned += 1;
        }
    }
    quotas
}

fn stratified_take(
    groups: &mut [(Label, Vec<usize>)],
    fraction: f64,
) -> Vec<usize> {
    let sizes: Vec<usize> = groups.iter().map(|(_, m)| m.len()).collect();
    let quotas = class_quotas(&sizes, fraction);
    let mut taken = Vec::new();
    for ((_, members), quota) in groups.iter_mut().zip(quotas) {
        taken.extend(members.drain(..quota));
    }
    taken.sort_unstable();
    taken
}

/// Stratified holdout. Without `tune_fraction` returns (train, test); with it,
/// the non-training remainder is split again into (tune, test).
pub fn holdout_split(
    corpus: &Corpus,
    train_fraction: f64,
    seed: u64,
    tune_fraction: Option<f64>,
) -> Result<Holdout> {
    let labels = corpus.labels()?;
    let valid = |f: f64| f.is_finite() && f > 0.0 && f < 1.0;
    if !valid(train_fraction) {
        return Err(Error::Split(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    if let Some(t) = tune_fraction {
        if !valid(t) {
            return Err(Error::Split(format!("tune fraction {t} outside (0, 1)")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups = shuffled_by_class(&labels, &mut rng);
    let train = stratified_take(&mut groups, train_fraction);
    let remaining: usize = groups.iter().map(|(_, m)| m.len()).sum();
    if train.is_empty() || remaining == 0 {
        return Err(Error::Split(format!(
            "train fraction {train_fraction} leaves an empty part for {} documents",
            labels.len()
        )));
    }
    let tune = match tune_fraction {
        None => None,
        Some(t) => {
            let tune = stratified_take(&mut groups, t);
            let left: usize = groups.iter().map(|(_, m)| m.len()).sum();
            if tune.is_empty() || left == 0 {
                return Err(Error::Split(format!(
                    "tune fraction {t} leaves an empty part for {remaining} documents"
                )));
            }
            Some(tune)
        }
    };
    let mut test: Vec<usize> = groups.into_iter().flat_map(|(_, m)| m).collect();
    test.sort_unstable();
    Ok(Holdout { train, tune, test })
}

/// Term statistics of the concatenated accepted essays, plus document
/// frequencies over every non-excluded document for inverse weighting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceCorpus {
    pub term_counts: BTreeMap<String, u64>,
    pub doc_freq: BTreeMap<String, u64>,
    pub n_docs: u64,
    pub excluded: BTreeSet<String>,
    pub members: Vec<String>,
}

impl ReferenceCorpus {
    pub fn total_terms(&self) -> u64 {
        self.term_counts.values().sum()
    }
}

/// Lowercased word tokens of a text, in order.
pub fn terms(text: &str) -> Result<Vec<String>> {
    let doc = tokenize(text)?;
    Ok(doc.words().map(|t| t.text.to_lowercase()).collect())
}

pub fn build_reference(corpus: &Corpus, exclude_ids: &BTreeSet<String>) -> Result<ReferenceCorpus> {
    corpus.ensure_labeled()?;
    let mut tokenized = Vec::with_capacity(corpus.len());
    for doc in corpus.documents.iter().filter(|d| !exclude_ids.contains(&d.id)) {
        tokenized.push((doc, terms(&doc.text)?));
    }
    reference_from_terms(
        tokenized
            .iter()
            .map(|(d, t)| (d.id.as_str(), d.label.expect("labels checked"), t.as_slice())),
        exclude_ids,
    )
}

/// [`build_reference`] over already tokenized documents. Documents whose id
/// is in `exclude_ids` are skipped.
pub fn reference_from_terms<'a>(
    docs: impl IntoIterator<Item = (&'a str, Label, &'a [String])>,
    exclude_ids: &BTreeSet<String>,
) -> Result<ReferenceCorpus> {
    let mut term_counts = BTreeMap::new();
    let mut doc_freq = BTreeMap::new();
    let mut members = Vec::new();
    let mut n_docs = 0;
    for (id, label, words) in docs.into_iter().filter(|(id, _, _)| !exclude_ids.contains(*id)) {
        n_docs += 1;
        let distinct: BTreeSet<&String> = words.iter().collect();
        for term in distinct {
            *doc_freq.entry(term.clone()).or_insert(0) += 1;
        }
        if label == Label::Accepted {
            members.push(id.to_string());
            for term in words {
                *term_counts.entry(term.clone()).or_insert(0) += 1;
            }
        }
    }
    if members.is_empty() {
        return Err(Error::Split(
            "no accepted documents remain for the reference corpus".into(),
        ));
    }
    Ok(ReferenceCorpus {
        term_counts,
        doc_freq,
        n_docs,
        excluded: exclude_ids.clone(),
        members,
    })
}

impl ReferenceCorpus {
    /// The reference with one of its own documents removed, equal to
    /// rebuilding it with `id` added to the exclusions.
    pub fn without(&self, id: &str, label: Label, words: &[String]) -> Result<ReferenceCorpus> {
        let mut out = self.clone();
        let dec = |map: &mut BTreeMap<String, u64>, term: &String, by: u64| -> Result<()> {
            let count = map
                .get_mut(term)
                .filter(|c| **c >= by)
                .ok_or_else(|| Error::Split(format!("document {id:?} is not part of this reference")))?;
            *count -= by;
            if *count == 0 {
                map.remove(term);
            }
            Ok(())
        };
        let mut tf: BTreeMap<&String, u64> = BTreeMap::new();
        for w in words {
            *tf.entry(w).or_insert(0) += 1;
        }
        for (term, count) in &tf {
            dec(&mut out.doc_freq, term, 1)?;
            if label == Label::Accepted {
                dec(&mut out.term_counts, term, *count)?;
            }
        }
        out.n_docs = out
            .n_docs
            .checked_sub(1)
            .ok_or_else(|| Error::Split("reference has no documents".into()))?;
        if label == Label::Accepted {
            let pos = out
                .members
                .iter()
                .position(|m| m == id)
                .ok_or_else(|| Error::Split(format!("document {id:?} is not a reference member")))?;
            out.members.remove(pos);
            if out.members.is_empty() {
                return Err(Error::Split(
                    "no accepted documents remain for the reference corpus".into(),
                ));
            }
        }
        out.excluded.insert(id.to_string());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(n_acc: usize, n_rej: usize) -> Corpus {
        let mut docs = Vec::new();
        for i in 0..n_acc {
            docs.push(Document::new(format!("a{i}"), format!("accepted essay {i}"), Some(Label::Accepted)));
        }
        for i in 0..n_rej {
            docs.push(Document::new(format!("r{i}"), format!("rejected essay {i}"), Some(Label::Rejected)));
        }
        Corpus::new(docs, "test").unwrap()
    }

    #[test]
    fn parses_two_records() {
        let input = r#"{"id":"s1","text":"One essay.","label":"accepted"}
{"id":"s2","text":"Another essay.","label":"rejected"}
"#;
        let corpus = parse_corpus(input, "inline").unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.documents()[1].label, Some(Label::Rejected));
    }

    #[test]
    fn duplicate_id_is_named() {
        let input = r#"{"id":"s1","text":"One.","label":"accepted"}
{"id":"s1","text":"Two.","label":"rejected"}"#;
        let err = parse_corpus(input, "inline").unwrap_err();
        assert!(matches!(err, Error::DuplicateId(ref id) if id == "s1"));
        assert!(err.to_string().contains("s1"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = "{\"id\":\"s1\",\"text\":\"One.\"}\n\nnot json\n";
        match parse_corpus(input, "inline").unwrap_err() {
            Error::MalformedRecord { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_text_and_unknown_label_rejected() {
        assert!(matches!(
            parse_corpus(r#"{"id":"x","text":"   "}"#, "").unwrap_err(),
            Error::EmptyText(_)
        ));
        assert!(matches!(
            parse_corpus(r#"{"id":"x","text":"t","label":"maybe"}"#, "").unwrap_err(),
            Error::MalformedRecord { line: 1, .. }
        ));
    }

    #[test]
    fn unlabeled_allowed_for_prediction_but_not_folds() {
        let corpus = parse_corpus(r#"{"id":"x","text":"t"}"#, "").unwrap();
        assert_eq!(corpus.len(), 1);
        assert!(matches!(stratified_kfold(&corpus, 2, 0), Err(Error::Unlabeled(_))));
    }

    #[test]
    fn fifty_record_fixture_class_counts() {
        let corpus = labeled(25, 25);
        let reparsed = parse_corpus(&corpus.to_jsonl(), "roundtrip").unwrap();
        let counts = reparsed.class_counts();
        assert_eq!(counts[&Label::Accepted], 25);
        assert_eq!(counts[&Label::Rejected], 25);
    }

    #[test]
    fn ten_folds_of_fifty() {
        let corpus = labeled(25, 25);
        let folds = stratified_kfold(&corpus, 10, 3).unwrap();
        let labels = corpus.labels().unwrap();
        for f in 0..10 {
            let test = folds.test_indices(f);
            assert_eq!(test.len(), 5);
            let acc = test.iter().filter(|&&i| labels[i] == Label::Accepted).count();
            assert!(acc == 2 || acc == 3, "fold {f} has {acc} accepted");
        }
        assert_eq!(folds, stratified_kfold(&corpus, 10, 3).unwrap());
    }

    #[test]
    fn two_folds_of_fifty() {
        let corpus = labeled(25, 25);
        let folds = stratified_kfold(&corpus, 2, 11).unwrap();
        let labels = corpus.labels().unwrap();
        let mut per_fold = Vec::new();
        for f in 0..2 {
            let test = folds.test_indices(f);
            assert_eq!(test.len(), 25);
            let acc = test.iter().filter(|&&i| labels[i] == Label::Accepted).count();
            per_fold.push((acc, 25 - acc));
        }
        per_fold.sort();
        assert_eq!(per_fold, vec![(12, 13), (13, 12)]);
    }

    #[test]
    fn k_too_large() {
        let corpus = labeled(3, 10);
        assert!(matches!(stratified_kfold(&corpus, 4, 0), Err(Error::Split(_))));
        assert!(matches!(stratified_kfold(&corpus, 1, 0), Err(Error::Split(_))));
    }

    #[test]
    fn holdout_sizes() {
        let corpus = labeled(25, 25);
        let h = holdout_split(&corpus, 0.5, 1, Some(0.5)).unwrap();
        assert_eq!(h.train.len(), 25);
        let tune = h.tune.as_ref().unwrap().len();
        assert!((12..=13).contains(&tune));
        assert!((12..=13).contains(&h.test.len()));
        assert_eq!(h.train.len() + tune + h.test.len(), 50);

        let h = holdout_split(&corpus, 0.5, 1, None).unwrap();
        assert_eq!((h.train.len(), h.test.len()), (25, 25));
        let labels = corpus.labels().unwrap();
        let acc = h.train.iter().filter(|&&i| labels[i] == Label::Accepted).count();
        assert!(acc == 12 || acc == 13);
    }

    #[test]
    fn degenerate_holdout() {
        let corpus = labeled(2, 2);
        assert!(holdout_split(&corpus, 0.99, 0, None).is_err());
        assert!(holdout_split(&corpus, 0.0, 0, None).is_err());
        assert!(holdout_split(&corpus, 0.5, 0, Some(1.0)).is_err());
    }

    #[test]
    fn reference_from_accepted_only() {
        let corpus = Corpus::new(
            vec![
                Document::new("A1", "alpha beta", Some(Label::Accepted)),
                Document::new("R1", "gamma delta", Some(Label::Rejected)),
            ],
            "",
        )
        .unwrap();
        let r = build_reference(&corpus, &BTreeSet::new()).unwrap();
        assert_eq!(r.members, vec!["A1"]);
        assert_eq!(r.term_counts.keys().collect::<Vec<_>>(), vec!["alpha", "beta"]);
        assert_eq!(r.n_docs, 2);
    }

    #[test]
    fn reference_exclusion() {
        let corpus = Corpus::new(
            vec![
                Document::new("A1", "unique shared", Some(Label::Accepted)),
                Document::new("A2", "shared shared other", Some(Label::Accepted)),
            ],
            "",
        )
        .unwrap();
        let exclude: BTreeSet<String> = ["A1".to_string()].into();
        let r = build_reference(&corpus, &exclude).unwrap();
        let only_a2 = build_reference(&corpus.subset(&[1]), &BTreeSet::new()).unwrap();
        assert_eq!(r.term_counts, only_a2.term_counts);
        assert!(!r.term_counts.contains_key("unique"));
        assert!(!r.doc_freq.contains_key("unique"));

        let all: BTreeSet<String> = ["A1".to_string(), "A2".to_string()].into();
        assert!(build_reference(&corpus, &all).is_err());
    }

    #[test]
    fn subtraction_matches_rebuild() {
        let corpus = Corpus::new(
            vec![
                Document::new("A1", "the cat sat on the mat", Some(Label::Accepted)),
                Document::new("A2", "a dog sat by the door", Some(Label::Accepted)),
                Document::new("R1", "the cat ran off", Some(Label::Rejected)),
            ],
            "",
        )
        .unwrap();
        let full = build_reference(&corpus, &BTreeSet::new()).unwrap();
        for doc in corpus.documents() {
            let words = terms(&doc.text).unwrap();
            let fast = full.without(&doc.id, doc.label.unwrap(), &words).unwrap();
            let slow = build_reference(&corpus, &[doc.id.clone()].into()).unwrap();
            assert_eq!(fast, slow, "{}", doc.id);
        }
        let a1 = full.without("A1", Label::Accepted, &terms("the cat sat on the mat").unwrap()).unwrap();
        assert!(a1.without("A2", Label::Accepted, &terms("a dog sat by the door").unwrap()).is_err());
    }
}
