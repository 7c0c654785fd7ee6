//! Pre-trained word vectors in the whitespace-separated text format, and the
//! features derived from them: the averaged document vector, the
//! out-of-vocabulary count and adjacent-sentence similarity statistics.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{LexicalResources, TokenizedDoc};

/// Read-only word → vector table. Vectors are stored contiguously as `f32`;
/// all arithmetic is done in `f64`.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

fn emb_err(line: usize, message: impl Into<String>) -> Error {
    Error::Embedding {
        line,
        message: message.into(),
    }
}

impl EmbeddingTable {
    /// Builds a table from in-memory rows. All rows must share one
    /// dimension and hold finite values. Later duplicates are ignored.
    pub fn from_rows<I, S>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        let mut table = EmbeddingTable {
            dimension: 0,
            index: HashMap::new(),
            data: Vec::new(),
        };
        for (i, (word, vector)) in rows.into_iter().enumerate() {
            table.push(i + 1, word.into(), &vector)?;
        }
        if table.index.is_empty() {
            return Err(emb_err(0, "no vectors"));
        }
        Ok(table)
    }

    fn push(&mut self, line: usize, word: String, vector: &[f32]) -> Result<()> {
        if vector.is_empty() {
            return Err(emb_err(line, "row has no components"));
        }
        if self.index.is_empty() && self.dimension == 0 {
            self.dimension = vector.len();
        } else if vector.len() != self.dimension {
            return Err(emb_err(
                line,
                format!("row has {} components, expected {}", vector.len(), self.dimension),
            ));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(emb_err(line, "non-finite component"));
        }
        if !self.index.contains_key(&word) {
            self.index.insert(word, self.data.len() / self.dimension);
            self.data.extend_from_slice(vector);
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vocab_size(&self) -> usize {
        self.index.len()
    }

    /// Exact lookup, then lowercase fallback.
    pub fn get(&self, word: &str) -> Option<&[f32]> {
        let row = match self.index.get(word) {
            Some(&r) => r,
            None => *self.index.get(&word.to_lowercase())?,
        };
        Some(&self.data[row * self.dimension..(row + 1) * self.dimension])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    /// Text format with a `count dim` header, rows in insertion order.
    pub fn to_text(&self) -> String {
        let mut words: Vec<(&String, usize)> = self.index.iter().map(|(w, &r)| (w, r)).collect();
        words.sort_by_key(|&(_, r)| r);
        // The header keeps a numeric first word of a 1-d table from being
        // read back as a header itself.
        let mut out = format!("{} {}\n", self.vocab_size(), self.dimension);
        for (word, row) in words {
            out.push_str(word);
            for v in &self.data[row * self.dimension..(row + 1) * self.dimension] {
                out.push(' ');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Parses `word v1 ... vD` rows with an optional leading `count dim` header.
pub fn parse_embeddings(input: &str, expected_dimension: Option<usize>) -> Result<EmbeddingTable> {
    let mut table = EmbeddingTable {
        dimension: 0,
        index: HashMap::new(),
        data: Vec::new(),
    };
    let mut header: Option<(usize, usize)> = None;
    let mut rows = 0usize;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();
        if rows == 0 && header.is_none() && table.dimension == 0 && rest.len() == 1 {
            if let (Ok(count), Ok(dim)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                if dim == 0 {
                    return Err(emb_err(line_no, "header declares dimension 0"));
                }
                header = Some((count, dim));
                table.dimension = dim;
                continue;
            }
        }
        let vector = rest
            .iter()
            .map(|s| s.parse::<f32>())
            .collect::<std::result::Result<Vec<f32>, _>>()
            .map_err(|e| emb_err(line_no, format!("bad component: {e}")))?;
        table.push(line_no, word.to_string(), &vector)?;
        rows += 1;
    }
    if rows == 0 {
        return Err(emb_err(0, "no vectors"));
    }
    if let Some((count, _)) = header {
        if count != rows {
            return Err(emb_err(0, format!("header declares {count} rows, found {rows}")));
        }
    }
    if let Some(expected) = expected_dimension {
        if expected != table.dimension {
            return Err(emb_err(
                0,
                format!("dimension {} does not match expected {expected}", table.dimension),
            ));
        }
    }
    Ok(table)
}

pub fn load_embeddings(path: impl AsRef<Path>, expected_dimension: Option<usize>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let input = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&input, expected_dimension)
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageVector {
    pub values: Vec<f64>,
    /// Set when no word token had a vector; `values` is then all zeros.
    pub degenerate: bool,
}

pub fn avg_word_vector(doc: &TokenizedDoc, table: &EmbeddingTable) -> AverageVector {
    let mut sum = vec![0.0f64; table.dimension()];
    let mut n = 0usize;
    for vector in doc.words().filter_map(|w| table.get(&w.text)) {
        for (s, &v) in sum.iter_mut().zip(vector) {
            *s += v as f64;
        }
        n += 1;
    }
    if n == 0 {
        return AverageVector {
            values: sum,
            degenerate: true,
        };
    }
    for s in &mut sum {
        *s /= n as f64;
    }
    AverageVector {
        values: sum,
        degenerate: false,
    }
}

pub fn oov_count(doc: &TokenizedDoc, table: &EmbeddingTable) -> u64 {
    doc.words().filter(|w| !table.contains(&w.text)).count() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjacentSimilarity {
    pub mean: f64,
    pub max: f64,
    pub pairs: u64,
    /// No adjacent sentence pair had content words on both sides.
    pub degenerate: bool,
    /// Some contributing vector had zero norm.
    pub zero_vector: bool,
}

/// Cosine over every cross pair of content words (alphabetic, non-stopword,
/// in vocabulary) from adjacent sentences. Mean and max are taken globally
/// over all pairs in the document; repeated words contribute once per
/// occurrence.
pub fn adjacent_sentence_similarity(
    doc: &TokenizedDoc,
    table: &EmbeddingTable,
    res: &LexicalResources,
) -> AdjacentSimilarity {
    let content: Vec<Vec<&[f32]>> = doc
        .sentences()
        .map(|s| {
            s.words()
                .filter(|w| w.text.chars().all(char::is_alphabetic))
                .filter(|w| !res.is_stopword(&w.text))
                .filter_map(|w| table.get(&w.text))
                .collect()
        })
        .collect();
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut pairs = 0u64;
    let mut zero_vector = false;
    for window in content.windows(2) {
        for a in &window[0] {
            for b in &window[1] {
                if a.iter().all(|&x| x == 0.0) || b.iter().all(|&x| x == 0.0) {
                    zero_vector = true;
                }
                let c = cosine(a, b);
                sum += c;
                max = max.max(c);
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        return AdjacentSimilarity {
            mean: 0.0,
            max: 0.0,
            pairs: 0,
            degenerate: true,
            zero_vector,
        };
    }
    AdjacentSimilarity {
        mean: sum / pairs as f64,
        max,
        pairs,
        degenerate: false,
        zero_vector,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFeatures {
    pub avg_vector: AverageVector,
    pub oov_count: u64,
    pub adjacent: Option<AdjacentSimilarity>,
}
