use std::collections::BTreeMap;

use crate::corpus::ReferenceCorpus;

use super::config::Weighting;

/// Smoothed inverse document frequency: ln((1 + n) / (1 + df)) + 1.
pub fn smoothed_idf(n_docs: u64, df: u64) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

fn term_weights<'a>(
    counts: impl Iterator<Item = (&'a String, u64)>,
    reference: &ReferenceCorpus,
    weighting: Weighting,
) -> BTreeMap<&'a str, f64> {
    counts
        .map(|(term, count)| {
            let w = match weighting {
                Weighting::Tf => count as f64,
                Weighting::TfIdf => {
                    let df = reference.doc_freq.get(term).copied().unwrap_or(0);
                    count as f64 * smoothed_idf(reference.n_docs, df)
                }
            };
            (term.as_str(), w)
        })
        .collect()
}

/// Cosine between a document's term vector and the reference's, both
/// weighted with the reference's document frequencies. Lies in [0, 1];
/// 0 when the vocabularies do not overlap.
pub fn cosine_to_reference(terms: &[String], reference: &ReferenceCorpus, weighting: Weighting) -> f64 {
    let mut counts: BTreeMap<&String, u64> = BTreeMap::new();
    for t in terms {
        *counts.entry(t).or_insert(0) += 1;
    }
    let doc = term_weights(counts.into_iter(), reference, weighting);
    let refw = term_weights(reference.term_counts.iter().map(|(t, &c)| (t, c)), reference, weighting);
    let dot: f64 = doc
        .iter()
        .filter_map(|(t, w)| refw.get(t).map(|r| w * r))
        .sum();
    let norm = |m: &BTreeMap<&str, f64>| m.values().map(|w| w * w).sum::<f64>().sqrt();
    let (nd, nr) = (norm(&doc), norm(&refw));
    if dot == 0.0 || nd == 0.0 || nr == 0.0 {
        return 0.0;
    }
    (dot / (nd * nr)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::corpus::{build_reference, terms, Corpus, Document, Label};

    fn corpus(docs: &[(&str, &str, Label)]) -> Corpus {
        Corpus::new(
            docs.iter()
                .map(|(id, text, l)| Document::new(*id, *text, Some(*l)))
                .collect(),
            "",
        )
        .unwrap()
    }

    #[test]
    fn identical_bag_is_one() {
        let c = corpus(&[("d", "the cat sat on the mat", Label::Accepted)]);
        let r = build_reference(&c, &BTreeSet::new()).unwrap();
        let v = cosine_to_reference(&terms("the cat sat on the mat").unwrap(), &r, Weighting::TfIdf);
        assert!((v - 1.0).abs() < 1e-12);
        let v = cosine_to_reference(&terms("mat the on sat cat the").unwrap(), &r, Weighting::Tf);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_is_zero() {
        let c = corpus(&[("d", "alpha beta", Label::Accepted)]);
        let r = build_reference(&c, &BTreeSet::new()).unwrap();
        assert_eq!(cosine_to_reference(&terms("gamma delta").unwrap(), &r, Weighting::TfIdf), 0.0);
    }

    #[test]
    fn three_document_hand_computation() {
        // Reference: A1 "apple banana apple", A2 "banana cherry" (accepted),
        // R1 "cherry date" (rejected). n = 3.
        // df: apple 1, banana 2, cherry 2, date 1.
        // idf = ln(4 / (1 + df)) + 1: apple, date -> ln 2 + 1; banana, cherry -> ln(4/3) + 1.
        // Reference tf: apple 2, banana 2, cherry 1.
        // Query "banana date date": banana 1, date 2.
        let c = corpus(&[
            ("A1", "apple banana apple", Label::Accepted),
            ("A2", "banana cherry", Label::Accepted),
            ("R1", "cherry date", Label::Rejected),
        ]);
        let r = build_reference(&c, &BTreeSet::new()).unwrap();
        let hi = 2f64.ln() + 1.0;
        let lo = (4.0f64 / 3.0).ln() + 1.0;
        let ref_vec = [2.0 * hi, 2.0 * lo, 1.0 * lo];
        let q_banana = lo;
        let q_date = 2.0 * hi;
        let dot = q_banana * ref_vec[1];
        let nq = (q_banana * q_banana + q_date * q_date).sqrt();
        let nr = ref_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
        let expected = dot / (nq * nr);
        let got = cosine_to_reference(&terms("banana date date").unwrap(), &r, Weighting::TfIdf);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
}
