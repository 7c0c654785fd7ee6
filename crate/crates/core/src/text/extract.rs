//! Text-intrinsic feature extractors. Each is a pure function of the
//! tokenized document and the lexical resources.

use serde::{Deserialize, Serialize};

use super::resources::{LexicalResources, Tag};
use super::tokenize::TokenizedDoc;

const THIRD_PERSON_PRONOUNS: &[&str] = &[
    "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself", "they",
    "them", "their", "theirs", "themselves",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosRatios {
    pub noun: f64,
    pub adj: f64,
    pub adv: f64,
    pub verb: f64,
}

/// Share of word tokens tagged noun, adjective, adverb and verb.
pub fn pos_ratios(doc: &TokenizedDoc, res: &LexicalResources) -> PosRatios {
    let mut counts = [0usize; 4];
    let mut total = 0usize;
    for word in doc.words() {
        total += 1;
        match res.tag(&word.text) {
            Tag::Noun => counts[0] += 1,
            Tag::Adj => counts[1] += 1,
            Tag::Adv => counts[2] += 1,
            Tag::Verb => counts[3] += 1,
            Tag::Other => {}
        }
    }
    let ratio = |c: usize| if total == 0 { 0.0 } else { c as f64 / total as f64 };
    PosRatios {
        noun: ratio(counts[0]),
        adj: ratio(counts[1]),
        adv: ratio(counts[2]),
        verb: ratio(counts[3]),
    }
}

/// Non-overlapping connector matches within each sentence, trying the
/// longest phrase first at every position.
pub fn discourse_count(doc: &TokenizedDoc, res: &LexicalResources) -> u64 {
    let connectors = res.connectors();
    let mut count = 0;
    for sentence in doc.sentences() {
        let words: Vec<String> = sentence.words().map(|t| t.text.to_lowercase()).collect();
        let mut i = 0;
        while i < words.len() {
            let matched = connectors
                .iter()
                .find(|phrase| words[i..].starts_with(phrase))
                .map(Vec::len);
            match matched {
                Some(len) => {
                    count += 1;
                    i += len;
                }
                None => i += 1,
            }
        }
    }
    count
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group count with a silent trailing "e" removed, never below one.
pub fn syllables(word: &str) -> u32 {
    let lower: Vec<char> = word
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphabetic())
        .collect();
    let mut groups = 0u32;
    let mut prev_vowel = false;
    for &c in &lower {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = lower.len();
    if groups > 1 && n >= 2 && lower[n - 1] == 'e' && !is_vowel(lower[n - 2]) {
        // "-le" after a consonant is voiced ("table", "simple").
        let voiced_le = n >= 3 && lower[n - 2] == 'l' && !is_vowel(lower[n - 3]);
        if !voiced_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadabilityCounts {
    pub words: u64,
    pub sentences: u64,
    pub syllables: u64,
}

pub fn readability_counts(doc: &TokenizedDoc) -> ReadabilityCounts {
    ReadabilityCounts {
        words: doc.word_count() as u64,
        sentences: doc.sentence_count() as u64,
        syllables: doc.words().map(|w| syllables(&w.text) as u64).sum(),
    }
}

pub fn fres_from_counts(c: ReadabilityCounts) -> f64 {
    let words = c.words as f64;
    206.835 - 1.015 * (words / c.sentences as f64) - 84.6 * (c.syllables as f64 / words)
}

/// Flesch reading ease.
pub fn fres(doc: &TokenizedDoc) -> f64 {
    fres_from_counts(readability_counts(doc))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthFeatures {
    pub words_per_sentence: f64,
    pub words_per_paragraph: f64,
    pub word_length: f64,
}

pub fn length_features(doc: &TokenizedDoc) -> LengthFeatures {
    let words = doc.word_count() as f64;
    let chars: usize = doc.words().map(|w| w.text.chars().count()).sum();
    LengthFeatures {
        words_per_sentence: words / doc.sentence_count() as f64,
        words_per_paragraph: words / doc.paragraphs.len() as f64,
        word_length: chars as f64 / words,
    }
}

/// Sum of token distances over heuristic coreference links. Positions count
/// every token, punctuation included. A noun links back to its previous
/// identical occurrence; a third-person pronoun links to the nearest
/// preceding noun.
pub fn coref_distance(doc: &TokenizedDoc, res: &LexicalResources) -> u64 {
    let mut last_seen: std::collections::HashMap<String, usize> = Default::default();
    let mut last_noun: Option<usize> = None;
    let mut total = 0u64;
    for (idx, token) in doc.tokens().enumerate() {
        if !token.is_word {
            continue;
        }
        let lower = token.text.to_lowercase();
        if THIRD_PERSON_PRONOUNS.contains(&lower.as_str()) {
            if let Some(antecedent) = last_noun {
                total += (idx - antecedent) as u64;
            }
            continue;
        }
        if res.tag(&lower) == Tag::Noun {
            if let Some(prev) = last_seen.insert(lower, idx) {
                total += (idx - prev) as u64;
            }
            last_noun = Some(idx);
        }
    }
    total
}

/// Mean sense count over word tokens present in the sense table; 0 when none
/// is present.
pub fn polysemy_degree(doc: &TokenizedDoc, res: &LexicalResources) -> f64 {
    let (sum, n) = doc
        .words()
        .filter_map(|w| res.senses(&w.text))
        .fold((0u64, 0u64), |(s, n), c| (s + c as u64, n + 1));
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// Word tokens missing from the dictionary. Tokens with digits are skipped.
pub fn spell_errors(doc: &TokenizedDoc, res: &LexicalResources) -> u64 {
    doc.words()
        .filter(|w| !w.text.chars().any(|c| c.is_numeric()))
        .filter(|w| !res.in_dictionary(&w.text))
        .count() as u64
}

/// Capitalised word tokens that do not open a sentence. The pronoun "I" is
/// ignored.
pub fn ne_count(doc: &TokenizedDoc) -> u64 {
    doc.sentences()
        .flat_map(|s| s.words().skip(1))
        .filter(|w| w.text != "I" && w.text.chars().next().is_some_and(char::is_uppercase))
        .count() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextualFeatures {
    pub noun_ratio: f64,
    pub adj_ratio: f64,
    pub adv_ratio: f64,
    pub verb_ratio: f64,
    pub discourse_count: u64,
    pub fres: f64,
    pub avg_words_per_sentence: f64,
    pub avg_words_per_paragraph: f64,
    pub avg_word_length: f64,
    pub coref_distance: u64,
    pub polysemy_degree: f64,
    pub spell_errors: u64,
    pub ne_count: Option<u64>,
}

impl TextualFeatures {
    pub fn compute(doc: &TokenizedDoc, res: &LexicalResources, with_ne: bool) -> Self {
        let pos = pos_ratios(doc, res);
        let len = length_features(doc);
        TextualFeatures {
            noun_ratio: pos.noun,
            adj_ratio: pos.adj,
            adv_ratio: pos.adv,
            verb_ratio: pos.verb,
            discourse_count: discourse_count(doc, res),
            fres: fres(doc),
            avg_words_per_sentence: len.words_per_sentence,
            avg_words_per_paragraph: len.words_per_paragraph,
            avg_word_length: len.word_length,
            coref_distance: coref_distance(doc, res),
            polysemy_degree: polysemy_degree(doc, res),
            spell_errors: spell_errors(doc, res),
            ne_count: with_ne.then(|| ne_count(doc)),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{HashMap, HashSet};

    use super::*;
    use crate::text::tokenize;

    fn res() -> &'static LexicalResources {
        LexicalResources::bundled()
    }

    fn doc(text: &str) -> TokenizedDoc {
        tokenize(text).unwrap()
    }

    #[test]
    fn pos_ratios_bundled_tagger() {
        // The bundled lexicon's most frequent tag for "bark" is noun.
        let r = pos_ratios(&doc("Dogs bark loudly."), res());
        assert_eq!((r.noun, r.adj, r.adv, r.verb), (2.0 / 3.0, 0.0, 1.0 / 3.0, 0.0));
        let r = pos_ratios(&doc("the the the"), res());
        assert_eq!((r.noun, r.adj, r.adv, r.verb), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn pos_ratios_with_verb_reading() {
        let tags: HashMap<String, Tag> = [
            ("dogs", Tag::Noun),
            ("bark", Tag::Verb),
            ("loudly", Tag::Adv),
        ]
        .into_iter()
        .map(|(w, t)| (w.to_string(), t))
        .collect();
        let res = res().clone().with_tags(tags);
        let r = pos_ratios(&doc("Dogs bark loudly."), &res);
        assert_eq!((r.noun, r.adj, r.adv, r.verb), (1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0));
    }

    #[test]
    fn discourse_examples() {
        assert_eq!(discourse_count(&doc("However, I tried. Moreover, I won."), res()), 2);
        assert_eq!(discourse_count(&doc("Blue sky over green grass."), res()), 0);
        // One match for the whole phrase even though "other" alone is not
        // a connector and "on" is not either.
        let n = discourse_count(&doc("On the other hand, it rained."), res());
        assert_eq!(n, 1);
        let only = res().clone().with_connectors(crate::text::resources::parse_connectors(
            "on the other hand\nhand\nthe other\n",
        ));
        assert_eq!(discourse_count(&doc("On the other hand, it rained."), &only), 1);
        assert_eq!(discourse_count(&doc("the other hand"), &only), 2);
    }

    #[test]
    fn syllable_heuristic() {
        assert_eq!(syllables("cat"), 1);
        assert_eq!(syllables("the"), 1);
        assert_eq!(syllables("make"), 1);
        assert_eq!(syllables("table"), 2);
        assert_eq!(syllables("education"), 4);
        assert_eq!(syllables("rhythm"), 1);
        assert_eq!(syllables("2019"), 1);
        assert_eq!(syllables("queue"), 1);
    }

    #[test]
    fn fres_single_word() {
        let v = fres(&doc("cat"));
        assert!((v - 121.22).abs() < 1e-9, "{v}");
    }

    #[test]
    fn fres_cat_sat_on_mat() {
        // Hand count: six one-syllable words in one sentence.
        let expected = 206.835 - 1.015 * 6.0 - 84.6 * 1.0;
        let v = fres(&doc("The cat sat on the mat."));
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 116.145).abs() < 1e-9);
    }

    #[test]
    fn fres_drops_with_longer_words() {
        let short = fres(&doc("The cat sat on the mat."));
        let long = fres(&doc("The education sat on the mat."));
        assert!(long < short);
    }

    #[test]
    fn length_examples() {
        let l = length_features(&doc("Hi there. Go now."));
        assert_eq!((l.words_per_sentence, l.words_per_paragraph, l.word_length), (2.0, 4.0, 3.0));
        let l = length_features(&doc("Hello"));
        assert_eq!((l.words_per_sentence, l.words_per_paragraph, l.word_length), (1.0, 1.0, 5.0));
        let l = length_features(&doc("One two three.\n\nFour five six."));
        assert_eq!(l.words_per_paragraph, 3.0);
    }

    #[test]
    fn coref_examples() {
        // John(0) arrived(1) .(2) He(3) sat(4) .(5)
        assert_eq!(coref_distance(&doc("John arrived. He sat."), res()), 3);
        assert_eq!(coref_distance(&doc("Quickly run away."), res()), 0);
        let once = coref_distance(&doc("The student wrote. She slept."), res());
        let twice = coref_distance(&doc("The student wrote. She slept. The student wrote. She slept."), res());
        assert!(once > 0);
        assert!(twice > once);
    }

    #[test]
    fn polysemy_examples() {
        let senses: HashMap<String, u32> =
            [("bank".to_string(), 10), ("run".to_string(), 30)].into();
        let r = res().clone().with_senses(senses);
        assert_eq!(polysemy_degree(&doc("bank run"), &r), 20.0);
        assert_eq!(polysemy_degree(&doc("qzxv blorp"), &r), 0.0);
        let r = res().clone().with_senses([("a".to_string(), 1)].into());
        assert_eq!(polysemy_degree(&doc("a a a"), &r), 1.0);
    }

    #[test]
    fn spell_examples() {
        assert_eq!(spell_errors(&doc("Ths is a tst"), res()), 2);
        assert_eq!(spell_errors(&doc("This is a test"), res()), 0);
        assert_eq!(spell_errors(&doc("tst a is Ths"), res()), 2);
        assert_eq!(spell_errors(&doc("In 2019 I wrote v2"), res()), 0);
        let tiny = res().clone().with_dictionary(HashSet::from(["ok".to_string()]));
        assert_eq!(spell_errors(&doc("OK ok nope"), &tiny), 1);
    }

    #[test]
    fn ne_examples() {
        assert_eq!(ne_count(&doc("I met Mary in Paris.")), 2);
        assert_eq!(ne_count(&doc("all lowercase words here.")), 0);
        assert_eq!(ne_count(&doc("First word. Second word. Third.")), 0);
    }

    #[test]
    fn compute_respects_ne_toggle() {
        let d = doc("I met Mary in Paris.");
        assert_eq!(TextualFeatures::compute(&d, res(), false).ne_count, None);
        assert_eq!(TextualFeatures::compute(&d, res(), true).ne_count, Some(2));
    }
}
