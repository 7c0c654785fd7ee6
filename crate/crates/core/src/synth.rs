//! Synthetic labeled corpus and word-vector table for end-to-end tests and
//! demos. Accepted essays are fluent, section-ordered selections from a
//! fixed sentence pool. Rejected essays draw from the same pool but have
//! their sentence order scrambled, a share of words misspelled, and a share
//! replaced by out-of-vocabulary noise.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{terms, Corpus, Document, Label};
use crate::embedding::EmbeddingTable;
use crate::error::Result;
use crate::text::LexicalResources;

/// Sentence pool by essay section; essays visit sections in this order.
pub const SENTENCE_POOL: [&[&str]; 6] = [
    &[
        "I am applying to the doctoral program in computer science because I want to study how machines understand language.",
        "My interest in research began when I first wrote a program that could answer simple questions about a short story.",
        "Ever since my second year of college, I have wanted to build systems that help people find reliable information.",
        "I hope to join your graduate program to pursue research at the intersection of machine learning and linguistics.",
        "The problem of teaching computers to read has fascinated me for most of my academic life.",
        "I am writing to express my strong interest in the master's program in data science at your university.",
        "Language is the most natural interface between people and computers, and I want to make that interface work better.",
        "My goal in graduate school is to develop methods that make automated text analysis accurate and fair.",
    ],
    &[
        "I completed my undergraduate degree in computer engineering with a focus on algorithms and statistics.",
        "During my studies, I took advanced courses in probability, linear algebra, and natural language processing.",
        "My coursework gave me a solid foundation in programming, databases, and the theory of computation.",
        "I graduated near the top of my class and received an award for my final year thesis on document retrieval.",
        "In addition to my major, I completed a minor in mathematics, which taught me to reason carefully about proofs.",
        "I served as a teaching assistant for the introductory programming course for two semesters.",
        "My favorite class was a seminar on computational linguistics, where we read recent papers every week.",
        "Throughout college, I balanced a demanding course load with part-time work in the university library.",
    ],
    &[
        "Under the guidance of my advisor, I built a classifier that detected the sentiment of product reviews.",
        "Moreover, I designed an evaluation study that compared several feature sets on a corpus of news articles.",
        "In my research project, I collected a dataset of student essays and annotated them for argument structure.",
        "However, my first experiments failed, and I learned to question my assumptions and examine the data closely.",
        "I presented the results of this work at a regional student conference and received valuable feedback.",
        "As a result of this project, I co-authored a short paper on measuring the readability of technical documents.",
        "For example, I showed that simple word embedding features can rival hand-crafted features on small datasets.",
        "This experience taught me that careful experimental design matters as much as clever algorithms.",
    ],
    &[
        "Last summer, I interned at a software company where I improved the search ranking of an internal tool.",
        "I am comfortable working with large codebases, version control, and automated testing.",
        "In addition, I led a team of four students that built a mobile application for campus events.",
        "I have used cross validation, regularization, and error analysis in every project I have worked on.",
        "Working with engineers and designers taught me to communicate technical ideas clearly.",
        "I also volunteered to teach basic programming to high school students on weekends.",
        "These projects strengthened my skills in writing clean code and documenting my work.",
        "Furthermore, I learned to manage deadlines while maintaining the quality of my analysis.",
    ],
    &[
        "In graduate school, I plan to study models that explain their decisions in terms people can understand.",
        "After completing my degree, I would like to pursue a career in research, either in academia or industry.",
        "My long-term goal is to build educational tools that give students useful feedback on their writing.",
        "I want to deepen my understanding of statistical learning theory and apply it to real language data.",
        "Therefore, I am eager to work on problems where careful evaluation can make a real difference.",
        "I hope to contribute to research that makes language technology available to speakers of many languages.",
        "Ultimately, I would like to lead a research group that studies reliable and transparent machine learning.",
        "Above all, I want my work to help people communicate and learn more effectively.",
    ],
    &[
        "Your department is an ideal place for me because of its strong faculty in natural language processing.",
        "I am particularly excited about the work of your faculty on discourse analysis and text generation.",
        "The collaborative culture of your lab matches the way I like to work and learn.",
        "In conclusion, I believe that my background and motivation prepare me well for graduate study.",
        "I am confident that I can contribute to your research community and grow as a scientist.",
        "Thank you for considering my application, and I look forward to the opportunity to join your program.",
        "Finally, the resources of your university would allow me to pursue ambitious and meaningful projects.",
        "I am ready to commit myself fully to the challenges of graduate research at your institution.",
    ],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub accepted: usize,
    pub rejected: usize,
    /// Sentences drawn from each pool section per essay.
    pub sentences_per_section: usize,
    /// Share of word tokens misspelled in rejected essays.
    pub misspelling_rate: f64,
    /// Share of word tokens replaced by out-of-vocabulary noise in rejected essays.
    pub oov_rate: f64,
    pub embedding_dimension: usize,
    /// Also shuffle word order inside each sentence of rejected essays.
    pub scramble_words: bool,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            accepted: 25,
            rejected: 25,
            sentences_per_section: 2,
            misspelling_rate: 0.03,
            oov_rate: 0.10,
            embedding_dimension: 300,
            scramble_words: false,
            seed: 17,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub corpus: Corpus,
    /// Vectors for every pool word; misspellings and noise are absent.
    pub embeddings: EmbeddingTable,
}

/// Lowercased word tokens of the pool, as the tokenizer sees them.
fn pool_words() -> BTreeSet<String> {
    SENTENCE_POOL
        .iter()
        .flat_map(|s| s.iter())
        .flat_map(|s| terms(s).expect("pool sentences are nonempty"))
        .collect()
}

/// Deterministic vectors for the pool vocabulary: a shared component plus
/// independent per-word noise, drawn in sorted word order.
pub fn synthetic_embeddings(dimension: usize, seed: u64) -> Result<EmbeddingTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ee_d0f7_ab1e);
    let common: Vec<f32> = (0..dimension).map(|_| rng.random_range(-0.3..0.3)).collect();
    let rows: Vec<(String, Vec<f32>)> = pool_words()
        .into_iter()
        .map(|w| {
            let v = common.iter().map(|c| c + rng.random_range(-0.5f32..0.5)).collect();
            (w, v)
        })
        .collect();
    EmbeddingTable::from_rows(rows)
}

fn pick_sentences(rng: &mut ChaCha8Rng, per_section: usize) -> Vec<Vec<String>> {
    SENTENCE_POOL
        .iter()
        .map(|section| {
            let mut idx: Vec<usize> = (0..section.len()).collect();
            idx.shuffle(rng);
            let mut chosen: Vec<usize> = idx.into_iter().take(per_section).collect();
            chosen.sort_unstable();
            chosen.into_iter().map(|i| section[i].to_string()).collect()
        })
        .collect()
}

fn paragraphs(sentences: &[String], per_paragraph: usize) -> String {
    sentences
        .chunks(per_paragraph.max(1))
        .map(|c| c.join(" "))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn is_known(word: &str, res: &LexicalResources, table: &EmbeddingTable) -> bool {
    res.in_dictionary(word) || table.contains(word)
}

/// A corrupted spelling of `word` that is neither a dictionary word nor in
/// the table.
fn misspell(word: &str, rng: &mut ChaCha8Rng, res: &LexicalResources, table: &EmbeddingTable) -> String {
    let chars: Vec<char> = word.chars().collect();
    for _ in 0..32 {
        let mut c = chars.clone();
        match rng.random_range(0..4) {
            0 if c.len() >= 4 => {
                let i = rng.random_range(1..c.len() - 2);
                c.swap(i, i + 1);
            }
            1 if c.len() >= 3 => {
                c.remove(rng.random_range(1..c.len()));
            }
            2 => {
                let i = rng.random_range(0..c.len());
                c.insert(i, c[i]);
            }
            _ => {
                let i = rng.random_range(0..c.len());
                c[i] = *b"aeiouy".choose(rng).expect("nonempty") as char;
            }
        }
        let out: String = c.into_iter().collect();
        if out.to_lowercase() != word.to_lowercase() && !is_known(&out, res, table) {
            return out;
        }
    }
    format!("{word}x{}", "q".repeat(rng.random_range(1..3)))
}

fn noise_word(rng: &mut ChaCha8Rng, res: &LexicalResources, table: &EmbeddingTable) -> String {
    const CONS: &[u8] = b"bcdfghjklmnpqrstvwxz";
    const VOW: &[u8] = b"aeiou";
    loop {
        let syllables = rng.random_range(2..4);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(*CONS.choose(rng).expect("nonempty") as char);
            w.push(*VOW.choose(rng).expect("nonempty") as char);
            if rng.random_bool(0.4) {
                w.push(*CONS.choose(rng).expect("nonempty") as char);
            }
        }
        if !is_known(&w, res, table) {
            return w;
        }
    }
}

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Word order within the sentence is shuffled; punctuation inside the
/// sentence is dropped and a period closes it.
fn scramble_sentence(
    sentence: &str,
    rng: &mut ChaCha8Rng,
    opts: &SynthOptions,
    res: &LexicalResources,
    table: &EmbeddingTable,
) -> String {
    let mut words: Vec<String> = sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| if w == "I" { w.to_string() } else { w.to_lowercase() })
        .collect();
    if opts.scramble_words {
        words.shuffle(rng);
    }
    for w in words.iter_mut() {
        let u: f64 = rng.random();
        if u < opts.oov_rate {
            *w = noise_word(rng, res, table);
        } else if u < opts.oov_rate + opts.misspelling_rate {
            *w = misspell(w, rng, res, table);
        }
    }
    if let Some(first) = words.first_mut() {
        *first = capitalize(first);
    }
    format!("{}.", words.join(" "))
}

/// Generates the corpus; ids are `acc-NN` and `rej-NN`.
pub fn synthetic_corpus(opts: &SynthOptions) -> Result<SyntheticData> {
    let res = LexicalResources::bundled();
    let embeddings = synthetic_embeddings(opts.embedding_dimension, opts.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let per_paragraph = 2 * opts.sentences_per_section;
    let mut docs = Vec::with_capacity(opts.accepted + opts.rejected);
    for i in 0..opts.accepted {
        let sentences: Vec<String> = pick_sentences(&mut rng, opts.sentences_per_section)
            .into_iter()
            .flatten()
            .collect();
        docs.push(Document::new(
            format!("acc-{i:02}"),
            paragraphs(&sentences, per_paragraph),
            Some(Label::Accepted),
        ));
    }
    for i in 0..opts.rejected {
        let mut sentences: Vec<String> = pick_sentences(&mut rng, opts.sentences_per_section)
            .into_iter()
            .flatten()
            .collect();
        sentences.shuffle(&mut rng);
        let scrambled: Vec<String> = sentences
            .iter()
            .map(|s| scramble_sentence(s, &mut rng, opts, res, &embeddings))
            .collect();
        docs.push(Document::new(
            format!("rej-{i:02}"),
            paragraphs(&scrambled, per_paragraph),
            Some(Label::Rejected),
        ));
    }
    let corpus = Corpus::new(
        docs,
        format!("synthetic corpus, seed {}, {}+{} essays", opts.seed, opts.accepted, opts.rejected),
    )?;
    Ok(SyntheticData { corpus, embeddings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    #[test]
    fn shape_and_determinism() {
        let a = synthetic_corpus(&SynthOptions::default()).unwrap();
        let b = synthetic_corpus(&SynthOptions::default()).unwrap();
        assert_eq!(a.corpus.to_jsonl(), b.corpus.to_jsonl());
        let counts = a.corpus.class_counts();
        assert_eq!(counts[&Label::Accepted], 25);
        assert_eq!(counts[&Label::Rejected], 25);
        assert_eq!(a.embeddings.dimension(), 300);
    }

    #[test]
    fn noise_rates_are_roughly_as_configured() {
        let data = synthetic_corpus(&SynthOptions::default()).unwrap();
        let res = LexicalResources::bundled();
        let (mut words, mut oov, mut unknown) = (0usize, 0usize, 0usize);
        for d in data.corpus.documents().iter().filter(|d| d.label == Some(Label::Rejected)) {
            for w in tokenize(&d.text).unwrap().words() {
                words += 1;
                if !data.embeddings.contains(&w.text) {
                    oov += 1;
                }
                if !res.in_dictionary(&w.text) {
                    unknown += 1;
                }
            }
        }
        let oov_share = oov as f64 / words as f64;
        assert!((0.10..0.16).contains(&oov_share), "{oov_share}");
        assert!(unknown as f64 / words as f64 >= 0.10);
    }

    #[test]
    fn accepted_essays_are_fully_in_vocabulary() {
        let data = synthetic_corpus(&SynthOptions::default()).unwrap();
        for d in data.corpus.documents().iter().filter(|d| d.label == Some(Label::Accepted)) {
            for w in tokenize(&d.text).unwrap().words() {
                assert!(data.embeddings.contains(&w.text), "{}", w.text);
            }
        }
    }
}
