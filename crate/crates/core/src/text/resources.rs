//! Word lists and lexicons used by the textual extractors.
//!
//! Every file is plain UTF-8 with one entry per line; `#` starts a comment
//! line. Keys are case-folded on load so lookups are case-insensitive.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TAGS_FILE: &str = "tags.tsv";
pub const SENSES_FILE: &str = "senses.tsv";
pub const DICTIONARY_FILE: &str = "dictionary.txt";
pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const CONNECTORS_FILE: &str = "connectors.txt";

/// Coarse part-of-speech classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "noun" => Ok(Tag::Noun),
            "verb" => Ok(Tag::Verb),
            "adj" => Ok(Tag::Adj),
            "adv" => Ok(Tag::Adv),
            "other" => Ok(Tag::Other),
            _ => Err(format!("unknown tag {s:?}")),
        }
    }
}

// Checked in order; the first matching suffix wins.
const SUFFIX_RULES: &[(&str, Tag)] = &[
    ("ly", Tag::Adv),
    ("ness", Tag::Noun),
    ("tion", Tag::Noun),
    ("sion", Tag::Noun),
    ("ment", Tag::Noun),
    ("ity", Tag::Noun),
    ("ism", Tag::Noun),
    ("ship", Tag::Noun),
    ("hood", Tag::Noun),
    ("ance", Tag::Noun),
    ("ence", Tag::Noun),
    ("ous", Tag::Adj),
    ("ful", Tag::Adj),
    ("ive", Tag::Adj),
    ("able", Tag::Adj),
    ("ible", Tag::Adj),
    ("less", Tag::Adj),
    ("ical", Tag::Adj),
    ("ize", Tag::Verb),
    ("ise", Tag::Verb),
    ("ify", Tag::Verb),
    ("ing", Tag::Verb),
    ("ed", Tag::Verb),
];

fn entries<'a>(input: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn resource_err(name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Resource {
        name: name.to_string(),
        line,
        message: message.into(),
    }
}

fn split_pair<'a>(name: &str, line_no: usize, line: &'a str) -> Result<(&'a str, &'a str)> {
    let mut parts = line.split('\t');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if !k.trim().is_empty() => Ok((k.trim(), v.trim())),
        _ => Err(resource_err(name, line_no, "expected word<TAB>value")),
    }
}

pub fn parse_tag_lexicon(input: &str) -> Result<HashMap<String, Tag>> {
    let mut tags = HashMap::new();
    for (line_no, line) in entries(input) {
        let (word, tag) = split_pair(TAGS_FILE, line_no, line)?;
        let tag: Tag = tag
            .parse()
            .map_err(|m: String| resource_err(TAGS_FILE, line_no, m))?;
        tags.entry(word.to_lowercase()).or_insert(tag);
    }
    Ok(tags)
}

pub fn parse_sense_table(input: &str) -> Result<HashMap<String, u32>> {
    let mut senses = HashMap::new();
    for (line_no, line) in entries(input) {
        let (word, count) = split_pair(SENSES_FILE, line_no, line)?;
        let count: u32 = count
            .parse()
            .map_err(|_| resource_err(SENSES_FILE, line_no, format!("bad sense count {count:?}")))?;
        if count == 0 {
            return Err(resource_err(SENSES_FILE, line_no, "sense count must be at least 1"));
        }
        senses.entry(word.to_lowercase()).or_insert(count);
    }
    Ok(senses)
}

pub fn parse_word_list(input: &str) -> HashSet<String> {
    entries(input).map(|(_, w)| w.to_lowercase()).collect()
}

/// Connector phrases as lowercase word sequences, longest first.
pub fn parse_connectors(input: &str) -> Vec<Vec<String>> {
    let mut phrases: Vec<Vec<String>> = entries(input)
        .map(|(_, l)| {
            l.split(|c: char| !c.is_alphanumeric())
                .filter(|w| !w.is_empty())
                .map(str::to_lowercase)
                .collect::<Vec<_>>()
        })
        .filter(|p| !p.is_empty())
        .collect();
    phrases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    phrases.dedup();
    phrases
}

#[derive(Debug, Clone)]
pub struct LexicalResources {
    tags: HashMap<String, Tag>,
    connectors: Vec<Vec<String>>,
    senses: HashMap<String, u32>,
    dictionary: HashSet<String>,
    stopwords: HashSet<String>,
}

impl LexicalResources {
    pub fn new(
        tags: HashMap<String, Tag>,
        connectors: Vec<Vec<String>>,
        senses: HashMap<String, u32>,
        dictionary: HashSet<String>,
        stopwords: HashSet<String>,
    ) -> Self {
        LexicalResources {
            tags,
            connectors,
            senses,
            dictionary,
            stopwords,
        }
    }

    /// Resources compiled into the crate.
    pub fn bundled() -> &'static LexicalResources {
        Self::bundled_shared_ref()
    }

    /// Shared handle to the compiled-in resources.
    pub fn bundled_shared() -> Arc<LexicalResources> {
        Arc::clone(Self::bundled_shared_ref())
    }

    fn bundled_shared_ref() -> &'static Arc<LexicalResources> {
        static BUNDLED: OnceLock<Arc<LexicalResources>> = OnceLock::new();
        BUNDLED.get_or_init(|| {
            Arc::new(LexicalResources::from_sources(
                include_str!("../../resources/tags.tsv"),
                include_str!("../../resources/connectors.txt"),
                include_str!("../../resources/senses.tsv"),
                include_str!("../../resources/dictionary.txt"),
                include_str!("../../resources/stopwords.txt"),
            )
            .expect("bundled resources are well-formed"))
        })
    }

    pub fn from_sources(
        tags: &str,
        connectors: &str,
        senses: &str,
        dictionary: &str,
        stopwords: &str,
    ) -> Result<Self> {
        Ok(LexicalResources {
            tags: parse_tag_lexicon(tags)?,
            connectors: parse_connectors(connectors),
            senses: parse_sense_table(senses)?,
            dictionary: parse_word_list(dictionary),
            stopwords: parse_word_list(stopwords),
        })
    }

    /// Loads the five resource files from `dir`. Files missing from the
    /// directory fall back to the bundled copy.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::MissingResource(format!(
                "resource directory {}",
                dir.display()
            )));
        }
        let read = |name: &str| -> Result<Option<String>> {
            let path = dir.join(name);
            if !path.exists() {
                return Ok(None);
            }
            std::fs::read_to_string(&path)
                .map(Some)
                .map_err(|e| Error::io(path, e))
        };
        let mut res = LexicalResources::bundled().clone();
        if let Some(s) = read(TAGS_FILE)? {
            res.tags = parse_tag_lexicon(&s)?;
        }
        if let Some(s) = read(CONNECTORS_FILE)? {
            res.connectors = parse_connectors(&s);
        }
        if let Some(s) = read(SENSES_FILE)? {
            res.senses = parse_sense_table(&s)?;
        }
        if let Some(s) = read(DICTIONARY_FILE)? {
            res.dictionary = parse_word_list(&s);
        }
        if let Some(s) = read(STOPWORDS_FILE)? {
            res.stopwords = parse_word_list(&s);
        }
        Ok(res)
    }

    pub fn with_tags(mut self, tags: HashMap<String, Tag>) -> Self {
        self.tags = tags;
        self
    }

    pub fn with_senses(mut self, senses: HashMap<String, u32>) -> Self {
        self.senses = senses;
        self
    }

    pub fn with_dictionary(mut self, dictionary: HashSet<String>) -> Self {
        self.dictionary = dictionary;
        self
    }

    pub fn with_connectors(mut self, connectors: Vec<Vec<String>>) -> Self {
        self.connectors = connectors;
        self
    }

    /// Lexicon tag for the case-folded word, else the suffix heuristics, else
    /// `Other`.
    pub fn tag(&self, word: &str) -> Tag {
        let key = word.to_lowercase();
        if let Some(&tag) = self.tags.get(&key) {
            return tag;
        }
        suffix_tag(&key)
    }

    pub fn senses(&self, word: &str) -> Option<u32> {
        self.senses.get(&word.to_lowercase()).copied()
    }

    pub fn in_dictionary(&self, word: &str) -> bool {
        self.dictionary.contains(&word.to_lowercase())
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(&word.to_lowercase())
    }

    pub fn connectors(&self) -> &[Vec<String>] {
        &self.connectors
    }
}

fn suffix_tag(word: &str) -> Tag {
    if !word.chars().all(char::is_alphabetic) {
        return Tag::Other;
    }
    SUFFIX_RULES
        .iter()
        .find(|(suffix, _)| word.len() > suffix.len() + 2 && word.ends_with(suffix))
        .map(|&(_, tag)| tag)
        .unwrap_or(Tag::Other)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lookups() {
        let res = LexicalResources::bundled();
        assert_eq!(res.tag("Dogs"), Tag::Noun);
        assert_eq!(res.tag("loudly"), Tag::Adv);
        assert_eq!(res.tag("the"), Tag::Other);
        assert_eq!(res.tag("sat"), Tag::Verb);
        assert!(res.in_dictionary("Essay"));
        assert!(!res.in_dictionary("tst"));
        assert!(res.is_stopword("The"));
        assert!(res.senses("bank").unwrap() >= 1);
        assert!(res.connectors().len() >= 100);
        // Longest phrases come first.
        assert!(res.connectors()[0].len() >= res.connectors().last().unwrap().len());
    }

    #[test]
    fn suffix_fallback() {
        let res = LexicalResources::bundled().clone().with_tags(HashMap::new());
        assert_eq!(res.tag("zorbly"), Tag::Adv);
        assert_eq!(res.tag("blargness"), Tag::Noun);
        assert_eq!(res.tag("frobnication"), Tag::Noun);
        assert_eq!(res.tag("glorpous"), Tag::Adj);
        assert_eq!(res.tag("snarfing"), Tag::Verb);
        assert_eq!(res.tag("qzxv"), Tag::Other);
        assert_eq!(res.tag("2019"), Tag::Other);
    }

    #[test]
    fn malformed_tables() {
        assert!(matches!(
            parse_tag_lexicon("dog\tnoun\ncat\tfeline\n"),
            Err(Error::Resource { line: 2, .. })
        ));
        assert!(parse_sense_table("bank\t0\n").is_err());
        assert!(parse_sense_table("bank 3\n").is_err());
        let senses = parse_sense_table("# comment\nBank\t10\n\nrun\t30\n").unwrap();
        assert_eq!(senses["bank"], 10);
    }

    #[test]
    fn connector_phrases_tokenized() {
        let c = parse_connectors("however\non the other hand\nHowever\n");
        assert_eq!(c[0], vec!["on", "the", "other", "hand"]);
        assert_eq!(c.len(), 2);
    }
}
