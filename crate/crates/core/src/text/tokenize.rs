use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub text: String,
    /// Byte offset of the token in the source text.
    pub offset: usize,
    /// True for alphanumeric runs, false for single punctuation characters.
    pub is_word: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word)
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenizedDoc {
    pub paragraphs: Vec<Vec<Sentence>>,
}

impl TokenizedDoc {
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.paragraphs.iter().flatten()
    }

    /// Every token, word and punctuation, in document order.
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences().flat_map(|s| s.tokens.iter())
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens().filter(|t| t.is_word)
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    pub fn token_count(&self) -> usize {
        self.tokens().count()
    }

    pub fn sentence_count(&self) -> usize {
        self.paragraphs.iter().map(Vec::len).sum()
    }
}

const TERMINAL: [char; 3] = ['.', '!', '?'];
const CLOSERS: [char; 8] = ['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}', '\u{bb}'];

fn ends_sentence(tokens: &[Token]) -> bool {
    for tok in tokens.iter().rev() {
        if tok.is_word {
            return false;
        }
        let c = tok.text.chars().next().unwrap_or(' ');
        if TERMINAL.contains(&c) {
            return true;
        }
        if !CLOSERS.contains(&c) {
            return false;
        }
    }
    false
}

/// Tokens of one paragraph, grouped into sentences. Sentences without a word
/// token are folded into a neighbour.
fn split_paragraph(text: &str, base: usize) -> Vec<Sentence> {
    let mut sentences: Vec<Sentence> = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut chars = text.char_indices().peekable();

    let close = |current: &mut Vec<Token>, sentences: &mut Vec<Sentence>| {
        if current.is_empty() {
            return;
        }
        let tokens = std::mem::take(current);
        if tokens.iter().any(|t| t.is_word) {
            sentences.push(Sentence { tokens });
        } else if let Some(last) = sentences.last_mut() {
            last.tokens.extend(tokens);
        } else {
            // Leading punctuation only: keep it for the next sentence.
            *current = tokens;
        }
    };

    while let Some((start, c)) = chars.next() {
        if c.is_alphanumeric() {
            let mut end = start + c.len_utf8();
            while let Some(&(i, n)) = chars.peek() {
                if !n.is_alphanumeric() {
                    break;
                }
                end = i + n.len_utf8();
                chars.next();
            }
            current.push(Token {
                text: text[start..end].to_string(),
                offset: base + start,
                is_word: true,
            });
        } else if c.is_whitespace() {
            if ends_sentence(&current) {
                close(&mut current, &mut sentences);
            }
        } else {
            current.push(Token {
                text: c.to_string(),
                offset: base + start,
                is_word: false,
            });
        }
    }
    if !current.is_empty() {
        if current.iter().any(|t| t.is_word) {
            sentences.push(Sentence { tokens: current });
        } else if let Some(last) = sentences.last_mut() {
            last.tokens.extend(current);
        }
    }
    sentences
}

/// Splits paragraphs on blank lines, sentences on terminal punctuation
/// followed by whitespace (closing quotes and brackets may sit in between),
/// and words on non-alphanumeric boundaries.
pub fn tokenize(text: &str) -> Result<TokenizedDoc> {
    let mut paragraphs = Vec::new();
    let mut para_start: Option<usize> = None;
    let mut offset = 0;
    let flush = |start: Option<usize>, end: usize, paragraphs: &mut Vec<Vec<Sentence>>| {
        if let Some(s) = start {
            let sentences = split_paragraph(&text[s..end], s);
            if !sentences.is_empty() {
                paragraphs.push(sentences);
            }
        }
    };
    for line in text.split_inclusive('\n') {
        if line.trim().is_empty() {
            flush(para_start.take(), offset, &mut paragraphs);
        } else if para_start.is_none() {
            para_start = Some(offset);
        }
        offset += line.len();
    }
    flush(para_start, text.len(), &mut paragraphs);
    if paragraphs.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(TokenizedDoc { paragraphs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(doc: &TokenizedDoc) -> Vec<&str> {
        doc.words().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn two_sentences_one_paragraph() {
        let doc = tokenize("Hi there. Go now.").unwrap();
        assert_eq!(doc.paragraphs.len(), 1);
        assert_eq!(doc.sentence_count(), 2);
        assert_eq!(words(&doc), ["Hi", "there", "Go", "now"]);
    }

    #[test]
    fn blank_line_separates_paragraphs() {
        let doc = tokenize("A.\n\nB.").unwrap();
        assert_eq!(doc.paragraphs.len(), 2);
        assert!(doc.paragraphs.iter().all(|p| p.len() == 1));
        let doc = tokenize("A.\r\n   \r\nB.\nC").unwrap();
        assert_eq!(doc.paragraphs.len(), 2);
        assert_eq!(doc.paragraphs[1].len(), 2);
    }

    #[test]
    fn punctuation_only_is_empty() {
        assert!(matches!(tokenize("???"), Err(Error::EmptyDocument)));
        assert!(matches!(tokenize(""), Err(Error::EmptyDocument)));
        assert!(matches!(tokenize(" \n\n ... !"), Err(Error::EmptyDocument)));
    }

    #[test]
    fn punctuation_sentences_merge() {
        let doc = tokenize("Really? ?! Yes.").unwrap();
        assert_eq!(doc.sentence_count(), 2);
        assert_eq!(doc.paragraphs[0][0].tokens.len(), 4);
    }

    #[test]
    fn closing_quote_after_period() {
        let doc = tokenize("He said \"stop.\" Then he left.").unwrap();
        assert_eq!(doc.sentence_count(), 2);
    }

    #[test]
    fn no_split_inside_numbers_or_without_space() {
        let doc = tokenize("Version 3.5 shipped.Then more").unwrap();
        assert_eq!(doc.sentence_count(), 1);
        assert_eq!(words(&doc), ["Version", "3", "5", "shipped", "Then", "more"]);
    }

    #[test]
    fn offsets_point_into_source() {
        let text = "Caf\u{e9} na\u{ef}ve, d\u{e9}j\u{e0} vu!\n\nNext.";
        let doc = tokenize(text).unwrap();
        for tok in doc.tokens() {
            assert_eq!(&text[tok.offset..tok.offset + tok.text.len()], tok.text);
        }
    }
}
