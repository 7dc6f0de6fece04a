use std::collections::HashSet;
use std::io::BufRead;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Normalized word tokens in text order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    tokens: Vec<String>,
}

impl TokenStream {
    /// Builds a stream, dropping empty tokens.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            tokens: tokens
                .into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty())
                .collect(),
        }
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

impl Deref for TokenStream {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.tokens
    }
}

/// Splits text into word tokens. Implementations must be deterministic.
pub trait Tokenizer: Send + Sync {
    fn tokenize(&self, text: &str) -> TokenStream;
}

/// Lowercases, then splits on every run of non-alphanumeric codepoints.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultTokenizer;

impl Tokenizer for DefaultTokenizer {
    fn tokenize(&self, text: &str) -> TokenStream {
        // Lowercasing first keeps the output stable under re-tokenization:
        // some uppercase letters lowercase to a base letter plus a combining mark.
        let lowered = text.to_lowercase();
        TokenStream {
            tokens: lowered
                .split(|c: char| !c.is_alphanumeric())
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect(),
        }
    }
}

pub fn tokenize(text: &str) -> TokenStream {
    DefaultTokenizer.tokenize(text)
}

const DEFAULT_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "all",
    "also",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "been",
    "but",
    "by",
    "can",
    "do",
    "documents",
    "for",
    "from",
    "has",
    "have",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "looking",
    "may",
    "me",
    "more",
    "my",
    "not",
    "of",
    "on",
    "or",
    "other",
    "papers",
    "some",
    "such",
    "that",
    "the",
    "their",
    "these",
    "this",
    "to",
    "using",
    "want",
    "was",
    "we",
    "were",
    "which",
    "will",
    "with",
    "would",
];

/// Words excluded from retrieval terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist {
    words: HashSet<String>,
}

impl Stoplist {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled list of English function words and query boilerplate.
    pub fn english() -> Self {
        Self::from_words(DEFAULT_STOPWORDS.iter().copied())
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    /// One token per line; blank lines and `#` comments are skipped.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut words = HashSet::new();
        for line in reader.lines() {
            let line = line?;
            let word = line.trim();
            if word.is_empty() || word.starts_with('#') {
                continue;
            }
            words.insert(word.to_lowercase());
        }
        Ok(Self { words })
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> Vec<&str> {
        let mut w: Vec<&str> = self.words.iter().map(String::as_str).collect();
        w.sort_unstable();
        w
    }
}

/// Keeps the tokens that are not stoplisted, preserving order and repeats.
pub fn extract_terms(stream: &[String], stoplist: &Stoplist) -> Vec<String> {
    stream
        .iter()
        .filter(|t| !stoplist.contains(t))
        .cloned()
        .collect()
}

/// Tokenizer plus stoplist: turns raw text or word sequences into content terms.
#[derive(Clone)]
pub struct TermExtractor {
    tokenizer: std::sync::Arc<dyn Tokenizer>,
    stoplist: Stoplist,
}

impl std::fmt::Debug for TermExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TermExtractor")
            .field("stoplist_len", &self.stoplist.len())
            .finish()
    }
}

impl Default for TermExtractor {
    fn default() -> Self {
        Self::new(DefaultTokenizer, Stoplist::english())
    }
}

impl TermExtractor {
    pub fn new(tokenizer: impl Tokenizer + 'static, stoplist: Stoplist) -> Self {
        Self {
            tokenizer: std::sync::Arc::new(tokenizer),
            stoplist,
        }
    }

    pub fn tokenizer(&self) -> &dyn Tokenizer {
        self.tokenizer.as_ref()
    }

    pub fn stoplist(&self) -> &Stoplist {
        &self.stoplist
    }

    pub fn tokenize(&self, text: &str) -> TokenStream {
        self.tokenizer.tokenize(text)
    }

    pub fn terms_of_text(&self, text: &str) -> Vec<String> {
        extract_terms(&self.tokenize(text), &self.stoplist)
    }

    pub fn terms_of_words(&self, words: &[String]) -> Vec<String> {
        extract_terms(words, &self.stoplist)
    }
}
