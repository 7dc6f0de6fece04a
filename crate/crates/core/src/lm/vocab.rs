use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub type WordId = u32;

/// Closed vocabulary: `K` words followed by the reserved `<s>`, `</s>`, `<unk>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, WordId>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(words: Vec<String>) -> Self {
        Self::from_words(words)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.words
    }
}

pub fn is_reserved(word: &str) -> bool {
    matches!(word, BOS | EOS | UNK)
}

impl Vocabulary {
    /// Builds a vocabulary from regular words, in the given order. Duplicates
    /// and reserved symbols are dropped.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list = Vec::new();
        let mut index = HashMap::new();
        for w in words {
            let w: String = w.into();
            if is_reserved(&w) || index.contains_key(&w) {
                continue;
            }
            index.insert(w.clone(), list.len() as WordId);
            list.push(w);
        }
        Self { words: list, index }
    }

    /// Number of regular words, `K`.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn bos(&self) -> WordId {
        self.words.len() as WordId
    }

    pub fn eos(&self) -> WordId {
        self.words.len() as WordId + 1
    }

    pub fn unk(&self) -> WordId {
        self.words.len() as WordId + 2
    }

    /// All symbols, including reserved ones.
    pub fn symbol_count(&self) -> usize {
        self.words.len() + 3
    }

    /// Symbols a model predicts: every word plus `</s>` and `<unk>`.
    pub fn predicted(&self) -> impl Iterator<Item = WordId> {
        let k = self.words.len() as WordId;
        (0..k).chain([k + 1, k + 2])
    }

    pub fn predicted_count(&self) -> usize {
        self.words.len() + 2
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Maps a word to its id; unknown words map to `<unk>`.
    pub fn id(&self, word: &str) -> WordId {
        match word {
            BOS => self.bos(),
            EOS => self.eos(),
            UNK => self.unk(),
            w => self.index.get(w).copied().unwrap_or_else(|| self.unk()),
        }
    }

    pub fn symbol(&self, id: WordId) -> &str {
        let k = self.words.len() as WordId;
        match id {
            i if i < k => &self.words[i as usize],
            i if i == k => BOS,
            i if i == k + 1 => EOS,
            _ => UNK,
        }
    }

    /// The word itself if in vocabulary, `<unk>` otherwise.
    pub fn normalize<'a>(&self, word: &'a str) -> &'a str {
        if self.contains(word) || is_reserved(word) {
            word
        } else {
            UNK
        }
    }
}
