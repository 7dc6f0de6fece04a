use std::collections::HashMap;

use crate::corpus::Tokenizer;

use super::vocab::{Vocabulary, BOS, EOS};

/// Unigram, bigram and trigram counts over boundary-padded sentences.
///
/// Every sentence `w1 .. wn` is counted as `<s> w1 .. wn </s>`, so the
/// marginal constraints `c(u,v) <= c(u)` and `c(u,v,w) <= c(u,v)` hold.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    unigrams: HashMap<String, u64>,
    bigrams: HashMap<(String, String), u64>,
    trigrams: HashMap<(String, String, String), u64>,
}

/// Splits text into sentences at newlines, dropping lines without tokens.
pub fn sentences_of(text: &str, tokenizer: &dyn Tokenizer) -> Vec<Vec<String>> {
    text.lines()
        .map(|line| tokenizer.tokenize(line).into_tokens())
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn count_ngrams<S: AsRef<[String]>>(sentences: &[S], vocab: Option<&Vocabulary>) -> CountTable {
    let mut table = CountTable::default();
    for sentence in sentences {
        table.add_sentence(sentence.as_ref(), vocab);
    }
    table
}

impl CountTable {
    pub fn add_sentence(&mut self, sentence: &[String], vocab: Option<&Vocabulary>) {
        if sentence.is_empty() {
            return;
        }
        let mut padded: Vec<&str> = Vec::with_capacity(sentence.len() + 2);
        padded.push(BOS);
        for w in sentence {
            padded.push(match vocab {
                Some(v) => v.normalize(w),
                None => w.as_str(),
            });
        }
        padded.push(EOS);
        for w in &padded {
            *self.unigrams.entry(w.to_string()).or_default() += 1;
        }
        for pair in padded.windows(2) {
            *self
                .bigrams
                .entry((pair[0].to_string(), pair[1].to_string()))
                .or_default() += 1;
        }
        for tri in padded.windows(3) {
            *self
                .trigrams
                .entry((tri[0].to_string(), tri[1].to_string(), tri[2].to_string()))
                .or_default() += 1;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.unigrams.is_empty()
    }

    pub fn unigram(&self, w: &str) -> u64 {
        self.unigrams.get(w).copied().unwrap_or(0)
    }

    pub fn bigram(&self, u: &str, v: &str) -> u64 {
        self.bigrams
            .get(&(u.to_string(), v.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn trigram(&self, u: &str, v: &str, w: &str) -> u64 {
        self.trigrams
            .get(&(u.to_string(), v.to_string(), w.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn unigrams(&self) -> impl Iterator<Item = (&str, u64)> {
        self.unigrams.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn bigrams(&self) -> impl Iterator<Item = ((&str, &str), u64)> {
        self.bigrams
            .iter()
            .map(|((u, v), &c)| ((u.as_str(), v.as_str()), c))
    }

    pub fn trigrams(&self) -> impl Iterator<Item = ((&str, &str, &str), u64)> {
        self.trigrams
            .iter()
            .map(|((u, v, w), &c)| ((u.as_str(), v.as_str(), w.as_str()), c))
    }

    /// Word tokens counted, excluding the boundary symbols.
    pub fn token_count(&self) -> u64 {
        self.unigrams
            .iter()
            .filter(|(w, _)| w.as_str() != BOS && w.as_str() != EOS)
            .map(|(_, &c)| c)
            .sum()
    }

    /// Distinct word types, excluding the boundary symbols.
    pub fn type_count(&self) -> usize {
        self.unigrams
            .keys()
            .filter(|w| w.as_str() != BOS && w.as_str() != EOS)
            .count()
    }

    /// Adds another table's counts into this one.
    pub fn merge(&mut self, other: &CountTable) {
        for (k, c) in &other.unigrams {
            *self.unigrams.entry(k.clone()).or_default() += c;
        }
        for (k, c) in &other.bigrams {
            *self.bigrams.entry(k.clone()).or_default() += c;
        }
        for (k, c) in &other.trigrams {
            *self.trigrams.entry(k.clone()).or_default() += c;
        }
    }

    /// Re-keys the table over a vocabulary, folding OOV words into `<unk>`.
    pub fn mapped_to(&self, vocab: &Vocabulary) -> CountTable {
        let mut out = CountTable::default();
        let n = |w: &String| vocab.normalize(w).to_string();
        for (w, c) in &self.unigrams {
            *out.unigrams.entry(n(w)).or_default() += c;
        }
        for ((u, v), c) in &self.bigrams {
            *out.bigrams.entry((n(u), n(v))).or_default() += c;
        }
        for ((u, v, w), c) in &self.trigrams {
            *out.trigrams.entry((n(u), n(v), n(w))).or_default() += c;
        }
        out
    }
}
