//! Closed-vocabulary bigram+trigram language models: counting, vocabulary
//! selection, Witten-Bell estimation, perplexity, coverage and MAP adaptation.

mod counts;
mod model;
mod vocab;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Field, Tokenizer};
use crate::error::{Error, Result};

pub use counts::{count_ngrams, sentences_of, CountTable};
pub use model::{map_estimate, BigramRow, BigramTable, Cutoffs, ModelMetadata, NGramModel};
pub use vocab::{is_reserved, Vocabulary, WordId, BOS, EOS, UNK};

/// Vocabulary size used when none is configured.
pub const DEFAULT_VOCAB_SIZE: usize = 20_000;

/// Default MAP prior weight (equivalent sample size).
pub const DEFAULT_TAU: f64 = 500.0;

/// Top-`k` words by count; equal counts are ordered lexicographically.
/// Boundary and unknown symbols are never selected.
pub fn select_vocab(counts: &CountTable, k: usize) -> Result<Vocabulary> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "vocabulary size must be at least 1".into(),
        ));
    }
    let mut words: Vec<(&str, u64)> = counts.unigrams().filter(|(w, _)| !is_reserved(w)).collect();
    words.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(Vocabulary::from_words(
        words.into_iter().take(k).map(|(w, _)| w.to_string()),
    ))
}

/// Fraction of tokens that are in the vocabulary.
pub fn coverage<S: AsRef<str>>(vocab: &Vocabulary, tokens: &[S]) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::EmptyCorpus("coverage needs at least one token"));
    }
    let covered = tokens.iter().filter(|t| vocab.contains(t.as_ref())).count();
    Ok(covered as f64 / tokens.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmOptions {
    pub vocab_size: usize,
    pub cutoffs: Cutoffs,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            vocab_size: DEFAULT_VOCAB_SIZE,
            cutoffs: Cutoffs::default(),
        }
    }
}

/// Counts, selects the vocabulary, and estimates a model from sentences.
pub fn build_model<S: AsRef<[String]>>(
    sentences: &[S],
    options: &LmOptions,
    label: &str,
) -> Result<NGramModel> {
    let raw = count_ngrams(sentences, None);
    if raw.is_empty() {
        return Err(Error::EmptyCorpus("no sentences to build a model from"));
    }
    let vocab = select_vocab(&raw, options.vocab_size)?;
    let metadata = ModelMetadata {
        label: label.to_string(),
        tokens: raw.token_count(),
        types: raw.type_count() as u64,
    };
    NGramModel::estimate(&raw, &vocab, options.cutoffs, metadata)
}

/// Sentences from the selected fields of documents, split at newlines.
pub fn document_sentences(
    docs: &[Document],
    fields: &[Field],
    tokenizer: &dyn Tokenizer,
) -> Vec<Vec<String>> {
    docs.iter()
        .flat_map(|d| sentences_of(&d.selected_text(fields), tokenizer))
        .collect()
}

/// Token/type counts and vocabulary coverage of a corpus under a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmStats {
    pub label: String,
    pub types: usize,
    pub tokens: usize,
    pub coverage: f64,
}

impl LmStats {
    pub fn compute<S: AsRef<[String]>>(model: &NGramModel, sentences: &[S]) -> Result<Self> {
        let tokens: Vec<&String> = sentences.iter().flat_map(|s| s.as_ref().iter()).collect();
        let types: HashSet<&String> = tokens.iter().copied().collect();
        let coverage = coverage(model.vocab(), &tokens)?;
        Ok(Self {
            label: model.metadata().label.clone(),
            types: types.len(),
            tokens: tokens.len(),
            coverage,
        })
    }

    pub fn tsv_header() -> &'static str {
        "label\ttypes\ttokens\tcoverage"
    }

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{:.4}",
            self.label, self.types, self.tokens, self.coverage
        )
    }
}
