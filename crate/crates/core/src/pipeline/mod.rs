//! The end-to-end system: offline adaptation to the collection, first-pass
//! decoding and retrieval, and an optional second pass after adapting the
//! model to the top-ranked documents.

mod config;
mod experiment;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Field, TermExtractor, Tokenizer};
use crate::decoder::{phonemize, ChannelModel, Decoder, Lexicon, Transcription};
use crate::error::{Error, Result};
use crate::index::{InvertedIndex, RankedList};
use crate::lm::{build_model, count_ngrams, document_sentences, LmOptions, NGramModel};

pub use config::{ChannelSettings, ModelPath, Paths, PipelineConfig};
pub use experiment::{run_experiment, write_experiment, ExperimentOutput, QueryLog};

/// Builds the global model from the indexed fields of a collection.
pub fn offline_adapt(
    documents: &[Document],
    fields: &[Field],
    tokenizer: &dyn Tokenizer,
    options: &LmOptions,
    label: &str,
) -> Result<NGramModel> {
    let sentences = document_sentences(documents, fields, tokenizer);
    build_model(&sentences, options, label)
}

/// Per-topic corruption seed: stable across runs, platforms and thread counts.
pub fn topic_seed(seed: u64, topic_id: &str) -> u64 {
    // FNV-1a over the id, folded with the run seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in topic_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Read-only artifacts shared by every query.
pub struct Resources {
    pub index: InvertedIndex,
    pub documents: Vec<Document>,
    pub lexicon: Lexicon,
    pub channel: ChannelModel,
    pub extractor: TermExtractor,
    by_id: HashMap<String, usize>,
}

impl Resources {
    pub fn new(
        index: InvertedIndex,
        documents: Vec<Document>,
        lexicon: Lexicon,
        channel: ChannelModel,
        extractor: TermExtractor,
    ) -> Self {
        let by_id = documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.clone(), i))
            .collect();
        Self {
            index,
            documents,
            lexicon,
            channel,
            extractor,
            by_id,
        }
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.documents[i])
    }

    /// Phonemizes text and passes it through the channel.
    pub fn dictate(&self, text: &str, seed: u64) -> Result<(Vec<String>, Vec<String>)> {
        let words = self.extractor.tokenize(text).into_tokens();
        let spoken = phonemize(&words, &self.lexicon)?;
        let heard = self.channel.corrupt(&spoken, seed)?;
        Ok((words, heard))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    First,
    Second,
}

/// What the user said: text still to be dictated, or heard phonemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryInput {
    Text(String),
    Phonemes(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageResult {
    pub stage: Stage,
    pub topic_id: String,
    pub heard: Vec<String>,
    pub nbest: Vec<Transcription>,
    pub terms: Vec<String>,
    pub ranked: RankedList,
}

impl StageResult {
    /// Words of the best transcription; only these feed retrieval.
    pub fn words(&self) -> &[String] {
        self.nbest.first().map_or(&[], |t| &t.words)
    }
}

fn heard_of(
    input: &QueryInput,
    topic_id: &str,
    res: &Resources,
    config: &PipelineConfig,
) -> Result<Vec<String>> {
    match input {
        QueryInput::Phonemes(p) => Ok(p.clone()),
        QueryInput::Text(text) => Ok(res.dictate(text, topic_seed(config.seed, topic_id))?.1),
    }
}

fn decode_and_retrieve(
    stage: Stage,
    topic_id: &str,
    heard: Vec<String>,
    res: &Resources,
    decoder: &Decoder<'_>,
    config: &PipelineConfig,
) -> Result<StageResult> {
    let nbest = decoder.decode(&heard, &config.decoder)?;
    let words: &[String] = nbest.first().map_or(&[], |t| &t.words);
    let terms = res.extractor.terms_of_words(words);
    if terms.is_empty() {
        log::info!("topic {topic_id}: transcription has no query terms");
    }
    let ranked = res.index.retrieve(topic_id, &terms, config.cutoff);
    Ok(StageResult {
        stage,
        topic_id: topic_id.to_string(),
        heard,
        nbest,
        terms,
        ranked,
    })
}

/// First pass: decode (after dictating, for text input) and retrieve.
pub fn run_query(
    topic_id: &str,
    input: &QueryInput,
    res: &Resources,
    decoder: &Decoder<'_>,
    config: &PipelineConfig,
) -> Result<StageResult> {
    config.validate()?;
    let heard = heard_of(input, topic_id, res, config)?;
    decode_and_retrieve(Stage::First, topic_id, heard, res, decoder, config)
}

/// Local counts from the indexed fields of the top `r` documents.
pub fn local_counts(ranked: &RankedList, r: usize, res: &Resources) -> crate::lm::CountTable {
    let docs: Vec<Document> = ranked
        .doc_ids()
        .take(r)
        .filter_map(|id| res.document(id).cloned())
        .collect();
    let sentences = document_sentences(&docs, res.index.fields(), res.extractor.tokenizer());
    count_ngrams(&sentences, None)
}

/// Both passes. The second re-decodes the same heard phonemes with the model
/// adapted to the first pass's top documents; `model` itself is untouched.
pub fn run_two_stage(
    topic_id: &str,
    input: &QueryInput,
    res: &Resources,
    model: &NGramModel,
    decoder: &Decoder<'_>,
    config: &PipelineConfig,
) -> Result<(StageResult, StageResult)> {
    if !config.online_adaptation {
        return Err(Error::InvalidParameter(
            "two-stage retrieval needs online adaptation enabled".into(),
        ));
    }
    let first = run_query(topic_id, input, res, decoder, config)?;
    let local = local_counts(&first.ranked, config.top_r, res);
    if config.top_r == 0 || local.is_empty() {
        if config.top_r > 0 {
            log::warn!("topic {topic_id}: nothing retrieved, skipping adaptation");
        }
        let second = StageResult {
            stage: Stage::Second,
            ..first.clone()
        };
        return Ok((first, second));
    }
    let adapted = model.map_adapt(&local, config.tau)?;
    let decoder2 = Decoder::new(&adapted, &res.lexicon, &res.channel)?;
    let second = decode_and_retrieve(
        Stage::Second,
        topic_id,
        first.heard.clone(),
        res,
        &decoder2,
        config,
    )?;
    Ok((first, second))
}
