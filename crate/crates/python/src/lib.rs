//! Python bindings: index, language model, channel, decoder and the
//! evaluation measures.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use spokenir::corpus::{
    default_fields, parse_documents, tokenize, DefaultTokenizer, Document, DocumentFormat, Stoplist,
};
use spokenir::decoder::{
    phonemize, Alphabet, ChannelModel, DecodeConfig, Decoder as Search, Lexicon,
};
use spokenir::index::{build_index, IndexOptions, InvertedIndex};
use spokenir::lm::{build_model, count_ngrams, LmOptions, NGramModel};

/// `(words, score)` pairs, best first.
type NBest = Vec<(Vec<String>, f64)>;

fn value_err(e: spokenir::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err(e: std::io::Error) -> PyErr {
    PyIOError::new_err(e.to_string())
}

fn open(path: &PathBuf) -> PyResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(io_err)
}

fn create(path: &PathBuf) -> PyResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err)
}

/// Lowercased alphanumeric tokens of `text`.
#[pyfunction]
fn tokens(text: &str) -> Vec<String> {
    tokenize(text).into_tokens()
}

#[pyfunction]
fn wer(reference: Vec<String>, hypothesis: Vec<String>) -> PyResult<f64> {
    spokenir::eval::wer(&reference, &hypothesis).map_err(value_err)
}

/// Word error rate over the non-stopword terms.
#[pyfunction]
fn ter(reference: Vec<String>, hypothesis: Vec<String>) -> PyResult<f64> {
    spokenir::eval::ter(&reference, &hypothesis, &Stoplist::english()).map_err(value_err)
}

/// `None` when nothing is relevant.
#[pyfunction]
fn average_precision(ranking: Vec<String>, relevant: BTreeSet<String>) -> Option<f64> {
    spokenir::eval::average_precision(&ranking, &relevant)
}

fn documents_from(path: &PathBuf, format: Option<&str>) -> PyResult<Vec<Document>> {
    let format = match format {
        Some(f) => f.parse::<DocumentFormat>().map_err(value_err)?,
        None if path.extension().is_some_and(|e| e == "jsonl") => DocumentFormat::JsonLines,
        None => DocumentFormat::Tagged,
    };
    let bytes = std::fs::read(path).map_err(io_err)?;
    parse_documents(&bytes, format).map_err(value_err)
}

#[pyclass(name = "Index", module = "pyspokenir", frozen)]
struct PyIndex {
    inner: InvertedIndex,
}

#[pymethods]
impl PyIndex {
    /// Index `(id, text)` pairs.
    #[staticmethod]
    fn from_texts(docs: Vec<(String, String)>) -> PyResult<Self> {
        let docs: Vec<Document> = docs
            .into_iter()
            .map(|(id, text)| {
                let mut d = Document::new(id);
                d.abstract_text = text;
                d
            })
            .collect();
        Self::build(&docs)
    }

    #[staticmethod]
    #[pyo3(signature = (path, format=None))]
    fn from_file(path: PathBuf, format: Option<&str>) -> PyResult<Self> {
        Self::build(&documents_from(&path, format)?)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = InvertedIndex::read_snapshot(open(&path)?).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_snapshot(create(&path)?).map_err(value_err)
    }

    #[getter]
    fn n_docs(&self) -> usize {
        self.inner.n_docs()
    }

    #[getter]
    fn avglen(&self) -> f64 {
        self.inner.avglen()
    }

    fn df(&self, term: &str) -> usize {
        self.inner.df(term)
    }

    /// Ranked `(doc_id, score)` pairs for free text.
    #[pyo3(signature = (query, cutoff=1000))]
    fn search(&self, query: &str, cutoff: usize) -> Vec<(String, f64)> {
        let list =
            self.inner
                .search_text("q", query, &DefaultTokenizer, &Stoplist::english(), cutoff);
        list.entries
    }

    /// Ranked `(doc_id, score)` pairs for already extracted terms.
    #[pyo3(signature = (terms, cutoff=1000))]
    fn retrieve(&self, terms: Vec<String>, cutoff: usize) -> Vec<(String, f64)> {
        self.inner.retrieve("q", &terms, cutoff).entries
    }

    fn __repr__(&self) -> String {
        format!(
            "Index(n_docs={}, avglen={:.1})",
            self.inner.n_docs(),
            self.inner.avglen()
        )
    }
}

impl PyIndex {
    fn build(docs: &[Document]) -> PyResult<Self> {
        let inner = build_index(
            docs,
            &IndexOptions::default(),
            &DefaultTokenizer,
            &Stoplist::english(),
        )
        .map_err(value_err)?;
        Ok(Self { inner })
    }
}

#[pyclass(name = "LanguageModel", module = "pyspokenir", frozen)]
struct PyModel {
    inner: NGramModel,
}

#[pymethods]
impl PyModel {
    /// Trigram model over tokenized sentences.
    #[staticmethod]
    #[pyo3(signature = (sentences, label="global", vocab_size=None))]
    fn from_sentences(
        sentences: Vec<Vec<String>>,
        label: &str,
        vocab_size: Option<usize>,
    ) -> PyResult<Self> {
        let mut opts = LmOptions::default();
        if let Some(k) = vocab_size {
            opts.vocab_size = k;
        }
        let inner = build_model(&sentences, &opts, label).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Model over the title, abstract and keyword lines of a document file.
    #[staticmethod]
    #[pyo3(signature = (path, label="global", vocab_size=None, format=None))]
    fn from_file(
        path: PathBuf,
        label: &str,
        vocab_size: Option<usize>,
        format: Option<&str>,
    ) -> PyResult<Self> {
        let docs = documents_from(&path, format)?;
        let sentences =
            spokenir::lm::document_sentences(&docs, &default_fields(), &DefaultTokenizer);
        Self::from_sentences(sentences, label, vocab_size)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = NGramModel::read_snapshot(open(&path)?).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_snapshot(create(&path)?).map_err(value_err)
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.metadata().label.clone()
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.vocab().len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.vocab().contains(word)
    }

    /// p(word | history); only the last two history words matter.
    #[pyo3(signature = (word, history=Vec::new()))]
    fn prob(&self, word: &str, history: Vec<String>) -> f64 {
        let h: Vec<&str> = history.iter().map(String::as_str).collect();
        self.inner.prob(word, &h)
    }

    /// Natural log probability of a sentence, end marker included.
    fn logprob(&self, words: Vec<String>) -> f64 {
        self.inner.sequence_logprob(&words)
    }

    fn perplexity(&self, sentences: Vec<Vec<String>>) -> PyResult<f64> {
        self.inner.perplexity(&sentences).map_err(value_err)
    }

    /// MAP adaptation towards counts from `sentences`.
    #[pyo3(signature = (sentences, tau=5.0))]
    fn adapt(&self, sentences: Vec<Vec<String>>, tau: f64) -> PyResult<Self> {
        let local = count_ngrams(&sentences, None);
        let inner = self.inner.map_adapt(&local, tau).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "LanguageModel(label={:?}, vocab_size={})",
            self.label(),
            self.vocab_size()
        )
    }
}

#[pyclass(name = "Channel", module = "pyspokenir", frozen)]
struct PyChannel {
    inner: ChannelModel,
}

#[pymethods]
impl PyChannel {
    /// Letters and digits; each phoneme is replaced with probability
    /// `substitution` by any other symbol.
    #[new]
    #[pyo3(signature = (substitution=0.1, insertion=0.02, deletion=0.02))]
    fn new(substitution: f64, insertion: f64, deletion: f64) -> PyResult<Self> {
        let inner =
            ChannelModel::uniform_confusion(Alphabet::default(), substitution, insertion, deletion)
                .map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = ChannelModel::from_reader(open(&path)?).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Heard phonemes for the spoken ones.
    #[pyo3(signature = (phonemes, seed=0))]
    fn corrupt(&self, phonemes: Vec<String>, seed: u64) -> PyResult<Vec<String>> {
        self.inner.corrupt(&phonemes, seed).map_err(value_err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

#[pyclass(name = "Decoder", module = "pyspokenir", frozen)]
struct PyDecoder {
    model: NGramModel,
    channel: ChannelModel,
    lexicon: Lexicon,
}

#[pymethods]
impl PyDecoder {
    /// `lexicon` is a TSV pronunciation file; words are spelled out otherwise.
    #[new]
    #[pyo3(signature = (model, channel, lexicon=None))]
    fn new(model: &PyModel, channel: &PyChannel, lexicon: Option<PathBuf>) -> PyResult<Self> {
        let lexicon = match lexicon {
            Some(p) => Lexicon::from_reader(open(&p)?).map_err(value_err)?,
            None => Lexicon::graphemic(),
        };
        Ok(Self {
            model: model.inner.clone(),
            channel: channel.inner.clone(),
            lexicon,
        })
    }

    fn phonemes(&self, words: Vec<String>) -> PyResult<Vec<String>> {
        phonemize(&words, &self.lexicon).map_err(value_err)
    }

    /// Phonemize and corrupt: what the recognizer hears for `words`.
    #[pyo3(signature = (words, seed=0))]
    fn dictate(&self, words: Vec<String>, seed: u64) -> PyResult<Vec<String>> {
        let spoken = phonemize(&words, &self.lexicon).map_err(value_err)?;
        self.channel.corrupt(&spoken, seed).map_err(value_err)
    }

    /// N-best `(words, score)` pairs, best first.
    #[pyo3(signature = (heard, nbest=10, beam=Some(8.0)))]
    fn decode(
        &self,
        py: Python<'_>,
        heard: Vec<String>,
        nbest: usize,
        beam: Option<f64>,
    ) -> PyResult<NBest> {
        Ok(self.decode_many(py, vec![heard], nbest, beam)?.remove(0))
    }

    /// Decodes several inputs, building the search structures once.
    #[pyo3(signature = (inputs, nbest=10, beam=Some(8.0)))]
    fn decode_many(
        &self,
        py: Python<'_>,
        inputs: Vec<Vec<String>>,
        nbest: usize,
        beam: Option<f64>,
    ) -> PyResult<Vec<NBest>> {
        let config = DecodeConfig {
            nbest,
            beam,
            ..DecodeConfig::default()
        };
        py.detach(|| {
            let search = Search::new(&self.model, &self.lexicon, &self.channel)?;
            inputs
                .iter()
                .map(|heard| {
                    let out = search.decode(heard, &config)?;
                    Ok(out.into_iter().map(|t| (t.words, t.score)).collect())
                })
                .collect::<spokenir::Result<Vec<_>>>()
        })
        .map_err(value_err)
    }
}

#[pymodule]
fn pyspokenir(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyIndex>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyDecoder>()?;
    m.add_function(wrap_pyfunction!(tokens, m)?)?;
    m.add_function(wrap_pyfunction!(wer, m)?)?;
    m.add_function(wrap_pyfunction!(ter, m)?)?;
    m.add_function(wrap_pyfunction!(average_precision, m)?)?;
    Ok(())
}
