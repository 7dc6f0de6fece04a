use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::counts::CountTable;
use super::vocab::{Vocabulary, WordId};

/// Continuation counts of one history.
#[derive(Debug, Clone, Default, PartialEq)]
struct HistoryStats {
    total: u64,
    succ: HashMap<WordId, u64>,
}

impl HistoryStats {
    fn add(&mut self, w: WordId, c: u64) {
        self.total += c;
        *self.succ.entry(w).or_default() += c;
    }

    fn count(&self, w: WordId) -> u64 {
        self.succ.get(&w).copied().unwrap_or(0)
    }

    /// Witten-Bell interpolation with a lower-order estimate.
    fn witten_bell(&self, w: WordId, lower: f64) -> f64 {
        let c = self.total as f64;
        let t = self.succ.len() as f64;
        (self.count(w) as f64 + t * lower) / (c + t)
    }

    fn backoff_weight(&self) -> f64 {
        let t = self.succ.len() as f64;
        t / (self.total as f64 + t)
    }
}

/// Prediction events grouped by history length.
#[derive(Debug, Clone, Default, PartialEq)]
struct EventStats {
    unigram: HistoryStats,
    bigram: HashMap<WordId, HistoryStats>,
    trigram: HashMap<(WordId, WordId), HistoryStats>,
}

impl EventStats {
    /// `counts` must already be keyed over `vocab`.
    fn from_counts(counts: &CountTable, vocab: &Vocabulary, cutoffs: &Cutoffs) -> Self {
        let bos = vocab.bos();
        let mut stats = EventStats::default();
        for (w, c) in counts.unigrams() {
            let id = vocab.id(w);
            if id != bos {
                stats.unigram.add(id, c);
            }
        }
        for ((u, v), c) in counts.bigrams() {
            if c >= cutoffs.bigram {
                stats
                    .bigram
                    .entry(vocab.id(u))
                    .or_default()
                    .add(vocab.id(v), c);
            }
        }
        for ((u, v, w), c) in counts.trigrams() {
            if c >= cutoffs.trigram {
                stats
                    .trigram
                    .entry((vocab.id(u), vocab.id(v)))
                    .or_default()
                    .add(vocab.id(w), c);
            }
        }
        stats
    }

    fn is_empty(&self) -> bool {
        self.unigram.total == 0 && self.bigram.is_empty() && self.trigram.is_empty()
    }

    fn lookup(&self, h: &[WordId]) -> Option<&HistoryStats> {
        let s = match *h {
            [] => Some(&self.unigram),
            [v] => self.bigram.get(&v),
            [u, v] => self.trigram.get(&(u, v)),
            _ => None,
        };
        s.filter(|s| s.total > 0)
    }

    fn histories(&self) -> impl Iterator<Item = Vec<WordId>> + '_ {
        let uni = (self.unigram.total > 0).then(Vec::new);
        uni.into_iter()
            .chain(self.bigram.keys().map(|&v| vec![v]))
            .chain(self.trigram.keys().map(|&(u, v)| vec![u, v]))
    }

    fn to_snapshot(&self) -> StatsSnapshot {
        let mut unigram: Vec<(WordId, u64)> =
            self.unigram.succ.iter().map(|(&w, &c)| (w, c)).collect();
        unigram.sort_unstable();
        let mut bigram: Vec<(WordId, WordId, u64)> = self
            .bigram
            .iter()
            .flat_map(|(&v, s)| s.succ.iter().map(move |(&w, &c)| (v, w, c)))
            .collect();
        bigram.sort_unstable();
        let mut trigram: Vec<(WordId, WordId, WordId, u64)> = self
            .trigram
            .iter()
            .flat_map(|(&(u, v), s)| s.succ.iter().map(move |(&w, &c)| (u, v, w, c)))
            .collect();
        trigram.sort_unstable();
        StatsSnapshot {
            unigram,
            bigram,
            trigram,
        }
    }

    fn from_snapshot(s: &StatsSnapshot) -> Self {
        let mut stats = EventStats::default();
        for &(w, c) in &s.unigram {
            stats.unigram.add(w, c);
        }
        for &(v, w, c) in &s.bigram {
            stats.bigram.entry(v).or_default().add(w, c);
        }
        for &(u, v, w, c) in &s.trigram {
            stats.trigram.entry((u, v)).or_default().add(w, c);
        }
        stats
    }
}

/// Dirichlet-prior MAP estimate `(c + tau * prior) / (total + tau)`.
pub fn map_estimate(count: u64, total: u64, prior: f64, tau: f64) -> f64 {
    (count as f64 + tau * prior) / (total as f64 + tau)
}

/// Minimum counts an n-gram needs to be kept as an explicit parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cutoffs {
    pub bigram: u64,
    pub trigram: u64,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self {
            bigram: 1,
            trigram: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMetadata {
    /// Name of the source corpus.
    pub label: String,
    /// Word tokens in the source corpus, before vocabulary mapping.
    pub tokens: u64,
    /// Word types in the source corpus.
    pub types: u64,
}

#[derive(Debug, Clone, PartialEq)]
struct MapLayer {
    tau: f64,
    stats: EventStats,
}

/// Closed-vocabulary trigram model with Witten-Bell backoff
/// (trigram → bigram → unigram → uniform), optionally followed by MAP
/// adaptation layers.
///
/// A MAP layer with prior weight `tau` replaces `p(w|h)` for every history
/// `h` it has local counts for:
///
/// ```text
/// p'(w|h) = (c_local(h,w) + tau * p(w|h)) / (C_local(h) + tau)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    vocab: Vocabulary,
    base: EventStats,
    layers: Vec<MapLayer>,
    metadata: ModelMetadata,
}

/// Bigram conditionals in backoff form, for the decoder's first pass:
/// `p(w|v) = explicit[v][w]` when listed, else `backoff[v] * unigram[w]`.
#[derive(Debug, Clone)]
pub struct BigramTable {
    pub unigram: Vec<f64>,
    pub rows: Vec<BigramRow>,
}

#[derive(Debug, Clone, Default)]
pub struct BigramRow {
    pub backoff: f64,
    pub explicit: Vec<(WordId, f64)>,
}

impl BigramTable {
    pub fn prob(&self, w: WordId, v: WordId) -> f64 {
        let row = &self.rows[v as usize];
        row.explicit
            .iter()
            .find(|(x, _)| *x == w)
            .map(|&(_, p)| p)
            .unwrap_or_else(|| row.backoff * self.unigram[w as usize])
    }
}

const SNAPSHOT_MAGIC: &str = "SPOKENIR-LM";
const SNAPSHOT_VERSION: u8 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct StatsSnapshot {
    unigram: Vec<(WordId, u64)>,
    bigram: Vec<(WordId, WordId, u64)>,
    trigram: Vec<(WordId, WordId, WordId, u64)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerSnapshot {
    tau: f64,
    counts: StatsSnapshot,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelSnapshot {
    metadata: ModelMetadata,
    vocabulary: Vec<String>,
    counts: StatsSnapshot,
    adaptations: Vec<LayerSnapshot>,
}

impl NGramModel {
    pub fn estimate(
        counts: &CountTable,
        vocab: &Vocabulary,
        cutoffs: Cutoffs,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        let mapped = counts.mapped_to(vocab);
        let base = EventStats::from_counts(&mapped, vocab, &cutoffs);
        if base.unigram.total == 0 {
            return Err(Error::EmptyCorpus("no n-gram counts to estimate from"));
        }
        Ok(Self {
            vocab: vocab.clone(),
            base,
            layers: Vec::new(),
            metadata,
        })
    }

    /// Every predicted symbol gets `1 / (K + 2)` regardless of history.
    pub fn uniform(vocab: &Vocabulary) -> Self {
        Self {
            vocab: vocab.clone(),
            base: EventStats::default(),
            layers: Vec::new(),
            metadata: ModelMetadata {
                label: "uniform".into(),
                ..ModelMetadata::default()
            },
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.metadata.label = label.into();
    }

    pub fn adaptation_depth(&self) -> usize {
        self.layers.len()
    }

    fn base_prob(&self, w: WordId, h: &[WordId]) -> f64 {
        let uniform = 1.0 / self.vocab.predicted_count() as f64;
        let wb = |stats: Option<&HistoryStats>, lower: f64| match stats {
            Some(s) if s.total > 0 => s.witten_bell(w, lower),
            _ => lower,
        };
        let p1 = wb(Some(&self.base.unigram), uniform);
        match *h {
            [] => p1,
            [v] => wb(self.base.bigram.get(&v), p1),
            [u, v] => {
                let p2 = wb(self.base.bigram.get(&v), p1);
                wb(self.base.trigram.get(&(u, v)), p2)
            }
            _ => unreachable!("history longer than two words"),
        }
    }

    /// `p(w | h)` over symbol ids; only the last two history symbols are used.
    pub fn prob_ids(&self, w: WordId, h: &[WordId]) -> f64 {
        if w == self.vocab.bos() {
            return 0.0;
        }
        let h = &h[h.len().saturating_sub(2)..];
        let mut p = self.base_prob(w, h);
        for layer in &self.layers {
            if let Some(s) = layer.stats.lookup(h) {
                p = map_estimate(s.count(w), s.total, p, layer.tau);
            }
        }
        p
    }

    /// `p(w | h)` for words; out-of-vocabulary words are treated as `<unk>`.
    pub fn prob(&self, w: &str, h: &[&str]) -> f64 {
        let h: Vec<WordId> = h.iter().map(|x| self.vocab.id(x)).collect();
        self.prob_ids(self.vocab.id(w), &h)
    }

    /// Witten-Bell backoff weight of a history in the unadapted model.
    pub fn backoff_weight(&self, h: &[&str]) -> f64 {
        let h: Vec<WordId> = h.iter().map(|x| self.vocab.id(x)).collect();
        self.base
            .lookup(&h)
            .map_or(1.0, HistoryStats::backoff_weight)
    }

    /// Natural-log probability of one sentence, including `</s>`.
    pub fn sequence_logprob<S: AsRef<str>>(&self, words: &[S]) -> f64 {
        let ids: Vec<WordId> = words.iter().map(|w| self.vocab.id(w.as_ref())).collect();
        self.sequence_logprob_ids(&ids)
    }

    pub fn sequence_logprob_ids(&self, ids: &[WordId]) -> f64 {
        let mut history = Vec::with_capacity(ids.len() + 2);
        history.push(self.vocab.bos());
        let mut total = 0.0;
        for &w in ids.iter().chain(std::iter::once(&self.vocab.eos())) {
            total += self.prob_ids(w, &history).ln();
            history.push(w);
        }
        total
    }

    /// `exp(-logprob / events)` where every sentence contributes its words
    /// plus one `</s>` event.
    pub fn perplexity<S: AsRef<[String]>>(&self, sentences: &[S]) -> Result<f64> {
        let mut logprob = 0.0;
        let mut events = 0usize;
        for s in sentences {
            let s = s.as_ref();
            if s.is_empty() {
                continue;
            }
            logprob += self.sequence_logprob(s);
            events += s.len() + 1;
        }
        if events == 0 {
            return Err(Error::EmptyCorpus("perplexity needs at least one token"));
        }
        Ok((-logprob / events as f64).exp())
    }

    /// Histories with explicit statistics in the base model or any adaptation.
    pub fn explicit_histories(&self) -> Vec<Vec<WordId>> {
        let mut set: BTreeSet<Vec<WordId>> = self.base.histories().collect();
        for layer in &self.layers {
            set.extend(layer.stats.histories());
        }
        set.insert(Vec::new());
        set.into_iter().collect()
    }

    /// `sum_w p(w|h)` over all predicted symbols.
    pub fn probability_mass(&self, h: &[WordId]) -> f64 {
        self.vocab.predicted().map(|w| self.prob_ids(w, h)).sum()
    }

    /// MAP re-estimation from local counts, with the current model as prior.
    /// The vocabulary is kept fixed; local OOV words fold into `<unk>`.
    pub fn map_adapt(&self, local: &CountTable, tau: f64) -> Result<NGramModel> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "MAP prior weight must be positive and finite, got {tau}"
            )));
        }
        let mapped = local.mapped_to(&self.vocab);
        let stats = EventStats::from_counts(&mapped, &self.vocab, &Cutoffs::default());
        let mut adapted = self.clone();
        if !stats.is_empty() {
            adapted.layers.push(MapLayer { tau, stats });
        }
        Ok(adapted)
    }

    /// Sum of `c(h,w) * ln p(w|h)` over the unigram, bigram and trigram
    /// events of `counts`.
    pub fn count_log_likelihood(&self, counts: &CountTable) -> f64 {
        let mapped = counts.mapped_to(&self.vocab);
        let stats = EventStats::from_counts(&mapped, &self.vocab, &Cutoffs::default());
        let mut histories: Vec<Vec<WordId>> = stats.histories().collect();
        histories.sort_unstable();
        let mut ll = 0.0;
        for h in histories {
            let s = stats.lookup(&h).expect("listed history");
            let mut succ: Vec<(&WordId, &u64)> = s.succ.iter().collect();
            succ.sort_unstable();
            for (&w, &c) in succ {
                ll += c as f64 * self.prob_ids(w, &h).ln();
            }
        }
        ll
    }

    /// Bigram conditionals for every history symbol, in backoff form.
    pub fn bigram_table(&self) -> BigramTable {
        let n = self.vocab.symbol_count();
        let unigram: Vec<f64> = (0..n as WordId)
            .map(|w| {
                if w == self.vocab.bos() {
                    0.0
                } else {
                    self.base_prob(w, &[])
                }
            })
            .collect();
        let mut rows = Vec::with_capacity(n);
        for v in 0..n as WordId {
            let mut explicit: HashMap<WordId, f64> = HashMap::new();
            let mut backoff = 1.0;
            if let Some(s) = self.base.lookup(&[v]) {
                backoff = s.backoff_weight();
                for &w in s.succ.keys() {
                    explicit.insert(w, s.witten_bell(w, unigram[w as usize]));
                }
            }
            for layer in &self.layers {
                let Some(s) = layer.stats.lookup(&[v]) else {
                    continue;
                };
                for &w in s.succ.keys() {
                    explicit
                        .entry(w)
                        .or_insert_with(|| backoff * unigram[w as usize]);
                }
                for (w, p) in explicit.iter_mut() {
                    *p = map_estimate(s.count(*w), s.total, *p, layer.tau);
                }
                backoff *= layer.tau / (s.total as f64 + layer.tau);
            }
            let mut explicit: Vec<(WordId, f64)> = explicit.into_iter().collect();
            explicit.sort_unstable_by_key(|&(w, _)| w);
            rows.push(BigramRow { backoff, explicit });
        }
        BigramTable { unigram, rows }
    }

    /// Snapshot layout: a `SPOKENIR-LM <version>` header line, then one JSON
    /// object with `metadata`, `vocabulary` (regular words in id order;
    /// `<s>`, `</s>`, `<unk>` follow implicitly), `counts` (sorted
    /// `[w,c]`, `[v,w,c]`, `[u,v,w,c]` event lists) and `adaptations`
    /// (MAP layers, each a `tau` with its own event lists).
    pub fn write_snapshot(&self, mut w: impl Write) -> Result<()> {
        let snapshot = ModelSnapshot {
            metadata: self.metadata.clone(),
            vocabulary: self.vocab.words().to_vec(),
            counts: self.base.to_snapshot(),
            adaptations: self
                .layers
                .iter()
                .map(|l| LayerSnapshot {
                    tau: l.tau,
                    counts: l.stats.to_snapshot(),
                })
                .collect(),
        };
        writeln!(w, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}")?;
        serde_json::to_writer(&mut w, &snapshot)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read_snapshot(mut r: impl BufRead) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        crate::index::check_header(&header, SNAPSHOT_MAGIC, SNAPSHOT_VERSION)?;
        let snapshot: ModelSnapshot = serde_json::from_reader(r)?;
        let vocab = Vocabulary::from_words(snapshot.vocabulary.iter().cloned());
        if vocab.len() != snapshot.vocabulary.len() {
            return Err(Error::Snapshot("vocabulary has duplicates".into()));
        }
        let max_id = vocab.symbol_count() as WordId;
        let valid = |s: &StatsSnapshot| {
            s.unigram.iter().all(|&(w, _)| w < max_id)
                && s.bigram.iter().all(|&(v, w, _)| v < max_id && w < max_id)
                && s.trigram
                    .iter()
                    .all(|&(u, v, w, _)| u < max_id && v < max_id && w < max_id)
        };
        if !valid(&snapshot.counts) || !snapshot.adaptations.iter().all(|l| valid(&l.counts)) {
            return Err(Error::Snapshot("symbol id out of range".into()));
        }
        let mut layers = Vec::with_capacity(snapshot.adaptations.len());
        for l in &snapshot.adaptations {
            if !(l.tau > 0.0 && l.tau.is_finite()) {
                return Err(Error::Snapshot(format!("invalid tau {}", l.tau)));
            }
            layers.push(MapLayer {
                tau: l.tau,
                stats: EventStats::from_snapshot(&l.counts),
            });
        }
        Ok(Self {
            vocab,
            base: EventStats::from_snapshot(&snapshot.counts),
            layers,
            metadata: snapshot.metadata,
        })
    }
}
