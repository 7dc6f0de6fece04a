use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{NGramModel, WordId};

use super::channel::{ChannelModel, LogTables};
use super::lexicon::{Lexicon, Phoneme};

/// Pruning margin of the unigram sweep that sets the beam reference.
const REFERENCE_MARGIN: f64 = 10.0;

/// Search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeConfig {
    /// Log-score margin below the reference path at each position; `None`
    /// disables pruning.
    pub beam: Option<f64>,
    /// Transcriptions returned.
    pub nbest: usize,
    /// First-pass hypotheses kept per search state, and rescored with the
    /// trigram model at the end; `None` keeps all of them.
    pub rescore_depth: Option<usize>,
    /// Upper bound on the number of decoded words.
    pub max_words: Option<usize>,
    /// Subtracted from the log score once per decoded word.
    pub word_penalty: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            beam: Some(8.0),
            nbest: 10,
            rescore_depth: Some(10),
            max_words: None,
            word_penalty: 0.0,
        }
    }
}

impl DecodeConfig {
    /// No pruning and no truncation: every word sequence is scored.
    pub fn exhaustive(max_words: usize) -> Self {
        Self {
            beam: None,
            nbest: usize::MAX,
            rescore_depth: None,
            max_words: Some(max_words),
            word_penalty: 0.0,
        }
    }

    fn validate(&self, channel: &ChannelModel) -> Result<()> {
        if let Some(b) = self.beam {
            if b.is_nan() || b < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "beam width {b} must be >= 0"
                )));
            }
        }
        if self.nbest == 0 {
            return Err(Error::InvalidParameter("nbest must be at least 1".into()));
        }
        if self.rescore_depth == Some(0) {
            return Err(Error::InvalidParameter(
                "rescore depth must be at least 1".into(),
            ));
        }
        if !(self.word_penalty >= 0.0 && self.word_penalty.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "word penalty {} must be finite and >= 0",
                self.word_penalty
            )));
        }
        if self.beam.is_none()
            && self.rescore_depth.is_none()
            && self.max_words.is_none()
            && channel.deletion() > 0.0
        {
            return Err(Error::InvalidParameter(
                "unpruned search over a channel with deletions needs max_words".into(),
            ));
        }
        Ok(())
    }
}

/// One decoded word sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcription {
    pub words: Vec<String>,
    /// `channel + lm - word_penalty * words.len()`.
    pub score: f64,
    /// Best-alignment channel log-likelihood.
    pub channel: f64,
    /// Trigram log-probability including the end of sentence.
    pub lm: f64,
}

#[derive(Debug, Clone)]
struct TrieNode {
    phoneme: Phoneme,
    depth: usize,
    /// Preorder index just past this node's subtree.
    end: usize,
    words: Vec<WordId>,
}

/// Pronunciation prefix tree in preorder; node 0 is the root.
#[derive(Debug, Clone)]
struct Trie {
    nodes: Vec<TrieNode>,
    max_depth: usize,
}

impl Trie {
    fn build(entries: &[(WordId, Vec<Phoneme>)]) -> Self {
        struct Building {
            phoneme: Phoneme,
            children: BTreeMap<Phoneme, usize>,
            words: Vec<WordId>,
        }
        let mut tree = vec![Building {
            phoneme: 0,
            children: BTreeMap::new(),
            words: vec![],
        }];
        for (w, pron) in entries {
            let mut at = 0;
            for &p in pron {
                at = match tree[at].children.get(&p) {
                    Some(&c) => c,
                    None => {
                        tree.push(Building {
                            phoneme: p,
                            children: BTreeMap::new(),
                            words: vec![],
                        });
                        let c = tree.len() - 1;
                        tree[at].children.insert(p, c);
                        c
                    }
                };
            }
            tree[at].words.push(*w);
        }
        let mut nodes = Vec::with_capacity(tree.len());
        let mut max_depth = 0;
        // iterative preorder; `end` is patched once a subtree is finished
        let mut stack: Vec<(usize, usize, bool)> = vec![(0, 0, false)];
        let mut open: Vec<usize> = Vec::new();
        while let Some((t, depth, done)) = stack.pop() {
            if done {
                let idx = open.pop().expect("balanced");
                let end = nodes.len();
                let node: &mut TrieNode = &mut nodes[idx];
                node.end = end;
                continue;
            }
            max_depth = max_depth.max(depth);
            open.push(nodes.len());
            nodes.push(TrieNode {
                phoneme: tree[t].phoneme,
                depth,
                end: 0,
                words: std::mem::take(&mut tree[t].words),
            });
            stack.push((t, depth, true));
            for &c in tree[t].children.values().rev() {
                stack.push((c, depth + 1, false));
            }
        }
        Self { nodes, max_depth }
    }
}

impl Trie {
    /// `value` maximized over each node's subtree.
    fn subtree_max(&self, value: &[f64]) -> Vec<f64> {
        let mut out = value.to_vec();
        for i in (0..self.nodes.len()).rev() {
            let mut c = i + 1;
            while c < self.nodes[i].end {
                out[i] = out[i].max(out[c]);
                c = self.nodes[c].end;
            }
        }
        out
    }
}

/// Channel scores of every pronunciation starting at one heard position.
struct Spans {
    /// `(node, offset into buf)` for word-bearing nodes with a live column.
    ends: Vec<(usize, usize)>,
    buf: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Hyp {
    seq: u32,
    last: WordId,
    count: u32,
    score: f64,
    channel: f64,
    lm: f64,
    expanded: bool,
}

/// Interned word sequences; id 0 is the empty sequence.
struct Sequences {
    parent: Vec<u32>,
    word: Vec<WordId>,
    index: HashMap<(u32, WordId), u32>,
}

impl Sequences {
    fn new() -> Self {
        Self {
            parent: vec![0],
            word: vec![WordId::MAX],
            index: HashMap::new(),
        }
    }

    fn extend(&mut self, seq: u32, w: WordId) -> u32 {
        let next = self.parent.len() as u32;
        *self.index.entry((seq, w)).or_insert_with(|| {
            self.parent.push(seq);
            self.word.push(w);
            next
        })
    }

    fn words(&self, mut seq: u32) -> Vec<WordId> {
        let mut out = Vec::new();
        while seq != 0 {
            out.push(self.word[seq as usize]);
            seq = self.parent[seq as usize];
        }
        out.reverse();
        out
    }
}

/// Decoder tables for one model, lexicon and channel; reusable across queries.
pub struct Decoder<'a> {
    model: &'a NGramModel,
    channel: &'a ChannelModel,
    trie: Trie,
    ln_unigram: Vec<f64>,
    ln_backoff: Vec<f64>,
    explicit: Vec<Vec<(WordId, f64)>>,
    ln_end: Vec<f64>,
    /// Best `ln p(w | v)` over all histories `v` and subtree words `w`.
    bigram_ahead: Vec<f64>,
    skipped: usize,
}

impl<'a> Decoder<'a> {
    /// Vocabulary words that cannot be spelled in the channel's alphabet are
    /// left out of the search.
    pub fn new(
        model: &'a NGramModel,
        lexicon: &Lexicon,
        channel: &'a ChannelModel,
    ) -> Result<Self> {
        let vocab = model.vocab();
        let mut entries = Vec::with_capacity(vocab.len());
        let mut skipped = 0;
        for (i, word) in vocab.words().iter().enumerate() {
            let pron = match lexicon.pronounce(word) {
                Ok(p) => p,
                Err(Error::UnresolvableWord(_)) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            match channel.alphabet().encode(&pron) {
                Ok(ids) => entries.push((i as WordId, ids)),
                Err(_) => skipped += 1,
            }
        }
        if skipped > 0 {
            log::warn!("{skipped} vocabulary words have no usable pronunciation");
        }
        let trie = Trie::build(&entries);
        let table = model.bigram_table();
        let eos = vocab.eos();
        let ln_unigram: Vec<f64> = table.unigram.iter().map(|p| p.ln()).collect();
        let ln_backoff: Vec<f64> = table.rows.iter().map(|r| r.backoff.ln()).collect();
        let ln_end = (0..table.rows.len() as WordId)
            .map(|v| table.prob(eos, v).ln())
            .collect();
        let explicit: Vec<Vec<(WordId, f64)>> = table
            .rows
            .into_iter()
            .map(|r| {
                r.explicit
                    .into_iter()
                    .filter(|&(w, _)| w < vocab.len() as WordId)
                    .map(|(w, p)| (w, p.ln()))
                    .collect()
            })
            .collect();
        let top_backoff = ln_backoff.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut best_bigram: Vec<f64> = ln_unigram.iter().map(|lq| lq + top_backoff).collect();
        for row in &explicit {
            for &(w, lp) in row {
                let b = &mut best_bigram[w as usize];
                *b = b.max(lp);
            }
        }
        let bigram_words: Vec<f64> = trie
            .nodes
            .iter()
            .map(|n| {
                n.words
                    .iter()
                    .map(|&w| best_bigram[w as usize])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let bigram_ahead = trie.subtree_max(&bigram_words);
        Ok(Self {
            model,
            channel,
            trie,
            bigram_ahead,
            ln_unigram,
            ln_backoff,
            explicit,
            ln_end,
            skipped,
        })
    }

    /// Vocabulary words left out for lack of a pronunciation.
    pub fn skipped_words(&self) -> usize {
        self.skipped
    }

    pub fn decode<S: AsRef<str>>(
        &self,
        heard: &[S],
        config: &DecodeConfig,
    ) -> Result<Vec<Transcription>> {
        let x = self.channel.alphabet().encode(heard)?;
        self.decode_ids(&x, config)
    }

    pub fn decode_ids(&self, x: &[Phoneme], config: &DecodeConfig) -> Result<Vec<Transcription>> {
        config.validate(self.channel)?;
        let logs = self.channel.logs();
        if x.is_empty() {
            let lm = self.model.sequence_logprob_ids(&[]);
            let channel = logs.gap(0);
            return Ok(vec![Transcription {
                words: vec![],
                score: channel + lm,
                channel,
                lm,
            }]);
        }
        let n = x.len();
        let thresholds = match config.beam {
            Some(b) => {
                let r = self.reference(x, config.word_penalty);
                r.iter().map(|v| v - b).collect()
            }
            None => vec![f64::NEG_INFINITY; n + 1],
        };

        let k = config.rescore_depth.unwrap_or(usize::MAX);
        let counted = config.max_words.is_some();
        let bos = self.model.vocab().bos();
        let mut seqs = Sequences::new();
        let mut hyps: Vec<Hyp> = Vec::new();
        let mut states: Vec<BTreeMap<(WordId, u32), Vec<u32>>> = vec![BTreeMap::new(); n + 1];

        for (t, state) in states.iter_mut().enumerate() {
            let g = logs.gap(t);
            if g >= thresholds[t] && g > f64::NEG_INFINITY {
                hyps.push(Hyp {
                    seq: 0,
                    last: bos,
                    count: 0,
                    score: g,
                    channel: g,
                    lm: 0.0,
                    expanded: false,
                });
                state.insert((bos, 0), vec![hyps.len() as u32 - 1]);
            }
        }

        let mut cols = vec![vec![f64::NEG_INFINITY; n + 1]; self.trie.max_depth + 1];
        let mut scratch = Scratch {
            explicit: vec![Vec::new(); self.model.vocab().len()],
            touched: Vec::new(),
            seen: Vec::new(),
            live: vec![0; self.model.vocab().len()],
            stamp: 0,
        };
        for j in 0..=n {
            let mut spans: Option<Spans> = None;
            loop {
                let batch: Vec<u32> = states[j]
                    .values()
                    .flatten()
                    .copied()
                    .filter(|&h| {
                        let h = &hyps[h as usize];
                        !h.expanded && h.score >= thresholds[j]
                    })
                    .collect();
                if batch.is_empty() {
                    break;
                }
                for &h in &batch {
                    hyps[h as usize].expanded = true;
                }
                let spans = spans.get_or_insert_with(|| {
                    let best = batch
                        .iter()
                        .map(|&h| hyps[h as usize].score)
                        .fold(f64::NEG_INFINITY, f64::max);
                    // partial words are held to the beam of the position they reach,
                    // with the best bigram below them added
                    let floor: Vec<f64> = thresholds[j..].iter().map(|f| f - best).collect();
                    self.spans(x, j, &floor, &self.bigram_ahead, &mut cols)
                });
                let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
                for &h in &batch {
                    let c = hyps[h as usize].count;
                    if config.max_words.is_none_or(|m| (c as usize) < m) {
                        groups
                            .entry(if counted { c } else { 0 })
                            .or_default()
                            .push(h);
                    }
                }
                scratch.seen.resize(hyps.len(), 0);
                for (_, group) in groups {
                    let new = self.extend(
                        &group,
                        &hyps,
                        spans,
                        j,
                        n,
                        &thresholds,
                        k,
                        config.word_penalty,
                        &mut scratch,
                    );
                    for (from, w, t, ln_p, d) in new {
                        let parent = &hyps[from as usize];
                        let seq = seqs.extend(parent.seq, w);
                        let hyp = Hyp {
                            seq,
                            last: w,
                            count: parent.count + 1,
                            score: parent.score + ln_p + d - config.word_penalty,
                            channel: parent.channel + d,
                            lm: parent.lm + ln_p,
                            expanded: false,
                        };
                        let key = (w, if counted { hyp.count } else { 0 });
                        let list = states[t].entry(key).or_default();
                        insert_ranked(list, &mut hyps, hyp, k);
                    }
                }
            }
        }

        let mut finals: Vec<(f64, u32)> = states[n]
            .values()
            .flatten()
            .map(|&h| {
                let hyp = &hyps[h as usize];
                (hyp.score + self.ln_end[hyp.last as usize], h)
            })
            .filter(|(s, _)| *s > f64::NEG_INFINITY)
            .collect();
        if finals.is_empty() {
            return Err(match config.beam {
                Some(b) => Error::BeamTooNarrow(b),
                None => Error::InvalidParameter(
                    "no word sequence can produce the heard phonemes".into(),
                ),
            });
        }
        finals.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        finals.truncate(k);

        let vocab = self.model.vocab();
        let mut out: Vec<Transcription> = finals
            .into_iter()
            .map(|(_, h)| {
                let hyp = &hyps[h as usize];
                let ids = seqs.words(hyp.seq);
                let lm = self.model.sequence_logprob_ids(&ids);
                Transcription {
                    score: hyp.channel + lm - config.word_penalty * ids.len() as f64,
                    words: ids.iter().map(|&w| vocab.symbol(w).to_string()).collect(),
                    channel: hyp.channel,
                    lm,
                }
            })
            .collect();
        rank(&mut out);
        out.truncate(config.nbest);
        Ok(out)
    }

    /// Score at each position of a greedy path: every position keeps only
    /// its best arrival, and words are scored with the bigram from that
    /// arrival's last word. Pruning is measured from it so that it does not
    /// depend on the beam itself.
    fn reference(&self, x: &[Phoneme], penalty: f64) -> Vec<f64> {
        let n = x.len();
        let logs = self.channel.logs();
        let mut r: Vec<f64> = (0..=n).map(|t| logs.gap(t)).collect();
        let mut last = vec![self.model.vocab().bos(); n + 1];
        let mut cols = vec![vec![f64::NEG_INFINITY; n + 1]; self.trie.max_depth + 1];
        let mut row = vec![f64::NAN; self.ln_unigram.len()];
        for j in 0..n {
            if r[j] == f64::NEG_INFINITY {
                continue;
            }
            // a fixed margin keeps this sweep cheap and independent of the beam
            let floor: Vec<f64> = r[j..].iter().map(|v| v - REFERENCE_MARGIN - r[j]).collect();
            let spans = self.spans(x, j, &floor, &self.bigram_ahead, &mut cols);
            let v = last[j] as usize;
            for &(w, lp) in &self.explicit[v] {
                row[w as usize] = lp;
            }
            let m = n - j;
            for &(node, off) in &spans.ends {
                for &w in &self.trie.nodes[node].words {
                    let e = row[w as usize];
                    let lp = if e.is_nan() {
                        self.ln_backoff[v] + self.ln_unigram[w as usize]
                    } else {
                        e
                    } - penalty;
                    for o in 1..=m {
                        let s = r[j] + spans.buf[off + o] + lp;
                        if s > r[j + o] {
                            r[j + o] = s;
                            last[j + o] = w;
                        }
                    }
                }
            }
            for &(w, _) in &self.explicit[v] {
                row[w as usize] = f64::NAN;
            }
        }
        r
    }

    /// Column dynamic program down the trie from heard position `j`. Cells
    /// whose score plus the subtree's `ahead` bound falls below `floor[o]` are
    /// dropped, and subtrees with no live cell skipped.
    fn spans(
        &self,
        x: &[Phoneme],
        j: usize,
        floor: &[f64],
        ahead: &[f64],
        cols: &mut [Vec<f64>],
    ) -> Spans {
        let logs: &LogTables = self.channel.logs();
        let m = x.len() - j;
        let heard = &x[j..];
        cols[0][..=m].fill(f64::NEG_INFINITY);
        cols[0][0] = 0.0;
        let mut ends = Vec::new();
        let mut buf = Vec::new();
        let nodes = &self.trie.nodes;
        let mut i = 1;
        while i < nodes.len() {
            let node = &nodes[i];
            let (prev, cur) = cols.split_at_mut(node.depth);
            let prev = &prev[node.depth - 1][..=m];
            let cur = &mut cur[0][..=m];
            let row = &logs.emit[node.phoneme as usize * logs.width..][..logs.width];
            let mut open = f64::NEG_INFINITY;
            let mut live = false;
            let la = ahead[i];
            for o in 0..=m {
                let mut h = prev[o] + logs.delete;
                if o > 0 {
                    h = h.max(prev[o - 1] + row[heard[o - 1] as usize]);
                }
                open = if o == 0 { h } else { h.max(open + logs.insert) };
                let g = open + logs.stop;
                if g + la >= floor[o] && g > f64::NEG_INFINITY {
                    cur[o] = g;
                    live = true;
                } else {
                    cur[o] = f64::NEG_INFINITY;
                }
            }
            if !live {
                i = node.end;
                continue;
            }
            if !node.words.is_empty() {
                ends.push((i, buf.len()));
                buf.extend_from_slice(cur);
            }
            i += 1;
        }
        Spans { ends, buf }
    }

    /// Word extensions of `group` (hypotheses at `j` with equal word count):
    /// `(parent, word, end, ln p(word | parent.last), channel score)`.
    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        group: &[u32],
        hyps: &[Hyp],
        spans: &Spans,
        j: usize,
        n: usize,
        thresholds: &[f64],
        k: usize,
        penalty: f64,
        scratch: &mut Scratch,
    ) -> Vec<(u32, WordId, usize, f64, f64)> {
        // backoff route: best hypotheses by score + ln backoff(last)
        let mut backoff: Vec<(f64, u32)> = group
            .iter()
            .map(|&h| {
                let hyp = &hyps[h as usize];
                (hyp.score + self.ln_backoff[hyp.last as usize], h)
            })
            .filter(|(s, _)| *s > f64::NEG_INFINITY)
            .collect();
        backoff.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        backoff.truncate(k);
        // only words ending somewhere in this span set need explicit arrivals
        scratch.stamp += 1;
        for &(node, _) in &spans.ends {
            for &w in &self.trie.nodes[node].words {
                scratch.live[w as usize] = scratch.stamp;
            }
        }
        for &h in group {
            let hyp = &hyps[h as usize];
            for &(w, lp) in &self.explicit[hyp.last as usize] {
                if scratch.live[w as usize] != scratch.stamp {
                    continue;
                }
                let list = &mut scratch.explicit[w as usize];
                if list.is_empty() {
                    scratch.touched.push(w);
                }
                list.push((hyp.score + lp, h, lp));
            }
        }

        let m = n - j;
        let mut out = Vec::new();
        let mut incoming: Vec<(f64, u32, f64)> = Vec::new();
        for &(node, off) in &spans.ends {
            let col = &spans.buf[off..off + m + 1];
            for &w in &self.trie.nodes[node].words {
                incoming.clear();
                let lq = self.ln_unigram[w as usize];
                let listed = &scratch.explicit[w as usize];
                if listed.is_empty() {
                    incoming.extend(backoff.iter().map(|&(s, h)| {
                        (
                            s + lq,
                            h,
                            self.ln_backoff[hyps[h as usize].last as usize] + lq,
                        )
                    }));
                } else {
                    scratch.stamp += 1;
                    for e in listed {
                        scratch.seen[e.1 as usize] = scratch.stamp;
                    }
                    incoming.extend_from_slice(listed);
                    for &(s, h) in &backoff {
                        if scratch.seen[h as usize] != scratch.stamp {
                            let lp = self.ln_backoff[hyps[h as usize].last as usize] + lq;
                            incoming.push((s + lq, h, lp));
                        }
                    }
                    let order = |a: &(f64, u32, f64), b: &(f64, u32, f64)| {
                        b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
                    };
                    if incoming.len() > k {
                        incoming.select_nth_unstable_by(k, order);
                        incoming.truncate(k);
                    }
                    incoming.sort_unstable_by(order);
                }
                let Some(&(top, _, _)) = incoming.first() else {
                    continue;
                };
                for (o, &d) in col.iter().enumerate() {
                    if d == f64::NEG_INFINITY {
                        continue;
                    }
                    let t = j + o;
                    if top + d - penalty < thresholds[t] {
                        continue;
                    }
                    for &(s, h, lp) in &incoming {
                        if s + d - penalty < thresholds[t] || s == f64::NEG_INFINITY {
                            break;
                        }
                        out.push((h, w, t, lp, d));
                    }
                }
            }
        }
        for w in scratch.touched.drain(..) {
            scratch.explicit[w as usize].clear();
        }
        out
    }
}

/// Per-decode buffers for [`Decoder::extend`].
struct Scratch {
    /// Explicit-bigram arrivals per word.
    explicit: Vec<Vec<(f64, u32, f64)>>,
    touched: Vec<WordId>,
    /// Hypotheses already arriving through an explicit bigram, by stamp.
    seen: Vec<u64>,
    /// Words with a live span, by stamp.
    live: Vec<u64>,
    stamp: u64,
}

/// Keeps `list` sorted best-first with at most `k` entries and one entry per
/// word sequence.
fn insert_ranked(list: &mut Vec<u32>, hyps: &mut Vec<Hyp>, hyp: Hyp, k: usize) {
    if let Some(pos) = list.iter().position(|&h| hyps[h as usize].seq == hyp.seq) {
        let old = list[pos] as usize;
        if hyp.score <= hyps[old].score {
            return;
        }
        list.remove(pos);
    } else if list.len() >= k {
        let worst = hyps[*list.last().expect("k >= 1") as usize].score;
        if hyp.score <= worst {
            return;
        }
        list.pop();
    }
    let score = hyp.score;
    hyps.push(hyp);
    let id = hyps.len() as u32 - 1;
    let at = list.partition_point(|&h| hyps[h as usize].score >= score);
    list.insert(at, id);
}

/// Sorts best-first; scores within 1e-9 of each other are ordered by words.
fn rank(out: &mut [Transcription]) {
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut start = 0;
    while start < out.len() {
        let mut end = start + 1;
        while end < out.len() && (out[end - 1].score - out[end].score).abs() <= 1e-9 {
            end += 1;
        }
        out[start..end].sort_by(|a, b| a.words.cmp(&b.words));
        start = end;
    }
}

/// Builds a [`Decoder`] and decodes one heard sequence.
pub fn decode<S: AsRef<str>>(
    heard: &[S],
    lexicon: &Lexicon,
    channel: &ChannelModel,
    model: &NGramModel,
    config: &DecodeConfig,
) -> Result<Vec<Transcription>> {
    Decoder::new(model, lexicon, channel)?.decode(heard, config)
}
