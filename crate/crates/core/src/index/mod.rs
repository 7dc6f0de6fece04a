//! Word-based inverted index and the probabilistic relevance score
//!
//! ```text
//! score(q, i) = sum over distinct t in q of  TF(t,i) / (DL(i)/avglen + TF(t,i)) * ln(N / DF(t))
//! ```
//!
//! `DL` is the character length of the indexed fields by default.

mod run_file;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{extract_terms, Document, Field, Stoplist, Tokenizer};
use crate::error::{Error, Result};

pub use run_file::{parse_run, write_run, RunLine};

/// Default number of documents returned per query.
pub const DEFAULT_CUTOFF: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LengthMeasure {
    #[default]
    Characters,
    Tokens,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_len: Vec<u64>,
    doc_ids: Vec<String>,
    avglen: f64,
    fields: Vec<Field>,
    length_measure: LengthMeasure,
    /// Sum each query term once per occurrence rather than once per type.
    #[serde(default)]
    count_repeated_terms: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub topic_id: String,
    pub entries: Vec<(String, f64)>,
}

impl RankedList {
    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(d, _)| d.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexOptions {
    pub fields: Vec<Field>,
    pub length_measure: LengthMeasure,
    pub count_repeated_terms: bool,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            fields: crate::corpus::default_fields(),
            length_measure: LengthMeasure::Characters,
            count_repeated_terms: false,
        }
    }
}

pub fn build_index(
    docs: &[Document],
    options: &IndexOptions,
    tokenizer: &dyn Tokenizer,
    stoplist: &Stoplist,
) -> Result<InvertedIndex> {
    if docs.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut doc_len = Vec::with_capacity(docs.len());
    let mut doc_ids = Vec::with_capacity(docs.len());
    let mut seen = std::collections::HashSet::with_capacity(docs.len());

    for (ordinal, doc) in docs.iter().enumerate() {
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::DuplicateId(doc.id.clone()));
        }
        let text = doc.selected_text(&options.fields);
        let tokens = tokenizer.tokenize(&text);
        let terms = extract_terms(&tokens, stoplist);
        let mut tf: HashMap<&str, u32> = HashMap::new();
        for t in &terms {
            *tf.entry(t.as_str()).or_default() += 1;
        }
        for (term, count) in tf {
            postings.entry(term.to_string()).or_default().push(Posting {
                doc: ordinal as u32,
                tf: count,
            });
        }
        let len = match options.length_measure {
            LengthMeasure::Characters => doc.selected_char_len(&options.fields),
            LengthMeasure::Tokens => tokens.len(),
        };
        doc_len.push(len as u64);
        doc_ids.push(doc.id.clone());
    }
    for list in postings.values_mut() {
        list.sort_unstable_by_key(|p| p.doc);
    }
    let total: u64 = doc_len.iter().sum();
    let avglen = total as f64 / docs.len() as f64;

    Ok(InvertedIndex {
        postings,
        doc_len,
        doc_ids,
        avglen,
        fields: options.fields.clone(),
        length_measure: options.length_measure,
        count_repeated_terms: options.count_repeated_terms,
    })
}

const SNAPSHOT_MAGIC: &str = "SPOKENIR-INDEX";
const SNAPSHOT_VERSION: u8 = 1;

impl InvertedIndex {
    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avglen(&self) -> f64 {
        self.avglen
    }

    pub fn doc_len(&self, ordinal: usize) -> Option<u64> {
        self.doc_len.get(ordinal).copied()
    }

    pub fn doc_id(&self, ordinal: usize) -> Option<&str> {
        self.doc_ids.get(ordinal).map(String::as_str)
    }

    pub fn ordinal_of(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == doc_id)
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn tf(&self, term: &str, ordinal: usize) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| {
                list.binary_search_by_key(&(ordinal as u32), |p| p.doc)
                    .ok()
                    .map(|i| list[i].tf)
            })
            .unwrap_or(0)
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn length_measure(&self) -> LengthMeasure {
        self.length_measure
    }

    /// Query terms with their multiplicity in the sum, in a fixed order.
    fn weighted_terms<'q>(&self, query_terms: &'q [String]) -> Vec<(&'q str, f64)> {
        let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
        for t in query_terms {
            *counts.entry(t.as_str()).or_default() += 1.0;
        }
        counts
            .into_iter()
            .map(|(t, c)| (t, if self.count_repeated_terms { c } else { 1.0 }))
            .collect()
    }

    fn term_weight(&self, tf: u32, dl: u64, df: usize) -> f64 {
        let tf = f64::from(tf);
        let n = self.n_docs() as f64;
        tf / (dl as f64 / self.avglen + tf) * (n / df as f64).ln()
    }

    pub fn score_document(&self, query_terms: &[String], ordinal: usize) -> Result<f64> {
        let dl = self
            .doc_len(ordinal)
            .ok_or(Error::UnknownDocument(ordinal))?;
        let mut score = 0.0;
        for (term, mult) in self.weighted_terms(query_terms) {
            let df = self.df(term);
            if df == 0 {
                continue;
            }
            let tf = self.tf(term, ordinal);
            if tf == 0 {
                continue;
            }
            score += mult * self.term_weight(tf, dl, df);
        }
        Ok(score)
    }

    /// Ranks every document with a positive score; ties go to the smaller doc id.
    pub fn retrieve(&self, topic_id: &str, query_terms: &[String], cutoff: usize) -> RankedList {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for (term, mult) in self.weighted_terms(query_terms) {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            for p in list {
                let w = mult * self.term_weight(p.tf, self.doc_len[p.doc as usize], list.len());
                *acc.entry(p.doc).or_default() += w;
            }
        }
        let mut scored: Vec<(&str, f64)> = acc
            .into_iter()
            .filter(|&(_, s)| s > 0.0)
            .map(|(d, s)| (self.doc_ids[d as usize].as_str(), s))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        scored.truncate(cutoff);
        RankedList {
            topic_id: topic_id.to_string(),
            entries: scored
                .into_iter()
                .map(|(d, s)| (d.to_string(), s))
                .collect(),
        }
    }

    /// Retrieves with the terms extracted from free text.
    pub fn search_text(
        &self,
        topic_id: &str,
        text: &str,
        tokenizer: &dyn Tokenizer,
        stoplist: &Stoplist,
        cutoff: usize,
    ) -> RankedList {
        let terms = extract_terms(&tokenizer.tokenize(text), stoplist);
        self.retrieve(topic_id, &terms, cutoff)
    }

    /// Snapshot layout: a `SPOKENIR-INDEX <version>` header line followed by
    /// one JSON object with the postings, lengths, ids and options.
    pub fn write_snapshot(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}")?;
        serde_json::to_writer(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read_snapshot(mut r: impl BufRead) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        check_header(&header, SNAPSHOT_MAGIC, SNAPSHOT_VERSION)?;
        let index: InvertedIndex = serde_json::from_reader(r)?;
        if index.doc_ids.len() != index.doc_len.len() || index.doc_ids.is_empty() {
            return Err(Error::Snapshot("inconsistent document tables".into()));
        }
        Ok(index)
    }
}

pub(crate) fn check_header(line: &str, magic: &str, version: u8) -> Result<()> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(magic) {
        return Err(Error::Snapshot(format!("missing {magic} header")));
    }
    let found: Option<u8> = parts.next().and_then(|v| v.parse().ok());
    if found != Some(version) {
        return Err(Error::Snapshot(format!(
            "unsupported {magic} version {:?} (expected {version})",
            found
        )));
    }
    Ok(())
}

/// Distinct-term helper shared with tests and the pipeline logs.
pub fn distinct_terms(terms: &[String]) -> BTreeSet<&str> {
    terms.iter().map(String::as_str).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DefaultTokenizer, Stoplist};

    fn doc(id: &str, title: &str) -> Document {
        let mut d = Document::new(id);
        d.title = title.into();
        d
    }

    fn terms(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn build(docs: &[Document]) -> InvertedIndex {
        build_index(
            docs,
            &IndexOptions::default(),
            &DefaultTokenizer,
            &Stoplist::empty(),
        )
        .unwrap()
    }

    #[test]
    fn counts_by_hand() {
        let idx = build(&[doc("d1", "a b a"), doc("d2", "b")]);
        assert_eq!(idx.df("a"), 1);
        assert_eq!(idx.df("b"), 2);
        assert_eq!(idx.tf("a", 0), 2);
        assert_eq!(idx.n_docs(), 2);
        assert_eq!(idx.doc_len(0), Some(5));
        assert_eq!(idx.avglen(), 3.0);
    }

    #[test]
    fn empty_fields_still_counted() {
        let idx = build(&[doc("d1", ""), doc("d2", "xy")]);
        assert_eq!(idx.doc_len(0), Some(0));
        assert_eq!(idx.n_docs(), 2);
        assert_eq!(idx.terms().count(), 1);
        let single = build(&[doc("d1", "hello world")]);
        assert_eq!(single.avglen(), 11.0);
    }

    #[test]
    fn empty_collection_is_an_error() {
        let err = build_index(
            &[],
            &IndexOptions::default(),
            &DefaultTokenizer,
            &Stoplist::empty(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyCollection));
    }

    #[test]
    fn single_term_score() {
        // TF=3, DL=avglen, N=1000, DF=10
        let mut docs = Vec::new();
        for i in 0..1000 {
            let title = if i == 0 {
                "t t t".to_string()
            } else if i < 10 {
                "t x x".to_string()
            } else {
                "y y y".to_string()
            };
            docs.push(doc(&format!("d{i:04}"), &title));
        }
        let idx = build(&docs);
        assert_eq!(idx.avglen(), 5.0);
        let s = idx.score_document(&terms("t"), 0).unwrap();
        assert!((s - 3.453_877_639_491_068_5).abs() < 1e-12, "{s}");
        assert_eq!(s, 3.0 / 4.0 * 100f64.ln());
    }

    #[test]
    fn zero_and_unknown_cases() {
        let idx = build(&[doc("d1", "a b"), doc("d2", "a c")]);
        assert_eq!(idx.score_document(&terms("c"), 0).unwrap(), 0.0);
        // DF = N contributes ln 1 = 0
        assert_eq!(idx.score_document(&terms("a"), 0).unwrap(), 0.0);
        assert!(matches!(
            idx.score_document(&terms("a"), 5),
            Err(Error::UnknownDocument(5))
        ));
        assert_eq!(idx.score_document(&terms("zzz"), 1).unwrap(), 0.0);
    }

    #[test]
    fn repeated_query_terms_count_once() {
        let idx = build(&[doc("d1", "a b"), doc("d2", "c")]);
        let once = idx.score_document(&terms("a"), 0).unwrap();
        let twice = idx.score_document(&terms("a a"), 0).unwrap();
        assert_eq!(once, twice);

        let mut opts = IndexOptions::default();
        opts.count_repeated_terms = true;
        let idx = build_index(
            &[doc("d1", "a b"), doc("d2", "c")],
            &opts,
            &DefaultTokenizer,
            &Stoplist::empty(),
        )
        .unwrap();
        assert_eq!(idx.score_document(&terms("a a"), 0).unwrap(), 2.0 * once);
    }

    #[test]
    fn retrieval_order_and_cutoff() {
        let idx = build(&[
            doc("d1", "x x y"),
            doc("d2", "z"),
            doc("d3", "x"),
            doc("d4", "w"),
        ]);
        let q = terms("x y");
        let s1 = idx.score_document(&q, 0).unwrap();
        let s3 = idx.score_document(&q, 2).unwrap();
        assert!(s1 > s3 && s3 > 0.0);
        let ranked = idx.retrieve("q", &q, DEFAULT_CUTOFF);
        assert_eq!(ranked.doc_ids().collect::<Vec<_>>(), vec!["d1", "d3"]);
        assert_eq!(ranked.entries[0].1, s1);
        assert_eq!(idx.retrieve("q", &q, 1).len(), 1);
        assert!(idx.retrieve("q", &[], 10).is_empty());
        let one = idx.retrieve("q", &terms("z"), 10);
        assert_eq!(one.doc_ids().collect::<Vec<_>>(), vec!["d2"]);
    }

    #[test]
    fn ties_break_by_doc_id() {
        let idx = build(&[doc("b", "x"), doc("a", "x"), doc("c", "y")]);
        let ranked = idx.retrieve("q", &terms("x"), 10);
        assert_eq!(ranked.doc_ids().collect::<Vec<_>>(), vec!["a", "b"]);
    }

    #[test]
    fn token_length_measure() {
        let opts = IndexOptions {
            length_measure: LengthMeasure::Tokens,
            ..IndexOptions::default()
        };
        let idx = build_index(
            &[doc("d1", "alpha beta"), doc("d2", "gamma")],
            &opts,
            &DefaultTokenizer,
            &Stoplist::empty(),
        )
        .unwrap();
        assert_eq!(idx.doc_len(0), Some(2));
        assert_eq!(idx.avglen(), 1.5);
    }

    #[test]
    fn snapshot_round_trip_and_header_checks() {
        let idx = build(&[doc("d1", "a b a"), doc("d2", "b")]);
        let mut buf = Vec::new();
        idx.write_snapshot(&mut buf).unwrap();
        assert!(buf.starts_with(b"SPOKENIR-INDEX 1\n"));
        let back = InvertedIndex::read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back, idx);

        let bad = b"SPOKENIR-INDEX 9\n{}";
        assert!(matches!(
            InvertedIndex::read_snapshot(&bad[..]),
            Err(Error::Snapshot(_))
        ));
        assert!(InvertedIndex::read_snapshot(&b"{}"[..]).is_err());
    }
}
