//! Word/term error rates, average precision and recall-precision curves.

mod report;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{extract_terms, Judgment, Stoplist};
use crate::error::{Error, Result};

pub use report::{rp_tsv, summary_table, EvalReport, TopicEval, Utterance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditOp {
    Match,
    Substitution,
    Deletion,
    Insertion,
}

/// Minimal-cost edit script between a reference and a hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EditAlignment {
    /// Each op with the reference and hypothesis positions it touches.
    pub ops: Vec<(EditOp, Option<usize>, Option<usize>)>,
}

impl EditAlignment {
    pub fn count(&self, op: EditOp) -> usize {
        self.ops.iter().filter(|(o, _, _)| *o == op).count()
    }

    pub fn errors(&self) -> usize {
        self.ops
            .iter()
            .filter(|(o, _, _)| *o != EditOp::Match)
            .count()
    }
}

/// Levenshtein alignment with unit costs. Among equal-cost scripts, the
/// traceback prefers match, then substitution, deletion, insertion.
pub fn align<S: AsRef<str>, T: AsRef<str>>(reference: &[S], hypothesis: &[T]) -> EditAlignment {
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i;
    }
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let same = reference[i - 1].as_ref() == hypothesis[j - 1].as_ref();
            let diag = d[(i - 1) * w + j - 1] + usize::from(!same);
            d[i * w + j] = diag.min(d[(i - 1) * w + j] + 1).min(d[i * w + j - 1] + 1);
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1].as_ref() == hypothesis[j - 1].as_ref();
            if same && here == d[(i - 1) * w + j - 1] {
                ops.push((EditOp::Match, Some(i - 1), Some(j - 1)));
                i -= 1;
                j -= 1;
                continue;
            }
            if !same && here == d[(i - 1) * w + j - 1] + 1 {
                ops.push((EditOp::Substitution, Some(i - 1), Some(j - 1)));
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * w + j] + 1 {
            ops.push((EditOp::Deletion, Some(i - 1), None));
            i -= 1;
        } else {
            ops.push((EditOp::Insertion, None, Some(j - 1)));
            j -= 1;
        }
    }
    ops.reverse();
    EditAlignment { ops }
}

/// `(S + D + I) / |reference|`.
pub fn wer<S: AsRef<str>, T: AsRef<str>>(reference: &[S], hypothesis: &[T]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::EmptyReference(
            "word error rate needs a nonempty reference",
        ));
    }
    Ok(align(reference, hypothesis).errors() as f64 / reference.len() as f64)
}

/// Word error rate over the content terms of both sides.
pub fn ter(reference: &[String], hypothesis: &[String], stoplist: &Stoplist) -> Result<f64> {
    let r = extract_terms(reference, stoplist);
    if r.is_empty() {
        return Err(Error::EmptyReference("reference has no content terms"));
    }
    wer(&r, &extract_terms(hypothesis, stoplist))
}

/// Relevant documents per topic: highly relevant and relevant grades only.
pub fn collapse_grades(judgments: &[Judgment]) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for j in judgments {
        let set = out.entry(j.topic_id.clone()).or_default();
        if j.grade.is_relevant() {
            set.insert(j.doc_id.clone());
        }
    }
    out
}

/// Non-interpolated average precision, normalized by the full relevant count.
pub fn average_precision<S: AsRef<str>>(ranking: &[S], relevant: &BTreeSet<String>) -> Option<f64> {
    if relevant.is_empty() {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, d) in ranking.iter().enumerate() {
        if relevant.contains(d.as_ref()) {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Some(sum / relevant.len() as f64)
}

/// Recall levels 0.0, 0.1, ..., 1.0.
pub const RECALL_LEVELS: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpCurve {
    /// `(recall, precision)` at each rank holding a relevant document.
    pub raw: Vec<(f64, f64)>,
    /// Interpolated precision at [`RECALL_LEVELS`].
    pub interpolated: [f64; 11],
}

pub fn rp_curve<S: AsRef<str>>(ranking: &[S], relevant: &BTreeSet<String>) -> Option<RpCurve> {
    if relevant.is_empty() {
        return None;
    }
    let total = relevant.len() as f64;
    let mut raw = Vec::new();
    let mut hits = 0usize;
    for (k, d) in ranking.iter().enumerate() {
        if relevant.contains(d.as_ref()) {
            hits += 1;
            raw.push((hits as f64 / total, hits as f64 / (k + 1) as f64));
        }
    }
    // precision only peaks at relevant ranks, so those cutoffs suffice
    let mut interpolated = [0.0; 11];
    for (slot, &r) in interpolated.iter_mut().zip(RECALL_LEVELS.iter()) {
        *slot = raw
            .iter()
            .filter(|(rec, _)| *rec >= r - 1e-12)
            .map(|&(_, p)| p)
            .fold(0.0, f64::max);
    }
    Some(RpCurve { raw, interpolated })
}
