use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Stoplist;
use crate::index::RankedList;

use super::{average_precision, rp_curve, ter, wer, RpCurve, RECALL_LEVELS};

/// A reference transcript and what the decoder produced for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub topic_id: String,
    pub reference: Vec<String>,
    pub hypothesis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEval {
    pub topic_id: String,
    /// `None` when the topic has no relevant documents or no judgments.
    pub ap: Option<f64>,
    pub wer: Option<f64>,
    pub ter: Option<f64>,
    pub curve: Option<RpCurve>,
}

/// Per-topic and mean metrics of one retrieval method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label: String,
    pub topics: Vec<TopicEval>,
    pub mean_ap: Option<f64>,
    pub mean_wer: Option<f64>,
    pub mean_ter: Option<f64>,
    /// Mean interpolated precision over topics with relevant documents.
    pub mean_curve: Option<[f64; 11]>,
    /// Topics left out of the AP mean for lack of relevant documents.
    pub undefined_topics: Vec<String>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

impl EvalReport {
    /// Scores ranked lists against relevance sets (when given) and
    /// transcripts against their references.
    pub fn compute(
        label: &str,
        runs: &[RankedList],
        relevant: Option<&BTreeMap<String, BTreeSet<String>>>,
        utterances: &[Utterance],
        stoplist: &Stoplist,
    ) -> Self {
        let mut topics: BTreeMap<String, TopicEval> = BTreeMap::new();
        let blank = |id: &str| TopicEval {
            topic_id: id.to_string(),
            ap: None,
            wer: None,
            ter: None,
            curve: None,
        };
        if relevant.is_none() && !runs.is_empty() {
            log::info!("{label}: no relevance judgments, average precision omitted");
        }
        let mut undefined = Vec::new();
        for run in runs {
            let t = topics
                .entry(run.topic_id.clone())
                .or_insert_with(|| blank(&run.topic_id));
            let Some(relevant) = relevant else { continue };
            let empty = BTreeSet::new();
            let rel = relevant.get(&run.topic_id).unwrap_or(&empty);
            let ranking: Vec<&str> = run.doc_ids().collect();
            t.ap = average_precision(&ranking, rel);
            t.curve = rp_curve(&ranking, rel);
            if t.ap.is_none() {
                log::info!("{label}: topic {} has no relevant documents", run.topic_id);
                undefined.push(run.topic_id.clone());
            }
        }
        for u in utterances {
            let t = topics
                .entry(u.topic_id.clone())
                .or_insert_with(|| blank(&u.topic_id));
            t.wer = wer(&u.reference, &u.hypothesis).ok();
            t.ter = ter(&u.reference, &u.hypothesis, stoplist).ok();
        }
        let topics: Vec<TopicEval> = topics.into_values().collect();
        let curves: Vec<&RpCurve> = topics.iter().filter_map(|t| t.curve.as_ref()).collect();
        let mean_curve = (!curves.is_empty()).then(|| {
            let mut m = [0.0; 11];
            for c in &curves {
                for (a, b) in m.iter_mut().zip(c.interpolated) {
                    *a += b;
                }
            }
            m.map(|x| x / curves.len() as f64)
        });
        Self {
            label: label.to_string(),
            mean_ap: mean(topics.iter().filter_map(|t| t.ap)),
            mean_wer: mean(topics.iter().filter_map(|t| t.wer)),
            mean_ter: mean(topics.iter().filter_map(|t| t.ter)),
            mean_curve,
            undefined_topics: undefined,
            topics,
        }
    }

    /// One row per topic, then a `mean` row; `-` marks an undefined value.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("method\ttopic\tap\twer\tter\n");
        for t in &self.topics {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                self.label,
                t.topic_id,
                cell(t.ap),
                cell(t.wer),
                cell(t.ter)
            );
        }
        let _ = writeln!(
            out,
            "{}\tmean\t{}\t{}\t{}",
            self.label,
            cell(self.mean_ap),
            cell(self.mean_wer),
            cell(self.mean_ter)
        );
        out
    }

    /// Uninterpolated `(recall, precision)` points of every topic.
    pub fn raw_rp_tsv(&self) -> String {
        let mut out = String::from("topic\trecall\tprecision\n");
        for t in &self.topics {
            for (r, p) in t.curve.iter().flat_map(|c| c.raw.iter()) {
                let _ = writeln!(out, "{}\t{r:.4}\t{p:.4}", t.topic_id);
            }
        }
        out
    }
}

/// Fixed-width table with one row per method: AP, WER and TER.
pub fn summary_table(reports: &[EvalReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.label.len())
        .max()
        .unwrap_or(0)
        .max("Method".len());
    let mut out = format!(
        "{:<width$}  {:>6}  {:>6}  {:>6}\n",
        "Method", "AP", "WER", "TER"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>6}  {:>6}",
            r.label,
            cell(r.mean_ap),
            cell(r.mean_wer),
            cell(r.mean_ter)
        );
    }
    out
}

/// Mean 11-point curves side by side: a recall column, then one per method.
pub fn rp_tsv(reports: &[EvalReport]) -> String {
    let mut out = String::from("recall");
    for r in reports {
        out.push('\t');
        out.push_str(&r.label);
    }
    out.push('\n');
    for (i, level) in RECALL_LEVELS.iter().enumerate() {
        let _ = write!(out, "{level:.1}");
        for r in reports {
            let _ = write!(out, "\t{}", cell(r.mean_curve.map(|c| c[i])));
        }
        out.push('\n');
    }
    out
}
