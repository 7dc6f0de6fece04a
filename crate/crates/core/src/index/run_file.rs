use std::collections::BTreeMap;

use crate::error::{decode_utf8, Error, Location, Result};

use super::RankedList;

#[derive(Debug, Clone, PartialEq)]
pub struct RunLine {
    pub topic_id: String,
    pub doc_id: String,
    pub rank: usize,
    pub score: f64,
    pub tag: String,
}

/// TREC run layout: `topic_id Q0 doc_id rank score tag`, ranks from 1.
pub fn write_run(lists: &[RankedList], tag: &str) -> String {
    let mut out = String::new();
    for list in lists {
        for (rank, (doc, score)) in list.entries.iter().enumerate() {
            out.push_str(&format!(
                "{} Q0 {} {} {:.6} {}\n",
                list.topic_id,
                doc,
                rank + 1,
                score,
                tag
            ));
        }
    }
    out
}

/// Reads a run file back into one ranked list per topic, ordered by rank.
pub fn parse_run(input: &[u8]) -> Result<Vec<RankedList>> {
    let text = decode_utf8(input)?;
    let mut by_topic: BTreeMap<String, Vec<RunLine>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            location: Location::at(0).line(i + 1),
            message: msg.to_string(),
        };
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        let [topic, _, doc, rank, score, tag] = cols.as_slice() else {
            return Err(bad("expected `topic_id Q0 doc_id rank score tag`"));
        };
        let rank: usize = rank.parse().map_err(|_| bad("rank is not an integer"))?;
        let score: f64 = score.parse().map_err(|_| bad("score is not a number"))?;
        by_topic
            .entry(topic.to_string())
            .or_default()
            .push(RunLine {
                topic_id: topic.to_string(),
                doc_id: doc.to_string(),
                rank,
                score,
                tag: tag.to_string(),
            });
    }
    Ok(by_topic
        .into_iter()
        .map(|(topic_id, mut lines)| {
            lines.sort_by_key(|l| l.rank);
            RankedList {
                topic_id,
                entries: lines.into_iter().map(|l| (l.doc_id, l.score)).collect(),
            }
        })
        .collect())
}
