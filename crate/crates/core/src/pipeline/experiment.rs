use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Topic;
use crate::decoder::{Decoder, Transcription};
use crate::error::Result;
use crate::eval::{rp_tsv, summary_table, EvalReport, Utterance};
use crate::index::{write_run, RankedList};
use crate::lm::NGramModel;

use super::{run_query, run_two_stage, topic_seed, PipelineConfig, QueryInput, Resources, Stage};

/// One decoded query, for the transcription log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryLog {
    pub method: String,
    pub topic_id: String,
    pub stage: Stage,
    pub reference: Vec<String>,
    pub heard: Vec<String>,
    pub nbest: Vec<Transcription>,
}

/// Everything one experiment run produces, in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub seed: u64,
    pub top_r: Option<usize>,
    pub reports: Vec<EvalReport>,
    pub runs: Vec<(String, Vec<RankedList>)>,
    pub log: Vec<QueryLog>,
}

/// Compares a text-to-text baseline with dictated queries decoded by each
/// model. Topic descriptions are dictated unless `heard` supplies phonemes
/// for a topic. With online adaptation on, each model also gets a
/// second-pass row labelled `<model>+online`.
pub fn run_experiment(
    topics: &[Topic],
    heard: Option<&BTreeMap<String, Vec<String>>>,
    res: &Resources,
    models: &[(String, &NGramModel)],
    relevant: Option<&BTreeMap<String, BTreeSet<String>>>,
    config: &PipelineConfig,
) -> Result<ExperimentOutput> {
    config.validate()?;
    let stop = res.extractor.stoplist();
    let references: Vec<Vec<String>> = topics
        .iter()
        .map(|t| res.extractor.tokenize(&t.description).into_tokens())
        .collect();
    // dictation depends only on the topic and seed, so every model hears the same thing
    let inputs: Vec<QueryInput> = topics
        .iter()
        .map(|t| match heard.and_then(|h| h.get(&t.id)) {
            Some(p) => Ok(QueryInput::Phonemes(p.clone())),
            None => res
                .dictate(&t.description, topic_seed(config.seed, &t.id))
                .map(|(_, h)| QueryInput::Phonemes(h)),
        })
        .collect::<Result<_>>()?;

    let mut reports = Vec::new();
    let mut runs = Vec::new();
    let mut log = Vec::new();

    let text_lists: Vec<RankedList> = topics
        .par_iter()
        .map(|t| {
            let terms = res.extractor.terms_of_text(&t.description);
            res.index.retrieve(&t.id, &terms, config.cutoff)
        })
        .collect();
    let text_utts: Vec<Utterance> = topics
        .iter()
        .zip(&references)
        .map(|(t, r)| Utterance {
            topic_id: t.id.clone(),
            reference: r.clone(),
            hypothesis: r.clone(),
        })
        .collect();
    reports.push(EvalReport::compute(
        "text",
        &text_lists,
        relevant,
        &text_utts,
        stop,
    ));
    runs.push(("text".to_string(), text_lists));

    for (label, model) in models {
        let decoder = Decoder::new(model, &res.lexicon, &res.channel)?;
        let results: Vec<_> = topics
            .par_iter()
            .zip(inputs.par_iter())
            .map(|(t, input)| {
                if config.online_adaptation {
                    run_two_stage(&t.id, input, res, model, &decoder, config)
                        .map(|(a, b)| (a, Some(b)))
                } else {
                    run_query(&t.id, input, res, &decoder, config).map(|a| (a, None))
                }
            })
            .collect::<Result<_>>()?;
        let mut rows = vec![(label.clone(), Stage::First)];
        if config.online_adaptation {
            rows.push((format!("{label}+online"), Stage::Second));
        }
        for (row, stage) in rows {
            let stages: Vec<&super::StageResult> = results
                .iter()
                .map(|(a, b)| match stage {
                    Stage::First => a,
                    Stage::Second => b.as_ref().expect("second stage"),
                })
                .collect();
            let lists: Vec<RankedList> = stages.iter().map(|s| s.ranked.clone()).collect();
            let utts: Vec<Utterance> = stages
                .iter()
                .zip(&references)
                .map(|(s, r)| Utterance {
                    topic_id: s.topic_id.clone(),
                    reference: r.clone(),
                    hypothesis: s.words().to_vec(),
                })
                .collect();
            for (s, r) in stages.iter().zip(&references) {
                log.push(QueryLog {
                    method: row.clone(),
                    topic_id: s.topic_id.clone(),
                    stage,
                    reference: r.clone(),
                    heard: s.heard.clone(),
                    nbest: s.nbest.clone(),
                });
            }
            reports.push(EvalReport::compute(&row, &lists, relevant, &utts, stop));
            runs.push((row, lists));
        }
    }
    Ok(ExperimentOutput {
        seed: config.seed,
        top_r: config.online_adaptation.then_some(config.top_r),
        reports,
        runs,
        log,
    })
}

/// Writes `<method>.run`, `report.tsv`, `summary.txt`, `rp.tsv`,
/// `rp-raw-<method>.tsv` and `transcripts.jsonl` into `dir`.
pub fn write_experiment(dir: &Path, out: &ExperimentOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (label, lists) in &out.runs {
        std::fs::write(dir.join(format!("{label}.run")), write_run(lists, label))?;
    }
    let mut tsv = String::new();
    for (i, r) in out.reports.iter().enumerate() {
        let body = r.to_tsv();
        // keep a single header line
        tsv.push_str(if i == 0 {
            &body
        } else {
            body.split_once('\n').map_or("", |x| x.1)
        });
        std::fs::write(dir.join(format!("rp-raw-{}.tsv", r.label)), r.raw_rp_tsv())?;
    }
    std::fs::write(dir.join("report.tsv"), tsv)?;
    let mut summary = format!("seed {}", out.seed);
    if let Some(r) = out.top_r {
        let _ = write!(summary, ", online adaptation on top {r} documents");
    }
    summary.push('\n');
    summary.push_str(&summary_table(&out.reports));
    std::fs::write(dir.join("summary.txt"), summary)?;
    std::fs::write(dir.join("rp.tsv"), rp_tsv(&out.reports))?;
    let mut jsonl = String::new();
    for entry in &out.log {
        jsonl.push_str(&serde_json::to_string(entry)?);
        jsonl.push('\n');
    }
    std::fs::write(dir.join("transcripts.jsonl"), jsonl)?;
    Ok(())
}
