use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use spokenir::corpus::{
    parse_documents, parse_qrels, parse_topics, write_qrels, write_tagged_documents, write_topics,
    DefaultTokenizer, Document, DocumentFormat, Judgment, Stoplist, TermExtractor, Topic,
};
use spokenir::decoder::{Decoder, Lexicon};
use spokenir::eval::{collapse_grades, rp_tsv, summary_table, EvalReport, Utterance};
use spokenir::index::{build_index, parse_run, write_run, InvertedIndex, RankedList};
use spokenir::lm::{document_sentences, sentences_of, LmStats, NGramModel};
use spokenir::pipeline::{
    local_counts, offline_adapt, run_experiment, run_query, run_two_stage, topic_seed,
    write_experiment, ModelPath, PipelineConfig, QueryInput, Resources, StageResult,
};
use spokenir::synthetic::{generate_domains, SyntheticSpec};

#[derive(Parser)]
#[command(
    name = "spokenir",
    version,
    about = "Spoken queries against a text collection"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Args, Debug, Default)]
struct Common {
    /// TOML config file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    documents: Option<PathBuf>,
    /// `tagged` or `jsonl`; by default `.jsonl` files are JSON lines.
    #[arg(long, global = true)]
    format: Option<DocumentFormat>,
    #[arg(long, global = true)]
    topics: Option<PathBuf>,
    #[arg(long, global = true)]
    qrels: Option<PathBuf>,
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    #[arg(long, global = true)]
    lm: Option<PathBuf>,
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    channel: Option<PathBuf>,
    #[arg(long, global = true)]
    stoplist: Option<PathBuf>,
    /// Output file or directory, depending on the subcommand.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Enable the second, adapted pass.
    #[arg(long, global = true)]
    online: bool,
    #[arg(long, global = true)]
    top_r: Option<usize>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    beam: Option<f64>,
    #[arg(long, global = true)]
    nbest: Option<usize>,
    #[arg(long, global = true)]
    vocab_size: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Index the documents and write an index snapshot.
    BuildIndex,
    /// Estimate the global language model from the documents.
    BuildLm {
        #[arg(long, default_value = "global")]
        label: String,
    },
    /// Token, type and coverage counts of a corpus under a model.
    LmStats {
        /// Plain text, one sentence per line, instead of the documents.
        #[arg(long)]
        text: Option<PathBuf>,
    },
    /// Phonemize and corrupt text: the given text, or every topic description.
    Dictate {
        #[arg(long)]
        text: Option<String>,
    },
    /// Decode heard phonemes (`id<TAB>p1 p2 ...` lines) into words.
    Decode {
        #[arg(long)]
        input: PathBuf,
        /// Write the n-best lists as JSON lines.
        #[arg(long)]
        json: bool,
    },
    /// Retrieve for word queries (`id<TAB>words` lines) or topic descriptions.
    Retrieve {
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long, default_value = "spokenir")]
        tag: String,
    },
    /// Adapt the model to the top documents of one topic in a run file.
    Adapt {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        topic: Option<String>,
    },
    /// The full pipeline over all topics.
    Run {
        /// Heard phonemes per topic; descriptions are dictated otherwise.
        #[arg(long)]
        heard: Option<PathBuf>,
    },
    /// Score run files and transcripts.
    Evaluate {
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
        /// Decoded words per topic (`id<TAB>words`), scored against the descriptions.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Text baseline against every configured model, for each seed.
    Experiment {
        #[arg(long)]
        heard: Option<PathBuf>,
    },
    /// Write a synthetic target/other collection pair with topics and judgments.
    Generate {
        #[arg(long, default_value_t = 2000)]
        num_documents: usize,
        #[arg(long, default_value_t = 5000)]
        num_words: usize,
        #[arg(long, default_value_t = 50)]
        clusters: usize,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn load_config(c: &Common) -> Result<PipelineConfig> {
    let mut cfg = match &c.config {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => PipelineConfig::default(),
    };
    let paths = &mut cfg.paths;
    let set = |slot: &mut Option<PathBuf>, flag: &Option<PathBuf>| {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    };
    set(&mut paths.documents, &c.documents);
    set(&mut paths.topics, &c.topics);
    set(&mut paths.qrels, &c.qrels);
    set(&mut paths.index, &c.index);
    set(&mut paths.lm, &c.lm);
    set(&mut paths.lexicon, &c.lexicon);
    set(&mut paths.channel, &c.channel);
    set(&mut paths.stoplist, &c.stoplist);
    set(&mut paths.output, &c.output);
    if let Some(s) = c.seed {
        cfg.seed = s;
        cfg.seeds.clear();
    }
    if let Some(v) = c.cutoff {
        cfg.cutoff = v;
    }
    if c.online {
        cfg.online_adaptation = true;
    }
    if let Some(v) = c.top_r {
        cfg.top_r = v;
    }
    if let Some(v) = c.tau {
        cfg.tau = v;
    }
    if let Some(v) = c.beam {
        cfg.decoder.beam = Some(v);
    }
    if let Some(v) = c.nbest {
        cfg.decoder.nbest = v;
    }
    if let Some(v) = c.vocab_size {
        cfg.lm.vocab_size = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn need<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| anyhow!("no {what} given (set paths.{what} or --{what})"))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn documents(cfg: &PipelineConfig, format: Option<DocumentFormat>) -> Result<Vec<Document>> {
    let path = need(&cfg.paths.documents, "documents")?;
    let format = format.unwrap_or(match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => DocumentFormat::JsonLines,
        _ => DocumentFormat::Tagged,
    });
    Ok(parse_documents(&read(path)?, format)?)
}

fn topics(cfg: &PipelineConfig) -> Result<Vec<Topic>> {
    Ok(parse_topics(&read(need(&cfg.paths.topics, "topics")?)?)?)
}

fn judgments(cfg: &PipelineConfig) -> Result<Option<Vec<Judgment>>> {
    match &cfg.paths.qrels {
        Some(p) => Ok(Some(parse_qrels(&read(p)?)?)),
        None => {
            log::warn!("no relevance judgments; average precision is omitted");
            Ok(None)
        }
    }
}

fn extractor(cfg: &PipelineConfig) -> Result<TermExtractor> {
    let stoplist = match &cfg.paths.stoplist {
        Some(p) => Stoplist::from_reader(BufReader::new(fs::File::open(p)?))?,
        None => Stoplist::english(),
    };
    Ok(TermExtractor::new(DefaultTokenizer, stoplist))
}

fn lexicon(cfg: &PipelineConfig) -> Result<Lexicon> {
    match &cfg.paths.lexicon {
        Some(p) => Ok(Lexicon::from_reader(BufReader::new(fs::File::open(p)?))?),
        None => Ok(Lexicon::graphemic()),
    }
}

fn model(path: &Path) -> Result<NGramModel> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(NGramModel::read_snapshot(BufReader::new(f))?)
}

/// The index snapshot when configured, otherwise built from the documents.
fn index(
    cfg: &PipelineConfig,
    format: Option<DocumentFormat>,
    ex: &TermExtractor,
) -> Result<InvertedIndex> {
    match &cfg.paths.index {
        Some(p) if p.exists() => {
            let f = fs::File::open(p)?;
            Ok(InvertedIndex::read_snapshot(BufReader::new(f))?)
        }
        _ => Ok(build_index(
            &documents(cfg, format)?,
            &cfg.index,
            ex.tokenizer(),
            ex.stoplist(),
        )?),
    }
}

fn resources(cfg: &PipelineConfig, format: Option<DocumentFormat>) -> Result<Resources> {
    let ex = extractor(cfg)?;
    let docs = documents(cfg, format)?;
    let idx = match &cfg.paths.index {
        Some(p) if p.exists() => InvertedIndex::read_snapshot(BufReader::new(fs::File::open(p)?))?,
        _ => build_index(&docs, &cfg.index, ex.tokenizer(), ex.stoplist())?,
    };
    Ok(Resources::new(
        idx,
        docs,
        lexicon(cfg)?,
        cfg.channel_model()?,
        ex,
    ))
}

/// The global model from `paths.lm`, or estimated from the documents.
fn global_model(cfg: &PipelineConfig, docs: &[Document], ex: &TermExtractor) -> Result<NGramModel> {
    match &cfg.paths.lm {
        Some(p) if p.exists() => model(p),
        _ => Ok(offline_adapt(
            docs,
            &cfg.index.fields,
            ex.tokenizer(),
            &cfg.lm,
            "global",
        )?),
    }
}

/// Sends `text` to `paths.output`, or stdout.
fn emit(cfg: &PipelineConfig, text: &str) -> Result<()> {
    match &cfg.paths.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn out_dir(cfg: &PipelineConfig) -> Result<&Path> {
    need(&cfg.paths.output, "output")
}

/// `id<TAB>tokens` lines; lines without a tab are numbered from 1.
fn read_keyed(path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    let text = String::from_utf8(read(path)?).context("input is not UTF-8")?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, rest) = match line.split_once('\t') {
            Some((id, rest)) => (id.trim().to_string(), rest),
            None => ((i + 1).to_string(), line),
        };
        out.push((id, rest.split_whitespace().map(String::from).collect()));
    }
    Ok(out)
}

fn keyed_line(id: &str, tokens: &[String]) -> String {
    format!("{id}\t{}\n", tokens.join(" "))
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let cfg = load_config(c)?;
    let format = c.format;
    match cli.command {
        Command::BuildIndex => {
            let ex = extractor(&cfg)?;
            let docs = documents(&cfg, format)?;
            let idx = build_index(&docs, &cfg.index, ex.tokenizer(), ex.stoplist())?;
            let path = cfg.paths.index.as_ref().or(cfg.paths.output.as_ref());
            let path =
                path.ok_or_else(|| anyhow!("no index path given (paths.index or --index)"))?;
            idx.write_snapshot(io::BufWriter::new(fs::File::create(path)?))?;
            eprintln!(
                "indexed {} documents, {} terms",
                idx.n_docs(),
                idx.terms().count()
            );
        }
        Command::BuildLm { label } => {
            let ex = extractor(&cfg)?;
            let docs = documents(&cfg, format)?;
            let m = offline_adapt(&docs, &cfg.index.fields, ex.tokenizer(), &cfg.lm, &label)?;
            let path = cfg.paths.lm.as_ref().or(cfg.paths.output.as_ref());
            let path = path.ok_or_else(|| anyhow!("no model path given (paths.lm or --lm)"))?;
            m.write_snapshot(io::BufWriter::new(fs::File::create(path)?))?;
            eprintln!("model {label}: {} words", m.vocab().len());
        }
        Command::LmStats { text } => {
            let m = model(need(&cfg.paths.lm, "lm")?)?;
            let sentences = match text {
                Some(p) => {
                    let t = String::from_utf8(read(&p)?)?;
                    sentences_of(&t, &DefaultTokenizer)
                }
                None => document_sentences(
                    &documents(&cfg, format)?,
                    &cfg.index.fields,
                    &DefaultTokenizer,
                ),
            };
            let stats = LmStats::compute(&m, &sentences)?;
            emit(
                &cfg,
                &format!("{}\n{}\n", LmStats::tsv_header(), stats.tsv_row()),
            )?;
        }
        Command::Dictate { text } => {
            let ex = extractor(&cfg)?;
            let lex = lexicon(&cfg)?;
            let channel = cfg.channel_model()?;
            let items: Vec<(String, String)> = match text {
                Some(t) => vec![("1".to_string(), t)],
                None => topics(&cfg)?
                    .into_iter()
                    .map(|t| (t.id, t.description))
                    .collect(),
            };
            let mut out = String::new();
            for (id, t) in items {
                let words = ex.tokenize(&t).into_tokens();
                let spoken = spokenir::decoder::phonemize(&words, &lex)?;
                let heard = channel.corrupt(&spoken, topic_seed(cfg.seed, &id))?;
                out.push_str(&keyed_line(&id, &heard));
            }
            emit(&cfg, &out)?;
        }
        Command::Decode { input, json } => {
            let m = model(need(&cfg.paths.lm, "lm")?)?;
            let lex = lexicon(&cfg)?;
            let channel = cfg.channel_model()?;
            let decoder = Decoder::new(&m, &lex, &channel)?;
            let items = read_keyed(&input)?;
            let decoded: Vec<_> = items
                .par_iter()
                .map(|(id, heard)| decoder.decode(heard, &cfg.decoder).map(|n| (id, n)))
                .collect::<spokenir::Result<_>>()?;
            let mut out = String::new();
            for (id, nbest) in decoded {
                if json {
                    let line = serde_json::json!({ "id": id, "nbest": nbest });
                    out.push_str(&line.to_string());
                    out.push('\n');
                } else {
                    out.push_str(&keyed_line(id, &nbest[0].words));
                }
            }
            emit(&cfg, &out)?;
        }
        Command::Retrieve { queries, tag } => {
            let ex = extractor(&cfg)?;
            let idx = index(&cfg, format, &ex)?;
            let items: Vec<(String, Vec<String>)> = match queries {
                Some(p) => read_keyed(&p)?
                    .into_iter()
                    .map(|(id, words)| (id, ex.terms_of_words(&words)))
                    .collect(),
                None => topics(&cfg)?
                    .into_iter()
                    .map(|t| {
                        let terms = ex.terms_of_text(&t.description);
                        (t.id, terms)
                    })
                    .collect(),
            };
            let lists: Vec<RankedList> = items
                .iter()
                .map(|(id, terms)| idx.retrieve(id, terms, cfg.cutoff))
                .collect();
            emit(&cfg, &write_run(&lists, &tag))?;
        }
        Command::Adapt { run, topic } => {
            let res = resources(&cfg, format)?;
            let global = model(need(&cfg.paths.lm, "lm")?)?;
            let lists = parse_run(&read(&run)?)?;
            let list = match topic {
                Some(t) => lists
                    .iter()
                    .find(|l| l.topic_id == t)
                    .ok_or_else(|| anyhow!("topic {t} is not in the run"))?,
                None if lists.len() == 1 => &lists[0],
                None => bail!("the run has {} topics; pick one with --topic", lists.len()),
            };
            let local = local_counts(list, cfg.top_r, &res);
            let mut adapted = global.map_adapt(&local, cfg.tau)?;
            adapted.set_label(format!("{}+{}", global.metadata().label, list.topic_id));
            let path = out_dir(&cfg)?;
            adapted.write_snapshot(io::BufWriter::new(fs::File::create(path)?))?;
        }
        Command::Run { heard } => {
            let res = resources(&cfg, format)?;
            let global = global_model(&cfg, &res.documents, &res.extractor)?;
            let decoder = Decoder::new(&global, &res.lexicon, &res.channel)?;
            let tops = topics(&cfg)?;
            let inputs = inputs(&tops, heard.as_deref())?;
            let results: Vec<(StageResult, Option<StageResult>)> = tops
                .par_iter()
                .zip(inputs.par_iter())
                .map(|(t, input)| {
                    if cfg.online_adaptation {
                        run_two_stage(&t.id, input, &res, &global, &decoder, &cfg)
                            .map(|(a, b)| (a, Some(b)))
                    } else {
                        run_query(&t.id, input, &res, &decoder, &cfg).map(|a| (a, None))
                    }
                })
                .collect::<spokenir::Result<_>>()?;
            let dir = out_dir(&cfg)?;
            fs::create_dir_all(dir)?;
            let first: Vec<RankedList> = results.iter().map(|r| r.0.ranked.clone()).collect();
            fs::write(dir.join("first.run"), write_run(&first, "first"))?;
            let mut log = String::new();
            for (a, b) in &results {
                log.push_str(&serde_json::to_string(a)?);
                log.push('\n');
                if let Some(b) = b {
                    log.push_str(&serde_json::to_string(b)?);
                    log.push('\n');
                }
            }
            if cfg.online_adaptation {
                let second: Vec<RankedList> = results
                    .iter()
                    .filter_map(|r| r.1.as_ref().map(|s| s.ranked.clone()))
                    .collect();
                fs::write(dir.join("second.run"), write_run(&second, "second"))?;
            }
            fs::write(dir.join("transcripts.jsonl"), log)?;
        }
        Command::Evaluate { runs, transcripts } => {
            let ex = extractor(&cfg)?;
            let relevant = judgments(&cfg)?.map(|j| collapse_grades(&j));
            let utterances: Vec<Utterance> = match transcripts {
                Some(p) => {
                    let refs: BTreeMap<String, Vec<String>> = topics(&cfg)?
                        .into_iter()
                        .map(|t| (t.id, ex.tokenize(&t.description).into_tokens()))
                        .collect();
                    read_keyed(&p)?
                        .into_iter()
                        .map(|(id, words)| {
                            let reference = refs
                                .get(&id)
                                .cloned()
                                .ok_or_else(|| anyhow!("transcript for unknown topic {id}"))?;
                            Ok(Utterance {
                                topic_id: id,
                                reference,
                                hypothesis: words,
                            })
                        })
                        .collect::<Result<_>>()?
                }
                None => Vec::new(),
            };
            let mut reports = Vec::new();
            for p in &runs {
                let lists = parse_run(&read(p)?)?;
                let label = p
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("run")
                    .to_string();
                reports.push(EvalReport::compute(
                    &label,
                    &lists,
                    relevant.as_ref(),
                    &utterances,
                    ex.stoplist(),
                ));
            }
            match &cfg.paths.output {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    let mut tsv = String::new();
                    for (i, r) in reports.iter().enumerate() {
                        let body = r.to_tsv();
                        tsv.push_str(if i == 0 {
                            &body
                        } else {
                            body.split_once('\n').map_or("", |x| x.1)
                        });
                    }
                    fs::write(dir.join("report.tsv"), tsv)?;
                    fs::write(dir.join("rp.tsv"), rp_tsv(&reports))?;
                    fs::write(dir.join("summary.txt"), summary_table(&reports))?;
                }
                None => print!("{}", summary_table(&reports)),
            }
        }
        Command::Experiment { heard } => {
            let res = resources(&cfg, format)?;
            let tops = topics(&cfg)?;
            let relevant = judgments(&cfg)?.map(|j| collapse_grades(&j));
            let mut specs: Vec<ModelPath> = cfg.paths.models.clone();
            if specs.is_empty() {
                let lm = need(&cfg.paths.lm, "lm")?;
                specs.push(ModelPath {
                    label: "global".into(),
                    path: lm.to_path_buf(),
                });
            }
            let loaded: Vec<(String, NGramModel)> = specs
                .iter()
                .map(|s| Ok((s.label.clone(), model(&s.path)?)))
                .collect::<Result<_>>()?;
            let models: Vec<(String, &NGramModel)> =
                loaded.iter().map(|(l, m)| (l.clone(), m)).collect();
            let heard = match heard {
                Some(p) => Some(read_keyed(&p)?.into_iter().collect::<BTreeMap<_, _>>()),
                None => None,
            };
            let dir = out_dir(&cfg)?;
            for seed in cfg.seeds() {
                let run_cfg = PipelineConfig {
                    seed,
                    ..cfg.clone()
                };
                let out = run_experiment(
                    &tops,
                    heard.as_ref(),
                    &res,
                    &models,
                    relevant.as_ref(),
                    &run_cfg,
                )?;
                let sub = dir.join(format!("seed-{seed}"));
                write_experiment(&sub, &out)?;
                println!("seed {seed}");
                print!("{}", summary_table(&out.reports));
            }
        }
        Command::Generate {
            num_documents,
            num_words,
            clusters,
        } => {
            let spec = SyntheticSpec {
                documents: num_documents,
                vocabulary: num_words,
                clusters,
                seed: cfg.seed,
                ..SyntheticSpec::default()
            };
            let (target, other) = generate_domains(&spec);
            let dir = out_dir(&cfg)?;
            fs::create_dir_all(dir)?;
            for c in [&target, &other] {
                fs::write(
                    dir.join(format!("{}.sgml", c.label)),
                    write_tagged_documents(&c.documents),
                )?;
                fs::write(
                    dir.join(format!("{}-topics.sgml", c.label)),
                    write_topics(&c.topics),
                )?;
                fs::write(
                    dir.join(format!("{}.qrels", c.label)),
                    write_qrels(&c.judgments),
                )?;
            }
            eprintln!(
                "wrote {} + {} documents to {}",
                target.documents.len(),
                other.documents.len(),
                dir.display()
            );
        }
    }
    Ok(())
}

fn inputs(topics: &[Topic], heard: Option<&Path>) -> Result<Vec<QueryInput>> {
    let heard: BTreeMap<String, Vec<String>> = match heard {
        Some(p) => read_keyed(p)?.into_iter().collect(),
        None => BTreeMap::new(),
    };
    Ok(topics
        .iter()
        .map(|t| match heard.get(&t.id) {
            Some(p) => QueryInput::Phonemes(p.clone()),
            None => QueryInput::Text(t.description.clone()),
        })
        .collect())
}
