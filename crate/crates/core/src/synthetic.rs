//! Synthetic test collections: two domains with disjoint topical
//! vocabularies, topics with graded judgments, and a small homophone corpus.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Grade, Judgment, Topic};
use crate::decoder::Lexicon;

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "kl",
    "st", "tr", "sh",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "l"];

/// Shared words that appear in both domains.
const FUNCTION_WORDS: &[&str] = &[
    "the", "of", "and", "in", "for", "with", "on", "to", "a", "by", "from", "is", "are", "we",
    "this", "that", "which", "as", "an", "our", "new", "based", "study", "method", "system",
    "results", "model", "analysis",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    /// Documents per domain.
    pub documents: usize,
    /// Topical word types per domain.
    pub vocabulary: usize,
    /// Subject clusters per domain; each one becomes a topic.
    pub clusters: usize,
    /// Recurring multi-word phrases per cluster.
    pub phrases: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            documents: 2000,
            vocabulary: 5000,
            clusters: 50,
            phrases: 40,
            seed: 2024,
        }
    }
}

/// Documents, topics and judgments of one generated domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collection {
    pub label: String,
    pub documents: Vec<Document>,
    pub topics: Vec<Topic>,
    pub judgments: Vec<Judgment>,
}

struct Cluster {
    words: Vec<String>,
    weights: Vec<f64>,
    phrases: Vec<Vec<String>>,
}

impl Cluster {
    fn word(&self, rng: &mut ChaCha8Rng) -> String {
        let total: f64 = self.weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (w, p) in self.words.iter().zip(&self.weights) {
            if u < *p {
                return w.clone();
            }
            u -= p;
        }
        self.words.last().expect("nonempty cluster").clone()
    }
}

fn make_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).expect("nonempty"));
        w.push_str(VOWELS.choose(rng).expect("nonempty"));
    }
    w.push_str(CODAS.choose(rng).expect("nonempty"));
    w
}

/// Generates the target and the other domain from one seed.
pub fn generate_domains(spec: &SyntheticSpec) -> (Collection, Collection) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let reserved: BTreeSet<&str> = FUNCTION_WORDS.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut words = Vec::with_capacity(2 * spec.vocabulary);
    while words.len() < 2 * spec.vocabulary {
        let w = make_word(&mut rng);
        if !reserved.contains(w.as_str()) && seen.insert(w.clone()) {
            words.push(w);
        }
    }
    let other_words = words.split_off(spec.vocabulary);
    let target = generate_domain("target", "t", words, spec, &mut rng);
    let other = generate_domain("other", "o", other_words, spec, &mut rng);
    (target, other)
}

fn generate_domain(
    label: &str,
    prefix: &str,
    mut words: Vec<String>,
    spec: &SyntheticSpec,
    rng: &mut ChaCha8Rng,
) -> Collection {
    words.shuffle(rng);
    let per = (words.len() / spec.clusters.max(1)).max(1);
    let clusters: Vec<Cluster> = words
        .chunks(per)
        .take(spec.clusters)
        .map(|chunk| {
            let words = chunk.to_vec();
            let weights = (0..words.len()).map(|r| 1.0 / (r + 1) as f64).collect();
            let mut c = Cluster {
                words,
                weights,
                phrases: vec![],
            };
            c.phrases = (0..spec.phrases)
                .map(|_| {
                    let n = rng.random_range(2..=3);
                    (0..n).map(|_| c.word(rng)).collect()
                })
                .collect();
            c
        })
        .collect();

    let sentence = |c: &Cluster, rng: &mut ChaCha8Rng| -> String {
        let mut out: Vec<String> = Vec::new();
        for _ in 0..rng.random_range(3..=5) {
            if rng.random::<f64>() < 0.7 {
                out.push(FUNCTION_WORDS.choose(rng).expect("nonempty").to_string());
            }
            let u = rng.random::<f64>();
            if u < 0.5 {
                out.extend(c.phrases.choose(rng).expect("phrases").iter().cloned());
            } else if u < 0.85 {
                out.push(c.word(rng));
            } else {
                let other = clusters.choose(rng).expect("clusters");
                out.push(other.word(rng));
            }
        }
        out.join(" ")
    };

    let mut documents = Vec::with_capacity(spec.documents);
    let mut owner = Vec::with_capacity(spec.documents);
    for i in 0..spec.documents {
        let k = i % clusters.len();
        let c = &clusters[k];
        let mut doc = Document::new(format!("{prefix}{i:05}"));
        doc.title = sentence(c, rng);
        let n = rng.random_range(4..=7);
        doc.abstract_text = (0..n)
            .map(|_| sentence(c, rng))
            .collect::<Vec<_>>()
            .join("\n");
        doc.keywords = (0..3).map(|_| c.word(rng)).collect();
        documents.push(doc);
        owner.push(k);
    }

    let mut topics = Vec::with_capacity(clusters.len());
    let mut judgments = Vec::new();
    for (k, c) in clusters.iter().enumerate() {
        let id = format!("{prefix}q{:03}", k + 1);
        let first = &c.phrases[0];
        let second = &c.phrases[1 % c.phrases.len()];
        let description = format!(
            "papers about {} and {} for {}",
            first.join(" "),
            second.join(" "),
            c.words[0]
        );
        topics.push(Topic {
            id: id.clone(),
            title: first.join(" "),
            description,
            narrative: format!("Relevant documents discuss {}.", c.words[..3].join(", ")),
        });
        for (d, &o) in owner.iter().enumerate() {
            if o == k {
                let grade = if d % 3 == 0 {
                    Grade::HighlyRelevant
                } else {
                    Grade::Relevant
                };
                judgments.push(Judgment {
                    topic_id: id.clone(),
                    doc_id: documents[d].id.clone(),
                    grade,
                });
            }
        }
        // a few judged non-relevant documents from neighbouring clusters
        for step in 1..=3 {
            let d = (k + step) % clusters.len();
            if d == k || d >= documents.len() {
                continue;
            }
            judgments.push(Judgment {
                topic_id: id.clone(),
                doc_id: documents[d].id.clone(),
                grade: if step == 1 {
                    Grade::PartiallyRelevant
                } else {
                    Grade::Irrelevant
                },
            });
        }
    }
    Collection {
        label: label.to_string(),
        documents,
        topics,
        judgments,
    }
}

/// A tiny collection where "rain" and "reign" sound alike. The whole
/// collection favours "reign", but the documents matching the query are about
/// weather, so adapting to them flips the decoding to "rain".
#[derive(Debug, Clone)]
pub struct HomophoneScenario {
    pub documents: Vec<Document>,
    pub topic: Topic,
    pub judgments: Vec<Judgment>,
    pub lexicon: Lexicon,
    /// Words actually spoken for the topic.
    pub spoken: Vec<String>,
    /// Documents used for adaptation.
    pub top_r: usize,
    pub tau: f64,
}

pub fn homophone_scenario() -> HomophoneScenario {
    let doc = |id: &str, title: &str, body: &[&str]| {
        let mut d = Document::new(id);
        d.title = title.to_string();
        d.abstract_text = body.join("\n");
        d
    };
    let mut documents = Vec::new();
    // "reign" is frequent at sentence starts; both words are followed by
    // few distinct successors, and neither is ever followed by "forecast"
    let monarchy = [
        "reign of the old king",
        "reign began with war",
        "reign ended in peace",
        "reign lasted long",
    ];
    for i in 0..6 {
        documents.push(doc(&format!("m{i}"), "reign of kings", &monarchy));
    }
    let weather = [
        "rain fell all day",
        "rain fell near the coast",
        "rain stopped at noon",
        "rain stopped again",
        "the forecast said storms",
    ];
    for i in 0..3 {
        documents.push(doc(&format!("w{i}"), "weather forecast", &weather));
    }
    for i in 0..6 {
        documents.push(doc(
            &format!("f{i}"),
            "harbour news",
            &["ships left the harbour", "the harbour was quiet"],
        ));
    }
    let mut lexicon = Lexicon::graphemic();
    lexicon.insert("rain", ["r", "e", "n"]).expect("nonempty");
    lexicon.insert("reign", ["r", "e", "n"]).expect("nonempty");
    let topic = Topic {
        id: "h1".into(),
        title: "rain forecast".into(),
        description: "rain forecast".into(),
        narrative: String::new(),
    };
    let judgments = (0..3)
        .map(|i| Judgment {
            topic_id: "h1".into(),
            doc_id: format!("w{i}"),
            grade: Grade::Relevant,
        })
        .collect();
    HomophoneScenario {
        documents,
        topic,
        judgments,
        lexicon,
        spoken: vec!["rain".into(), "forecast".into()],
        top_r: 3,
        tau: 5.0,
    }
}
