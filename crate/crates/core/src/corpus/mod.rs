//! Documents, topics and relevance judgments, plus the tokenizer and
//! stoplist that turn their text into indexing and query terms.

mod sgml;
mod tokenize;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{decode_utf8, Error, Location, Result};

pub use tokenize::{
    extract_terms, tokenize, DefaultTokenizer, Stoplist, TermExtractor, TokenStream, Tokenizer,
};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    /// Unindexed fields (authors, conference, ...) keyed by tag name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

/// A document field that can be selected for indexing and language modeling.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Title,
    Abstract,
    Keywords,
    Extra(String),
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "title" => Field::Title,
            "abstract" => Field::Abstract,
            "keywords" | "keyword" => Field::Keywords,
            "" => return Err(Error::InvalidParameter("empty field name".into())),
            _ => Field::Extra(s.to_string()),
        })
    }
}

/// Fields indexed by default: title, abstract and keywords.
pub fn default_fields() -> Vec<Field> {
    vec![Field::Title, Field::Abstract, Field::Keywords]
}

impl Document {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Self::default()
        }
    }

    fn field_parts(&self, field: &Field) -> Vec<&str> {
        match field {
            Field::Title => vec![self.title.as_str()],
            Field::Abstract => vec![self.abstract_text.as_str()],
            Field::Keywords => self.keywords.iter().map(String::as_str).collect(),
            Field::Extra(name) => self
                .extra
                .iter()
                .filter(|(k, _)| k.eq_ignore_ascii_case(name))
                .map(|(_, v)| v.as_str())
                .collect(),
        }
    }

    /// Text of the selected fields, one field value per line.
    pub fn selected_text(&self, fields: &[Field]) -> String {
        let parts: Vec<&str> = fields
            .iter()
            .flat_map(|f| self.field_parts(f))
            .filter(|p| !p.is_empty())
            .collect();
        parts.join("\n")
    }

    /// Character count of the selected fields, without separators.
    pub fn selected_char_len(&self, fields: &[Field]) -> usize {
        fields
            .iter()
            .flat_map(|f| self.field_parts(f))
            .map(|p| p.chars().count())
            .sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub title: String,
    pub description: String,
    pub narrative: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Irrelevant,
    PartiallyRelevant,
    Relevant,
    HighlyRelevant,
}

impl Grade {
    /// Highly relevant and relevant documents count as relevant.
    pub fn is_relevant(self) -> bool {
        matches!(self, Grade::HighlyRelevant | Grade::Relevant)
    }

    pub fn name(self) -> &'static str {
        match self {
            Grade::HighlyRelevant => "highly_relevant",
            Grade::Relevant => "relevant",
            Grade::PartiallyRelevant => "partially_relevant",
            Grade::Irrelevant => "irrelevant",
        }
    }

    fn from_token(token: &str) -> Option<Self> {
        Some(match token.to_ascii_lowercase().as_str() {
            "2" | "highly_relevant" | "highly-relevant" => Grade::HighlyRelevant,
            "1" | "relevant" => Grade::Relevant,
            "0.5" | "partially_relevant" | "partially-relevant" => Grade::PartiallyRelevant,
            "0" | "irrelevant" => Grade::Irrelevant,
            _ => return None,
        })
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub topic_id: String,
    pub doc_id: String,
    pub grade: Grade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentFormat {
    Tagged,
    JsonLines,
}

impl FromStr for DocumentFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tagged" | "sgml" => Ok(Self::Tagged),
            "jsonl" | "json_lines" | "json-lines" => Ok(Self::JsonLines),
            other => Err(Error::InvalidParameter(format!(
                "unknown document format {other:?}"
            ))),
        }
    }
}

pub fn parse_documents(input: &[u8], format: DocumentFormat) -> Result<Vec<Document>> {
    let text = decode_utf8(input)?;
    let docs = match format {
        DocumentFormat::Tagged => parse_tagged_documents(text)?,
        DocumentFormat::JsonLines => parse_jsonl_documents(text)?,
    };
    let mut seen = HashSet::with_capacity(docs.len());
    for doc in &docs {
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::DuplicateId(doc.id.clone()));
        }
    }
    Ok(docs)
}

fn record_error(offset: usize, record: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        location: Location::at(offset).record(record),
        message: message.into(),
    }
}

fn parse_tagged_documents(text: &str) -> Result<Vec<Document>> {
    let records = sgml::parse_records(text, "DOC")?;
    let mut docs = Vec::with_capacity(records.len());
    for (index, record) in records.into_iter().enumerate() {
        let mut doc = Document::new(
            record
                .element
                .attr(&["id", "docno"])
                .unwrap_or_default()
                .trim(),
        );
        for (child, body) in record.children {
            let body = body.trim();
            match child.name.to_ascii_uppercase().as_str() {
                "DOCNO" | "ID" => doc.id = body.to_string(),
                "TITLE" => doc.title = body.to_string(),
                "ABSTRACT" => doc.abstract_text = body.to_string(),
                "KEYWORD" => doc.keywords.push(body.to_string()),
                "KEYWORDS" => doc.keywords.extend(
                    body.split([';', '\n'])
                        .map(str::trim)
                        .filter(|k| !k.is_empty())
                        .map(str::to_string),
                ),
                _ => {
                    doc.extra
                        .entry(child.name.clone())
                        .and_modify(|v| {
                            v.push('\n');
                            v.push_str(body);
                        })
                        .or_insert_with(|| body.to_string());
                }
            }
        }
        if doc.id.is_empty() {
            return Err(record_error(
                record.element.offset,
                index,
                "document without an id",
            ));
        }
        docs.push(doc);
    }
    Ok(docs)
}

fn parse_jsonl_documents(text: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(line)
            .map_err(|e| record_error(start, docs.len(), e.to_string()))?;
        if doc.id.trim().is_empty() {
            return Err(record_error(start, docs.len(), "document without an id"));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Writes documents in the tagged layout accepted by [`parse_documents`].
pub fn write_tagged_documents(docs: &[Document]) -> String {
    let mut out = String::new();
    for doc in docs {
        out.push_str(&format!("<DOC id=\"{}\">\n", sgml::escape(&doc.id)));
        out.push_str(&format!("<TITLE>{}</TITLE>\n", sgml::escape(&doc.title)));
        out.push_str(&format!(
            "<ABSTRACT>{}</ABSTRACT>\n",
            sgml::escape(&doc.abstract_text)
        ));
        for k in &doc.keywords {
            out.push_str(&format!("<KEYWORD>{}</KEYWORD>\n", sgml::escape(k)));
        }
        for (tag, value) in &doc.extra {
            out.push_str(&format!("<{tag}>{}</{tag}>\n", sgml::escape(value)));
        }
        out.push_str("</DOC>\n");
    }
    out
}

pub fn write_jsonl_documents(docs: &[Document]) -> Result<String> {
    let mut out = String::new();
    for doc in docs {
        out.push_str(&serde_json::to_string(doc)?);
        out.push('\n');
    }
    Ok(out)
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn parse_topics(input: &[u8]) -> Result<Vec<Topic>> {
    let text = decode_utf8(input)?;
    let records = sgml::parse_records(text, "TOPIC")?;
    let mut topics = Vec::with_capacity(records.len());
    for (index, record) in records.into_iter().enumerate() {
        let mut topic = Topic {
            id: record
                .element
                .attr(&["q", "num", "id"])
                .unwrap_or_default()
                .trim()
                .to_string(),
            ..Topic::default()
        };
        let mut has_description = false;
        for (child, body) in record.children {
            let body = collapse_whitespace(&body);
            match child.name.to_ascii_uppercase().as_str() {
                "NUM" => topic.id = body,
                "TITLE" => topic.title = body,
                "DESCRIPTION" | "DESC" => {
                    has_description = true;
                    topic.description = body;
                }
                "NARRATIVE" | "NARR" => topic.narrative = body,
                _ => {}
            }
        }
        if topic.id.is_empty() {
            return Err(record_error(
                record.element.offset,
                index,
                "topic without an id",
            ));
        }
        if !has_description || topic.description.is_empty() {
            return Err(Error::MissingDescription(topic.id));
        }
        topics.push(topic);
    }
    Ok(topics)
}

pub fn write_topics(topics: &[Topic]) -> String {
    let mut out = String::new();
    for t in topics {
        out.push_str(&format!("<TOPIC q={}>\n", t.id));
        out.push_str(&format!("<TITLE>{}</TITLE>\n", sgml::escape(&t.title)));
        out.push_str(&format!(
            "<DESCRIPTION>{}</DESCRIPTION>\n",
            sgml::escape(&t.description)
        ));
        out.push_str(&format!(
            "<NARRATIVE>{}</NARRATIVE>\n",
            sgml::escape(&t.narrative)
        ));
        out.push_str("</TOPIC>\n");
    }
    out
}

/// Reads `topic_id doc_id grade` lines. A four-column TREC layout
/// (`topic_id iteration doc_id grade`) is accepted as well.
pub fn parse_qrels(input: &[u8]) -> Result<Vec<Judgment>> {
    let text = decode_utf8(input)?;
    let mut judgments = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        let (topic, doc, grade) = match cols.as_slice() {
            [t, d, g] => (*t, *d, *g),
            [t, _, d, g] => (*t, *d, *g),
            _ => {
                return Err(Error::Parse {
                    location: Location::at(0).line(line_no),
                    message: format!("expected `topic_id doc_id grade`, found {trimmed:?}"),
                })
            }
        };
        let grade = Grade::from_token(grade).ok_or_else(|| Error::UnknownGrade {
            token: grade.to_string(),
            line: line_no,
        })?;
        if !seen.insert((topic.to_string(), doc.to_string())) {
            return Err(Error::DuplicateJudgment {
                topic: topic.to_string(),
                doc: doc.to_string(),
                line: line_no,
            });
        }
        judgments.push(Judgment {
            topic_id: topic.to_string(),
            doc_id: doc.to_string(),
            grade,
        });
    }
    Ok(judgments)
}

pub fn write_qrels(judgments: &[Judgment]) -> String {
    judgments
        .iter()
        .map(|j| format!("{} {} {}\n", j.topic_id, j.doc_id, j.grade))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIG_TOPIC: &str = "<TOPIC q=0118>
<TITLE>TV conferencing</TITLE>
<DESCRIPTION>Distance education support systems using TV
conferencing</DESCRIPTION>
<NARRATIVE>A relevant document will provide information on the
development of distance education support systems using TV
conferencing. Preferred documents would present examples of
using TV conferencing and discuss the results. Any reported
methods of aiding remote teaching are relevant documents (for
example, ways of utilizing satellite communication, the
Internet, and ISDN circuits).</NARRATIVE>
</TOPIC>
";

    #[test]
    fn tagged_document_fields() {
        let docs = parse_documents(
            b"<DOC id=d1><TITLE>A</TITLE><ABSTRACT>B</ABSTRACT></DOC>",
            DocumentFormat::Tagged,
        )
        .unwrap();
        assert_eq!(
            docs,
            vec![Document {
                id: "d1".into(),
                title: "A".into(),
                abstract_text: "B".into(),
                keywords: vec![],
                extra: BTreeMap::new(),
            }]
        );
    }

    #[test]
    fn empty_inputs() {
        assert!(parse_documents(b"", DocumentFormat::Tagged)
            .unwrap()
            .is_empty());
        assert!(parse_documents(b"\n\n", DocumentFormat::JsonLines)
            .unwrap()
            .is_empty());
        assert!(parse_topics(b"").unwrap().is_empty());
        assert!(parse_qrels(b"").unwrap().is_empty());
    }

    #[test]
    fn duplicate_document_id() {
        let err = parse_documents(
            b"<DOC id=d1><TITLE>A</TITLE></DOC><DOC id=d1><TITLE>B</TITLE></DOC>",
            DocumentFormat::Tagged,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId(ref id) if id == "d1"));
    }

    #[test]
    fn unknown_tags_are_preserved_and_docno_accepted() {
        let docs = parse_documents(
            b"<DOC>\n<DOCNO> x9 </DOCNO>\n<AUTHOR>Fujii</AUTHOR>\n<KEYWORDS>speech; retrieval</KEYWORDS>\n</DOC>",
            DocumentFormat::Tagged,
        )
        .unwrap();
        assert_eq!(docs[0].id, "x9");
        assert_eq!(docs[0].extra["AUTHOR"], "Fujii");
        assert_eq!(docs[0].keywords, vec!["speech", "retrieval"]);
    }

    #[test]
    fn malformed_record_names_offset_and_index() {
        let input = b"<DOC id=a><TITLE>x</TITLE></DOC>\n<DOC id=b><TITLE>y</DOC>";
        match parse_documents(input, DocumentFormat::Tagged).unwrap_err() {
            Error::Parse { location, .. } => {
                assert_eq!(location.record, Some(1));
                assert_eq!(location.offset, 51);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn jsonl_documents() {
        let input = br#"{"id":"d1","title":"A","abstract":"B","keywords":["k"]}
{"id":"d2"}
"#;
        let docs = parse_documents(input, DocumentFormat::JsonLines).unwrap();
        assert_eq!(docs[0].abstract_text, "B");
        assert_eq!(docs[0].keywords, vec!["k"]);
        assert_eq!(docs[1].title, "");

        let bad = b"{\"id\":\"d1\"}\n{\"id\": 3}\n";
        match parse_documents(bad, DocumentFormat::JsonLines).unwrap_err() {
            Error::Parse { location, .. } => {
                assert_eq!(location.record, Some(1));
                assert_eq!(location.offset, 12);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn figure_topic() {
        let topics = parse_topics(FIG_TOPIC.as_bytes()).unwrap();
        assert_eq!(topics.len(), 1);
        let t = &topics[0];
        assert_eq!(t.id, "0118");
        assert_eq!(t.title, "TV conferencing");
        assert_eq!(
            t.description,
            "Distance education support systems using TV conferencing"
        );
        assert!(t
            .narrative
            .starts_with("A relevant document will provide information on the development"));
        assert!(t.narrative.ends_with("ISDN circuits)."));
    }

    #[test]
    fn topic_edge_cases() {
        let t = parse_topics(
            b"<TOPIC q=7><TITLE>t</TITLE><DESCRIPTION>d</DESCRIPTION><NARRATIVE></NARRATIVE></TOPIC>",
        )
        .unwrap();
        assert_eq!(t[0].narrative, "");

        let err = parse_topics(b"<TOPIC q=1><TITLE>x</TITLE></TOPIC>").unwrap_err();
        assert!(matches!(err, Error::MissingDescription(ref id) if id == "1"));

        let err = parse_topics(b"<TOPIC q=1><TITLE>x</TITLE>").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn qrels_lines() {
        let j =
            parse_qrels(b"# comment\n0118 d7 relevant\n\n0118 d8 2\n0118 d9 0.5\n0119 0 d1 0\n")
                .unwrap();
        assert_eq!(j.len(), 4);
        assert_eq!(j[0].grade, Grade::Relevant);
        assert_eq!(j[1].grade, Grade::HighlyRelevant);
        assert_eq!(j[2].grade, Grade::PartiallyRelevant);
        assert_eq!(j[3].doc_id, "d1");
        assert_eq!(j[3].grade, Grade::Irrelevant);

        let err = parse_qrels(b"0118 d7 maybe\n").unwrap_err();
        assert!(matches!(err, Error::UnknownGrade { line: 1, .. }));
    }

    #[test]
    fn selected_fields() {
        let mut d = Document::new("d");
        d.title = "ab".into();
        d.keywords = vec!["cd".into(), "e".into()];
        d.extra.insert("AUTHOR".into(), "zz".into());
        let f = default_fields();
        assert_eq!(d.selected_text(&f), "ab\ncd\ne");
        assert_eq!(d.selected_char_len(&f), 5);
        assert_eq!(d.selected_char_len(&[Field::Extra("author".into())]), 2);
    }

    fn field_text() -> impl Strategy<Value = String> {
        "[a-zA-Z0-9<>&\" .,]{0,12}".prop_map(|s| s.trim().to_string())
    }

    fn document() -> impl Strategy<Value = Document> {
        (
            "[a-z0-9]{1,6}",
            field_text(),
            field_text(),
            proptest::collection::vec(
                field_text().prop_filter("nonempty", |s| !s.is_empty()),
                0..3,
            ),
            proptest::collection::btree_map("[A-Z]{2,5}", field_text(), 0..2),
        )
            .prop_filter("reserved tags", |(_, _, _, _, extra)| {
                extra.keys().all(|k| {
                    !matches!(
                        k.as_str(),
                        "TITLE" | "ABSTRACT" | "KEYWORD" | "KEYWORDS" | "DOCNO" | "ID"
                    )
                })
            })
            .prop_map(|(id, title, abstract_text, keywords, extra)| Document {
                id,
                title,
                abstract_text,
                keywords,
                extra,
            })
    }

    proptest! {
        #[test]
        fn tagged_format_round_trips(docs in proptest::collection::vec(document(), 0..5)) {
            let mut seen = HashSet::new();
            let docs: Vec<Document> = docs.into_iter().filter(|d| seen.insert(d.id.clone())).collect();
            let text = write_tagged_documents(&docs);
            let parsed = parse_documents(text.as_bytes(), DocumentFormat::Tagged).unwrap();
            prop_assert_eq!(parsed, docs);
        }
    }
}
