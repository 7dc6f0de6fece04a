use std::fmt;

/// Where in an input stream a parse problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub offset: usize,
    pub record: Option<usize>,
    pub line: Option<usize>,
}

impl Location {
    pub fn at(offset: usize) -> Self {
        Self {
            offset,
            record: None,
            line: None,
        }
    }

    pub fn record(mut self, record: usize) -> Self {
        self.record = Some(record);
        self
    }

    pub fn line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "byte {}", self.offset)?;
        if let Some(line) = self.line {
            write!(f, ", line {line}")?;
        }
        if let Some(record) = self.record {
            write!(f, ", record {record}")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input is not valid UTF-8 (at byte {0})")]
    Utf8(usize),

    #[error("parse error at {location}: {message}")]
    Parse { location: Location, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("duplicate judgment for topic {topic:?}, document {doc:?} (line {line})")]
    DuplicateJudgment {
        topic: String,
        doc: String,
        line: usize,
    },

    #[error("topic {0:?} has no DESCRIPTION")]
    MissingDescription(String),

    #[error("unknown relevance grade {token:?} at line {line}")]
    UnknownGrade { token: String, line: usize },

    #[error("cannot build an index over an empty collection")]
    EmptyCollection,

    #[error("unknown document ordinal {0}")]
    UnknownDocument(usize),

    #[error("empty corpus: {0}")]
    EmptyCorpus(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("word {0:?} has no pronunciation")]
    UnresolvableWord(String),

    #[error("phoneme {0:?} is not in the channel alphabet")]
    UnknownPhoneme(String),

    #[error("no hypothesis survived a beam of {0}; widen the beam")]
    BeamTooNarrow(f64),

    #[error("topic {0:?} has no relevant documents")]
    UndefinedTopic(String),

    #[error("reference has no {0}")]
    EmptyReference(&'static str),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Decodes a byte stream as UTF-8, reporting the offset of the first bad byte.
pub(crate) fn decode_utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Utf8(e.valid_up_to()))
}
