use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use crate::error::{Error, Location, Result};

pub type Phoneme = u16;

/// Finite set of phoneme symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, Phoneme>,
}

impl Default for Alphabet {
    /// Lowercase ASCII letters and digits, matching the grapheme fallback.
    fn default() -> Self {
        Self::new(('a'..='z').chain('0'..='9').map(String::from)).expect("distinct symbols")
    }
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list = Vec::new();
        let mut index = HashMap::new();
        for s in symbols {
            let s: String = s.into();
            if s.is_empty() || s.contains(char::is_whitespace) {
                return Err(Error::InvalidParameter(format!(
                    "invalid phoneme symbol {s:?}"
                )));
            }
            if index.insert(s.clone(), list.len() as Phoneme).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "phoneme {s:?} listed twice"
                )));
            }
            list.push(s);
        }
        if list.is_empty() {
            return Err(Error::InvalidParameter("empty phoneme alphabet".into()));
        }
        Ok(Self {
            symbols: list,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn id(&self, symbol: &str) -> Result<Phoneme> {
        self.index
            .get(symbol)
            .copied()
            .ok_or_else(|| Error::UnknownPhoneme(symbol.to_string()))
    }

    pub fn symbol(&self, id: Phoneme) -> &str {
        &self.symbols[id as usize]
    }

    pub fn encode<S: AsRef<str>>(&self, phonemes: &[S]) -> Result<Vec<Phoneme>> {
        phonemes.iter().map(|p| self.id(p.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[Phoneme]) -> Vec<String> {
        ids.iter().map(|&p| self.symbol(p).to_string()).collect()
    }
}

/// Word pronunciations, one per word, with an optional spelling fallback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<String>>,
    grapheme_fallback: bool,
}

impl Default for Lexicon {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
            grapheme_fallback: true,
        }
    }
}

impl Lexicon {
    /// An empty lexicon that spells every word letter by letter.
    pub fn graphemic() -> Self {
        Self::default()
    }

    pub fn with_fallback(mut self, enabled: bool) -> Self {
        self.grapheme_fallback = enabled;
        self
    }

    pub fn insert<I, S>(&mut self, word: impl Into<String>, phonemes: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let word = word.into();
        let phonemes: Vec<String> = phonemes.into_iter().map(Into::into).collect();
        if phonemes.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "empty pronunciation for {word:?}"
            )));
        }
        self.entries.insert(word, phonemes);
        Ok(())
    }

    /// Reads `word<TAB>p1 p2 ...` lines; `#` starts a comment line.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut lex = Self::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (word, pron) = trimmed.split_once('\t').ok_or_else(|| Error::Parse {
                location: Location::at(0).line(i + 1),
                message: "expected `word<TAB>phonemes`".into(),
            })?;
            lex.insert(word.trim(), pron.split_whitespace())
                .map_err(|_| Error::Parse {
                    location: Location::at(0).line(i + 1),
                    message: format!("empty pronunciation for {word:?}"),
                })?;
        }
        Ok(lex)
    }

    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .map(|(w, p)| format!("{w}\t{}\n", p.join(" ")))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The listed pronunciation, or the word's characters when the fallback is on.
    pub fn pronounce(&self, word: &str) -> Result<Vec<String>> {
        if let Some(p) = self.entries.get(word) {
            return Ok(p.clone());
        }
        if self.grapheme_fallback && !word.is_empty() {
            return Ok(word.chars().map(String::from).collect());
        }
        Err(Error::UnresolvableWord(word.to_string()))
    }
}

/// Concatenates the pronunciations of `words`.
pub fn phonemize<S: AsRef<str>>(words: &[S], lexicon: &Lexicon) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for w in words {
        out.extend(lexicon.pronounce(w.as_ref())?);
    }
    Ok(out)
}
