use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decoder::{Alphabet, ChannelModel, DecodeConfig};
use crate::error::{Error, Result};
use crate::index::{IndexOptions, DEFAULT_CUTOFF};
use crate::lm::{LmOptions, DEFAULT_TAU};

/// A language model file with the name it gets in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelPath {
    pub label: String,
    pub path: PathBuf,
}

/// Artifact locations. Relative paths resolve against the config file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub documents: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub index: Option<PathBuf>,
    /// The global model.
    pub lm: Option<PathBuf>,
    /// Models compared by `experiment`.
    pub models: Vec<ModelPath>,
    pub lexicon: Option<PathBuf>,
    pub channel: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(x) = p.as_mut() {
                if x.is_relative() {
                    *x = base.join(&*x);
                }
            }
        };
        fix(&mut self.documents);
        fix(&mut self.topics);
        fix(&mut self.qrels);
        fix(&mut self.index);
        fix(&mut self.lm);
        fix(&mut self.lexicon);
        fix(&mut self.channel);
        fix(&mut self.stoplist);
        fix(&mut self.output);
        for m in &mut self.models {
            if m.path.is_relative() {
                m.path = base.join(&m.path);
            }
        }
    }
}

/// Uniform-confusion channel used when no channel file is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSettings {
    pub substitution: f64,
    pub insertion: f64,
    pub deletion: f64,
}

impl Default for ChannelSettings {
    fn default() -> Self {
        Self {
            substitution: 0.15,
            insertion: 0.03,
            deletion: 0.05,
        }
    }
}

impl ChannelSettings {
    pub fn build(&self) -> Result<ChannelModel> {
        ChannelModel::uniform_confusion(
            Alphabet::default(),
            self.substitution,
            self.insertion,
            self.deletion,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    /// Documents returned per query.
    pub cutoff: usize,
    pub online_adaptation: bool,
    /// Top documents used for online adaptation.
    pub top_r: usize,
    /// MAP prior weight for online adaptation.
    pub tau: f64,
    pub seed: u64,
    /// Seeds swept by `experiment`; empty means just `seed`.
    pub seeds: Vec<u64>,
    pub index: IndexOptions,
    pub lm: LmOptions,
    pub decoder: DecodeConfig,
    pub channel: ChannelSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            cutoff: DEFAULT_CUTOFF,
            online_adaptation: false,
            top_r: 10,
            tau: DEFAULT_TAU,
            seed: 0,
            seeds: Vec::new(),
            index: IndexOptions::default(),
            lm: LmOptions::default(),
            decoder: DecodeConfig::default(),
            channel: ChannelSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self =
            toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a TOML file; relative paths inside it are taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            config.paths.rebase(base);
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
        }
        if self.top_r > self.cutoff {
            return Err(Error::InvalidParameter(format!(
                "top_r {} exceeds the cutoff {}",
                self.top_r, self.cutoff
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.seeds.clone()
        }
    }

    pub fn channel_model(&self) -> Result<ChannelModel> {
        match &self.paths.channel {
            Some(p) => ChannelModel::from_reader(std::io::BufReader::new(std::fs::File::open(p)?)),
            None => self.channel.build(),
        }
    }
}
