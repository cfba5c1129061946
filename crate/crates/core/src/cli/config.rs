use crate::adapters::{RespondentSpec, RetryPolicy};
use crate::scenario::{FocalDimension, GenerationConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Pipeline configuration: one section per command. Command-line flags
/// override the values read from file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub generate: GenerationConfig,
    pub run: RunSection,
    pub analyze: AnalyzeSection,
    pub compare: CompareSection,
    pub rationale: RationaleSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub respondent: Option<RespondentSpec>,
    pub concurrency: usize,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phrases_path: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            respondent: None,
            concurrency: 4,
            timeout_secs: 60,
            retry: RetryPolicy::default(),
            phrases_path: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct AnalyzeSection {
    /// Drawn as the reference bar in the AMCE figure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct CompareSection {
    /// `amce.json` files to compare.
    pub profiles: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<PathBuf>,
    /// Label distances are measured from; the baseline when present,
    /// otherwise the first profile.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

/// Which orientation of the focal attribute the recorded choice must have
/// spared for a scenario to be probed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "camelCase")]
pub enum SparedPole {
    /// Less fit, fewer characters, pets, males, elderly, lower status.
    #[default]
    Negative,
    Positive,
    Any,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RationaleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focal: Option<FocalDimension>,
    pub spared: SparedPole,
    /// Only probe scenarios where the car was sent straight (Case 1).
    pub require_straight: bool,
    /// Defaults to the `run` respondent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub respondent: Option<RespondentSpec>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }
}

pub fn load_respondent(path: &Path) -> Result<RespondentSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.display().to_string(),
        source,
    })
}
