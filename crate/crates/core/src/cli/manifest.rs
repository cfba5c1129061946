use crate::adapters::RespondentSpec;
use crate::parser::RULESET_VERSION;
use crate::scenario::GENERATOR_VERSION;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommandEntry {
    pub config_hash: String,
    /// Effective configuration with respondent secrets redacted.
    pub config: serde_json::Value,
    pub completed_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance record of an output directory. Timestamps live only here so
/// every other artifact is reproducible byte for byte.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RunManifest {
    pub generator_version: String,
    pub ruleset_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub respondent: Option<RespondentSpec>,
    /// Keyed by file name relative to the output directory.
    pub files: BTreeMap<String, FileEntry>,
    /// Most recent invocation of each command.
    pub commands: BTreeMap<String, CommandEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    /// Existing manifest in `dir`, or a fresh one when absent or unreadable.
    pub fn load_or_new(dir: &Path) -> Self {
        std::fs::read_to_string(dir.join(MANIFEST_FILE))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default()
    }

    pub fn record_file(&mut self, dir: &Path, name: &str) -> std::io::Result<()> {
        let bytes = std::fs::read(dir.join(name))?;
        self.files.insert(
            name.to_string(),
            FileEntry {
                path: name.to_string(),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            },
        );
        Ok(())
    }

    pub fn forget_file(&mut self, name: &str) {
        self.files.remove(name);
    }

    pub fn stamp(&mut self, command: &str, config: serde_json::Value) {
        self.generator_version = GENERATOR_VERSION.into();
        self.ruleset_version = RULESET_VERSION.into();
        self.commands.insert(
            command.to_string(),
            CommandEntry {
                config_hash: sha256_hex(config.to_string().as_bytes()),
                config,
                completed_at: Utc::now(),
            },
        );
    }

    pub fn save(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")
    }
}
