use crate::parser::Choice;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::Path;

/// One respondent reply, as persisted in the response log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChoiceRecord {
    pub scenario_id: String,
    pub model_name: String,
    pub raw_text: String,
    pub parsed: Choice,
    pub request_timestamp: DateTime<Utc>,
    pub latency_ms: u64,
    pub attempt: u32,
    /// Set when no completion was obtained (transport failure, retries exhausted).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ChoiceRecord {
    pub fn is_transport_failure(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("response log {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("response log {path}:{line}: {source}")]
    Parse {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> LogError + '_ {
    move |source| LogError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads every complete line of a JSON Lines log. A trailing line without
/// its newline is an interrupted write and is ignored.
pub fn read_log<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, LogError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(io_err(path))?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    let mut out = Vec::new();
    for (i, line) in complete.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(line).map_err(|source| LogError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<ChoiceRecord>, LogError> {
    read_log(path)
}

/// Append-only writer; each record goes out as one `write_all` of a full line.
pub struct LogWriter {
    file: File,
    path: String,
}

impl LogWriter {
    /// Opens `path` for appending, creating it if needed and cutting off a
    /// partial trailing line left by an interrupted run. Returns the writer
    /// and the scenario ids already present.
    pub fn open_resumable(path: &Path) -> Result<(Self, HashSet<String>), LogError> {
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io_err(path))?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(io_err(path))?;
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        if keep < text.len() {
            file.set_len(keep as u64).map_err(io_err(path))?;
            file.seek(SeekFrom::End(0)).map_err(io_err(path))?;
        }
        let mut seen = HashSet::new();
        for (i, line) in BufReader::new(&text.as_bytes()[..keep]).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            if line.trim().is_empty() {
                continue;
            }
            #[derive(Deserialize)]
            #[serde(rename_all = "camelCase")]
            struct IdOnly {
                scenario_id: String,
            }
            let rec: IdOnly = serde_json::from_str(&line).map_err(|source| LogError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                source,
            })?;
            seen.insert(rec.scenario_id);
        }
        Ok((
            Self {
                file,
                path: path.display().to_string(),
            },
            seen,
        ))
    }

    pub fn append<T: Serialize>(&mut self, record: &T) -> Result<(), LogError> {
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|source| LogError::Io {
                path: self.path.clone(),
                source,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str) -> ChoiceRecord {
        ChoiceRecord {
            scenario_id: id.into(),
            model_name: "m".into(),
            raw_text: "Case 1".into(),
            parsed: Choice::Case1,
            request_timestamp: Utc::now(),
            latency_ms: 3,
            attempt: 1,
            error: None,
        }
    }

    #[test]
    fn partial_trailing_line_is_cut_on_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let mut w = LogWriter::open_resumable(&path).unwrap().0;
        w.append(&rec("a")).unwrap();
        w.append(&rec("b")).unwrap();
        drop(w);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"scenarioId\":\"c\",\"mod").unwrap();
        drop(f);

        assert_eq!(read_records(&path).unwrap().len(), 2);
        let (mut w, seen) = LogWriter::open_resumable(&path).unwrap();
        assert_eq!(seen.len(), 2);
        w.append(&rec("c")).unwrap();
        let ids: Vec<_> = read_records(&path)
            .unwrap()
            .into_iter()
            .map(|r| r.scenario_id)
            .collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn error_field_omitted_when_absent() {
        let v = serde_json::to_value(rec("a")).unwrap();
        assert!(v.get("error").is_none());
        assert_eq!(v["parsed"], "case1");
        assert_eq!(v["scenarioId"], "a");
    }
}
