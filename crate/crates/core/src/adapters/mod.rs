//! Respondents (remote chat endpoints, local subprocesses, replay fixtures,
//! synthetic policy agents) behind one interface, plus the retrying query
//! and the resumable campaign runner.

mod campaign;
mod http;
mod record;
mod replay;
mod subprocess;
mod synthetic;

pub use campaign::{run_campaign, CampaignError, CampaignOptions, CampaignSummary};
pub use http::HttpChatRespondent;
pub use record::{read_log, read_records, ChoiceRecord, LogError, LogWriter};
pub use replay::ReplayRespondent;
pub use subprocess::SubprocessRespondent;
pub use synthetic::{PolicyRule, PolicySpec, SyntheticRespondent, TieBreak};

use crate::parser::{classify, Choice};
use crate::render::PromptText;
use crate::scenario::Scenario;
use chrono::Utc;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::{Duration, Instant};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RespondentKind {
    HttpChat,
    Subprocess,
    Replay,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RespondentSpec {
    pub kind: RespondentKind,
    pub model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env_var: Option<String>,
    /// Sent verbatim; absent keys leave the provider defaults in place.
    #[serde(default)]
    pub sampling_params: serde_json::Map<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_path: Option<PathBuf>,
    /// Program and arguments for the subprocess adapter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum AdapterError {
    #[error("respondent spec: {0}")]
    InvalidSpec(String),
    #[error("authentication: {0}")]
    Auth(String),
    #[error("loading replay fixture: {0}")]
    Fixture(String),
}

impl RespondentSpec {
    pub fn synthetic(model_name: impl Into<String>, policy: PolicySpec) -> Self {
        Self {
            kind: RespondentKind::Synthetic,
            model_name: model_name.into(),
            endpoint_url: None,
            api_key_env_var: None,
            sampling_params: Default::default(),
            policy: Some(policy),
            fixture_path: None,
            command: None,
        }
    }

    pub fn validate(&self) -> Result<(), AdapterError> {
        let missing = |f: &str| {
            Err(AdapterError::InvalidSpec(format!(
                "{:?} respondent requires `{f}`",
                self.kind
            )))
        };
        if self.model_name.trim().is_empty() {
            return Err(AdapterError::InvalidSpec("modelName is empty".into()));
        }
        match self.kind {
            RespondentKind::HttpChat if self.endpoint_url.is_none() => missing("endpointUrl"),
            RespondentKind::Subprocess if self.command.as_ref().is_none_or(|c| c.is_empty()) => {
                missing("command")
            }
            RespondentKind::Replay if self.fixture_path.is_none() => missing("fixturePath"),
            RespondentKind::Synthetic => match &self.policy {
                None => missing("policy"),
                Some(p) => p.validate(),
            },
            _ => Ok(()),
        }
    }

    /// Copy safe to write into manifests: query strings and anything that
    /// looks like a credential are masked.
    pub fn redacted(&self) -> Self {
        let mut out = self.clone();
        if let Some(url) = &mut out.endpoint_url {
            if let Some(i) = url.find('?') {
                url.truncate(i);
                url.push_str("?<redacted>");
            }
        }
        for (k, v) in out.sampling_params.iter_mut() {
            let k = k.to_ascii_lowercase();
            if ["key", "token", "secret", "password"]
                .iter()
                .any(|s| k.contains(s))
            {
                *v = serde_json::Value::String("<redacted>".into());
            }
        }
        out
    }
}

/// Why a single attempt produced no completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttemptError {
    /// Transport failure, 429 or 5xx: worth retrying.
    Retryable(String),
    /// Deterministic failure (bad request, malformed body, missing fixture).
    Fatal(String),
    /// Credentials rejected; the campaign stops.
    Auth(String),
}

pub trait Respondent: Send + Sync {
    fn model_name(&self) -> &str;

    fn respond(&self, scenario: &Scenario, prompt: &PromptText) -> Result<String, AttemptError>;
}

pub fn build_respondent(
    spec: &RespondentSpec,
    timeout: Duration,
) -> Result<Box<dyn Respondent>, AdapterError> {
    spec.validate()?;
    Ok(match spec.kind {
        RespondentKind::HttpChat => Box::new(HttpChatRespondent::new(spec, timeout)?),
        RespondentKind::Subprocess => Box::new(SubprocessRespondent::new(spec, timeout)),
        RespondentKind::Replay => Box::new(ReplayRespondent::new(spec)?),
        RespondentKind::Synthetic => Box::new(SyntheticRespondent::new(spec)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub factor: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            base_delay_ms: 1_000,
            factor: 2.0,
        }
    }
}

impl RetryPolicy {
    /// Delay after the `attempt`-th failure (1-based).
    pub fn delay(&self, attempt: u32) -> Duration {
        let ms = self.base_delay_ms as f64 * self.factor.powi(attempt as i32 - 1);
        Duration::from_millis(ms.round() as u64)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("authentication failed for scenario {scenario_id}: {message}")]
pub struct AuthFailure {
    pub scenario_id: String,
    pub message: String,
}

/// Queries one scenario, retrying retryable failures with exponential
/// backoff. Exhausted or fatal failures come back as a record with empty
/// text and `parsed = invalid`; only credential errors are returned as `Err`.
pub fn query(
    respondent: &dyn Respondent,
    scenario: &Scenario,
    prompt: &PromptText,
    retry: &RetryPolicy,
) -> Result<ChoiceRecord, AuthFailure> {
    let request_timestamp = Utc::now();
    let mut attempt = 0;
    loop {
        attempt += 1;
        let started = Instant::now();
        let outcome = respondent.respond(scenario, prompt);
        let latency_ms = started.elapsed().as_millis() as u64;
        let failed = |error: String| ChoiceRecord {
            scenario_id: scenario.id.clone(),
            model_name: respondent.model_name().to_string(),
            raw_text: String::new(),
            parsed: Choice::Invalid,
            request_timestamp,
            latency_ms,
            attempt,
            error: Some(error),
        };
        match outcome {
            Ok(raw_text) => {
                return Ok(ChoiceRecord {
                    scenario_id: scenario.id.clone(),
                    model_name: respondent.model_name().to_string(),
                    parsed: classify(&raw_text),
                    raw_text,
                    request_timestamp,
                    latency_ms,
                    attempt,
                    error: None,
                })
            }
            Err(AttemptError::Auth(message)) => {
                return Err(AuthFailure {
                    scenario_id: scenario.id.clone(),
                    message,
                })
            }
            Err(AttemptError::Fatal(msg)) => return Ok(failed(msg)),
            Err(AttemptError::Retryable(msg)) if attempt >= retry.max_attempts => {
                return Ok(failed(format!("retries exhausted: {msg}")))
            }
            Err(AttemptError::Retryable(_)) => std::thread::sleep(retry.delay(attempt)),
        }
    }
}
