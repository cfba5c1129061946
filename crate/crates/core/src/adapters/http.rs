use super::{AdapterError, AttemptError, Respondent, RespondentSpec};
use crate::render::PromptText;
use crate::scenario::Scenario;
use serde_json::{json, Value};
use std::time::Duration;

/// Single-turn OpenAI-style chat completion client.
pub struct HttpChatRespondent {
    model_name: String,
    url: String,
    api_key: Option<String>,
    sampling_params: serde_json::Map<String, Value>,
    agent: ureq::Agent,
}

impl HttpChatRespondent {
    pub fn new(spec: &RespondentSpec, timeout: Duration) -> Result<Self, AdapterError> {
        let api_key = match &spec.api_key_env_var {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                AdapterError::Auth(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Ok(Self {
            model_name: spec.model_name.clone(),
            url: spec.endpoint_url.clone().expect("validated http spec"),
            api_key,
            sampling_params: spec.sampling_params.clone(),
            agent,
        })
    }

    pub fn request_body(&self, prompt: &PromptText) -> Value {
        let mut body = serde_json::Map::new();
        body.insert("model".into(), json!(self.model_name));
        body.insert(
            "messages".into(),
            json!([{ "role": "user", "content": prompt.full }]),
        );
        for (k, v) in &self.sampling_params {
            body.insert(k.clone(), v.clone());
        }
        Value::Object(body)
    }
}

/// Content of the first choice's message.
pub(crate) fn extract_content(body: &Value) -> Option<&str> {
    body.get("choices")?
        .get(0)?
        .get("message")?
        .get("content")?
        .as_str()
}

impl Respondent for HttpChatRespondent {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn respond(&self, _: &Scenario, prompt: &PromptText) -> Result<String, AttemptError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(self.request_body(prompt))
            .map_err(|e| AttemptError::Retryable(e.to_string()))?;
        let status = resp.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Err(AttemptError::Auth(format!("HTTP {status}"))),
            429 | 500..=599 => return Err(AttemptError::Retryable(format!("HTTP {status}"))),
            _ => return Err(AttemptError::Fatal(format!("HTTP {status}"))),
        }
        let body: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| AttemptError::Retryable(format!("reading body: {e}")))?;
        extract_content(&body)
            .map(str::to_string)
            .ok_or_else(|| AttemptError::Fatal("response has no choices[0].message.content".into()))
    }
}
