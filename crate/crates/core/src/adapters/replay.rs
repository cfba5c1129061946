use super::record::read_log;
use super::{AdapterError, AttemptError, Respondent, RespondentSpec};
use crate::render::PromptText;
use crate::scenario::Scenario;
use serde::Deserialize;
use std::collections::HashMap;

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct FixtureLine {
    scenario_id: String,
    raw_text: String,
}

/// Answers from a JSON Lines fixture of `{scenarioId, rawText}` objects.
/// A previous response log is a valid fixture.
pub struct ReplayRespondent {
    model_name: String,
    answers: HashMap<String, String>,
}

impl ReplayRespondent {
    pub fn new(spec: &RespondentSpec) -> Result<Self, AdapterError> {
        let path = spec.fixture_path.as_ref().expect("validated replay spec");
        let lines: Vec<FixtureLine> =
            read_log(path).map_err(|e| AdapterError::Fixture(e.to_string()))?;
        let mut answers = HashMap::with_capacity(lines.len());
        for l in lines {
            answers.entry(l.scenario_id).or_insert(l.raw_text);
        }
        Ok(Self {
            model_name: spec.model_name.clone(),
            answers,
        })
    }

    pub fn from_map(model_name: impl Into<String>, answers: HashMap<String, String>) -> Self {
        Self {
            model_name: model_name.into(),
            answers,
        }
    }
}

impl Respondent for ReplayRespondent {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn respond(&self, s: &Scenario, _: &PromptText) -> Result<String, AttemptError> {
        self.answers
            .get(&s.id)
            .cloned()
            .ok_or_else(|| AttemptError::Fatal(format!("no fixture entry for {}", s.id)))
    }
}
