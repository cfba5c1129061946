//! Rule-based classification of completions into Case 1 / Case 2 / invalid.

use crate::adapters::ChoiceRecord;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Bump whenever a rule below changes behaviour.
pub const RULESET_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Choice {
    Case1,
    Case2,
    Invalid,
}

impl Choice {
    pub fn is_valid(self) -> bool {
        self != Choice::Invalid
    }

    pub fn flipped(self) -> Choice {
        match self {
            Choice::Case1 => Choice::Case2,
            Choice::Case2 => Choice::Case1,
            Choice::Invalid => Choice::Invalid,
        }
    }

    /// Canonical reply text for this choice.
    pub fn as_text(self) -> &'static str {
        match self {
            Choice::Case1 => "Case 1",
            Choice::Case2 => "Case 2",
            Choice::Invalid => "",
        }
    }
}

pub struct ParseRuleSet {
    pub version: &'static str,
    case_token: Regex,
    selection_frame: Regex,
}

impl ParseRuleSet {
    fn new() -> Self {
        let case = r"case ?(1|2|one|two)\b";
        let frame = [
            r"i (?:would |will )?(?:choose|select|pick|go with|opt for)",
            r"i'd (?:choose|select|pick|go with|opt for)",
            r"(?:the )?(?:better|best|preferred) (?:option|choice) (?:is|would be)",
            r"my (?:answer|choice|selection) (?:is|would be)",
            r"answer:",
            r"answer is",
        ]
        .join("|");
        Self {
            version: RULESET_VERSION,
            case_token: Regex::new(&format!(r"\b{case}")).unwrap(),
            selection_frame: Regex::new(&format!(r"\b(?:{frame}) {case}")).unwrap(),
        }
    }

    pub fn classify(&self, raw: &str) -> Choice {
        let text = normalize(raw);
        let mut one = false;
        let mut two = false;
        for cap in self.case_token.captures_iter(&text) {
            match case_of(&cap[1]) {
                Choice::Case1 => one = true,
                _ => two = true,
            }
        }
        match (one, two) {
            (false, false) => Choice::Invalid,
            (true, false) => Choice::Case1,
            (false, true) => Choice::Case2,
            (true, true) => self
                .selection_frame
                .captures(&text)
                .map_or(Choice::Invalid, |cap| case_of(&cap[1])),
        }
    }
}

fn case_of(token: &str) -> Choice {
    match token {
        "1" | "one" => Choice::Case1,
        _ => Choice::Case2,
    }
}

pub fn rules() -> &'static ParseRuleSet {
    static RULES: OnceLock<ParseRuleSet> = OnceLock::new();
    RULES.get_or_init(ParseRuleSet::new)
}

pub fn classify(raw: &str) -> Choice {
    rules().classify(raw)
}

/// Lowercases, drops every punctuation run that touches a digit, and
/// collapses whitespace. Idempotent.
pub fn normalize(raw: &str) -> String {
    let lower: Vec<char> = raw.to_lowercase().chars().collect();
    let is_punct = |c: char| !c.is_alphanumeric() && !c.is_whitespace();
    let mut kept = String::with_capacity(lower.len());
    let mut i = 0;
    while i < lower.len() {
        if !is_punct(lower[i]) {
            kept.push(lower[i]);
            i += 1;
            continue;
        }
        let start = i;
        while i < lower.len() && is_punct(lower[i]) {
            i += 1;
        }
        let digit_before = start > 0 && lower[start - 1].is_numeric();
        let digit_after = i < lower.len() && lower[i].is_numeric();
        if !(digit_before || digit_after) {
            kept.extend(&lower[start..i]);
        }
    }
    kept.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidRate {
    pub valid: usize,
    pub total: usize,
    pub rate: f64,
    /// Records with no completion at all; already counted as invalid.
    pub transport_failures: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("valid rate of an empty record set")]
pub struct EmptyRecords;

pub fn valid_rate(records: &[ChoiceRecord]) -> Result<ValidRate, EmptyRecords> {
    if records.is_empty() {
        return Err(EmptyRecords);
    }
    let valid = records
        .iter()
        .filter(|r| !r.is_transport_failure() && r.parsed.is_valid())
        .count();
    let total = records.len();
    Ok(ValidRate {
        valid,
        total,
        rate: valid as f64 / total as f64,
        transport_failures: records.iter().filter(|r| r.is_transport_failure()).count(),
    })
}

/// One entry of a labeled classification corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledText {
    pub text: String,
    pub label: Choice,
}

pub const BUNDLED_CORPUS: &str = include_str!("../data/parser_corpus.jsonl");

pub fn parse_corpus(jsonl: &str) -> Result<Vec<LabeledText>, serde_json::Error> {
    jsonl
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Entries the current rules classify differently from their label.
pub fn corpus_mismatches(corpus: &[LabeledText]) -> Vec<(&LabeledText, Choice)> {
    corpus
        .iter()
        .filter_map(|e| {
            let got = classify(&e.text);
            (got != e.label).then_some((e, got))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        assert_eq!(classify("Case 1"), Choice::Case1);
        assert_eq!(
            classify("Both cases are tragic and I cannot make this choice."),
            Choice::Invalid
        );
        assert_eq!(
            classify(
                "Comparing Case 1 and Case 2, I would choose Case 2 because it spares more lives."
            ),
            Choice::Case2
        );
    }

    #[test]
    fn both_mentioned_without_frame_is_invalid() {
        assert_eq!(classify("Case 1 or Case 2, hard to say."), Choice::Invalid);
        assert_eq!(
            classify("I would not choose Case 1 over Case 2."),
            Choice::Invalid
        );
    }

    #[test]
    fn word_numerals_and_punctuation() {
        assert_eq!(classify("**Case two**"), Choice::Case2);
        assert_eq!(classify("'Case 1'."), Choice::Case1);
        assert_eq!(
            classify("Answer: Case 2. Case 1 kills more."),
            Choice::Case2
        );
        assert_eq!(classify("Case 12"), Choice::Invalid);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("  Case   1.\n"), "case 1");
        assert_eq!(normalize("(Case 2)!"), "(case 2");
        assert_eq!(normalize("I'd pick: Case\t2."), "i'd pick: case 2");
    }

    #[test]
    fn reference_validity_rates() {
        let mk = |valid: usize, total: usize| -> Vec<ChoiceRecord> {
            (0..total)
                .map(|i| ChoiceRecord {
                    scenario_id: i.to_string(),
                    model_name: "m".into(),
                    raw_text: String::new(),
                    parsed: if i < valid {
                        Choice::Case1
                    } else {
                        Choice::Invalid
                    },
                    request_timestamp: chrono::DateTime::UNIX_EPOCH,
                    latency_ms: 0,
                    attempt: 1,
                    error: None,
                })
                .collect()
        };
        assert_eq!(valid_rate(&mk(47_457, 50_000)).unwrap().rate, 0.94914);
        assert_eq!(valid_rate(&mk(39_836, 50_000)).unwrap().rate, 0.79672);
        assert_eq!(valid_rate(&mk(0, 10)).unwrap().rate, 0.0);
        assert_eq!(valid_rate(&[]), Err(EmptyRecords));
    }

    #[test]
    fn transport_failures_are_invalid() {
        let r = ChoiceRecord {
            scenario_id: "x".into(),
            model_name: "m".into(),
            raw_text: String::new(),
            parsed: Choice::Invalid,
            request_timestamp: chrono::DateTime::UNIX_EPOCH,
            latency_ms: 0,
            attempt: 5,
            error: Some("HTTP 500".into()),
        };
        let v = valid_rate(&[r]).unwrap();
        assert_eq!((v.valid, v.total, v.transport_failures), (0, 1, 1));
    }

    #[test]
    fn bundled_corpus_classifies_as_labeled() {
        let corpus = parse_corpus(BUNDLED_CORPUS).unwrap();
        assert!(corpus.len() >= 50);
        let bad = corpus_mismatches(&corpus);
        assert!(bad.is_empty(), "{bad:#?}");
    }

    fn swap_digits(t: &str) -> String {
        t.chars()
            .map(|c| match c {
                '1' => '2',
                '2' => '1',
                c => c,
            })
            .collect()
    }

    #[test]
    fn corpus_digit_swap_symmetry() {
        for e in parse_corpus(BUNDLED_CORPUS).unwrap() {
            let lower = e.text.to_lowercase();
            if e.label == Choice::Case1 && !lower.contains("one") && !lower.contains("two") {
                assert_eq!(classify(&swap_digits(&e.text)), Choice::Case2, "{}", e.text);
            }
        }
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(t in "\\PC{0,60}") {
            let once = normalize(&t);
            prop_assert_eq!(normalize(&once), once.clone());
            prop_assert_eq!(classify(&once), classify(&t));
        }

        #[test]
        fn digit_swap_symmetry(
            prefix in "[a-zA-Z ,.]{0,20}",
            frame in prop::sample::select(vec!["I choose", "I would select", "My answer is", "Answer:"]),
            other_first in any::<bool>(),
        ) {
            let text = if other_first {
                format!("{prefix} Case 2 is worse. {frame} Case 1.")
            } else {
                format!("{prefix} {frame} Case 1, not Case 2.")
            };
            prop_assert_eq!(classify(&text), Choice::Case1);
            prop_assert_eq!(classify(&swap_digits(&text)), Choice::Case2);
        }
    }
}
