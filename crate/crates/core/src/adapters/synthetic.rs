//! Policy agents that answer from the scenario structure. They are ground
//! truth for the estimator, so their rules read raw facets directly rather
//! than going through the profile coding.

use super::{AdapterError, AttemptError, Respondent, RespondentSpec};
use crate::parser::Choice;
use crate::render::PromptText;
use crate::scenario::{
    scenario_seed, AgeBand, Character, Fitness, Gender, Legality, OutcomeGroup, Role, Scenario,
    Side, SocialValue, Species,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PolicyRule {
    SpareHumans,
    SparePets,
    SpareMore,
    SpareFewer,
    SpareFemales,
    SpareMales,
    SpareYoung,
    SpareElderly,
    SpareFit,
    SpareUnfit,
    SpareHigherStatus,
    SpareLowerStatus,
    SparePedestrians,
    SparePassengers,
    SpareLawful,
    SpareUnlawful,
    PreferInaction,
    PreferSwerve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TieBreak {
    CoinFlip { seed: u64 },
    AlwaysCase1,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PolicySpec {
    #[serde(default)]
    pub ordered_rules: Vec<PolicyRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<TieBreak>,
}

impl PolicySpec {
    pub fn lexicographic(rules: Vec<PolicyRule>, tie_break: TieBreak) -> Self {
        Self {
            ordered_rules: rules,
            tie_break: Some(tie_break),
        }
    }

    /// Fair coin on every scenario.
    pub fn coin_flip(seed: u64) -> Self {
        Self {
            ordered_rules: Vec::new(),
            tie_break: Some(TieBreak::CoinFlip { seed }),
        }
    }

    pub fn validate(&self) -> Result<(), AdapterError> {
        if self.ordered_rules.is_empty() && self.tie_break.is_none() {
            return Err(AdapterError::InvalidSpec(
                "policy needs at least one rule or a tieBreak".into(),
            ));
        }
        Ok(())
    }

    /// The side this policy spares and the rule that decided it (`None`
    /// when the tie-break decided).
    pub fn decide(&self, s: &Scenario) -> (Side, Option<PolicyRule>) {
        for &rule in &self.ordered_rules {
            if let Some(side) = apply_rule(rule, s) {
                return (side, Some(rule));
            }
        }
        let case = match self.tie_break.unwrap_or(TieBreak::AlwaysCase1) {
            TieBreak::AlwaysCase1 => Choice::Case1,
            TieBreak::CoinFlip { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed(seed, s.seed));
                if rng.gen_bool(0.5) {
                    Choice::Case1
                } else {
                    Choice::Case2
                }
            }
        };
        (spared_by(case, s), None)
    }

    pub fn choose(&self, s: &Scenario) -> Choice {
        choice_sparing(self.decide(s).0, s)
    }
}

/// Case 1 continues straight and kills the stay victim.
pub(crate) fn spared_by(case: Choice, s: &Scenario) -> Side {
    match case {
        Choice::Case2 => s.stay_victim,
        _ => s.stay_victim.other(),
    }
}

pub(crate) fn choice_sparing(side: Side, s: &Scenario) -> Choice {
    if side == s.stay_victim {
        Choice::Case2
    } else {
        Choice::Case1
    }
}

fn count(g: &OutcomeGroup, pred: impl Fn(Character) -> bool) -> i64 {
    g.characters.iter().filter(|c| pred(**c)).count() as i64
}

/// Prefers the side with the larger `score`; `None` on a tie.
fn prefer_higher(s: &Scenario, score: impl Fn(&OutcomeGroup) -> i64) -> Option<Side> {
    let (a, b) = (score(&s.group_a), score(&s.group_b));
    match a.cmp(&b) {
        std::cmp::Ordering::Greater => Some(Side::A),
        std::cmp::Ordering::Less => Some(Side::B),
        std::cmp::Ordering::Equal => None,
    }
}

/// Facet rules only compare equal-sized groups, so a larger group never
/// wins on head counts of a facet.
fn facet_balance(
    s: &Scenario,
    pos: impl Fn(Character) -> bool,
    neg: impl Fn(Character) -> bool,
) -> Option<Side> {
    if s.group_a.len() != s.group_b.len() {
        return None;
    }
    prefer_higher(s, |g| count(g, &pos) - count(g, &neg))
}

fn apply_rule(rule: PolicyRule, s: &Scenario) -> Option<Side> {
    use PolicyRule::*;
    let f = |c: Character| c.facets();
    let flip = |side: Option<Side>| side.map(Side::other);
    match rule {
        SpareHumans | SparePets => {
            let side = facet_balance(
                s,
                |c| f(c).species == Species::Human,
                |c| f(c).species == Species::Pet,
            );
            if rule == SpareHumans {
                side
            } else {
                flip(side)
            }
        }
        SpareFemales | SpareMales => {
            let side = facet_balance(
                s,
                |c| f(c).gender == Gender::Female,
                |c| f(c).gender == Gender::Male,
            );
            if rule == SpareFemales {
                side
            } else {
                flip(side)
            }
        }
        SpareYoung | SpareElderly => {
            let side = facet_balance(
                s,
                |c| f(c).age == AgeBand::Young,
                |c| f(c).age == AgeBand::Elderly,
            );
            if rule == SpareYoung {
                side
            } else {
                flip(side)
            }
        }
        SpareFit | SpareUnfit => {
            let side = facet_balance(
                s,
                |c| f(c).fitness == Fitness::Fit,
                |c| f(c).fitness == Fitness::Unfit,
            );
            if rule == SpareFit {
                side
            } else {
                flip(side)
            }
        }
        SpareHigherStatus | SpareLowerStatus => {
            let side = facet_balance(
                s,
                |c| f(c).social == SocialValue::High,
                |c| f(c).social == SocialValue::Low,
            );
            if rule == SpareHigherStatus {
                side
            } else {
                flip(side)
            }
        }
        SpareMore => prefer_higher(s, |g| g.len() as i64),
        SpareFewer => flip(prefer_higher(s, |g| g.len() as i64)),
        SparePedestrians => prefer_higher(s, |g| (g.role == Role::Pedestrians) as i64),
        SparePassengers => prefer_higher(s, |g| (g.role == Role::Passengers) as i64),
        SpareLawful | SpareUnlawful => {
            let side = prefer_higher(s, |g| match g.legality {
                Legality::Lawful => 1,
                Legality::NotApplicable => 0,
                Legality::Unlawful => -1,
            });
            if rule == SpareLawful {
                side
            } else {
                flip(side)
            }
        }
        PreferInaction => Some(s.stay_victim.other()),
        PreferSwerve => Some(s.stay_victim),
    }
}

pub struct SyntheticRespondent {
    model_name: String,
    policy: PolicySpec,
}

impl SyntheticRespondent {
    pub fn new(spec: &RespondentSpec) -> Self {
        Self {
            model_name: spec.model_name.clone(),
            policy: spec.policy.clone().expect("validated synthetic spec"),
        }
    }
}

impl Respondent for SyntheticRespondent {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn respond(&self, s: &Scenario, prompt: &PromptText) -> Result<String, AttemptError> {
        let (side, rule) = self.policy.decide(s);
        let case = choice_sparing(side, s).as_text();
        Ok(match (&prompt.rationale_suffix, rule) {
            (None, _) => case.to_string(),
            (Some(_), Some(rule)) => format!("{case}. Rationale: decided by rule {rule:?}."),
            (Some(_), None) => format!("{case}. Rationale: no rule applied; tie-break."),
        })
    }
}
