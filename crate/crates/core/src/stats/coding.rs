use super::Attribute;
use crate::adapters::ChoiceRecord;
use crate::parser::Choice;
use crate::scenario::{
    AgeBand, Character, Fitness, FocalDimension, Gender, Legality, OutcomeGroup, Role, Scenario,
    Side, SocialValue, Species,
};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// One group of one answered scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfileRow {
    pub scenario_id: String,
    pub group_tag: Side,
    pub spared: u8,
    /// Signed orientation per [`Attribute`]; 0 when not contrasted.
    pub codes: [i8; 9],
    /// Size difference, utilitarian rows only.
    pub k: Option<u8>,
}

impl ProfileRow {
    pub fn code(&self, a: Attribute) -> i8 {
        self.codes[a.index()]
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CodingError {
    #[error("record references scenario {0}, which is not in the deck")]
    DanglingScenario(String),
    #[error("record for scenario {0} is invalid; exclude invalid responses before coding")]
    InvalidChoice(String),
    #[error("scenario {0} has more than one record")]
    DuplicateRecord(String),
}

fn facet_score(g: &OutcomeGroup, value: impl Fn(Character) -> i32) -> i32 {
    g.characters.iter().map(|c| value(*c)).sum()
}

fn sign(x: i32) -> i8 {
    x.signum() as i8
}

/// Orientation codes of `side` within `s`.
pub fn orientation_codes(s: &Scenario, side: Side) -> [i8; 9] {
    let mine = s.group(side);
    let theirs = s.group(side.other());
    let contrast =
        |value: fn(Character) -> i32| sign(facet_score(mine, value) - facet_score(theirs, value));
    let mut codes = [0i8; 9];

    let focal = match s.focal_dimension {
        FocalDimension::Species => Some((
            Attribute::Species,
            contrast(|c| match c.facets().species {
                Species::Human => 1,
                Species::Pet => -1,
            }),
        )),
        FocalDimension::SocialValue => Some((
            Attribute::SocialValue,
            contrast(|c| match c.facets().social {
                SocialValue::High => 1,
                SocialValue::Low => -1,
                _ => 0,
            }),
        )),
        FocalDimension::Gender => Some((
            Attribute::Gender,
            contrast(|c| match c.facets().gender {
                Gender::Female => 1,
                Gender::Male => -1,
                Gender::None => 0,
            }),
        )),
        FocalDimension::Age => Some((
            Attribute::Age,
            contrast(|c| match c.facets().age {
                AgeBand::Young => 1,
                AgeBand::Elderly => -1,
                _ => 0,
            }),
        )),
        FocalDimension::Fitness => Some((
            Attribute::Fitness,
            contrast(|c| match c.facets().fitness {
                Fitness::Fit => 1,
                Fitness::Unfit => -1,
                _ => 0,
            }),
        )),
        FocalDimension::Utilitarian => Some((
            Attribute::NCharacters,
            sign(mine.len() as i32 - theirs.len() as i32),
        )),
    };
    if let Some((attr, code)) = focal {
        codes[attr.index()] = code;
    }

    if s.passenger_side().is_some() {
        codes[Attribute::RelationToAv.index()] = match mine.role {
            Role::Pedestrians => 1,
            Role::Passengers => -1,
        };
    }
    codes[Attribute::Law.index()] = match (mine.legality, theirs.legality) {
        (Legality::Lawful, Legality::Unlawful) => 1,
        (Legality::Unlawful, Legality::Lawful) => -1,
        _ => 0,
    };
    codes[Attribute::Intervention.index()] = if side == s.stay_victim { -1 } else { 1 };
    codes
}

/// Two rows per valid record. Continuing straight (Case 1) kills the stay
/// victim, so Case 1 spares the other group.
pub fn code_profiles(
    deck: &[Scenario],
    records: &[ChoiceRecord],
) -> Result<Vec<ProfileRow>, CodingError> {
    let by_id: HashMap<&str, &Scenario> = deck.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut used = HashSet::with_capacity(records.len());
    let mut rows = Vec::with_capacity(records.len() * 2);
    for r in records {
        let s = by_id
            .get(r.scenario_id.as_str())
            .ok_or_else(|| CodingError::DanglingScenario(r.scenario_id.clone()))?;
        if !used.insert(r.scenario_id.as_str()) {
            return Err(CodingError::DuplicateRecord(r.scenario_id.clone()));
        }
        let spared_side = match r.parsed {
            Choice::Case1 => s.stay_victim.other(),
            Choice::Case2 => s.stay_victim,
            Choice::Invalid => return Err(CodingError::InvalidChoice(r.scenario_id.clone())),
        };
        let k = (s.focal_dimension == FocalDimension::Utilitarian)
            .then(|| s.group_a.len().abs_diff(s.group_b.len()) as u8);
        for side in [Side::A, Side::B] {
            rows.push(ProfileRow {
                scenario_id: s.id.clone(),
                group_tag: side,
                spared: (side == spared_side) as u8,
                codes: orientation_codes(s, side),
                k,
            });
        }
    }
    Ok(rows)
}
