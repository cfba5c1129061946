//! Scenario data model, constrained-randomization generator and validator.

mod character;
mod generate;
mod validate;

pub use character::{
    facets_of, AgeBand, Character, Facets, Fitness, Gender, SocialValue, Species, UnknownCharacter,
};
pub use generate::{
    generate_deck, sample_scenario, scenario_seed, GenerationConfig, GenerationError,
    MAX_REJECTIONS,
};
pub use validate::{validate_scenario, ValidationError};

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub const GENERATOR_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FocalDimension {
    Species,
    SocialValue,
    Gender,
    Age,
    Fitness,
    Utilitarian,
}

impl FocalDimension {
    pub const ALL: [FocalDimension; 6] = [
        FocalDimension::Species,
        FocalDimension::SocialValue,
        FocalDimension::Gender,
        FocalDimension::Age,
        FocalDimension::Fitness,
        FocalDimension::Utilitarian,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FocalDimension::Species => "species",
            FocalDimension::SocialValue => "socialValue",
            FocalDimension::Gender => "gender",
            FocalDimension::Age => "age",
            FocalDimension::Fitness => "fitness",
            FocalDimension::Utilitarian => "utilitarian",
        }
    }

    /// Minimal-contrast pairs `(positive, negative)` for the facet dimensions.
    /// Species pairs are positional (any human against an alternating pet)
    /// and utilitarian has no pairs, so both return an empty slice.
    pub fn swap_pairs(self) -> &'static [(Character, Character)] {
        use Character::*;
        match self {
            FocalDimension::Gender => &[
                (Woman, Man),
                (Girl, Boy),
                (ElderlyWoman, ElderlyMan),
                (FemaleDoctor, MaleDoctor),
                (FemaleExecutive, MaleExecutive),
                (FemaleAthlete, MaleAthlete),
                (LargeWoman, LargeMan),
            ],
            FocalDimension::Age => &[(Boy, ElderlyMan), (Girl, ElderlyWoman)],
            FocalDimension::Fitness => &[(MaleAthlete, LargeMan), (FemaleAthlete, LargeWoman)],
            FocalDimension::SocialValue => &[
                (MaleExecutive, Criminal),
                (FemaleExecutive, Homeless),
                (PregnantWoman, Woman),
            ],
            FocalDimension::Species | FocalDimension::Utilitarian => &[],
        }
    }
}

impl std::str::FromStr for FocalDimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FocalDimension::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown focal dimension `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Role {
    Passengers,
    Pedestrians,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Legality {
    Lawful,
    Unlawful,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeGroup {
    pub characters: Vec<Character>,
    pub role: Role,
    pub legality: Legality,
}

impl OutcomeGroup {
    pub fn pedestrians(characters: Vec<Character>) -> Self {
        Self {
            characters,
            role: Role::Pedestrians,
            legality: Legality::NotApplicable,
        }
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn all_human(&self) -> bool {
        self.characters.iter().all(|c| c.is_human())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Scenario {
    pub id: String,
    pub focal_dimension: FocalDimension,
    pub group_a: OutcomeGroup,
    pub group_b: OutcomeGroup,
    /// Group killed if the car continues straight; the other dies on swerve.
    pub stay_victim: Side,
    pub seed: u64,
    pub generator_version: String,
}

impl Scenario {
    pub fn group(&self, side: Side) -> &OutcomeGroup {
        match side {
            Side::A => &self.group_a,
            Side::B => &self.group_b,
        }
    }

    pub fn passenger_side(&self) -> Option<Side> {
        if self.group_a.role == Role::Passengers {
            Some(Side::A)
        } else if self.group_b.role == Role::Passengers {
            Some(Side::B)
        } else {
            None
        }
    }

    pub fn is_two_lane(&self) -> bool {
        self.passenger_side().is_none()
    }
}

/// Keeps two-lane scenarios with no crossing signal, optionally restricted
/// to one focal dimension.
pub fn filter_for_rationale_probe(
    deck: &[Scenario],
    focal: Option<FocalDimension>,
) -> Vec<Scenario> {
    deck.iter()
        .filter(|s| {
            s.group_a.role == Role::Pedestrians
                && s.group_b.role == Role::Pedestrians
                && s.group_a.legality == Legality::NotApplicable
                && s.group_b.legality == Legality::NotApplicable
        })
        .filter(|s| focal.is_none_or(|f| s.focal_dimension == f))
        .cloned()
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum DeckIoError {
    #[error("deck i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed scenario: {source}")]
    Parse {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

pub fn write_deck(path: &Path, deck: &[Scenario]) -> Result<(), DeckIoError> {
    let io_err = |source| DeckIoError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for s in deck {
        let line = serde_json::to_string(s).expect("scenario serializes");
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn read_deck(path: &Path) -> Result<Vec<Scenario>, DeckIoError> {
    let p = path.display().to_string();
    let file = File::open(path).map_err(|source| DeckIoError::Io {
        path: p.clone(),
        source,
    })?;
    let mut deck = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| DeckIoError::Io {
            path: p.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let s = serde_json::from_str(&line).map_err(|source| DeckIoError::Parse {
            path: p.clone(),
            line: i + 1,
            source,
        })?;
        deck.push(s);
    }
    Ok(deck)
}
