//! Conjoint profile coding and AMCE estimation.

mod amce;
mod coding;

pub use amce::{amce_oracle, estimate_amce, AmceEstimate, AmceProfile};
pub use coding::{code_profiles, orientation_codes, CodingError, ProfileRow};

use serde::{Deserialize, Serialize};

/// The nine preference attributes, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Attribute {
    #[serde(rename = "species")]
    Species,
    #[serde(rename = "socialValue")]
    SocialValue,
    #[serde(rename = "relationToAV")]
    RelationToAv,
    #[serde(rename = "nCharacters")]
    NCharacters,
    #[serde(rename = "law")]
    Law,
    #[serde(rename = "intervention")]
    Intervention,
    #[serde(rename = "gender")]
    Gender,
    #[serde(rename = "fitness")]
    Fitness,
    #[serde(rename = "age")]
    Age,
}

impl Attribute {
    pub const ALL: [Attribute; 9] = [
        Attribute::Species,
        Attribute::SocialValue,
        Attribute::RelationToAv,
        Attribute::NCharacters,
        Attribute::Law,
        Attribute::Intervention,
        Attribute::Gender,
        Attribute::Fitness,
        Attribute::Age,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Species => "species",
            Attribute::SocialValue => "socialValue",
            Attribute::RelationToAv => "relationToAV",
            Attribute::NCharacters => "nCharacters",
            Attribute::Law => "law",
            Attribute::Intervention => "intervention",
            Attribute::Gender => "gender",
            Attribute::Fitness => "fitness",
            Attribute::Age => "age",
        }
    }

    /// Axis label pair `(negative, positive)` for figures.
    pub fn poles(self) -> (&'static str, &'static str) {
        match self {
            Attribute::Species => ("Pets", "Humans"),
            Attribute::SocialValue => ("Lower status", "Higher status"),
            Attribute::RelationToAv => ("Passengers", "Pedestrians"),
            Attribute::NCharacters => ("Fewer characters", "More characters"),
            Attribute::Law => ("Unlawful", "Lawful"),
            Attribute::Intervention => ("Action", "Inaction"),
            Attribute::Gender => ("Males", "Females"),
            Attribute::Fitness => ("Less fit", "Fit"),
            Attribute::Age => ("Elderly", "Young"),
        }
    }

    pub fn from_name(name: &str) -> Option<Attribute> {
        Attribute::ALL.into_iter().find(|a| a.name() == name)
    }
}

impl From<crate::scenario::FocalDimension> for Attribute {
    /// The attribute a focal dimension contrasts.
    fn from(f: crate::scenario::FocalDimension) -> Self {
        use crate::scenario::FocalDimension as F;
        match f {
            F::Species => Attribute::Species,
            F::SocialValue => Attribute::SocialValue,
            F::Gender => Attribute::Gender,
            F::Age => Attribute::Age,
            F::Fitness => Attribute::Fitness,
            F::Utilitarian => Attribute::NCharacters,
        }
    }
}
