//! Character roster and the facet table that every dimension is coded from.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Character {
    Man,
    Woman,
    Boy,
    Girl,
    ElderlyMan,
    ElderlyWoman,
    PregnantWoman,
    Stroller,
    MaleDoctor,
    FemaleDoctor,
    MaleExecutive,
    FemaleExecutive,
    MaleAthlete,
    FemaleAthlete,
    LargeMan,
    LargeWoman,
    Homeless,
    Criminal,
    Dog,
    Cat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Species {
    Human,
    Pet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Gender {
    Male,
    Female,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AgeBand {
    Young,
    Adult,
    Elderly,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Fitness {
    Fit,
    Neutral,
    Unfit,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SocialValue {
    High,
    Neutral,
    Low,
    None,
}

/// Facet tuple of a character kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Facets {
    pub species: Species,
    pub gender: Gender,
    pub age: AgeBand,
    pub fitness: Fitness,
    pub social: SocialValue,
}

impl Facets {
    const fn human(gender: Gender, age: AgeBand, fitness: Fitness, social: SocialValue) -> Self {
        Self {
            species: Species::Human,
            gender,
            age,
            fitness,
            social,
        }
    }

    const PET: Facets = Facets {
        species: Species::Pet,
        gender: Gender::None,
        age: AgeBand::None,
        fitness: Fitness::None,
        social: SocialValue::None,
    };
}

impl Character {
    pub const ALL: [Character; 20] = [
        Character::Man,
        Character::Woman,
        Character::Boy,
        Character::Girl,
        Character::ElderlyMan,
        Character::ElderlyWoman,
        Character::PregnantWoman,
        Character::Stroller,
        Character::MaleDoctor,
        Character::FemaleDoctor,
        Character::MaleExecutive,
        Character::FemaleExecutive,
        Character::MaleAthlete,
        Character::FemaleAthlete,
        Character::LargeMan,
        Character::LargeWoman,
        Character::Homeless,
        Character::Criminal,
        Character::Dog,
        Character::Cat,
    ];

    pub fn facets(self) -> Facets {
        use AgeBand as A;
        use Character::*;
        use Fitness as F;
        use Gender as G;
        use SocialValue as S;
        match self {
            Man => Facets::human(G::Male, A::Adult, F::Neutral, S::Neutral),
            Woman => Facets::human(G::Female, A::Adult, F::Neutral, S::Neutral),
            Boy => Facets::human(G::Male, A::Young, F::Neutral, S::Neutral),
            Girl => Facets::human(G::Female, A::Young, F::Neutral, S::Neutral),
            ElderlyMan => Facets::human(G::Male, A::Elderly, F::Neutral, S::Neutral),
            ElderlyWoman => Facets::human(G::Female, A::Elderly, F::Neutral, S::Neutral),
            PregnantWoman => Facets::human(G::Female, A::Adult, F::Neutral, S::High),
            Stroller => Facets::human(G::None, A::Young, F::None, S::Neutral),
            MaleDoctor => Facets::human(G::Male, A::Adult, F::Neutral, S::High),
            FemaleDoctor => Facets::human(G::Female, A::Adult, F::Neutral, S::High),
            MaleExecutive => Facets::human(G::Male, A::Adult, F::Neutral, S::High),
            FemaleExecutive => Facets::human(G::Female, A::Adult, F::Neutral, S::High),
            MaleAthlete => Facets::human(G::Male, A::Adult, F::Fit, S::Neutral),
            FemaleAthlete => Facets::human(G::Female, A::Adult, F::Fit, S::Neutral),
            LargeMan => Facets::human(G::Male, A::Adult, F::Unfit, S::Neutral),
            LargeWoman => Facets::human(G::Female, A::Adult, F::Unfit, S::Neutral),
            // Paired with FemaleExecutive on the social-value contrast, so it
            // has to share her gender and age for the pair to be minimal.
            Homeless => Facets::human(G::Female, A::Adult, F::Neutral, S::Low),
            Criminal => Facets::human(G::Male, A::Adult, F::Neutral, S::Low),
            Dog | Cat => Facets::PET,
        }
    }

    pub fn is_human(self) -> bool {
        self.facets().species == Species::Human
    }

    pub fn name(self) -> &'static str {
        use Character::*;
        match self {
            Man => "Man",
            Woman => "Woman",
            Boy => "Boy",
            Girl => "Girl",
            ElderlyMan => "ElderlyMan",
            ElderlyWoman => "ElderlyWoman",
            PregnantWoman => "PregnantWoman",
            Stroller => "Stroller",
            MaleDoctor => "MaleDoctor",
            FemaleDoctor => "FemaleDoctor",
            MaleExecutive => "MaleExecutive",
            FemaleExecutive => "FemaleExecutive",
            MaleAthlete => "MaleAthlete",
            FemaleAthlete => "FemaleAthlete",
            LargeMan => "LargeMan",
            LargeWoman => "LargeWoman",
            Homeless => "Homeless",
            Criminal => "Criminal",
            Dog => "Dog",
            Cat => "Cat",
        }
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown character kind `{0}`")]
pub struct UnknownCharacter(pub String);

impl FromStr for Character {
    type Err = UnknownCharacter;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Character::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownCharacter(s.to_string()))
    }
}

/// Free function form of [`Character::facets`].
pub fn facets_of(kind: Character) -> Facets {
    kind.facets()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dog_is_pet_with_no_human_facets() {
        let f = facets_of(Character::Dog);
        assert_eq!(f.species, Species::Pet);
        assert_eq!(f.gender, Gender::None);
        assert_eq!(f.age, AgeBand::None);
        assert_eq!(f.fitness, Fitness::None);
        assert_eq!(f.social, SocialValue::None);
    }

    #[test]
    fn criminal_and_athlete_facets() {
        assert_eq!(
            facets_of(Character::Criminal),
            Facets::human(
                Gender::Male,
                AgeBand::Adult,
                Fitness::Neutral,
                SocialValue::Low
            )
        );
        assert_eq!(
            facets_of(Character::FemaleAthlete),
            Facets::human(
                Gender::Female,
                AgeBand::Adult,
                Fitness::Fit,
                SocialValue::Neutral
            )
        );
    }

    #[test]
    fn roster_has_two_pets_and_eighteen_humans() {
        let pets = Character::ALL.iter().filter(|c| !c.is_human()).count();
        assert_eq!(pets, 2);
        assert_eq!(Character::ALL.len() - pets, 18);
    }

    #[test]
    fn names_round_trip() {
        for c in Character::ALL {
            assert_eq!(c.name().parse::<Character>().unwrap(), c);
            assert_eq!(
                serde_json::to_string(&c).unwrap(),
                format!("\"{}\"", c.name())
            );
        }
        assert!("Robot".parse::<Character>().is_err());
    }
}
