use super::{Character, FocalDimension, Legality, OutcomeGroup, Role, Scenario, Species};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("scenario has an empty id or generator version")]
    MissingProvenance,
    #[error("group {0} has {1} characters, expected 1 to 5")]
    GroupSize(char, usize),
    #[error("both groups are passengers")]
    TwoPassengerGroups,
    #[error("passenger group carries a crossing signal")]
    PassengerLegality,
    #[error("passenger group contains a pet")]
    PetPassenger,
    #[error("two-lane crossing must be unsignalled on both lanes or lawful against unlawful")]
    LegalityContrast,
    #[error("{0:?} scenario groups differ in size")]
    UnequalSizes(FocalDimension),
    #[error("{0:?} scenario groups are not a swap-map pairing")]
    NotPaired(FocalDimension),
    #[error("{0:?} scenario groups differ outside the focal facet")]
    NonFocalMismatch(FocalDimension),
    #[error("utilitarian groups are not a strict superset with size gap 1 to 4")]
    NotSuperset,
}

type Multiset = BTreeMap<Character, usize>;

fn multiset(chars: &[Character]) -> Multiset {
    let mut m = Multiset::new();
    for &c in chars {
        *m.entry(c).or_default() += 1;
    }
    m
}

/// Checks every structural scenario invariant independently of the
/// generator. A passenger-framing pedestrian group may carry a crossing
/// signal; the generator never emits one, but hand-built scenarios can.
pub fn validate_scenario(s: &Scenario) -> Result<(), ValidationError> {
    if s.id.is_empty() || s.generator_version.is_empty() {
        return Err(ValidationError::MissingProvenance);
    }
    for (tag, g) in [('A', &s.group_a), ('B', &s.group_b)] {
        if !(1..=5).contains(&g.len()) {
            return Err(ValidationError::GroupSize(tag, g.len()));
        }
        if g.role == Role::Passengers {
            if g.legality != Legality::NotApplicable {
                return Err(ValidationError::PassengerLegality);
            }
            if !g.all_human() {
                return Err(ValidationError::PetPassenger);
            }
        }
    }
    match (s.group_a.role, s.group_b.role) {
        (Role::Passengers, Role::Passengers) => return Err(ValidationError::TwoPassengerGroups),
        (Role::Pedestrians, Role::Pedestrians) => {
            use Legality::*;
            match (s.group_a.legality, s.group_b.legality) {
                (NotApplicable, NotApplicable) | (Lawful, Unlawful) | (Unlawful, Lawful) => {}
                _ => return Err(ValidationError::LegalityContrast),
            }
        }
        _ => {}
    }
    check_focal_contrast(s.focal_dimension, &s.group_a, &s.group_b)
}

fn check_focal_contrast(
    focal: FocalDimension,
    a: &OutcomeGroup,
    b: &OutcomeGroup,
) -> Result<(), ValidationError> {
    match focal {
        FocalDimension::Utilitarian => {
            let (big, small) = if a.len() > b.len() { (a, b) } else { (b, a) };
            let gap = big.len().saturating_sub(small.len());
            if !(1..=4).contains(&gap) {
                return Err(ValidationError::NotSuperset);
            }
            let big_set = multiset(&big.characters);
            let contained = multiset(&small.characters)
                .iter()
                .all(|(c, n)| big_set.get(c).copied().unwrap_or(0) >= *n);
            if contained {
                Ok(())
            } else {
                Err(ValidationError::NotSuperset)
            }
        }
        FocalDimension::Species => {
            if a.len() != b.len() {
                return Err(ValidationError::UnequalSizes(focal));
            }
            let is_pet = |c: &Character| c.facets().species == Species::Pet;
            let a_pets = a.characters.iter().all(is_pet);
            let b_pets = b.characters.iter().all(is_pet);
            if (a.all_human() && b_pets) || (b.all_human() && a_pets) {
                Ok(())
            } else {
                Err(ValidationError::NotPaired(focal))
            }
        }
        _ => {
            if a.len() != b.len() {
                return Err(ValidationError::UnequalSizes(focal));
            }
            let pairs = focal.swap_pairs();
            let image = |g: &OutcomeGroup| -> Option<Vec<Character>> {
                g.characters
                    .iter()
                    .map(|c| pairs.iter().find(|p| p.0 == *c).map(|p| p.1))
                    .collect()
            };
            let paired = |pos: &OutcomeGroup, neg: &OutcomeGroup| {
                image(pos).is_some_and(|img| multiset(&img) == multiset(&neg.characters))
            };
            if !(paired(a, b) || paired(b, a)) {
                return Err(ValidationError::NotPaired(focal));
            }
            if masked_facets(focal, a) != masked_facets(focal, b) {
                return Err(ValidationError::NonFocalMismatch(focal));
            }
            Ok(())
        }
    }
}

/// Multiset of facet tuples with the focal facet blanked out.
fn masked_facets(focal: FocalDimension, g: &OutcomeGroup) -> Vec<String> {
    let mut out: Vec<String> = g
        .characters
        .iter()
        .map(|c| {
            let mut f = c.facets();
            match focal {
                FocalDimension::Gender => f.gender = super::Gender::None,
                FocalDimension::Age => f.age = super::AgeBand::None,
                FocalDimension::Fitness => f.fitness = super::Fitness::None,
                FocalDimension::SocialValue => f.social = super::SocialValue::None,
                _ => {}
            }
            format!("{f:?}")
        })
        .collect();
    out.sort();
    out
}
