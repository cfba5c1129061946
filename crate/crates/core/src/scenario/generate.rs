use super::{
    Character, FocalDimension, Legality, OutcomeGroup, Role, Scenario, Side, GENERATOR_VERSION,
};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Rejections allowed for a single scenario before giving up.
pub const MAX_REJECTIONS: usize = 1_000;

const MAX_GROUP: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GenerationConfig {
    pub count: usize,
    pub seed: u64,
    /// Indexed by [`FocalDimension::index`].
    pub dimension_weights: [f64; 6],
    pub p_passenger: f64,
    pub p_law: f64,
    /// Relative weights of group sizes 1..=5.
    pub size_weights: [f64; 5],
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            count: 50_000,
            seed: 0,
            dimension_weights: [1.0 / 6.0; 6],
            p_passenger: 0.5,
            p_law: 0.5,
            size_weights: [0.2; 5],
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GenerationError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error(
        "scenario seed {seed:#018x}: constraints unsatisfied after {MAX_REJECTIONS} rejections"
    )]
    Exhausted { seed: u64 },
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenerationError> {
        let bad = |m: String| Err(GenerationError::InvalidConfig(m));
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if self
            .dimension_weights
            .iter()
            .any(|w| !w.is_finite() || *w < 0.0)
        {
            return bad("dimension weights must be non-negative".into());
        }
        let sum: f64 = self.dimension_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return bad(format!("dimension weights sum to {sum}, expected 1"));
        }
        for (name, p) in [("pPassenger", self.p_passenger), ("pLaw", self.p_law)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is outside [0, 1]"));
            }
        }
        if self.size_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || self.size_weights.iter().sum::<f64>() <= 0.0
        {
            return bad("size weights must be non-negative with positive mass".into());
        }
        Ok(())
    }

    /// Config that always draws `focal`.
    pub fn forcing(mut self, focal: FocalDimension) -> Self {
        self.dimension_weights = [0.0; 6];
        self.dimension_weights[focal.index()] = 1.0;
        self
    }

    /// Config that always draws groups of exactly `size` (1..=5).
    pub fn fixed_size(mut self, size: usize) -> Self {
        self.size_weights = [0.0; 5];
        self.size_weights[size - 1] = 1.0;
        self
    }
}

/// Seed of the `index`-th scenario of a deck (splitmix64 over the deck
/// seed). The mix is a bijection, so seeds within a deck never collide.
pub fn scenario_seed(deck_seed: u64, index: u64) -> u64 {
    let mut z = deck_seed.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws one scenario from the stream identified by `seed`.
pub fn sample_scenario(seed: u64, cfg: &GenerationConfig) -> Result<Scenario, GenerationError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = WeightedIndex::new(cfg.dimension_weights).expect("validated weights");
    let focal = FocalDimension::ALL[dims.sample(&mut rng)];
    let passenger_framing = rng.gen_bool(cfg.p_passenger);
    let size_gap = (focal == FocalDimension::Utilitarian).then(|| rng.gen_range(1..=4usize));

    let mut attempt = 0;
    let (group_a, group_b, passengers) = loop {
        if attempt == MAX_REJECTIONS {
            return Err(GenerationError::Exhausted { seed });
        }
        attempt += 1;
        let Some((a, b)) = draw_groups(&mut rng, cfg, focal, size_gap) else {
            continue;
        };
        if !passenger_framing {
            break (a, b, None);
        }
        let eligible: Vec<Side> = [(Side::A, &a), (Side::B, &b)]
            .into_iter()
            .filter(|(_, g)| g.iter().all(|c| c.is_human()))
            .map(|(s, _)| s)
            .collect();
        if eligible.is_empty() {
            continue;
        }
        let side = eligible[rng.gen_range(0..eligible.len())];
        break (a, b, Some(side));
    };

    let (mut legality_a, mut legality_b) = (Legality::NotApplicable, Legality::NotApplicable);
    if passengers.is_none() && rng.gen_bool(cfg.p_law) {
        if rng.gen_bool(0.5) {
            legality_a = Legality::Lawful;
            legality_b = Legality::Unlawful;
        } else {
            legality_a = Legality::Unlawful;
            legality_b = Legality::Lawful;
        }
    }
    let stay_victim = if rng.gen_bool(0.5) { Side::A } else { Side::B };

    let role = |side| {
        if passengers == Some(side) {
            Role::Passengers
        } else {
            Role::Pedestrians
        }
    };
    Ok(Scenario {
        id: format!("{seed:016x}"),
        focal_dimension: focal,
        group_a: OutcomeGroup {
            characters: group_a,
            role: role(Side::A),
            legality: legality_a,
        },
        group_b: OutcomeGroup {
            characters: group_b,
            role: role(Side::B),
            legality: legality_b,
        },
        stay_victim,
        seed,
        generator_version: GENERATOR_VERSION.to_string(),
    })
}

/// Group A always carries the positive side of the focal contrast (human,
/// higher status, female, young, fit, or the larger group).
fn draw_groups<R: Rng>(
    rng: &mut R,
    cfg: &GenerationConfig,
    focal: FocalDimension,
    size_gap: Option<usize>,
) -> Option<(Vec<Character>, Vec<Character>)> {
    if let Some(k) = size_gap {
        let small_max = MAX_GROUP - k;
        let sizes = WeightedIndex::new(&cfg.size_weights[..small_max]).ok()?;
        let small = sizes.sample(rng) + 1;
        let base: Vec<Character> = (0..small).map(|_| any_character(rng)).collect();
        let mut larger = base.clone();
        larger.extend((0..k).map(|_| any_character(rng)));
        return Some((larger, base));
    }

    let sizes = WeightedIndex::new(cfg.size_weights).expect("validated weights");
    let n = sizes.sample(rng) + 1;
    if focal == FocalDimension::Species {
        let humans: Vec<Character> = Character::ALL
            .into_iter()
            .filter(|c| c.is_human())
            .collect();
        let a = (0..n)
            .map(|_| humans[rng.gen_range(0..humans.len())])
            .collect();
        let b = (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    Character::Dog
                } else {
                    Character::Cat
                }
            })
            .collect();
        return Some((a, b));
    }
    let pairs = focal.swap_pairs();
    let picked: Vec<_> = (0..n)
        .map(|_| pairs[rng.gen_range(0..pairs.len())])
        .collect();
    Some((
        picked.iter().map(|p| p.0).collect(),
        picked.iter().map(|p| p.1).collect(),
    ))
}

fn any_character<R: Rng>(rng: &mut R) -> Character {
    Character::ALL[rng.gen_range(0..Character::ALL.len())]
}

/// Generates `cfg.count` scenarios; the deck is a pure function of the
/// config and [`GENERATOR_VERSION`].
pub fn generate_deck(cfg: &GenerationConfig) -> Result<Vec<Scenario>, GenerationError> {
    cfg.validate()?;
    (0..cfg.count as u64)
        .map(|i| sample_scenario(scenario_seed(cfg.seed, i), cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{validate_scenario, Species};

    #[test]
    fn forced_species_size_three() {
        let cfg = GenerationConfig::default()
            .forcing(FocalDimension::Species)
            .fixed_size(3);
        for seed in 0..50 {
            let s = sample_scenario(seed, &cfg).unwrap();
            assert_eq!(s.focal_dimension, FocalDimension::Species);
            assert_eq!(s.group_a.len(), 3);
            assert_eq!(s.group_b.len(), 3);
            assert!(s.group_a.all_human());
            assert!(s
                .group_b
                .characters
                .iter()
                .all(|c| c.facets().species == Species::Pet));
            validate_scenario(&s).unwrap();
        }
    }

    #[test]
    fn same_seed_same_scenario() {
        let cfg = GenerationConfig::default();
        let a = serde_json::to_string(&sample_scenario(7, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&sample_scenario(7, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singleton_deck() {
        let cfg = GenerationConfig {
            count: 1,
            ..Default::default()
        };
        assert_eq!(generate_deck(&cfg).unwrap().len(), 1);
    }

    #[test]
    fn zero_count_rejected() {
        let cfg = GenerationConfig {
            count: 0,
            ..Default::default()
        };
        assert!(matches!(
            generate_deck(&cfg),
            Err(GenerationError::InvalidConfig(_))
        ));
    }

    #[test]
    fn bad_weights_rejected() {
        let mut cfg = GenerationConfig::default();
        cfg.dimension_weights[0] = 0.5;
        assert!(cfg.validate().is_err());
        let cfg = GenerationConfig {
            p_law: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unsatisfiable_constraints_exhaust() {
        // Utilitarian needs a smaller group of at most four.
        let cfg = GenerationConfig::default()
            .forcing(FocalDimension::Utilitarian)
            .fixed_size(5);
        assert_eq!(
            sample_scenario(3, &cfg),
            Err(GenerationError::Exhausted { seed: 3 })
        );
    }

    #[test]
    fn passenger_groups_are_human() {
        let cfg = GenerationConfig {
            count: 2_000,
            p_passenger: 1.0,
            ..Default::default()
        };
        for s in generate_deck(&cfg).unwrap() {
            let side = s.passenger_side().expect("passenger framing");
            assert!(s.group(side).all_human());
            assert_eq!(s.group(side.other()).role, Role::Pedestrians);
            assert_eq!(s.group_a.legality, Legality::NotApplicable);
            assert_eq!(s.group_b.legality, Legality::NotApplicable);
        }
    }

    #[test]
    fn seeds_distinct() {
        let mut seeds: Vec<u64> = (0..10_000).map(|i| scenario_seed(42, i)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10_000);
    }
}
