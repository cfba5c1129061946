//! Per-attribute AMCE estimation.
//!
//! Each attribute is estimated only on the rows that contrast it. The
//! regression path fits `spared ~ 1 + d`, with `d` the 0/1 dummy for the
//! positive orientation, and clusters the sandwich variance by scenario.
//! The oracle path takes raw differences of proportions; with a single
//! binary regressor and an intercept the two slopes coincide.

use super::{Attribute, ProfileRow};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AmceEstimate {
    pub attribute: String,
    /// `None` when the attribute could not be estimated.
    pub delta_p: Option<f64>,
    pub se: Option<f64>,
    /// Number of scenarios contrasting the attribute.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl AmceEstimate {
    fn absent(attribute: &str, n: usize, why: impl Into<String>) -> Self {
        Self {
            attribute: attribute.to_string(),
            delta_p: None,
            se: None,
            n,
            diagnostic: Some(why.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AmceProfile {
    pub model_name: String,
    /// The nine attributes in [`Attribute::ALL`] order.
    pub estimates: Vec<AmceEstimate>,
    /// Keyed by size difference 1..=4.
    pub per_increment: BTreeMap<u8, AmceEstimate>,
    /// n-weighted mean of the per-increment effects.
    pub mean_characters_effect: AmceEstimate,
    pub mean_characters_effect_unweighted: AmceEstimate,
}

impl AmceProfile {
    pub fn get(&self, a: Attribute) -> &AmceEstimate {
        &self.estimates[a.index()]
    }

    /// The nine ΔP values, `None` where absent.
    pub fn vector(&self) -> [Option<f64>; 9] {
        let mut v = [None; 9];
        for a in Attribute::ALL {
            v[a.index()] = self.get(a).delta_p;
        }
        v
    }

    pub fn to_csv(&self, comment: &str) -> String {
        let fmt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::new();
        if !comment.is_empty() {
            out.push_str(&format!("# {comment}\n"));
        }
        out.push_str("attribute,deltaP,se,n\n");
        let rows = self
            .estimates
            .iter()
            .map(|e| (e.attribute.clone(), e))
            .chain((1..=4u8).map(|k| (format!("k{k}"), &self.per_increment[&k])))
            .chain([
                ("mean".to_string(), &self.mean_characters_effect),
                (
                    "meanUnweighted".to_string(),
                    &self.mean_characters_effect_unweighted,
                ),
            ]);
        for (label, e) in rows {
            out.push_str(&format!(
                "{label},{},{},{}\n",
                fmt(e.delta_p),
                fmt(e.se),
                e.n
            ));
        }
        out
    }
}

/// Estimate on a row subset: `(deltaP, se)` or a diagnostic.
type Fit = Result<(f64, f64), String>;

fn estimate_profile(
    model_name: &str,
    rows: &[ProfileRow],
    fit: fn(&[(&str, bool, f64)]) -> Fit,
) -> AmceProfile {
    let subset = |a: Attribute, k: Option<u8>| -> Vec<(&str, bool, f64)> {
        rows.iter()
            .filter(|r| r.code(a) != 0 && (k.is_none() || r.k == k))
            .map(|r| (r.scenario_id.as_str(), r.code(a) > 0, r.spared as f64))
            .collect()
    };
    let estimate = |label: &str, obs: &[(&str, bool, f64)]| -> AmceEstimate {
        let n = obs.iter().map(|o| o.0).collect::<BTreeSet<_>>().len();
        if obs.is_empty() {
            return AmceEstimate::absent(label, 0, "attribute not contrasted");
        }
        match fit(obs) {
            Ok((delta_p, se)) => AmceEstimate {
                attribute: label.to_string(),
                delta_p: Some(delta_p),
                se: Some(se),
                n,
                diagnostic: None,
            },
            Err(why) => AmceEstimate::absent(label, n, why),
        }
    };

    let estimates = Attribute::ALL
        .iter()
        .map(|&a| estimate(a.name(), &subset(a, None)))
        .collect();
    let per_increment: BTreeMap<u8, AmceEstimate> = (1..=4u8)
        .map(|k| {
            (
                k,
                estimate(&format!("k{k}"), &subset(Attribute::NCharacters, Some(k))),
            )
        })
        .collect();
    let (weighted, unweighted) = combine_increments(&per_increment);
    AmceProfile {
        model_name: model_name.to_string(),
        estimates,
        per_increment,
        mean_characters_effect: weighted,
        mean_characters_effect_unweighted: unweighted,
    }
}

fn combine_increments(per: &BTreeMap<u8, AmceEstimate>) -> (AmceEstimate, AmceEstimate) {
    let present: Vec<(f64, f64, usize)> = per
        .values()
        .filter_map(|e| Some((e.delta_p?, e.se?, e.n)))
        .collect();
    let n_total: usize = present.iter().map(|p| p.2).sum();
    if present.is_empty() {
        return (
            AmceEstimate::absent("mean", 0, "no size increments estimated"),
            AmceEstimate::absent("meanUnweighted", 0, "no size increments estimated"),
        );
    }
    let w = |n: usize| n as f64 / n_total as f64;
    let weighted = AmceEstimate {
        attribute: "mean".into(),
        delta_p: Some(present.iter().map(|p| w(p.2) * p.0).sum()),
        se: Some(
            present
                .iter()
                .map(|p| (w(p.2) * p.1).powi(2))
                .sum::<f64>()
                .sqrt(),
        ),
        n: n_total,
        diagnostic: None,
    };
    let m = present.len() as f64;
    let unweighted = AmceEstimate {
        attribute: "meanUnweighted".into(),
        delta_p: Some(present.iter().map(|p| p.0).sum::<f64>() / m),
        se: Some(present.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt() / m),
        n: n_total,
        diagnostic: None,
    };
    (weighted, unweighted)
}

const ONE_SIDED: &str = "attribute contrasted but only one orientation observed";

/// Least-squares slope of `spared` on the positive-orientation dummy with
/// an intercept; CR0 cluster-robust standard error by scenario.
fn regression_fit(obs: &[(&str, bool, f64)]) -> Fit {
    let n = obs.len() as f64;
    let n_pos = obs.iter().filter(|o| o.1).count();
    if n_pos == 0 || n_pos == obs.len() {
        return Err(ONE_SIDED.into());
    }
    let d = |o: &(&str, bool, f64)| if o.1 { 1.0 } else { 0.0 };
    let d_mean = obs.iter().map(d).sum::<f64>() / n;
    let y_mean = obs.iter().map(|o| o.2).sum::<f64>() / n;
    let sxx: f64 = obs.iter().map(|o| (d(o) - d_mean).powi(2)).sum();
    let sxy: f64 = obs.iter().map(|o| (d(o) - d_mean) * (o.2 - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * d_mean;

    // (X'X)^-1 for X = [1, d].
    let s1: f64 = obs.iter().map(d).sum();
    let det = n * s1 - s1 * s1;
    let bread = [[s1 / det, -s1 / det], [-s1 / det, n / det]];

    let mut scores: BTreeMap<&str, [f64; 2]> = BTreeMap::new();
    for o in obs {
        let u = o.2 - intercept - slope * d(o);
        let s = scores.entry(o.0).or_default();
        s[0] += u;
        s[1] += d(o) * u;
    }
    let mut meat = [[0.0; 2]; 2];
    for s in scores.values() {
        for i in 0..2 {
            for j in 0..2 {
                meat[i][j] += s[i] * s[j];
            }
        }
    }
    // Slope variance = row 1 of bread * meat * column 1 of bread.
    let b = bread[1];
    let var = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| b[i] * meat[i][j] * b[j])
        .sum::<f64>();
    Ok((slope, var.max(0.0).sqrt()))
}

/// Raw difference of proportions with the independent two-sample se.
fn proportion_fit(obs: &[(&str, bool, f64)]) -> Fit {
    let (mut n_pos, mut y_pos, mut n_neg, mut y_neg) = (0usize, 0.0, 0usize, 0.0);
    for o in obs {
        if o.1 {
            n_pos += 1;
            y_pos += o.2;
        } else {
            n_neg += 1;
            y_neg += o.2;
        }
    }
    if n_pos == 0 || n_neg == 0 {
        return Err(ONE_SIDED.into());
    }
    let p_pos = y_pos / n_pos as f64;
    let p_neg = y_neg / n_neg as f64;
    let se = (p_pos * (1.0 - p_pos) / n_pos as f64 + p_neg * (1.0 - p_neg) / n_neg as f64).sqrt();
    Ok((p_pos - p_neg, se))
}

pub fn estimate_amce(model_name: &str, rows: &[ProfileRow]) -> AmceProfile {
    estimate_profile(model_name, rows, regression_fit)
}

/// Brute-force difference-of-proportions counterpart of [`estimate_amce`].
pub fn amce_oracle(model_name: &str, rows: &[ProfileRow]) -> AmceProfile {
    estimate_profile(model_name, rows, proportion_fit)
}
