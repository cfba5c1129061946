//! Cross-profile comparison: distances, PCA, and figure emission.

mod baseline;
pub mod figures;
mod pca;

pub use baseline::{load_baseline, BaselineError, BaselineProfile};
pub use pca::{decompose, project_two, PcaCoordinate, PcaDecomposition, PcaProjection};

use crate::parser::RULESET_VERSION;
use crate::scenario::GENERATOR_VERSION;
use crate::stats::{AmceProfile, Attribute};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

/// A labeled nine-vector of ΔP values in [`Attribute::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledProfile {
    pub label: String,
    pub values: [Option<f64>; 9],
}

impl From<&AmceProfile> for LabeledProfile {
    fn from(p: &AmceProfile) -> Self {
        Self {
            label: p.model_name.clone(),
            values: p.vector(),
        }
    }
}

impl From<&BaselineProfile> for LabeledProfile {
    fn from(b: &BaselineProfile) -> Self {
        Self {
            label: b.label.clone(),
            values: b.values.map(Some),
        }
    }
}

impl LabeledProfile {
    pub fn missing(&self) -> Vec<&'static str> {
        Attribute::ALL
            .iter()
            .filter(|a| self.values[a.index()].is_none())
            .map(|a| a.name())
            .collect()
    }

    pub fn complete(&self) -> Option<[f64; 9]> {
        let mut out = [0.0; 9];
        for (o, v) in out.iter_mut().zip(self.values) {
            *o = v?;
        }
        Some(out)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CompareError {
    #[error("profile has no value for: {}", .0.join(", "))]
    AbsentComponents(Vec<&'static str>),
    #[error("need at least {need} profiles, got {got}")]
    TooFewProfiles { need: usize, got: usize },
    #[error("duplicate profile label \"{0}\"")]
    DuplicateLabel(String),
    #[error("reference label \"{0}\" is not among the profiles")]
    UnknownReference(String),
}

pub fn euclidean(a: &[f64; 9], b: &[f64; 9]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Distance between two profiles; absent components in either are an error.
pub fn euclidean_distance(a: &[Option<f64>; 9], b: &[Option<f64>; 9]) -> Result<f64, CompareError> {
    let missing: Vec<&'static str> = Attribute::ALL
        .iter()
        .filter(|at| a[at.index()].is_none() || b[at.index()].is_none())
        .map(|at| at.name())
        .collect();
    if !missing.is_empty() {
        return Err(CompareError::AbsentComponents(missing));
    }
    Ok(euclidean(&a.map(Option::unwrap), &b.map(Option::unwrap)))
}

pub fn pca_project(profiles: &[LabeledProfile]) -> Result<PcaProjection, CompareError> {
    if profiles.len() < 3 {
        return Err(CompareError::TooFewProfiles {
            need: 3,
            got: profiles.len(),
        });
    }
    let mut rows = Vec::with_capacity(profiles.len() * 9);
    for p in profiles {
        rows.extend(
            p.complete()
                .ok_or_else(|| CompareError::AbsentComponents(p.missing()))?,
        );
    }
    let labels: Vec<String> = profiles.iter().map(|p| p.label.clone()).collect();
    Ok(project_two(
        &labels,
        &DMatrix::from_row_slice(profiles.len(), 9, &rows),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonReport {
    pub generator_version: String,
    pub ruleset_version: String,
    pub labels: Vec<String>,
    pub reference: String,
    /// Distance of each profile to the reference; `None` when a component
    /// is absent.
    pub distance: BTreeMap<String, Option<f64>>,
    /// Row and column order follow `labels`.
    pub pairwise: Vec<Vec<Option<f64>>>,
    pub pca: Option<PcaProjection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notices: Vec<String>,
}

/// Compares `profiles` against the one labeled `reference` (the first
/// profile when `None`). PCA runs on the complete profiles when there are
/// at least three of them.
pub fn compare_profiles(
    profiles: &[LabeledProfile],
    reference: Option<&str>,
) -> Result<ComparisonReport, CompareError> {
    if profiles.len() < 2 {
        return Err(CompareError::TooFewProfiles {
            need: 2,
            got: profiles.len(),
        });
    }
    let mut seen = HashSet::new();
    for p in profiles {
        if !seen.insert(p.label.as_str()) {
            return Err(CompareError::DuplicateLabel(p.label.clone()));
        }
    }
    let reference = reference.unwrap_or(&profiles[0].label).to_string();
    let ref_profile = profiles
        .iter()
        .find(|p| p.label == reference)
        .ok_or_else(|| CompareError::UnknownReference(reference.clone()))?;

    let mut notices = Vec::new();
    let mut distance = BTreeMap::new();
    for p in profiles {
        let d = euclidean_distance(&p.values, &ref_profile.values);
        if let Err(e) = &d {
            notices.push(format!("distance {} to {}: {e}", p.label, reference));
        }
        distance.insert(p.label.clone(), d.ok());
    }
    let pairwise = profiles
        .iter()
        .map(|a| {
            profiles
                .iter()
                .map(|b| euclidean_distance(&a.values, &b.values).ok())
                .collect()
        })
        .collect();

    let complete: Vec<LabeledProfile> = profiles
        .iter()
        .filter(|p| {
            let ok = p.complete().is_some();
            if !ok {
                notices.push(format!(
                    "{} excluded from PCA: missing {}",
                    p.label,
                    p.missing().join(", ")
                ));
            }
            ok
        })
        .cloned()
        .collect();
    let pca = match pca_project(&complete) {
        Ok(p) => Some(p),
        Err(e) => {
            notices.push(format!("PCA skipped: {e}"));
            None
        }
    };

    Ok(ComparisonReport {
        generator_version: GENERATOR_VERSION.into(),
        ruleset_version: RULESET_VERSION.into(),
        labels: profiles.iter().map(|p| p.label.clone()).collect(),
        reference,
        distance,
        pairwise,
        pca,
        notices,
    })
}

fn version_line(r: &ComparisonReport) -> String {
    format!(
        "# generatorVersion={} rulesetVersion={}\n",
        r.generator_version, r.ruleset_version
    )
}

impl ComparisonReport {
    /// `label,distance` rows in label order.
    pub fn distances_csv(&self) -> String {
        let mut out = version_line(self);
        out.push_str(&format!("label,distanceTo_{}\n", self.reference));
        for l in &self.labels {
            let d = self.distance[l].map(|d| d.to_string()).unwrap_or_default();
            out.push_str(&format!("{l},{d}\n"));
        }
        out
    }

    /// `label,pc1,pc2` rows; `None` when PCA was skipped.
    pub fn pca_csv(&self) -> Option<String> {
        let pca = self.pca.as_ref()?;
        let mut out = version_line(self);
        let [r1, r2] = pca.explained_variance_ratio;
        out.push_str(&format!("# explainedVarianceRatio={r1},{r2}\n"));
        out.push_str("label,pc1,pc2\n");
        for c in &pca.coordinates {
            out.push_str(&format!("{},{},{}\n", c.label, c.pc1, c.pc2));
        }
        Some(out)
    }
}
