use crate::stats::Attribute;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// External reference profile, typically human ΔP values transcribed by
/// the user. Values follow the same sign conventions as the estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineProfile {
    pub label: String,
    pub values: [f64; 9],
    pub provenance: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaselineFile {
    label: String,
    values: BTreeMap<String, Option<f64>>,
    #[serde(default)]
    provenance: String,
}

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("cannot read baseline: {0}")]
    Io(#[from] std::io::Error),
    #[error("baseline schema violation: {0}")]
    Schema(String),
    #[error("baseline is missing attribute \"{0}\"")]
    MissingAttribute(String),
    #[error("baseline attribute \"{0}\" has no value")]
    NullValue(String),
    #[error("baseline names unknown attribute \"{0}\"")]
    UnknownAttribute(String),
    #[error("baseline value for \"{attribute}\" is {value}, outside [-1, 1]")]
    OutOfRange { attribute: String, value: f64 },
}

impl BaselineProfile {
    pub fn from_json(text: &str) -> Result<Self, BaselineError> {
        let file: BaselineFile =
            serde_json::from_str(text).map_err(|e| BaselineError::Schema(e.to_string()))?;
        if file.label.trim().is_empty() {
            return Err(BaselineError::Schema("label is empty".into()));
        }
        if let Some(name) = file
            .values
            .keys()
            .find(|k| Attribute::from_name(k).is_none())
        {
            return Err(BaselineError::UnknownAttribute(name.clone()));
        }
        let mut values = [0.0; 9];
        for a in Attribute::ALL {
            let v = file
                .values
                .get(a.name())
                .ok_or_else(|| BaselineError::MissingAttribute(a.name().into()))?
                .ok_or_else(|| BaselineError::NullValue(a.name().into()))?;
            if !(-1.0..=1.0).contains(&v) {
                return Err(BaselineError::OutOfRange {
                    attribute: a.name().into(),
                    value: v,
                });
            }
            values[a.index()] = v;
        }
        Ok(Self {
            label: file.label,
            values,
            provenance: file.provenance,
        })
    }

    pub fn to_json(&self) -> String {
        let values: serde_json::Map<String, serde_json::Value> = Attribute::ALL
            .iter()
            .map(|a| (a.name().to_string(), self.values[a.index()].into()))
            .collect();
        let doc = serde_json::json!({
            "label": self.label,
            "values": values,
            "provenance": self.provenance,
        });
        serde_json::to_string_pretty(&doc).expect("baseline serializes")
    }
}

pub fn load_baseline(path: &Path) -> Result<BaselineProfile, BaselineError> {
    BaselineProfile::from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(skip: Option<&str>, override_: Option<(&str, &str)>) -> String {
        let body: Vec<String> = Attribute::ALL
            .iter()
            .filter(|a| Some(a.name()) != skip)
            .map(|a| {
                let v = match override_ {
                    Some((name, v)) if name == a.name() => v.to_string(),
                    _ => format!("{}", (a.index() as f64 - 4.0) / 10.0),
                };
                format!("\"{}\": {v}", a.name())
            })
            .collect();
        format!(
            "{{\"label\": \"synthetic\", \"values\": {{{}}}, \"provenance\": \"test\"}}",
            body.join(", ")
        )
    }

    #[test]
    fn loads_nine_values() {
        let b = BaselineProfile::from_json(&doc(None, None)).unwrap();
        assert_eq!(b.label, "synthetic");
        assert_eq!(b.values[Attribute::Species.index()], -0.4);
        assert_eq!(BaselineProfile::from_json(&b.to_json()).unwrap(), b);
    }

    #[test]
    fn missing_law_is_named() {
        let err = BaselineProfile::from_json(&doc(Some("law"), None)).unwrap_err();
        assert!(matches!(&err, BaselineError::MissingAttribute(a) if a == "law"));
        assert!(err.to_string().contains("law"));
    }

    #[test]
    fn out_of_range_rejected() {
        let err = BaselineProfile::from_json(&doc(None, Some(("age", "1.7")))).unwrap_err();
        assert!(matches!(err, BaselineError::OutOfRange { value, .. } if value == 1.7));
    }

    #[test]
    fn null_and_unknown_rejected() {
        assert!(matches!(
            BaselineProfile::from_json(&doc(None, Some(("gender", "null")))),
            Err(BaselineError::NullValue(_))
        ));
        let extra = doc(None, None).replace("\"age\"", "\"height\": 0.1, \"age\"");
        assert!(matches!(
            BaselineProfile::from_json(&extra),
            Err(BaselineError::UnknownAttribute(a)) if a == "height"
        ));
    }

    #[test]
    fn shipped_template_has_no_numbers() {
        let text = include_str!("../../data/baseline.template.json");
        assert!(matches!(
            BaselineProfile::from_json(text),
            Err(BaselineError::NullValue(_))
        ));
    }
}
