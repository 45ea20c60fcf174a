use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Categorical,
    Numerical,
}

/// One input column. Categorical codes index into `categories`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl Feature {
    pub fn numerical(name: impl Into<String>) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Numerical,
            categories: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Categorical,
            categories,
        }
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == FeatureKind::Categorical
    }

    pub fn cardinality(&self) -> usize {
        self.categories.len()
    }
}

/// Ordered feature list, binary target and label encodings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    features: Vec<Feature>,
    target: String,
    /// Raw target strings for class 0 and class 1.
    class_labels: [String; 2],
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>, target: impl Into<String>, class_labels: [String; 2]) -> Result<Self> {
        let target = target.into();
        let mut seen = HashMap::new();
        for (i, f) in features.iter().enumerate() {
            if seen.insert(f.name.as_str(), i).is_some() {
                return Err(Error::Schema(format!("duplicate feature name `{}`", f.name)));
            }
            if f.is_categorical() {
                let mut cats = HashMap::new();
                for c in &f.categories {
                    if cats.insert(c.as_str(), ()).is_some() {
                        return Err(Error::Schema(format!("feature `{}` encodes `{c}` twice", f.name)));
                    }
                }
            }
        }
        if seen.contains_key(target.as_str()) {
            return Err(Error::Schema(format!("target `{target}` is also a feature")));
        }
        if class_labels[0] == class_labels[1] {
            return Err(Error::Schema("class labels must differ".into()));
        }
        Ok(FeatureSchema {
            features,
            target,
            class_labels,
        })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, j: usize) -> &Feature {
        &self.features[j]
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn class_labels(&self) -> &[String; 2] {
        &self.class_labels
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Resolves names to column indices, failing on the first unknown name.
    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.index_of(n.as_ref())
                    .ok_or_else(|| Error::Schema(format!("unknown feature `{}`", n.as_ref())))
            })
            .collect()
    }

    pub fn encode(&self, j: usize, raw: &str) -> Option<f64> {
        let f = &self.features[j];
        match f.kind {
            FeatureKind::Categorical => f.categories.iter().position(|c| c == raw).map(|c| c as f64),
            FeatureKind::Numerical => raw.trim().parse::<f64>().ok(),
        }
    }

    pub fn decode(&self, j: usize, value: f64) -> String {
        let f = &self.features[j];
        match f.kind {
            FeatureKind::Categorical => f
                .categories
                .get(value as usize)
                .cloned()
                .unwrap_or_else(|| format!("<code {value}>")),
            FeatureKind::Numerical => format!("{value}"),
        }
    }

    /// Schema restricted to `keep` (in the given order).
    pub fn project(&self, keep: &[usize]) -> FeatureSchema {
        FeatureSchema {
            features: keep.iter().map(|&j| self.features[j].clone()).collect(),
            target: self.target.clone(),
            class_labels: self.class_labels.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Categorical,
    Numerical,
    Target,
}

/// Column typing supplied by the user, read from a TOML file:
///
/// ```toml
/// positive_label = ">50K"
///
/// [columns]
/// "Age" = "numerical"
/// "Workclass" = "categorical"
/// "Income" = "target"
/// ```
///
/// Columns absent from `[columns]` are typed by inspection. Without a target
/// entry the last column is the target.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemaHint {
    #[serde(default)]
    pub columns: BTreeMap<String, ColumnRole>,
    #[serde(default)]
    pub positive_label: Option<String>,
}

impl SchemaHint {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Schema(format!("bad schema hint: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_toml_str(&text)
    }

    pub fn target(&self) -> Option<&str> {
        self.columns
            .iter()
            .find(|(_, r)| **r == ColumnRole::Target)
            .map(|(n, _)| n.as_str())
    }
}
