use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered, named parameter values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexMap<String, f64>", into = "IndexMap<String, f64>")]
pub struct ParameterVector {
    values: IndexMap<String, f64>,
}

impl TryFrom<IndexMap<String, f64>> for ParameterVector {
    type Error = Error;

    fn try_from(m: IndexMap<String, f64>) -> Result<Self> {
        Self::from_pairs(m)
    }
}

impl From<ParameterVector> for IndexMap<String, f64> {
    fn from(p: ParameterVector) -> Self {
        p.values.into_iter().map(|(k, v)| (display_name(&k).to_string(), v)).collect()
    }
}

impl ParameterVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut out = Self::new();
        for (name, value) in pairs {
            let name = canonical_name(&name.into());
            if out.values.contains_key(&name) {
                return Err(Error::Config(format!("duplicate parameter `{name}`")));
            }
            out.insert(name, value)?;
        }
        Ok(out)
    }

    /// Inserts or overwrites a value.
    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> Result<()> {
        let name = canonical_name(&name.into());
        if !value.is_finite() {
            return Err(Error::Model(format!("parameter `{name}` is not finite ({value})")));
        }
        self.values.insert(name, value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(canonical_name(name).as_str()).copied()
    }

    pub fn require(&self, name: &str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| Error::Model(format!("missing parameter `{}`", display_name(name))))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `self` overlaid with every entry of `other`.
    pub fn merged(&self, other: &ParameterVector) -> ParameterVector {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.values.insert(k.to_string(), v);
        }
        out
    }
}

impl fmt::Display for ParameterVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (k, v)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={v}", display_name(k))?;
        }
        write!(f, ")")
    }
}

/// Maps user-facing names onto internal ones. The synaptic gains `A`, `B` of
/// the neural mass model are stored as `gain_A`, `gain_B` so they cannot be
/// confused with the drift and noise matrices.
pub fn canonical_name(name: &str) -> String {
    match name {
        "A" => "gain_A".to_string(),
        "B" => "gain_B".to_string(),
        other => other.to_string(),
    }
}

pub fn display_name(name: &str) -> &str {
    match name {
        "gain_A" => "A",
        "gain_B" => "B",
        other => other,
    }
}
