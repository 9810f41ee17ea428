//! Feature configuration documents.
//!
//! A config is a JSON object `{"n": <rows>, "features": [...]}`. Each feature
//! carries `name` and `type` plus the fields its type needs:
//!
//! | type | fields |
//! |------|--------|
//! | `int` | `min`, `max` (values drawn from `[min, max)`) |
//! | `categorical` | `categories`, `probabilities` |
//! | `id` | none |
//! | `one_to_one`, `many_to_one` | `dependent_feature`, `mapping: {"src": "dst"}` |
//! | `one_to_many` | `dependent_feature`, `mapping: {"src": {"categories": [..], "probabilities": [..]}}` |
//!
//! `dependent_feature` names the feature this one is derived from.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Tolerance for probability vectors summing to one.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

const ROOT: &str = "<root>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureType {
    Int,
    Categorical,
    Id,
    OneToOne,
    ManyToOne,
    OneToMany,
}

impl FeatureType {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureType::Int => "int",
            FeatureType::Categorical => "categorical",
            FeatureType::Id => "id",
            FeatureType::OneToOne => "one_to_one",
            FeatureType::ManyToOne => "many_to_one",
            FeatureType::OneToMany => "one_to_many",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "int" => FeatureType::Int,
            "categorical" => FeatureType::Categorical,
            "id" => FeatureType::Id,
            "one_to_one" => FeatureType::OneToOne,
            "many_to_one" => FeatureType::ManyToOne,
            "one_to_many" => FeatureType::OneToMany,
            _ => return None,
        })
    }
}

impl fmt::Display for FeatureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a derived feature relates to its source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    OneToOne,
    ManyToOne,
    OneToMany,
}

impl Relation {
    pub fn is_deterministic(self) -> bool {
        !matches!(self, Relation::OneToMany)
    }

    pub fn feature_type(self) -> FeatureType {
        match self {
            Relation::OneToOne => FeatureType::OneToOne,
            Relation::ManyToOne => FeatureType::ManyToOne,
            Relation::OneToMany => FeatureType::OneToMany,
        }
    }

    pub fn as_str(self) -> &'static str {
        self.feature_type().as_str()
    }
}

/// A finite distribution over named categories.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    categories: Vec<String>,
    probabilities: Vec<f64>,
}

impl Distribution {
    pub fn new(categories: Vec<String>, probabilities: Vec<f64>) -> std::result::Result<Self, String> {
        if categories.is_empty() {
            return Err("categories must not be empty".into());
        }
        if categories.len() != probabilities.len() {
            return Err(format!(
                "{} categories but {} probabilities",
                categories.len(),
                probabilities.len()
            ));
        }
        let mut seen = HashSet::new();
        for c in &categories {
            if c.is_empty() {
                return Err("categories must be non-empty strings".into());
            }
            if !seen.insert(c.as_str()) {
                return Err(format!("category '{c}' listed twice"));
            }
        }
        for p in &probabilities {
            if !p.is_finite() || *p < 0.0 || *p > 1.0 {
                return Err(format!("probability {p} outside [0, 1]"));
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(format!("probabilities sum to {sum}, not 1"));
        }
        Ok(Distribution {
            categories,
            probabilities,
        })
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Categories with non-zero probability.
    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.categories
            .iter()
            .zip(&self.probabilities)
            .filter(|(_, p)| **p > 0.0)
            .map(|(c, _)| c.as_str())
    }

    /// Inverse-CDF lookup for `u` in `[0, 1)`.
    ///
    /// Falls back to the last positive-probability category when rounding
    /// leaves the cumulative sum just below `u`.
    pub fn sample_with(&self, u: f64) -> &str {
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, p) in self.probabilities.iter().enumerate() {
            if *p <= 0.0 {
                continue;
            }
            last_positive = i;
            acc += p;
            if u < acc {
                return &self.categories[i];
            }
        }
        &self.categories[last_positive]
    }

    fn to_json(&self) -> Value {
        json!({"categories": self.categories, "probabilities": self.probabilities})
    }
}

/// Source-category to target-category correspondence of a derived feature.
#[derive(Clone, Debug, PartialEq)]
pub enum MappingRule {
    Deterministic(BTreeMap<String, String>),
    Stochastic(BTreeMap<String, Distribution>),
}

impl MappingRule {
    pub fn sources(&self) -> Vec<&str> {
        match self {
            MappingRule::Deterministic(m) => m.keys().map(String::as_str).collect(),
            MappingRule::Stochastic(m) => m.keys().map(String::as_str).collect(),
        }
    }

    pub fn covers(&self, source: &str) -> bool {
        match self {
            MappingRule::Deterministic(m) => m.contains_key(source),
            MappingRule::Stochastic(m) => m.contains_key(source),
        }
    }

    /// Targets reachable from the given source values, sorted and deduplicated.
    pub fn image<'a>(&'a self, sources: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in sources {
            match self {
                MappingRule::Deterministic(m) => out.extend(m.get(s).cloned()),
                MappingRule::Stochastic(m) => {
                    if let Some(d) = m.get(s) {
                        out.extend(d.support().map(str::to_string));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn to_json(&self) -> Value {
        match self {
            MappingRule::Deterministic(m) => {
                Value::Object(m.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
            }
            MappingRule::Stochastic(m) => {
                Value::Object(m.iter().map(|(k, d)| (k.clone(), d.to_json())).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FeatureKind {
    Int { min: i64, max: i64 },
    Categorical(Distribution),
    Id,
    Derived {
        relation: Relation,
        dependent_feature: String,
        mapping: MappingRule,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn feature_type(&self) -> FeatureType {
        match &self.kind {
            FeatureKind::Int { .. } => FeatureType::Int,
            FeatureKind::Categorical(_) => FeatureType::Categorical,
            FeatureKind::Id => FeatureType::Id,
            FeatureKind::Derived { relation, .. } => relation.feature_type(),
        }
    }

    /// The feature this one is derived from, if any.
    pub fn source(&self) -> Option<&str> {
        match &self.kind {
            FeatureKind::Derived {
                dependent_feature, ..
            } => Some(dependent_feature),
            _ => None,
        }
    }

    fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("name".into(), Value::String(self.name.clone()));
        obj.insert("type".into(), Value::String(self.feature_type().as_str().into()));
        match &self.kind {
            FeatureKind::Int { min, max } => {
                obj.insert("min".into(), json!(min));
                obj.insert("max".into(), json!(max));
            }
            FeatureKind::Categorical(d) => {
                obj.insert("categories".into(), json!(d.categories));
                obj.insert("probabilities".into(), json!(d.probabilities));
            }
            FeatureKind::Id => {}
            FeatureKind::Derived {
                dependent_feature,
                mapping,
                ..
            } => {
                obj.insert("dependent_feature".into(), Value::String(dependent_feature.clone()));
                obj.insert("mapping".into(), mapping.to_json());
            }
        }
        Value::Object(obj)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub n: usize,
    pub features: Vec<FeatureSpec>,
}

impl Config {
    pub fn feature(&self, name: &str) -> Option<&FeatureSpec> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn to_value(&self) -> Value {
        json!({
            "n": self.n,
            "features": self.features.iter().map(FeatureSpec::to_json).collect::<Vec<_>>(),
        })
    }

    /// Pretty-printed JSON in the same schema `parse_config` accepts.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("config serializes")
    }

    /// SHA-256 of the compact canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&self.to_value()).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Parses and validates a config document.
///
/// Checks every per-feature invariant: known type, required fields present
/// and no foreign ones, probability vectors summing to one, `min < max`, and
/// `dependent_feature` naming another categorical-valued feature. Whole-graph
/// properties (cycles, mapping coverage, bijectivity) are checked by
/// [`crate::graph::build_dependency_graph`].
pub fn parse_config(text: &str) -> Result<Config> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::ConfigSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = value.as_object().ok_or_else(|| schema(ROOT, "top level must be an object"))?;
    for key in root.keys() {
        if key != "n" && key != "features" {
            return Err(schema(ROOT, format!("unknown field '{key}'")));
        }
    }
    let n = root
        .get("n")
        .ok_or_else(|| schema(ROOT, "missing field 'n'"))?
        .as_u64()
        .ok_or_else(|| schema(ROOT, "'n' must be a non-negative integer"))? as usize;
    let raw = root
        .get("features")
        .ok_or_else(|| schema(ROOT, "missing field 'features'"))?
        .as_array()
        .ok_or_else(|| schema(ROOT, "'features' must be an array"))?;

    let mut features = Vec::with_capacity(raw.len());
    let mut names = HashSet::new();
    for (i, f) in raw.iter().enumerate() {
        let spec = parse_feature(i, f)?;
        if !names.insert(spec.name.clone()) {
            return Err(schema(&spec.name, "duplicate feature name"));
        }
        features.push(spec);
    }

    for f in &features {
        let Some(src) = f.source() else { continue };
        if src == f.name {
            return Err(schema(&f.name, "dependent_feature refers to itself"));
        }
        let source = features
            .iter()
            .find(|g| g.name == src)
            .ok_or_else(|| schema(&f.name, format!("dependent_feature '{src}' does not exist")))?;
        if matches!(source.kind, FeatureKind::Int { .. } | FeatureKind::Id) {
            return Err(schema(
                &f.name,
                format!("dependent_feature '{src}' is {}; only categorical sources are supported", source.feature_type()),
            ));
        }
    }
    Ok(Config { n, features })
}

fn schema(feature: &str, reason: impl Into<String>) -> Error {
    Error::ConfigSchema {
        feature: feature.to_string(),
        reason: reason.into(),
    }
}

fn parse_feature(index: usize, value: &Value) -> Result<FeatureSpec> {
    let placeholder = format!("#{index}");
    let obj = value
        .as_object()
        .ok_or_else(|| schema(&placeholder, "feature must be an object"))?;
    let name = match obj.get("name") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(_) => return Err(schema(&placeholder, "'name' must be a non-empty string")),
        None => return Err(schema(&placeholder, "missing field 'name'")),
    };
    let ty_str = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| schema(&name, "missing or non-string field 'type'"))?;
    let ty = FeatureType::parse(ty_str).ok_or_else(|| schema(&name, format!("unknown type '{ty_str}'")))?;

    let allowed: &[&str] = match ty {
        FeatureType::Int => &["min", "max"],
        FeatureType::Categorical => &["categories", "probabilities"],
        FeatureType::Id => &[],
        _ => &["dependent_feature", "mapping"],
    };
    for key in obj.keys() {
        if key != "name" && key != "type" && !allowed.contains(&key.as_str()) {
            return Err(schema(&name, format!("field '{key}' does not apply to type {ty}")));
        }
    }

    let kind = match ty {
        FeatureType::Int => {
            let min = int_field(&name, obj, "min")?;
            let max = int_field(&name, obj, "max")?;
            if min >= max {
                return Err(schema(&name, format!("min {min} must be below max {max}")));
            }
            FeatureKind::Int { min, max }
        }
        FeatureType::Categorical => FeatureKind::Categorical(distribution(&name, obj)?),
        FeatureType::Id => FeatureKind::Id,
        FeatureType::OneToOne | FeatureType::ManyToOne | FeatureType::OneToMany => {
            let dependent_feature = match obj.get("dependent_feature") {
                Some(Value::String(s)) => s.clone(),
                Some(_) => return Err(schema(&name, "'dependent_feature' must be a string")),
                None => return Err(schema(&name, "missing field 'dependent_feature'")),
            };
            let raw = obj
                .get("mapping")
                .ok_or_else(|| schema(&name, "missing field 'mapping'"))?
                .as_object()
                .ok_or_else(|| schema(&name, "'mapping' must be an object"))?;
            let (relation, mapping) = if ty == FeatureType::OneToMany {
                let mut m = BTreeMap::new();
                for (src, entry) in raw {
                    let entry = entry
                        .as_object()
                        .ok_or_else(|| schema(&name, format!("mapping entry '{src}' must be an object")))?;
                    for key in entry.keys() {
                        if key != "categories" && key != "probabilities" {
                            return Err(schema(&name, format!("mapping entry '{src}' has unknown field '{key}'")));
                        }
                    }
                    let d = distribution(&name, entry)
                        .map_err(|e| match e {
                            Error::ConfigSchema { reason, .. } => schema(&name, format!("mapping entry '{src}': {reason}")),
                            other => other,
                        })?;
                    m.insert(src.clone(), d);
                }
                (Relation::OneToMany, MappingRule::Stochastic(m))
            } else {
                let mut m = BTreeMap::new();
                for (src, dst) in raw {
                    match dst {
                        Value::String(s) if !s.is_empty() => {
                            m.insert(src.clone(), s.clone());
                        }
                        _ => return Err(schema(&name, format!("mapping entry '{src}' must be a non-empty string"))),
                    }
                }
                let relation = if ty == FeatureType::OneToOne {
                    Relation::OneToOne
                } else {
                    Relation::ManyToOne
                };
                (relation, MappingRule::Deterministic(m))
            };
            if mapping.sources().is_empty() {
                return Err(schema(&name, "mapping must not be empty"));
            }
            FeatureKind::Derived {
                relation,
                dependent_feature,
                mapping,
            }
        }
    };
    Ok(FeatureSpec { name, kind })
}

fn int_field(name: &str, obj: &Map<String, Value>, key: &str) -> Result<i64> {
    obj.get(key)
        .ok_or_else(|| schema(name, format!("missing field '{key}'")))?
        .as_i64()
        .ok_or_else(|| schema(name, format!("'{key}' must be an integer")))
}

fn distribution(name: &str, obj: &Map<String, Value>) -> Result<Distribution> {
    let categories = obj
        .get("categories")
        .ok_or_else(|| schema(name, "missing field 'categories'"))?
        .as_array()
        .ok_or_else(|| schema(name, "'categories' must be an array"))?
        .iter()
        .map(|v| v.as_str().map(str::to_string))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| schema(name, "categories must be strings"))?;
    let probabilities = obj
        .get("probabilities")
        .ok_or_else(|| schema(name, "missing field 'probabilities'"))?
        .as_array()
        .ok_or_else(|| schema(name, "'probabilities' must be an array"))?
        .iter()
        .map(Value::as_f64)
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| schema(name, "probabilities must be numbers"))?;
    Distribution::new(categories, probabilities).map_err(|reason| schema(name, reason))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_of(text: &str) -> Error {
        parse_config(text).unwrap_err()
    }

    #[test]
    fn empty_feature_list_is_valid() {
        let cfg = parse_config(r#"{"n": 0, "features": []}"#).unwrap();
        assert!(cfg.features.is_empty());
    }

    #[test]
    fn syntax_error_reports_position() {
        match err_of("{\n  \"n\": 3,\n  \"features\": [,]\n}") {
            Error::ConfigSyntax { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_dependent_feature_names_the_feature() {
        let err = err_of(
            r#"{"n": 1, "features": [
                {"name": "X", "type": "many_to_one", "dependent_feature": "missing", "mapping": {"a": "b"}}
            ]}"#,
        );
        match err {
            Error::ConfigSchema { feature, reason } => {
                assert_eq!(feature, "X");
                assert!(reason.contains("missing"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let err = err_of(
            r#"{"n": 1, "features": [
                {"name": "c", "type": "categorical", "categories": ["a", "b"], "probabilities": [0.5, 0.6]}
            ]}"#,
        );
        assert_eq!(err.code(), "config_schema");
    }

    #[test]
    fn probability_sum_tolerance() {
        let ok = r#"{"n": 1, "features": [
            {"name": "c", "type": "categorical", "categories": ["a", "b", "c"], "probabilities": [0.1, 0.2, 0.7000000000001]}
        ]}"#;
        assert!(parse_config(ok).is_ok());
    }

    #[test]
    fn unknown_type_rejected() {
        let err = err_of(r#"{"n": 1, "features": [{"name": "f", "type": "float"}]}"#);
        assert!(matches!(err, Error::ConfigSchema { ref reason, .. } if reason.contains("float")));
    }

    #[test]
    fn missing_mapping_rejected() {
        let err = err_of(
            r#"{"n": 1, "features": [
                {"name": "a", "type": "categorical", "categories": ["x"], "probabilities": [1.0]},
                {"name": "b", "type": "one_to_one", "dependent_feature": "a"}
            ]}"#,
        );
        assert!(matches!(err, Error::ConfigSchema { ref feature, .. } if feature == "b"));
    }

    #[test]
    fn min_must_be_below_max() {
        let err = err_of(r#"{"n": 1, "features": [{"name": "i", "type": "int", "min": 4, "max": 4}]}"#);
        assert_eq!(err.code(), "config_schema");
    }

    #[test]
    fn self_reference_rejected() {
        let err = err_of(
            r#"{"n": 1, "features": [
                {"name": "a", "type": "many_to_one", "dependent_feature": "a", "mapping": {"x": "y"}}
            ]}"#,
        );
        assert!(matches!(err, Error::ConfigSchema { ref reason, .. } if reason.contains("itself")));
    }

    #[test]
    fn numeric_source_rejected() {
        let err = err_of(
            r#"{"n": 1, "features": [
                {"name": "age", "type": "int", "min": 0, "max": 9},
                {"name": "b", "type": "many_to_one", "dependent_feature": "age", "mapping": {"1": "y"}}
            ]}"#,
        );
        assert!(matches!(err, Error::ConfigSchema { ref feature, .. } if feature == "b"));
    }

    #[test]
    fn stochastic_entries_validated() {
        let err = err_of(
            r#"{"n": 1, "features": [
                {"name": "a", "type": "categorical", "categories": ["x"], "probabilities": [1.0]},
                {"name": "b", "type": "one_to_many", "dependent_feature": "a",
                 "mapping": {"x": {"categories": ["p", "q"], "probabilities": [0.5, 0.4]}}}
            ]}"#,
        );
        assert!(matches!(err, Error::ConfigSchema { ref reason, .. } if reason.contains("'x'")));
    }

    #[test]
    fn serialization_round_trips() {
        let text = r#"{"n": 5, "features": [
            {"name": "pid", "type": "id"},
            {"name": "age", "type": "int", "min": 1, "max": 9},
            {"name": "a", "type": "categorical", "categories": ["x", "y"], "probabilities": [0.25, 0.75]},
            {"name": "b", "type": "one_to_one", "dependent_feature": "a", "mapping": {"x": "X", "y": "Y"}},
            {"name": "c", "type": "one_to_many", "dependent_feature": "a",
             "mapping": {"x": {"categories": ["p"], "probabilities": [1.0]},
                         "y": {"categories": ["p", "q"], "probabilities": [0.5, 0.5]}}}
        ]}"#;
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn inverse_cdf_sampling() {
        let d = Distribution::new(vec!["a".into(), "b".into(), "c".into()], vec![0.2, 0.0, 0.8]).unwrap();
        assert_eq!(d.sample_with(0.0), "a");
        assert_eq!(d.sample_with(0.1999), "a");
        assert_eq!(d.sample_with(0.2), "c");
        assert_eq!(d.sample_with(0.999_999_999_999), "c");
        assert_eq!(d.support().collect::<Vec<_>>(), vec!["a", "c"]);
    }
}
