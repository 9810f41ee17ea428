//! Benchmark tables with injected dependencies.
//!
//! Features are materialized in topological order of the dependency graph,
//! each from its own seeded stream, then laid out in declaration order.

use std::collections::HashMap;

use rand::Rng;

use crate::config::{parse_config, Config, FeatureKind, MappingRule};
use crate::error::{Error, Result};
use crate::graph::build_dependency_graph;
use crate::seed::Seed;
use crate::table::{kind_for, Column, Table};

/// Largest row count an identifier column supports.
pub const ID_CAPACITY: usize = u32::MAX as usize;

const CASE_1: &str = include_str!("../fixtures/case1.json");
const CASE_3: &str = include_str!("../fixtures/case3.json");
const CASE_4: &str = include_str!("../fixtures/case4.json");

/// Digits needed for ids `1..=n`.
pub fn id_width(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        n.to_string().len()
    }
}

/// Zero-padded decimal id for row `i` (1-based) of an `n`-row table.
pub fn format_id(i: usize, n: usize) -> String {
    format!("{:0width$}", i, width = id_width(n))
}

/// Fresh unique identifiers `1..=n`.
pub fn fresh_ids(n: usize) -> Result<Vec<String>> {
    if n > ID_CAPACITY {
        return Err(Error::IdCapacity {
            requested: n,
            capacity: ID_CAPACITY,
        });
    }
    Ok((1..=n).map(|i| format_id(i, n)).collect())
}

/// Generates an `n`-row benchmark table from `config`.
pub fn generate_benchmark(config: &Config, n: usize, seed: Seed) -> Result<Table> {
    let graph = build_dependency_graph(config)?;
    let mut columns: HashMap<&str, Vec<String>> = HashMap::with_capacity(config.features.len());

    for name in graph.topological_order() {
        let spec = config
            .feature(name)
            .ok_or_else(|| Error::Internal(format!("graph node '{name}' missing from config")))?;
        let values = match &spec.kind {
            FeatureKind::Int { min, max } => {
                let mut rng = seed.stream(name);
                (0..n).map(|_| rng.gen_range(*min..*max).to_string()).collect()
            }
            FeatureKind::Categorical(dist) => {
                let mut rng = seed.stream(name);
                (0..n).map(|_| dist.sample_with(rng.gen::<f64>()).to_string()).collect()
            }
            FeatureKind::Id => fresh_ids(n)?,
            FeatureKind::Derived {
                dependent_feature,
                mapping,
                ..
            } => {
                let source = columns
                    .get(dependent_feature.as_str())
                    .ok_or_else(|| Error::Internal(format!("'{dependent_feature}' not materialized before '{name}'")))?;
                apply_rule(name, mapping, source, seed)?
            }
        };
        columns.insert(name.as_str(), values);
    }

    let mut header = Vec::with_capacity(config.features.len());
    let mut data = Vec::with_capacity(config.features.len());
    for f in &config.features {
        header.push(Column::new(f.name.clone(), kind_for(f.feature_type())));
        data.push(columns.remove(f.name.as_str()).unwrap_or_default());
    }
    Table::from_columns(header, data)
}

/// Fills a derived column from its source column.
///
/// Deterministic rules are plain lookups; stochastic rules draw from the
/// target feature's own stream, one draw per row.
pub(crate) fn apply_rule(target: &str, rule: &MappingRule, source: &[String], seed: Seed) -> Result<Vec<String>> {
    let unmapped = |row: usize, value: &str| Error::UnmappedValue {
        feature: target.to_string(),
        value: value.to_string(),
        row,
    };
    match rule {
        MappingRule::Deterministic(m) => source
            .iter()
            .enumerate()
            .map(|(row, v)| m.get(v).cloned().ok_or_else(|| unmapped(row, v)))
            .collect(),
        MappingRule::Stochastic(m) => {
            let mut rng = seed.stream(target);
            source
                .iter()
                .enumerate()
                .map(|(row, v)| {
                    let dist = m.get(v).ok_or_else(|| unmapped(row, v))?;
                    Ok(dist.sample_with(rng.gen::<f64>()).to_string())
                })
                .collect()
        }
    }
}

/// Shipped fixture for benchmark case `k` and its row count.
///
/// Case 2 reuses the case-1 features at 1000 rows.
pub fn builtin_case(k: u32) -> Result<(Config, usize)> {
    let (text, n_override) = match k {
        1 => (CASE_1, None),
        2 => (CASE_1, Some(1000)),
        3 => (CASE_3, None),
        4 => (CASE_4, None),
        _ => return Err(Error::UnknownCase(k)),
    };
    let mut config = parse_config(text)?;
    if let Some(n) = n_override {
        config.n = n;
    }
    let n = config.n;
    Ok((config, n))
}
