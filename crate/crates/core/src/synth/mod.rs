//! Hierarchical synthesis: generate the independent features with a baseline
//! generator, then rebuild every dependent feature from its mapping rule.

mod generator;
mod mined;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use rayon::prelude::*;

pub use generator::{Generator, GeneratorKind, IdPolicy, DEFAULT_EPSILON};
pub use mined::mined_graph;

use crate::benchmark::apply_rule;
use crate::config::{MappingRule, Relation};
use crate::error::{Error, Result};
use crate::graph::DependencyGraph;
use crate::seed::Seed;
use crate::table::{Column, ColumnKind, Table};

/// How a dependent feature is rebuilt from its source.
#[derive(Clone, Debug, PartialEq)]
pub enum Derivation {
    Rule(MappingRule),
    /// Inverse of a one-to-one lookup, used when the representative of a
    /// collapsed pair sits on the target side of the configured edge.
    Inverse(BTreeMap<String, String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionStep {
    pub target: String,
    pub source: String,
    pub derivation: Derivation,
    /// Distance from the nearest independent feature.
    pub level: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeaturePartition {
    /// Declaration order.
    pub independent: Vec<String>,
    /// Reconstruction order.
    pub dependent: Vec<String>,
    /// Collapsed one-to-one member -> elected representative.
    pub one_to_one_representatives: BTreeMap<String, String>,
    steps: Vec<ReconstructionStep>,
}

impl FeaturePartition {
    pub fn steps(&self) -> &[ReconstructionStep] {
        &self.steps
    }

    pub fn is_independent(&self, name: &str) -> bool {
        self.independent.iter().any(|n| n == name)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Splits graph features into independent and dependent ones.
///
/// Features joined by one-to-one edges form a class. When the class is not
/// derived from anything else, its lexicographically smallest member becomes
/// the independent representative and the others are rebuilt from it,
/// inverting lookups where the edge points the other way.
pub fn identify_independent(graph: &DependencyGraph) -> FeaturePartition {
    let nodes = graph.nodes();
    let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let incoming: Vec<Option<&crate::graph::Edge>> = nodes.iter().map(|n| graph.incoming(n)).collect();

    let mut uf: Vec<usize> = (0..nodes.len()).collect();
    let mut one_to_one: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for e in graph.edges().iter().filter(|e| e.relation == Relation::OneToOne) {
        let (s, t) = (index[e.source.as_str()], index[e.target.as_str()]);
        one_to_one[s].push(t);
        one_to_one[t].push(s);
        let (rs, rt) = (find(&mut uf, s), find(&mut uf, t));
        uf[rs] = rt;
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..nodes.len() {
        let r = find(&mut uf, i);
        classes.entry(r).or_default().push(i);
    }

    // (source index, derivation) per derived node
    let mut parent: Vec<Option<(usize, Derivation)>> = incoming
        .iter()
        .map(|e| e.map(|e| (index[e.source.as_str()], Derivation::Rule(e.rule.clone()))))
        .collect();
    let mut representatives = BTreeMap::new();

    for members in classes.values().filter(|m| m.len() > 1) {
        let root = *members
            .iter()
            .find(|&&m| incoming[m].is_none_or(|e| e.relation != Relation::OneToOne))
            .expect("one-to-one class has a root");
        let rep = if incoming[root].is_none() {
            *members.iter().min_by_key(|&&m| &nodes[m]).expect("class is non-empty")
        } else {
            root
        };
        for &m in members.iter().filter(|&&m| m != rep) {
            representatives.insert(nodes[m].clone(), nodes[rep].clone());
        }
        if rep == root {
            continue;
        }
        // Re-root the class tree at the representative.
        parent[rep] = None;
        let mut stack = vec![rep];
        let mut seen = vec![rep];
        while let Some(cur) = stack.pop() {
            for &next in &one_to_one[cur] {
                if seen.contains(&next) {
                    continue;
                }
                seen.push(next);
                stack.push(next);
                let forward = incoming[next].filter(|e| e.source == nodes[cur]);
                let derivation = match forward {
                    Some(e) => Derivation::Rule(e.rule.clone()),
                    None => {
                        let e = incoming[cur].expect("edge runs from next to cur");
                        Derivation::Inverse(invert(e, graph))
                    }
                };
                parent[next] = Some((cur, derivation));
            }
        }
    }

    let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, p) in parent.iter().enumerate() {
        if let Some((s, _)) = p {
            children[*s].push(i);
        }
    }
    let mut level = vec![0usize; nodes.len()];
    let mut heap: BinaryHeap<Reverse<usize>> = (0..nodes.len()).filter(|&i| parent[i].is_none()).map(Reverse).collect();
    let independent: Vec<String> = (0..nodes.len()).filter(|&i| parent[i].is_none()).map(|i| nodes[i].clone()).collect();
    let mut steps = Vec::new();
    while let Some(Reverse(i)) = heap.pop() {
        if let Some((s, derivation)) = parent[i].take() {
            level[i] = level[s] + 1;
            steps.push(ReconstructionStep {
                target: nodes[i].clone(),
                source: nodes[s].clone(),
                derivation,
                level: level[i],
            });
        }
        heap.extend(children[i].iter().copied().map(Reverse));
    }

    FeaturePartition {
        independent,
        dependent: steps.iter().map(|s| s.target.clone()).collect(),
        one_to_one_representatives: representatives,
        steps,
    }
}

fn invert(edge: &crate::graph::Edge, graph: &DependencyGraph) -> BTreeMap<String, String> {
    let MappingRule::Deterministic(m) = &edge.rule else {
        return BTreeMap::new();
    };
    let domain = graph.domain(&edge.source).unwrap_or_default();
    domain.iter().filter_map(|s| m.get(s).map(|t| (t.clone(), s.clone()))).collect()
}

/// Rebuilds every dependent column from the independent ones.
///
/// Columns come out in graph declaration order, followed by any columns of
/// `independent` the graph does not mention.
pub fn reconstruct_dependents(independent: &Table, graph: &DependencyGraph, seed: Seed) -> Result<Table> {
    let partition = identify_independent(graph);
    let mut columns: HashMap<String, Vec<String>> = HashMap::new();
    for name in &partition.independent {
        columns.insert(name.clone(), independent.values_of(name)?.to_vec());
    }

    let max_level = partition.steps.iter().map(|s| s.level).max().unwrap_or(0);
    for level in 1..=max_level {
        let batch: Vec<(String, Vec<String>)> = partition
            .steps
            .par_iter()
            .filter(|s| s.level == level)
            .map(|s| {
                let source = &columns[&s.source];
                let values = match &s.derivation {
                    Derivation::Rule(rule) => apply_rule(&s.target, rule, source, seed)?,
                    Derivation::Inverse(m) => source
                        .iter()
                        .enumerate()
                        .map(|(row, v)| {
                            m.get(v).cloned().ok_or_else(|| Error::UnmappedValue {
                                feature: s.target.clone(),
                                value: v.clone(),
                                row,
                            })
                        })
                        .collect::<Result<_>>()?,
                };
                Ok((s.target.clone(), values))
            })
            .collect::<Result<_>>()?;
        columns.extend(batch);
    }

    let mut header = Vec::new();
    let mut data = Vec::new();
    for name in graph.nodes() {
        let kind = independent.column(name).map_or(ColumnKind::Categorical, |c| c.kind);
        header.push(Column::new(name.clone(), kind));
        data.push(columns.remove(name).unwrap_or_default());
    }
    for col in independent.columns() {
        if !graph.nodes().contains(&col.name) {
            header.push(col.clone());
            data.push(independent.values_of(&col.name)?.to_vec());
        }
    }
    Table::from_columns(header, data)
}

/// Full HFGF run: independent columns from `generator`, dependents rebuilt
/// from `graph`, columns in reference order.
///
/// Reference columns the graph does not mention are treated as independent.
pub fn synthesize_hfgf(
    reference: &Table,
    graph: &DependencyGraph,
    generator: impl Into<Generator>,
    n: usize,
    seed: Seed,
) -> Result<Table> {
    for node in graph.nodes() {
        reference.column_index(node)?;
    }
    let partition = identify_independent(graph);
    let independent: Vec<&str> = reference
        .names()
        .filter(|n| !partition.dependent.iter().any(|d| d == n))
        .collect();
    if independent.is_empty() {
        return Err(Error::HfgfInapplicable);
    }
    let generated = generator.into().generate(reference, &independent, n, seed)?;
    let full = reconstruct_dependents(&generated, graph, seed)?;
    let data = reference
        .names()
        .map(|name| full.values_of(name).map(<[String]>::to_vec))
        .collect::<Result<_>>()?;
    Table::from_columns(reference.columns().to_vec(), data)
}

/// Comparison arm: every column drawn by the generator, nothing rebuilt.
pub fn synthesize_baseline(reference: &Table, generator: impl Into<Generator>, n: usize, seed: Seed) -> Result<Table> {
    let names: Vec<&str> = reference.names().collect();
    generator.into().generate(reference, &names, n, seed)
}
