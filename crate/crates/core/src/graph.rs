//! Dependency graph between features.
//!
//! Edges point from the feature a value is derived from (source) to the
//! derived feature (target). Every target has exactly one incoming edge, so
//! the graph is a forest once validated as acyclic.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;

use crate::config::{Config, FeatureKind, MappingRule, Relation};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub relation: Relation,
    pub rule: MappingRule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DependencyGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    order: Vec<String>,
    domains: BTreeMap<String, Vec<String>>,
}

impl DependencyGraph {
    /// Validates and assembles a graph.
    ///
    /// `root_domains` gives the category set of every feature that is not an
    /// edge target; derived domains are the images of their sources. Features
    /// without a domain (integers, identifiers) may not be edge sources.
    pub fn new(
        nodes: Vec<String>,
        edges: Vec<Edge>,
        root_domains: BTreeMap<String, Vec<String>>,
    ) -> Result<Self> {
        let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        if index.len() != nodes.len() {
            return Err(Error::InvalidArgument("duplicate node in dependency graph".into()));
        }
        let mut parent: Vec<Option<usize>> = vec![None; nodes.len()];
        for (e_idx, e) in edges.iter().enumerate() {
            let s = *index
                .get(e.source.as_str())
                .ok_or_else(|| Error::UnknownColumn(e.source.clone()))?;
            let t = *index
                .get(e.target.as_str())
                .ok_or_else(|| Error::UnknownColumn(e.target.clone()))?;
            if s == t {
                return Err(Error::Cycle(vec![e.source.clone(), e.target.clone()]));
            }
            if parent[t].is_some() {
                return Err(Error::InvalidArgument(format!(
                    "feature '{}' has more than one incoming dependency",
                    e.target
                )));
            }
            parent[t] = Some(e_idx);
        }

        // Each node has at most one parent, so any cycle is found by walking
        // parent links.
        let source_of = |n: usize| parent[n].map(|e| index[edges[e].source.as_str()]);
        for start in 0..nodes.len() {
            let mut path = vec![start];
            let mut cur = start;
            while let Some(p) = source_of(cur) {
                if let Some(pos) = path.iter().position(|&x| x == p) {
                    let mut cycle: Vec<String> = path[pos..].iter().rev().map(|&i| nodes[i].clone()).collect();
                    cycle.push(cycle[0].clone());
                    return Err(Error::Cycle(cycle));
                }
                path.push(p);
                cur = p;
            }
        }

        // Kahn's algorithm; ties resolved by declaration order.
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (t, p) in parent.iter().enumerate() {
            if let Some(e) = p {
                children[index[edges[*e].source.as_str()]].push(t);
            }
        }
        let mut heap: BinaryHeap<Reverse<usize>> = (0..nodes.len())
            .filter(|&i| parent[i].is_none())
            .map(Reverse)
            .collect();
        let mut order = Vec::with_capacity(nodes.len());
        while let Some(Reverse(i)) = heap.pop() {
            order.push(nodes[i].clone());
            heap.extend(children[i].iter().copied().map(Reverse));
        }
        if order.len() != nodes.len() {
            return Err(Error::Internal("topological sort left nodes unvisited".into()));
        }

        let mut domains = root_domains;
        for name in &order {
            let Some(e_idx) = parent[index[name.as_str()]] else { continue };
            let e = &edges[e_idx];
            let src_domain = domains.get(&e.source).cloned().ok_or_else(|| Error::ConfigSchema {
                feature: e.target.clone(),
                reason: format!("source '{}' has no category set", e.source),
            })?;
            check_rule(e, &src_domain)?;
            let image = e.rule.image(src_domain.iter().map(String::as_str));
            domains.insert(e.target.clone(), image);
        }

        Ok(DependencyGraph {
            nodes,
            edges,
            order,
            domains,
        })
    }

    /// Feature names in declaration order.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Every source appears before its targets.
    pub fn topological_order(&self) -> &[String] {
        &self.order
    }

    /// The edge into `target`, if it is derived.
    pub fn incoming(&self, target: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.target == target)
    }

    pub fn outgoing<'a>(&'a self, source: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.source == source)
    }

    /// Category set of a categorical-valued feature.
    pub fn domain(&self, name: &str) -> Option<&[String]> {
        self.domains.get(name).map(Vec::as_slice)
    }
}

fn check_rule(edge: &Edge, src_domain: &[String]) -> Result<()> {
    for v in src_domain {
        if !edge.rule.covers(v) {
            return Err(Error::MappingCoverage {
                feature: edge.target.clone(),
                value: v.clone(),
            });
        }
    }
    match (&edge.rule, edge.relation) {
        (MappingRule::Deterministic(m), Relation::OneToOne) => {
            let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
            for src in src_domain {
                let dst = m[src.as_str()].as_str();
                if let Some(prev) = seen.insert(dst, src) {
                    return Err(Error::NotBijective {
                        feature: edge.target.clone(),
                        reason: format!("'{prev}' and '{src}' both map to '{dst}'"),
                    });
                }
            }
            Ok(())
        }
        (MappingRule::Deterministic(_), Relation::ManyToOne) | (MappingRule::Stochastic(_), Relation::OneToMany) => Ok(()),
        _ => Err(Error::Internal(format!(
            "edge into '{}' pairs {} with the wrong rule shape",
            edge.target,
            edge.relation.as_str()
        ))),
    }
}

/// Builds and validates the dependency graph a config describes.
pub fn build_dependency_graph(config: &Config) -> Result<DependencyGraph> {
    let nodes: Vec<String> = config.features.iter().map(|f| f.name.clone()).collect();
    let mut edges = Vec::new();
    let mut root_domains = BTreeMap::new();
    for f in &config.features {
        match &f.kind {
            FeatureKind::Categorical(d) => {
                let cats: BTreeSet<String> = d.categories().iter().cloned().collect();
                root_domains.insert(f.name.clone(), cats.into_iter().collect());
            }
            FeatureKind::Derived {
                relation,
                dependent_feature,
                mapping,
            } => edges.push(Edge {
                source: dependent_feature.clone(),
                target: f.name.clone(),
                relation: *relation,
                rule: mapping.clone(),
            }),
            FeatureKind::Int { .. } | FeatureKind::Id => {}
        }
    }
    DependencyGraph::new(nodes, edges, root_domains)
}
