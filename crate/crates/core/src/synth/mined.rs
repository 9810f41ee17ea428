//! Dependency graphs recovered from a reference table.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::config::{Distribution, MappingRule, Relation};
use crate::error::{Error, Result};
use crate::fd_miner::FdSet;
use crate::graph::{DependencyGraph, Edge};
use crate::ld_scorer::QReport;
use crate::table::{ColumnKind, Table};

/// Builds a reconstruction graph from mined dependencies.
///
/// Only single-column FDs between categorical columns become edges.
/// Mutually determining columns collapse into one-to-one classes led by
/// their smallest name; every other determined column hangs off its coarsest
/// determinant (fewest distinct values, then name). Lookups take the most
/// frequent target per source value.
///
/// With a `qreport`, single-column LD pairs are then added as stochastic
/// edges, lowest Q first, whenever the source is still independent and the
/// target is neither derived nor a source itself. Their rules are the
/// observed conditional frequencies.
pub fn mined_graph(reference: &Table, fds: &FdSet, qreport: Option<&QReport>) -> Result<DependencyGraph> {
    let categorical = |name: &str| -> Result<bool> { Ok(reference.column(name)?.kind == ColumnKind::Categorical) };

    let mut determines: BTreeSet<(&str, &str)> = BTreeSet::new();
    for fd in fds.fds() {
        for c in &fd.lhs {
            reference.column_index(c)?;
        }
        reference.column_index(&fd.rhs)?;
        if fd.lhs.len() == 1 && categorical(&fd.lhs[0])? && categorical(&fd.rhs)? {
            determines.insert((fd.lhs[0].as_str(), fd.rhs.as_str()));
        }
    }

    // Representative of each mutually determining class.
    let mut rep: HashMap<&str, &str> = HashMap::new();
    let names: Vec<&str> = reference.names().collect();
    for &n in &names {
        let class_min = names
            .iter()
            .copied()
            .filter(|&m| m == n || (determines.contains(&(n, m)) && determines.contains(&(m, n))))
            .min()
            .expect("class contains n");
        rep.insert(n, class_min);
    }

    let distinct = |name: &str| reference.distinct(reference.column_index(name).expect("known column")).len();
    let mut edges = Vec::new();
    for &n in &names {
        let r = rep[n];
        if r != n {
            edges.push(Edge {
                source: r.to_string(),
                target: n.to_string(),
                relation: Relation::OneToOne,
                rule: MappingRule::Deterministic(mode_map(reference, r, n)),
            });
            continue;
        }
        let parent = determines
            .iter()
            .filter(|(d, t)| *t == n && rep[d] != n)
            .map(|(d, _)| rep[d])
            .min_by_key(|d| (distinct(d), *d));
        if let Some(p) = parent {
            edges.push(Edge {
                source: p.to_string(),
                target: n.to_string(),
                relation: Relation::ManyToOne,
                rule: MappingRule::Deterministic(mode_map(reference, p, n)),
            });
        }
    }

    if let Some(report) = qreport {
        let mut candidates: Vec<_> = report
            .lds()
            .filter(|s| s.a.len() == 1 && s.b.len() == 1)
            .collect();
        candidates.sort_by(|x, y| (x.value, &x.a, &x.b).cmp(&(y.value, &y.a, &y.b)));
        for s in candidates {
            let (src, tgt) = (s.a.columns()[0].as_str(), s.b.columns()[0].as_str());
            if !categorical(src)? || !categorical(tgt)? {
                continue;
            }
            let derived = |x: &str| edges.iter().any(|e: &Edge| e.target == x);
            let sources = |x: &str| edges.iter().any(|e: &Edge| e.source == x);
            if derived(src) || derived(tgt) || sources(tgt) {
                continue;
            }
            let rule = MappingRule::Stochastic(conditional(reference, src, tgt)?);
            edges.push(Edge {
                source: src.to_string(),
                target: tgt.to_string(),
                relation: Relation::OneToMany,
                rule,
            });
        }
    }

    let mut root_domains = BTreeMap::new();
    for col in reference.columns() {
        if col.kind == ColumnKind::Categorical && !edges.iter().any(|e| e.target == col.name) {
            let idx = reference.column_index(&col.name)?;
            root_domains.insert(col.name.clone(), reference.distinct(idx).into_iter().map(String::from).collect());
        }
    }
    DependencyGraph::new(names.iter().map(|s| s.to_string()).collect(), edges, root_domains)
}

fn counts(reference: &Table, source: &str, target: &str) -> BTreeMap<String, BTreeMap<String, usize>> {
    let s = reference.values_of(source).expect("known column");
    let t = reference.values_of(target).expect("known column");
    let mut out: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for (a, b) in s.iter().zip(t) {
        *out.entry(a.clone()).or_default().entry(b.clone()).or_default() += 1;
    }
    out
}

/// Most frequent target per source value; ties go to the smallest target.
fn mode_map(reference: &Table, source: &str, target: &str) -> BTreeMap<String, String> {
    counts(reference, source, target)
        .into_iter()
        .map(|(s, ts)| {
            let best = ts.iter().max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0))).expect("non-empty");
            (s, best.0.clone())
        })
        .collect()
}

fn conditional(reference: &Table, source: &str, target: &str) -> Result<BTreeMap<String, Distribution>> {
    counts(reference, source, target)
        .into_iter()
        .map(|(s, ts)| {
            let total: usize = ts.values().sum();
            let (cats, probs) = ts.into_iter().map(|(t, c)| (t, c as f64 / total as f64)).unzip();
            Distribution::new(cats, probs)
                .map(|d| (s, d))
                .map_err(Error::Internal)
        })
        .collect()
}
