//! Dependency preservation between a real and a synthetic table.
//!
//! FDs are mined on the real table and grouped by determinant; a group is
//! preserved when every one of its FDs still holds on the synthetic table.
//! LDs are the real pairs classified LD under the enumeration policy; one is
//! preserved when the same pair is still LD on the synthetic table.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd_miner::{holds_fd, mine_fds};
use crate::ld_scorer::{score_all, ColumnSelection, DependencyClass, EnumerationPolicy};
use crate::table::{ColumnKind, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum Item {
    Fd {
        lhs: Vec<String>,
        rhs: Vec<String>,
        preserved: bool,
    },
    Ld {
        a: ColumnSelection,
        b: ColumnSelection,
        real_q: String,
        synth_q: String,
        synth_class: DependencyClass,
        preserved: bool,
    },
}

impl Item {
    pub fn preserved(&self) -> bool {
        match self {
            Item::Fd { preserved, .. } | Item::Ld { preserved, .. } => *preserved,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreservationResult {
    pub fd_total: usize,
    pub fd_preserved: usize,
    pub fd_pct: f64,
    pub ld_total: usize,
    pub ld_preserved: usize,
    pub ld_pct: f64,
    pub max_lhs: usize,
    pub policy: EnumerationPolicy,
    pub per_item: Vec<Item>,
}

impl PreservationResult {
    /// `FD 3/4 (75%), LD 10/10 (100%)` with percentages rounded.
    pub fn summary(&self) -> String {
        format!(
            "FD {}/{} ({:.0}%), LD {}/{} ({:.0}%)",
            self.fd_preserved, self.fd_total, self.fd_pct, self.ld_preserved, self.ld_total, self.ld_pct
        )
    }
}

pub fn percent(preserved: usize, total: usize) -> f64 {
    if total == 0 {
        100.0
    } else {
        100.0 * preserved as f64 / total as f64
    }
}

fn check_columns(real: &Table, synth: &Table) -> Result<()> {
    let mut a: Vec<&str> = real.names().collect();
    let mut b: Vec<&str> = synth.names().collect();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(Error::ColumnMismatch);
    }
    Ok(())
}

/// One item per determinant of the FDs mined on `real`.
pub fn fd_preservation(real: &Table, synth: &Table, max_lhs: usize) -> Result<Vec<Item>> {
    check_columns(real, synth)?;
    let groups = mine_fds(real, max_lhs)?.grouped();
    groups
        .into_par_iter()
        .map(|(lhs, rhs)| {
            let l: Vec<&str> = lhs.iter().map(String::as_str).collect();
            let mut preserved = true;
            for r in &rhs {
                if !holds_fd(synth, &l, r)? {
                    preserved = false;
                    break;
                }
            }
            Ok(Item::Fd { lhs, rhs, preserved })
        })
        .collect()
}

/// One item per pair classified LD on `real`.
pub fn ld_preservation(real: &Table, synth: &Table, policy: EnumerationPolicy) -> Result<Vec<Item>> {
    check_columns(real, synth)?;
    let real_scores = score_all(real, policy)?;
    let synth_scores = score_all(synth, policy)?;
    let lookup: HashMap<(&ColumnSelection, &ColumnSelection), _> =
        synth_scores.scores.iter().map(|s| ((&s.a, &s.b), s)).collect();
    real_scores
        .lds()
        .map(|r| {
            let s = lookup
                .get(&(&r.a, &r.b))
                .ok_or_else(|| Error::Internal(format!("pair {} -> {} missing on synthetic side", r.a, r.b)))?;
            Ok(Item::Ld {
                a: r.a.clone(),
                b: r.b.clone(),
                real_q: r.value.to_string(),
                synth_q: s.value.to_string(),
                synth_class: s.class,
                preserved: s.class == DependencyClass::Ld,
            })
        })
        .collect()
}

pub fn evaluate(real: &Table, synth: &Table, max_lhs: usize, policy: EnumerationPolicy) -> Result<PreservationResult> {
    let fd = fd_preservation(real, synth, max_lhs)?;
    let ld = ld_preservation(real, synth, policy)?;
    let fd_preserved = fd.iter().filter(|i| i.preserved()).count();
    let ld_preserved = ld.iter().filter(|i| i.preserved()).count();
    Ok(PreservationResult {
        fd_total: fd.len(),
        fd_preserved,
        fd_pct: percent(fd_preserved, fd.len()),
        ld_total: ld.len(),
        ld_preserved,
        ld_pct: percent(ld_preserved, ld.len()),
        max_lhs,
        policy,
        per_item: fd.into_iter().chain(ld).collect(),
    })
}

/// Total-variation distance between the empirical value distributions of
/// `column` in the two tables. Integers are compared value by value.
pub fn column_tv_distance(real: &Table, synth: &Table, column: &str) -> Result<f64> {
    let col = real.column(column)?;
    synth.column(column)?;
    if col.kind == ColumnKind::Identifier {
        return Err(Error::ColumnKind {
            column: column.to_string(),
            kind: col.kind.to_string(),
        });
    }
    let freq = |t: &Table| -> Result<BTreeMap<String, f64>> {
        let values = t.values_of(column)?;
        let mut m: BTreeMap<String, f64> = BTreeMap::new();
        for v in values {
            *m.entry(v.clone()).or_default() += 1.0;
        }
        let n = values.len() as f64;
        m.values_mut().for_each(|c| *c /= n);
        Ok(m)
    };
    let (p, q) = (freq(real)?, freq(synth)?);
    match (p.is_empty(), q.is_empty()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => return Ok(1.0),
        _ => {}
    }
    let mut keys: Vec<&String> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    let sum: f64 = keys
        .iter()
        .map(|k| (p.get(*k).copied().unwrap_or(0.0) - q.get(*k).copied().unwrap_or(0.0)).abs())
        .sum();
    Ok(0.5 * sum)
}

/// Distances for every non-identifier column of `real`.
pub fn column_distances(real: &Table, synth: &Table) -> Result<BTreeMap<String, f64>> {
    real.columns()
        .iter()
        .filter(|c| c.kind != ColumnKind::Identifier)
        .map(|c| Ok((c.name.clone(), column_tv_distance(real, synth, &c.name)?)))
        .collect()
}

/// Where an evaluation came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seeds: BTreeMap<String, u64>,
    pub generator: Option<String>,
    pub id_policy: Option<String>,
    pub arm: Option<String>,
    pub config_hash: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub preservation: PreservationResult,
    pub column_tv: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl Report {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Serializes a report with a fixed key order.
pub fn emit_report(preservation: PreservationResult, column_tv: BTreeMap<String, f64>, provenance: Provenance) -> String {
    let report = Report {
        preservation,
        column_tv,
        provenance,
    };
    serde_json::to_string_pretty(&report).expect("report serializes")
}
