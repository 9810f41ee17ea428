//! Exact functional-dependency discovery.
//!
//! Candidates are explored level-wise over the lattice of determinant sets
//! (bitmasks over at most 64 columns). Each determinant set is represented by
//! its stripped row partition; a candidate `X -> A` holds iff refining the
//! partition of `X` by `A` splits no class. Once `X -> A` holds, no superset
//! of `X` is tested for `A`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Table;

/// Widest table the miner accepts.
pub const MAX_COLUMNS: usize = 64;

/// `lhs -> rhs`, with `lhs` sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fd {
    pub lhs: Vec<String>,
    pub rhs: String,
}

impl Fd {
    pub fn new<S: Into<String>>(lhs: impl IntoIterator<Item = S>, rhs: impl Into<String>) -> Self {
        let mut lhs: Vec<String> = lhs.into_iter().map(Into::into).collect();
        lhs.sort();
        lhs.dedup();
        Fd { lhs, rhs: rhs.into() }
    }
}

/// Minimal non-trivial FDs found up to a lattice depth, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FdSet {
    fds: Vec<Fd>,
    max_lhs: usize,
}

impl FdSet {
    pub fn new(mut fds: Vec<Fd>, max_lhs: usize) -> Self {
        fds.sort();
        fds.dedup();
        FdSet { fds, max_lhs }
    }

    pub fn fds(&self) -> &[Fd] {
        &self.fds
    }

    pub fn max_lhs(&self) -> usize {
        self.max_lhs
    }

    pub fn len(&self) -> usize {
        self.fds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fds.is_empty()
    }

    pub fn contains(&self, fd: &Fd) -> bool {
        self.fds.binary_search(fd).is_ok()
    }

    /// FDs sharing a determinant, as `(lhs, sorted rhs list)` in lhs order.
    pub fn grouped(&self) -> Vec<(Vec<String>, Vec<String>)> {
        let mut groups: BTreeMap<&[String], Vec<String>> = BTreeMap::new();
        for fd in &self.fds {
            groups.entry(&fd.lhs).or_default().push(fd.rhs.clone());
        }
        groups.into_iter().map(|(l, r)| (l.to_vec(), r)).collect()
    }

    /// `[{"lhs": [...], "rhs": "..."}, ...]`
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.fds).expect("fd set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fds: Vec<Fd> = serde_json::from_str(text)?;
        let mut normalized = Vec::with_capacity(fds.len());
        for fd in fds {
            if fd.lhs.is_empty() {
                return Err(Error::EmptySelection);
            }
            if fd.lhs.contains(&fd.rhs) {
                return Err(Error::OverlappingSelection(fd.rhs));
            }
            normalized.push(Fd::new(fd.lhs, fd.rhs));
        }
        let depth = normalized.iter().map(|f| f.lhs.len()).max().unwrap_or(1);
        Ok(FdSet::new(normalized, depth))
    }
}

/// Row partition induced by equal values on a column set.
#[derive(Clone, Debug)]
struct Partition {
    class_of: Vec<u32>,
    n_classes: usize,
}

impl Partition {
    fn from_codes(codes: &[u32], n_distinct: usize) -> Self {
        Partition {
            class_of: codes.to_vec(),
            n_classes: n_distinct,
        }
    }

    fn refine(&self, codes: &[u32]) -> Partition {
        let mut ids: HashMap<(u32, u32), u32> = HashMap::with_capacity(self.n_classes);
        let class_of = self
            .class_of
            .iter()
            .zip(codes)
            .map(|(&c, &v)| {
                let next = ids.len() as u32;
                *ids.entry((c, v)).or_insert(next)
            })
            .collect();
        Partition {
            class_of,
            n_classes: ids.len(),
        }
    }

    /// True iff every class carries a single value of `codes`.
    fn determines(&self, codes: &[u32]) -> bool {
        let mut seen: Vec<u32> = vec![u32::MAX; self.n_classes];
        for (&c, &v) in self.class_of.iter().zip(codes) {
            let slot = &mut seen[c as usize];
            if *slot == u32::MAX {
                *slot = v;
            } else if *slot != v {
                return false;
            }
        }
        true
    }
}

/// True iff no two rows agree on every `lhs` column while differing on `rhs`.
pub fn holds_fd(table: &Table, lhs: &[&str], rhs: &str) -> Result<bool> {
    if lhs.is_empty() {
        return Err(Error::EmptySelection);
    }
    let rhs_idx = table.column_index(rhs)?;
    let mut idxs = Vec::with_capacity(lhs.len());
    for name in lhs {
        idxs.push(table.column_index(name)?);
    }
    if idxs.contains(&rhs_idx) {
        return Ok(true);
    }
    let (first_codes, first_n) = table.encode(idxs[0]);
    let mut part = Partition::from_codes(&first_codes, first_n);
    for &i in &idxs[1..] {
        part = part.refine(&table.encode(i).0);
    }
    Ok(part.determines(&table.encode(rhs_idx).0))
}

/// Mines every minimal FD with at most `max_lhs` determinant columns.
///
/// Depths beyond `columns - 1` are clamped, since no larger non-trivial
/// determinant exists.
pub fn mine_fds(table: &Table, max_lhs: usize) -> Result<FdSet> {
    let width = table.n_cols();
    if width > MAX_COLUMNS {
        return Err(Error::WidthBound {
            columns: width,
            max: MAX_COLUMNS,
        });
    }
    if max_lhs == 0 {
        return Err(Error::InvalidArgument("max_lhs must be at least 1".into()));
    }
    let depth = max_lhs.min(width.saturating_sub(1));
    let encoded: Vec<(Vec<u32>, usize)> = (0..width).map(|i| table.encode(i)).collect();
    let encoded = &encoded;

    // found[rhs] = determinant masks already proven for rhs
    let mut found: Vec<Vec<u64>> = vec![Vec::new(); width];
    let mut level: Vec<(u64, Partition)> = (0..width)
        .map(|i| (1u64 << i, Partition::from_codes(&encoded[i].0, encoded[i].1)))
        .collect();

    for k in 1..=depth {
        let results: Vec<(u64, Vec<usize>, bool)> = level
            .par_iter()
            .map(|(mask, part)| {
                let mut holds = Vec::new();
                let mut open = false;
                for rhs in 0..width {
                    if mask & (1 << rhs) != 0 {
                        continue;
                    }
                    if found[rhs].iter().any(|m| m & mask == *m) {
                        continue;
                    }
                    if part.determines(&encoded[rhs].0) {
                        holds.push(rhs);
                    } else {
                        open = true;
                    }
                }
                (*mask, holds, open)
            })
            .collect();

        let mut keep = Vec::new();
        for ((mask, holds, open), (_, part)) in results.into_iter().zip(level) {
            for rhs in holds {
                found[rhs].push(mask);
            }
            // A set with every remaining rhs settled cannot yield new minimal
            // FDs, and neither can its supersets.
            if open {
                keep.push((mask, part));
            }
        }
        if k == depth {
            break;
        }
        level = keep
            .par_iter()
            .flat_map_iter(|(mask, part)| {
                let top = 63 - mask.leading_zeros() as usize;
                (top + 1..width).map(move |c| (mask | (1u64 << c), part.refine(&encoded[c].0)))
            })
            .collect();
    }

    let names: Vec<&str> = table.names().collect();
    let names = &names;
    let fds = found
        .iter()
        .enumerate()
        .flat_map(|(rhs, masks)| {
            masks.iter().map(move |m| Fd {
                lhs: (0..width).filter(|i| m & (1 << i) != 0).map(|i| names[i].to_string()).collect::<Vec<_>>(),
                rhs: names[rhs].to_string(),
            })
        })
        .map(|fd| Fd::new(fd.lhs, fd.rhs))
        .collect();
    Ok(FdSet::new(fds, depth.max(1)))
}
