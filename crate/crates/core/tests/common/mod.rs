//! Brute-force reference implementations and random table builders shared by
//! the integration tests.
#![allow(dead_code)]

use depsynth::{Column, ColumnKind, Table};
use proptest::prelude::*;
use rand::Rng;

/// Q by pairwise row comparison. `None` when degenerate.
pub fn q_oracle(t: &Table, a: &[&str], b: &[&str]) -> Option<(u64, u64)> {
    let ia: Vec<usize> = a.iter().map(|c| t.column_index(c).unwrap()).collect();
    let ib: Vec<usize> = b.iter().map(|c| t.column_index(c).unwrap()).collect();
    let same = |r: usize, s: usize, cols: &[usize]| cols.iter().all(|&c| t.cell(r, c) == t.cell(s, c));
    let distinct = |cols: &[usize]| (0..t.n_rows()).filter(|&r| (0..r).all(|s| !same(r, s, cols))).count() as u64;
    let both: Vec<usize> = ia.iter().chain(&ib).copied().collect();
    let (na, nb, np) = (distinct(&ia), distinct(&ib), distinct(&both));
    if na == 0 || nb <= 1 {
        return None;
    }
    let (num, den) = (np - na, na * (nb - 1));
    let g = gcd(num, den);
    Some((num / g, den / g))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// FD check by comparing every pair of rows.
pub fn fd_oracle(t: &Table, lhs: &[usize], rhs: usize) -> bool {
    for r in 0..t.n_rows() {
        for s in 0..r {
            if lhs.iter().all(|&c| t.cell(r, c) == t.cell(s, c)) && t.cell(r, rhs) != t.cell(s, rhs) {
                return false;
            }
        }
    }
    true
}

/// Every minimal FD with a determinant of `1..=max_lhs` columns, as
/// `(sorted lhs names, rhs name)`, sorted.
pub fn minimal_fds_oracle(t: &Table, max_lhs: usize) -> Vec<(Vec<String>, String)> {
    let w = t.n_cols();
    let names: Vec<String> = t.names().map(String::from).collect();
    let mut out = Vec::new();
    for mask in 1u64..(1 << w) {
        let lhs: Vec<usize> = (0..w).filter(|c| mask & (1 << c) != 0).collect();
        if lhs.len() > max_lhs {
            continue;
        }
        for rhs in (0..w).filter(|c| mask & (1 << c) == 0) {
            if !fd_oracle(t, &lhs, rhs) {
                continue;
            }
            let minimal = (1u64..mask)
                .filter(|sub| sub & mask == *sub)
                .all(|sub| !fd_oracle(t, &(0..w).filter(|c| sub & (1 << c) != 0).collect::<Vec<_>>(), rhs));
            if minimal {
                let mut l: Vec<String> = lhs.iter().map(|&c| names[c].clone()).collect();
                l.sort();
                out.push((l, names[rhs].clone()));
            }
        }
    }
    out.sort();
    out
}

/// Column cells for a kind code: 0 categorical, 1 integer, 2 identifier.
fn cells(kind: u8, n: usize, draw: &mut dyn FnMut(usize) -> usize, arity: usize) -> (ColumnKind, Vec<String>) {
    match kind {
        0 => (ColumnKind::Categorical, (0..n).map(|_| format!("v{}", draw(arity))).collect()),
        1 => (ColumnKind::Integer, (0..n).map(|_| (draw(arity) as i64 - 1).to_string()).collect()),
        _ => {
            let mut ids: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                ids.swap(i, draw(i + 1));
            }
            (ColumnKind::Identifier, ids.into_iter().map(|i| format!("r{i:03}")).collect())
        }
    }
}

/// Random mixed-kind table with small domains so that dependencies occur.
pub fn random_table(rng: &mut impl Rng, max_cols: usize, max_rows: usize) -> Table {
    let w = rng.gen_range(1..=max_cols);
    let n = rng.gen_range(0..=max_rows);
    let mut header = Vec::new();
    let mut data = Vec::new();
    for c in 0..w {
        let kind = [0u8, 0, 0, 1, 2][rng.gen_range(0..5)];
        let arity = rng.gen_range(1..=4);
        let (k, v) = cells(kind, n, &mut |m| rng.gen_range(0..m), arity);
        header.push(Column::new(format!("c{c}"), k));
        data.push(v);
    }
    Table::from_columns(header, data).unwrap()
}

/// Proptest counterpart of [`random_table`], shrinkable by rows and cells.
pub fn arb_table(max_cols: usize, max_rows: usize) -> impl Strategy<Value = Table> {
    (1..=max_cols, 0..=max_rows)
        .prop_flat_map(|(w, n)| {
            (
                prop::collection::vec(prop_oneof![3 => Just(0u8), 1 => Just(1u8), 1 => Just(2u8)], w),
                prop::collection::vec(prop::collection::vec(0usize..4, n), w),
                Just(n),
            )
        })
        .prop_map(|(kinds, raw, n)| {
            let mut header = Vec::new();
            let mut data = Vec::new();
            for (c, (kind, col)) in kinds.into_iter().zip(raw).enumerate() {
                let mut it = col.into_iter().cycle();
                let (k, v) = cells(kind, n, &mut |m| it.next().unwrap_or(0) % m, 4);
                header.push(Column::new(format!("c{c}"), k));
                data.push(v);
            }
            Table::from_columns(header, data).unwrap()
        })
}

/// Two disjoint non-empty column selections of at most `k` columns each.
pub fn random_split(rng: &mut impl Rng, t: &Table, k: usize) -> Option<(Vec<String>, Vec<String>)> {
    if t.n_cols() < 2 {
        return None;
    }
    let mut names: Vec<String> = t.names().map(String::from).collect();
    for i in (1..names.len()).rev() {
        names.swap(i, rng.gen_range(0..=i));
    }
    let na = rng.gen_range(1..=k.min(names.len() - 1));
    let nb = rng.gen_range(1..=k.min(names.len() - na));
    Some((names[..na].to_vec(), names[na..na + nb].to_vec()))
}

pub fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}
