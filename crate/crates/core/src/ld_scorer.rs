//! Q-function scoring of column-selection pairs.
//!
//! For selections `A` and `B`, let `|A|` and `|B|` count the distinct value
//! tuples of each side and `|P|` the distinct co-occurring `(a, b)` tuples.
//! Then `Q = (|P| - |A|) / (|A| (|B| - 1))` when `|A| >= 1` and `|B| > 1`,
//! and 0 (flagged degenerate) otherwise. Values are kept as exact rationals.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Table;

/// Default cap on the number of pairs `score_all` will enumerate.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Non-empty ordered set of distinct column names.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ColumnSelection(Vec<String>);

impl ColumnSelection {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidArgument(format!("column '{n}' repeated in selection")));
            }
        }
        Ok(ColumnSelection(names))
    }

    pub fn single(name: impl Into<String>) -> Self {
        ColumnSelection(vec![name.into()])
    }

    pub fn columns(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<String>> for ColumnSelection {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        ColumnSelection::new(v)
    }
}

impl From<ColumnSelection> for Vec<String> {
    fn from(s: ColumnSelection) -> Self {
        s.0
    }
}

impl fmt::Display for ColumnSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DependencyClass {
    Fd,
    Ld,
    Independent,
    Degenerate,
}

impl DependencyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DependencyClass::Fd => "FD",
            DependencyClass::Ld => "LD",
            DependencyClass::Independent => "INDEPENDENT",
            DependencyClass::Degenerate => "DEGENERATE",
        }
    }
}

impl fmt::Display for DependencyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact-threshold classification; `degenerate` wins over the value.
pub fn classify(value: Ratio<u64>, degenerate: bool) -> DependencyClass {
    if degenerate {
        DependencyClass::Degenerate
    } else if value == Ratio::from_integer(0) {
        DependencyClass::Fd
    } else if value == Ratio::from_integer(1) {
        DependencyClass::Independent
    } else {
        DependencyClass::Ld
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QScore {
    pub a: ColumnSelection,
    pub b: ColumnSelection,
    pub value: Ratio<u64>,
    pub class: DependencyClass,
}

impl QScore {
    pub fn value_f64(&self) -> f64 {
        *self.value.numer() as f64 / *self.value.denom() as f64
    }

    pub fn is_degenerate(&self) -> bool {
        self.class == DependencyClass::Degenerate
    }
}

#[derive(Serialize, Deserialize)]
struct QScoreRecord {
    a: ColumnSelection,
    b: ColumnSelection,
    q: String,
    q_real: f64,
    class: DependencyClass,
}

impl Serialize for QScore {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QScoreRecord {
            a: self.a.clone(),
            b: self.b.clone(),
            q: self.value.to_string(),
            q_real: self.value_f64(),
            class: self.class,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QScore {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = QScoreRecord::deserialize(d)?;
        let value = parse_ratio(&r.q).ok_or_else(|| D::Error::custom(format!("bad rational '{}'", r.q)))?;
        if value > Ratio::from_integer(1) {
            return Err(D::Error::custom(format!("q value {} outside [0, 1]", r.q)));
        }
        Ok(QScore {
            a: r.a,
            b: r.b,
            value,
            class: r.class,
        })
    }
}

fn parse_ratio(s: &str) -> Option<Ratio<u64>> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.parse().ok()?, d.parse().ok()?),
        None => (s.parse().ok()?, 1),
    };
    (d != 0).then(|| Ratio::new(n, d))
}

/// Which selection pairs `score_all` enumerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationPolicy {
    /// Largest selection size on either side.
    pub max_subset: usize,
    /// Score both `(A, B)` and `(B, A)`; otherwise only the pair whose `A`
    /// sorts first.
    pub ordered: bool,
    /// Degenerate pairs are kept in reports but never counted as LDs.
    pub degenerate: DegenerateHandling,
    pub budget: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateHandling {
    ExcludedFromLd,
}

impl Default for EnumerationPolicy {
    fn default() -> Self {
        EnumerationPolicy {
            max_subset: 1,
            ordered: true,
            degenerate: DegenerateHandling::ExcludedFromLd,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl EnumerationPolicy {
    pub fn with_max_subset(max_subset: usize) -> Self {
        EnumerationPolicy {
            max_subset,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub policy: EnumerationPolicy,
    pub scores: Vec<QScore>,
}

impl QReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("q report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn count(&self, class: DependencyClass) -> usize {
        self.scores.iter().filter(|s| s.class == class).count()
    }

    pub fn lds(&self) -> impl Iterator<Item = &QScore> {
        self.scores.iter().filter(|s| s.class == DependencyClass::Ld)
    }

    pub fn get(&self, a: &ColumnSelection, b: &ColumnSelection) -> Option<&QScore> {
        self.scores.iter().find(|s| &s.a == a && &s.b == b)
    }
}

/// Tuple ids per row for a set of columns, plus the number of distinct tuples.
fn encode_selection(table: &Table, idxs: &[usize]) -> (Vec<u32>, usize) {
    let (mut codes, mut n) = table.encode(idxs[0]);
    for &i in &idxs[1..] {
        let (next, _) = table.encode(i);
        let mut ids: HashMap<(u32, u32), u32> = HashMap::with_capacity(n);
        codes = codes
            .iter()
            .zip(&next)
            .map(|(&c, &v)| {
                let fresh = ids.len() as u32;
                *ids.entry((c, v)).or_insert(fresh)
            })
            .collect();
        n = ids.len();
    }
    (codes, n)
}

fn q_from_codes(a: &(Vec<u32>, usize), b: &(Vec<u32>, usize)) -> Result<(Ratio<u64>, bool)> {
    let (n_a, n_b) = (a.1 as u64, b.1 as u64);
    if n_a == 0 || n_b <= 1 {
        return Ok((Ratio::from_integer(0), true));
    }
    let pairs: HashSet<(u32, u32)> = a.0.iter().copied().zip(b.0.iter().copied()).collect();
    let n_p = pairs.len() as u64;
    if n_p < n_a || n_p > n_a * n_b {
        return Err(Error::Internal(format!(
            "co-occurrence count {n_p} outside [{n_a}, {}]",
            n_a * n_b
        )));
    }
    Ok((Ratio::new(n_p - n_a, n_a * (n_b - 1)), false))
}

fn resolve(table: &Table, sel: &ColumnSelection) -> Result<Vec<usize>> {
    sel.columns().iter().map(|c| table.column_index(c)).collect()
}

/// Scores one pair of disjoint selections.
pub fn q_score(table: &Table, a: &ColumnSelection, b: &ColumnSelection) -> Result<QScore> {
    let ia = resolve(table, a)?;
    let ib = resolve(table, b)?;
    if let Some(c) = a.columns().iter().find(|c| b.columns().contains(c)) {
        return Err(Error::OverlappingSelection(c.clone()));
    }
    let (value, degenerate) = q_from_codes(&encode_selection(table, &ia), &encode_selection(table, &ib))?;
    Ok(QScore {
        a: a.clone(),
        b: b.clone(),
        value,
        class: classify(value, degenerate),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Number of ordered disjoint pairs with both sides of size `1..=k`.
fn pair_count(width: usize, k: usize) -> u128 {
    let mut total = 0u128;
    for i in 1..=k.min(width) {
        for j in 1..=k.min(width - i) {
            total = total.saturating_add(binomial(width, i).saturating_mul(binomial(width - i, j)));
        }
    }
    total
}

fn subsets(width: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, width: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for c in start..width {
            cur.push(c);
            out.push(cur.clone());
            if cur.len() < k {
                extend(c + 1, width, k, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(0, width, k, &mut Vec::new(), &mut out);
    out
}

/// Scores every disjoint selection pair the policy admits, in canonical order.
pub fn score_all(table: &Table, policy: EnumerationPolicy) -> Result<QReport> {
    if policy.max_subset == 0 {
        return Err(Error::InvalidArgument("max_subset must be at least 1".into()));
    }
    let width = table.n_cols();
    let mut pairs = pair_count(width, policy.max_subset);
    if !policy.ordered {
        pairs /= 2;
    }
    if pairs > policy.budget as u128 {
        return Err(Error::Budget {
            pairs: usize::try_from(pairs).unwrap_or(usize::MAX),
            budget: policy.budget,
        });
    }

    let names: Vec<&str> = table.names().collect();
    let sels = subsets(width, policy.max_subset);
    let encoded: Vec<(Vec<u32>, usize)> = sels.par_iter().map(|s| encode_selection(table, s)).collect();
    let selection = |s: &[usize]| ColumnSelection(s.iter().map(|&i| names[i].to_string()).collect());
    let labels: Vec<ColumnSelection> = sels.iter().map(|s| selection(s)).collect();

    let mut jobs = Vec::new();
    for (i, a) in sels.iter().enumerate() {
        for (j, b) in sels.iter().enumerate() {
            if a.iter().any(|c| b.contains(c)) {
                continue;
            }
            if !policy.ordered && labels[i] > labels[j] {
                continue;
            }
            jobs.push((i, j));
        }
    }

    let mut scores = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (value, degenerate) = q_from_codes(&encoded[i], &encoded[j])?;
            Ok(QScore {
                a: labels[i].clone(),
                b: labels[j].clone(),
                value,
                class: classify(value, degenerate),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    Ok(QReport { policy, scores })
}
