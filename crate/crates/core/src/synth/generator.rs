//! Baseline column generators.
//!
//! Each generator draws every column from its own `(seed, column name)`
//! stream, so a column comes out the same whether it is generated alone or
//! alongside others. Bootstrap additionally shares one row-index stream
//! across all columns it resamples.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::benchmark::fresh_ids;
use crate::error::{Error, Result};
use crate::seed::Seed;
use crate::table::{ColumnKind, Table};

/// Default per-column perturbation rate for bootstrap.
pub const DEFAULT_EPSILON: f64 = 0.05;

const BOOTSTRAP_ROWS: &str = "\0bootstrap-rows";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeneratorKind {
    /// Samples each column from its own empirical distribution.
    Marginal,
    /// Resamples whole rows, then replaces each cell with a uniformly drawn
    /// observed value at rate `epsilon`.
    Bootstrap { epsilon: f64 },
    /// Uniform over observed categories, or over `[min, max]` for integers.
    Uniform,
}

impl GeneratorKind {
    pub fn bootstrap() -> Self {
        GeneratorKind::Bootstrap {
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::Marginal => "marginal",
            GeneratorKind::Bootstrap { .. } => "bootstrap",
            GeneratorKind::Uniform => "uniform",
        }
    }

    pub const ALL: [&'static str; 3] = ["marginal", "bootstrap", "uniform"];
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "marginal" => Ok(GeneratorKind::Marginal),
            "bootstrap" => Ok(GeneratorKind::bootstrap()),
            "uniform" => Ok(GeneratorKind::Uniform),
            other => Err(Error::UnknownGenerator(other.to_string())),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How identifier columns are produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IdPolicy {
    /// Fresh unique ids `1..=n`.
    #[default]
    Fresh,
    /// Ids resampled from the reference like any other column, so duplicates
    /// appear.
    Resample,
}

impl IdPolicy {
    pub fn name(self) -> &'static str {
        match self {
            IdPolicy::Fresh => "fresh",
            IdPolicy::Resample => "resample",
        }
    }
}

impl FromStr for IdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fresh" => Ok(IdPolicy::Fresh),
            "resample" => Ok(IdPolicy::Resample),
            other => Err(Error::InvalidArgument(format!("unknown id policy '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub id_policy: IdPolicy,
}

impl From<GeneratorKind> for Generator {
    fn from(kind: GeneratorKind) -> Self {
        Generator::new(kind)
    }
}

impl Generator {
    pub fn new(kind: GeneratorKind) -> Self {
        Generator {
            kind,
            id_policy: IdPolicy::Fresh,
        }
    }

    pub fn with_id_policy(mut self, id_policy: IdPolicy) -> Self {
        self.id_policy = id_policy;
        self
    }

    fn validate(&self) -> Result<()> {
        if let GeneratorKind::Bootstrap { epsilon } = self.kind {
            if !(0.0..=1.0).contains(&epsilon) {
                return Err(Error::InvalidArgument(format!("bootstrap epsilon {epsilon} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Generates `n` rows over `columns` of `reference`, in the given order.
    pub fn generate(&self, reference: &Table, columns: &[&str], n: usize, seed: Seed) -> Result<Table> {
        self.validate()?;
        let idxs: Vec<usize> = columns.iter().map(|c| reference.column_index(c)).collect::<Result<_>>()?;
        let rows = reference.n_rows();
        let needs_rows = idxs
            .iter()
            .any(|&i| reference.columns()[i].kind != ColumnKind::Identifier || self.id_policy == IdPolicy::Resample);
        if n > 0 && rows == 0 && needs_rows {
            return Err(Error::EmptyReference);
        }

        let boot_rows: Vec<usize> = match self.kind {
            GeneratorKind::Bootstrap { .. } if n > 0 && rows > 0 => {
                let mut rng = seed.stream(BOOTSTRAP_ROWS);
                (0..n).map(|_| rng.gen_range(0..rows)).collect()
            }
            _ => Vec::new(),
        };

        let data = idxs
            .par_iter()
            .map(|&i| self.column(reference, i, n, seed, &boot_rows))
            .collect::<Result<Vec<_>>>()?;
        let header = idxs.iter().map(|&i| reference.columns()[i].clone()).collect();
        Table::from_columns(header, data)
    }

    fn column(&self, reference: &Table, idx: usize, n: usize, seed: Seed, boot_rows: &[usize]) -> Result<Vec<String>> {
        let col = &reference.columns()[idx];
        let values = reference.values(idx);
        let mut rng = seed.stream(&col.name);

        if col.kind == ColumnKind::Identifier {
            return match (self.id_policy, self.kind) {
                (IdPolicy::Fresh, _) => fresh_ids(n),
                (IdPolicy::Resample, GeneratorKind::Bootstrap { .. }) => {
                    Ok(boot_rows.iter().map(|&r| values[r].clone()).collect())
                }
                (IdPolicy::Resample, _) => Ok((0..n).map(|_| values[rng.gen_range(0..values.len())].clone()).collect()),
            };
        }

        Ok(match self.kind {
            GeneratorKind::Marginal => (0..n).map(|_| values[rng.gen_range(0..values.len())].clone()).collect(),
            GeneratorKind::Uniform if col.kind == ColumnKind::Integer => {
                let parsed: Vec<i64> = values.iter().map(|v| v.parse().expect("integer column parses")).collect();
                let (lo, hi) = match (parsed.iter().min(), parsed.iter().max()) {
                    (Some(&lo), Some(&hi)) => (lo, hi),
                    _ => return Ok(Vec::new()),
                };
                (0..n).map(|_| rng.gen_range(lo..=hi).to_string()).collect()
            }
            GeneratorKind::Uniform => {
                let support = reference.distinct(idx);
                (0..n).map(|_| support[rng.gen_range(0..support.len())].to_string()).collect()
            }
            GeneratorKind::Bootstrap { epsilon } => {
                let support = reference.distinct(idx);
                boot_rows
                    .iter()
                    .map(|&r| {
                        let flip = rng.gen::<f64>() < epsilon;
                        let pick = rng.gen_range(0..support.len());
                        if flip {
                            support[pick].to_string()
                        } else {
                            values[r].clone()
                        }
                    })
                    .collect()
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Column;

    fn reference() -> Table {
        let mut cat = vec!["a".to_string(); 70];
        cat.extend(vec!["b".to_string(); 30]);
        let ints: Vec<String> = (0..100).map(|i| (i % 10 + 5).to_string()).collect();
        let ids: Vec<String> = (1..=100).map(|i| format!("{i:03}")).collect();
        Table::from_columns(
            vec![
                Column::new("rec_id", ColumnKind::Identifier),
                Column::new("c", ColumnKind::Categorical),
                Column::new("k", ColumnKind::Integer),
            ],
            vec![ids, cat, ints],
        )
        .unwrap()
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("marginal".parse::<GeneratorKind>().unwrap(), GeneratorKind::Marginal);
        assert_eq!("bootstrap".parse::<GeneratorKind>().unwrap(), GeneratorKind::bootstrap());
        assert_eq!(
            "ctgan".parse::<GeneratorKind>().unwrap_err(),
            Error::UnknownGenerator("ctgan".into())
        );
    }

    #[test]
    fn marginal_frequencies_within_binomial_bound() {
        let r = reference();
        let t = Generator::new(GeneratorKind::Marginal)
            .generate(&r, &["c"], 100, Seed(4))
            .unwrap();
        let a = t.values(0).iter().filter(|v| *v == "a").count() as f64;
        // 3 sigma of Binomial(100, 0.7)
        let sigma = (100.0f64 * 0.7 * 0.3).sqrt();
        assert!((a - 70.0).abs() <= 3.0 * sigma, "count {a}");
    }

    #[test]
    fn values_stay_in_observed_support() {
        let r = reference();
        for kind in [GeneratorKind::Marginal, GeneratorKind::bootstrap(), GeneratorKind::Uniform] {
            let t = Generator::new(kind).generate(&r, &["rec_id", "c", "k"], 200, Seed(1)).unwrap();
            assert!(t.values(1).iter().all(|v| v == "a" || v == "b"));
            for v in t.values(2) {
                let k: i64 = v.parse().unwrap();
                assert!((5..=14).contains(&k));
            }
            assert_eq!(t.distinct(0).len(), 200, "{kind}: ids must be unique");
        }
    }

    #[test]
    fn resampled_ids_repeat() {
        let r = reference();
        let t = Generator::new(GeneratorKind::Marginal)
            .with_id_policy(IdPolicy::Resample)
            .generate(&r, &["rec_id"], 100, Seed(2))
            .unwrap();
        assert!(t.distinct(0).len() < 100);
    }

    #[test]
    fn uniform_on_singleton_support_is_constant() {
        let r = Table::from_columns(vec![Column::new("c", ColumnKind::Categorical)], vec![vec!["z".into(); 5]]).unwrap();
        let t = Generator::new(GeneratorKind::Uniform).generate(&r, &["c"], 20, Seed(0)).unwrap();
        assert!(t.values(0).iter().all(|v| v == "z"));
    }

    #[test]
    fn zero_rows_header_only() {
        let t = Generator::new(GeneratorKind::Marginal)
            .generate(&reference(), &["c", "k"], 0, Seed(0))
            .unwrap();
        assert_eq!((t.n_rows(), t.n_cols()), (0, 2));
    }

    #[test]
    fn empty_reference_rejected() {
        let r = Table::empty(vec![Column::new("c", ColumnKind::Categorical)]).unwrap();
        assert_eq!(
            Generator::new(GeneratorKind::Marginal).generate(&r, &["c"], 3, Seed(0)).unwrap_err(),
            Error::EmptyReference
        );
    }

    #[test]
    fn columns_independent_of_company() {
        let r = reference();
        for kind in [GeneratorKind::Marginal, GeneratorKind::bootstrap(), GeneratorKind::Uniform] {
            let g = Generator::new(kind);
            let alone = g.generate(&r, &["c"], 50, Seed(8)).unwrap();
            let both = g.generate(&r, &["k", "c"], 50, Seed(8)).unwrap();
            assert_eq!(alone.values(0), both.values_of("c").unwrap());
        }
    }

    #[test]
    fn bad_epsilon() {
        let g = Generator::new(GeneratorKind::Bootstrap { epsilon: 1.5 });
        assert!(matches!(g.generate(&reference(), &["c"], 1, Seed(0)), Err(Error::InvalidArgument(_))));
    }
}
