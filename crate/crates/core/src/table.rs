//! Rectangular tables of string cells with typed columns, plus CSV I/O.
//!
//! Cells keep their original text. Integer columns are validated to parse as
//! `i64` but are never normalized, so `007` stays `007` through a round trip.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{Config, FeatureType};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    Integer,
    Identifier,
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnKind::Categorical => "categorical",
            ColumnKind::Integer => "integer",
            ColumnKind::Identifier => "identifier",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Column {
            name: name.into(),
            kind,
        }
    }
}

/// Column-major table. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    columns: Vec<Column>,
    data: Vec<Vec<String>>,
    n_rows: usize,
}

impl Table {
    /// Builds a table from column-major data, checking every invariant.
    pub fn from_columns(columns: Vec<Column>, data: Vec<Vec<String>>) -> Result<Self> {
        if columns.len() != data.len() {
            return Err(Error::Internal(format!(
                "{} column headers but {} data columns",
                columns.len(),
                data.len()
            )));
        }
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
        }
        let n_rows = data.first().map_or(0, Vec::len);
        for (col, values) in columns.iter().zip(&data) {
            if values.len() != n_rows {
                return Err(Error::RaggedRow {
                    row: values.len().min(n_rows),
                    expected: n_rows,
                    found: values.len(),
                });
            }
            validate_cells(col, values)?;
        }
        Ok(Table {
            columns,
            data,
            n_rows,
        })
    }

    /// Builds a table from row-major data.
    pub fn from_rows(columns: Vec<Column>, rows: Vec<Vec<String>>) -> Result<Self> {
        let width = columns.len();
        let mut data = vec![Vec::with_capacity(rows.len()); width];
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::RaggedRow {
                    row: r,
                    expected: width,
                    found: row.len(),
                });
            }
            for (c, cell) in row.into_iter().enumerate() {
                data[c].push(cell);
            }
        }
        Table::from_columns(columns, data)
    }

    /// An empty table with the given header.
    pub fn empty(columns: Vec<Column>) -> Result<Self> {
        let data = vec![Vec::new(); columns.len()];
        Table::from_columns(columns, data)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn values(&self, idx: usize) -> &[String] {
        &self.data[idx]
    }

    pub fn values_of(&self, name: &str) -> Result<&[String]> {
        Ok(&self.data[self.column_index(name)?])
    }

    pub fn cell(&self, row: usize, col: usize) -> &str {
        &self.data[col][row]
    }

    pub fn row(&self, row: usize) -> Vec<&str> {
        self.data.iter().map(|c| c[row].as_str()).collect()
    }

    /// Dictionary-encodes a column. Codes are assigned in first-appearance
    /// order; the second value is the number of distinct values.
    pub fn encode(&self, idx: usize) -> (Vec<u32>, usize) {
        let mut dict: HashMap<&str, u32> = HashMap::new();
        let codes = self.data[idx]
            .iter()
            .map(|v| {
                let next = dict.len() as u32;
                *dict.entry(v.as_str()).or_insert(next)
            })
            .collect();
        (codes, dict.len())
    }

    /// Sorted distinct values of a column.
    pub fn distinct(&self, idx: usize) -> Vec<&str> {
        let mut v: Vec<&str> = self.data[idx].iter().map(String::as_str).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Projects onto the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Table> {
        let mut columns = Vec::with_capacity(names.len());
        let mut data = Vec::with_capacity(names.len());
        for name in names {
            let idx = self.column_index(name)?;
            columns.push(self.columns[idx].clone());
            data.push(self.data[idx].clone());
        }
        Table::from_columns(columns, data)
    }

    /// Reorders rows: output row `i` is input row `order[i]`.
    pub fn take_rows(&self, order: &[usize]) -> Table {
        let data = self
            .data
            .iter()
            .map(|col| order.iter().map(|&r| col[r].clone()).collect())
            .collect();
        Table {
            columns: self.columns.clone(),
            data,
            n_rows: order.len(),
        }
    }

    /// Same cells, same order, different column kinds allowed.
    pub fn same_cells(&self, other: &Table) -> bool {
        self.n_rows == other.n_rows
            && self.columns.len() == other.columns.len()
            && self
                .columns
                .iter()
                .zip(&other.columns)
                .all(|(a, b)| a.name == b.name)
            && self.data == other.data
    }
}

fn validate_cells(col: &Column, values: &[String]) -> Result<()> {
    for (row, v) in values.iter().enumerate() {
        if v.is_empty() {
            return Err(Error::EmptyCell {
                column: col.name.clone(),
                row,
            });
        }
        if col.kind == ColumnKind::Integer && v.parse::<i64>().is_err() {
            return Err(Error::IntegerParse {
                column: col.name.clone(),
                row,
                value: v.clone(),
            });
        }
    }
    Ok(())
}

/// Kind a feature of the given config type materializes as.
pub fn kind_for(ty: FeatureType) -> ColumnKind {
    match ty {
        FeatureType::Int => ColumnKind::Integer,
        FeatureType::Id => ColumnKind::Identifier,
        _ => ColumnKind::Categorical,
    }
}

/// Infers a column kind from its header and values.
///
/// Identifier: every value distinct and the header ends with `id`
/// (case-insensitive). Integer: every value parses as `i64`. Otherwise
/// categorical. The identifier test runs first so zero-padded numeric ids
/// stay identifiers. Empty columns are categorical.
pub fn infer_kind(name: &str, values: &[String]) -> ColumnKind {
    if values.is_empty() {
        return ColumnKind::Categorical;
    }
    if name.to_ascii_lowercase().ends_with("id") {
        let distinct: HashSet<&str> = values.iter().map(String::as_str).collect();
        if distinct.len() == values.len() {
            return ColumnKind::Identifier;
        }
    }
    if values.iter().all(|v| v.parse::<i64>().is_ok()) {
        return ColumnKind::Integer;
    }
    ColumnKind::Categorical
}

/// Parses an RFC-4180 CSV document with a header row.
///
/// Kinds come from `schema` for columns it names and are inferred for the
/// rest. Row indices in errors are zero-based data-row indices.
pub fn read_table(bytes: &[u8], schema: Option<&Config>) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(0, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() {
        return Table::from_columns(Vec::new(), Vec::new());
    }
    let mut data = vec![Vec::new(); header.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(row + 1, e))?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (c, field) in record.iter().enumerate() {
            data[c].push(field.to_string());
        }
    }
    let columns = header
        .into_iter()
        .zip(&data)
        .map(|(name, values)| {
            let declared = schema
                .and_then(|cfg| cfg.feature(&name))
                .map(|f| kind_for(f.feature_type()));
            let kind = declared.unwrap_or_else(|| infer_kind(&name, values));
            Column { name, kind }
        })
        .collect();
    Table::from_columns(columns, data)
}

fn csv_error(record: usize, e: csv::Error) -> Error {
    Error::Csv {
        record,
        message: e.to_string(),
    }
}

/// Serializes to CSV with a header row, LF line endings and minimal quoting.
pub fn write_table(table: &Table) -> Vec<u8> {
    if table.n_cols() == 0 {
        return Vec::new();
    }
    let mut writer = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // Writing into a Vec cannot fail.
    writer
        .write_record(table.names())
        .expect("in-memory csv write");
    for r in 0..table.n_rows() {
        writer.write_record(table.row(r)).expect("in-memory csv write");
    }
    writer.into_inner().expect("in-memory csv flush")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(name: &str) -> Column {
        Column::new(name, ColumnKind::Categorical)
    }

    #[test]
    fn reads_three_rows() {
        let t = read_table(b"a,b\nx,1\ny,2\nx,3\n", None).unwrap();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.n_cols(), 2);
        assert_eq!(t.column("a").unwrap().kind, ColumnKind::Categorical);
        assert_eq!(t.column("b").unwrap().kind, ColumnKind::Integer);
    }

    #[test]
    fn header_only_is_empty_table() {
        let t = read_table(b"a,b\n", None).unwrap();
        assert_eq!(t.n_rows(), 0);
        assert_eq!(t.n_cols(), 2);
    }

    #[test]
    fn ragged_row_names_index() {
        let err = read_table(b"a,b\n1,2\n3\n", None).unwrap_err();
        assert_eq!(
            err,
            Error::RaggedRow {
                row: 1,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn duplicate_header_rejected() {
        let err = read_table(b"a,a\n1,2\n", None).unwrap_err();
        assert_eq!(err, Error::DuplicateColumn("a".into()));
    }

    #[test]
    fn empty_cell_rejected() {
        let err = read_table(b"a,b\n1,\n", None).unwrap_err();
        assert_eq!(err.code(), "empty_cell");
    }

    #[test]
    fn identifier_inference_needs_suffix_and_uniqueness() {
        let t = read_table(b"patient_id,code,dup_id\n001,a,1\n002,b,1\n", None).unwrap();
        assert_eq!(t.column("patient_id").unwrap().kind, ColumnKind::Identifier);
        assert_eq!(t.column("code").unwrap().kind, ColumnKind::Categorical);
        assert_eq!(t.column("dup_id").unwrap().kind, ColumnKind::Integer);
    }

    #[test]
    fn schema_overrides_and_checks_integers() {
        let cfg = crate::config::parse_config(
            r#"{"n": 2, "features": [{"name": "b", "type": "int", "min": 0, "max": 5}]}"#,
        )
        .unwrap();
        let err = read_table(b"a,b\nx,1\ny,zz\n", Some(&cfg)).unwrap_err();
        assert_eq!(
            err,
            Error::IntegerParse {
                column: "b".into(),
                row: 1,
                value: "zz".into()
            }
        );
    }

    #[test]
    fn comma_cell_is_quoted() {
        let t = Table::from_rows(vec![cat("a")], vec![vec!["x,y".into()]]).unwrap();
        assert_eq!(write_table(&t), b"a\n\"x,y\"\n");
        let back = read_table(&write_table(&t), None).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn empty_table_writes_header_only() {
        let t = Table::empty(vec![cat("a"), cat("b")]).unwrap();
        assert_eq!(write_table(&t), b"a,b\n");
    }

    #[test]
    fn encode_counts_distinct() {
        let t = Table::from_rows(
            vec![cat("a")],
            vec![vec!["x".into()], vec!["y".into()], vec!["x".into()]],
        )
        .unwrap();
        assert_eq!(t.encode(0), (vec![0, 1, 0], 2));
        assert_eq!(t.distinct(0), vec!["x", "y"]);
    }
}
