use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// Each variant maps to a stable machine-readable code via [`Error::code`],
/// which the CLI and the C API surface verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("config syntax error at line {line}, column {column}: {message}")]
    ConfigSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config schema violation in feature '{feature}': {reason}")]
    ConfigSchema { feature: String, reason: String },

    #[error("csv error at record {record}: {message}")]
    Csv { record: usize, message: String },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),

    #[error("empty cell in column '{column}' at row {row}")]
    EmptyCell { column: String, row: usize },

    #[error("column '{column}' row {row}: '{value}' is not an integer")]
    IntegerParse {
        column: String,
        row: usize,
        value: String,
    },

    #[error("unknown column '{0}'")]
    UnknownColumn(String),

    #[error("column selections overlap on '{0}'")]
    OverlappingSelection(String),

    #[error("column selection must not be empty")]
    EmptySelection,

    #[error("column '{column}' has kind {kind}, which this operation does not accept")]
    ColumnKind { column: String, kind: String },

    #[error("tables have different column sets")]
    ColumnMismatch,

    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("one_to_one mapping for '{feature}' is not bijective: {reason}")]
    NotBijective { feature: String, reason: String },

    #[error("mapping for '{feature}' does not cover source value '{value}'")]
    MappingCoverage { feature: String, value: String },

    #[error("feature '{feature}': source value '{value}' at row {row} has no mapping rule")]
    UnmappedValue {
        feature: String,
        value: String,
        row: usize,
    },

    #[error("row count {requested} exceeds identifier capacity {capacity}")]
    IdCapacity { requested: usize, capacity: usize },

    #[error("table has {columns} columns, above the lattice bound of {max}")]
    WidthBound { columns: usize, max: usize },

    #[error("enumeration would score {pairs} pairs, above the budget of {budget}")]
    Budget { pairs: usize, budget: usize },

    #[error("unknown generator kind '{0}'")]
    UnknownGenerator(String),

    #[error("no independent features: dependent columns cannot be reconstructed")]
    HfgfInapplicable,

    #[error("reference table has no rows to sample from")]
    EmptyReference,

    #[error("builtin case {0} does not exist (expected 1..=4)")]
    UnknownCase(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Stable identifier for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ConfigSyntax { .. } => "config_syntax",
            Error::ConfigSchema { .. } => "config_schema",
            Error::Csv { .. } => "csv",
            Error::RaggedRow { .. } => "ragged_row",
            Error::DuplicateColumn(_) => "duplicate_column",
            Error::EmptyCell { .. } => "empty_cell",
            Error::IntegerParse { .. } => "integer_parse",
            Error::UnknownColumn(_) => "unknown_column",
            Error::OverlappingSelection(_) => "overlapping_selection",
            Error::EmptySelection => "empty_selection",
            Error::ColumnKind { .. } => "column_kind",
            Error::ColumnMismatch => "column_mismatch",
            Error::Cycle(_) => "cycle",
            Error::NotBijective { .. } => "not_bijective",
            Error::MappingCoverage { .. } => "mapping_coverage",
            Error::UnmappedValue { .. } => "unmapped_value",
            Error::IdCapacity { .. } => "id_capacity",
            Error::WidthBound { .. } => "width_bound",
            Error::Budget { .. } => "budget",
            Error::UnknownGenerator(_) => "unknown_generator",
            Error::HfgfInapplicable => "hfgf_inapplicable",
            Error::EmptyReference => "empty_reference",
            Error::UnknownCase(_) => "unknown_case",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Internal(_) => "internal",
        }
    }

    /// True for errors that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
