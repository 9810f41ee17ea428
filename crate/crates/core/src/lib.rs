//! Benchmark generation, dependency mining and dependency-aware synthesis
//! for tabular data.

pub mod benchmark;
pub mod config;
pub mod error;
pub mod eval_report;
pub mod fd_miner;
pub mod graph;
pub mod ld_scorer;
pub mod seed;
pub mod synth;
pub mod table;

pub use benchmark::{builtin_case, generate_benchmark};
pub use config::{parse_config, Config};
pub use error::{Error, Result};
pub use eval_report::{column_tv_distance, emit_report, evaluate, PreservationResult, Provenance, Report};
pub use fd_miner::{holds_fd, mine_fds, Fd, FdSet};
pub use graph::{build_dependency_graph, DependencyGraph};
pub use ld_scorer::{classify, q_score, score_all, ColumnSelection, DependencyClass, EnumerationPolicy, QReport, QScore};
pub use seed::Seed;
pub use synth::{mined_graph, synthesize_baseline, synthesize_hfgf, Generator, GeneratorKind, IdPolicy};
pub use table::{read_table, write_table, Column, ColumnKind, Table};
