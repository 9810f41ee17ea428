//! C interface to depsynth.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Strings returned through
//! out-parameters are heap-allocated and released with `ds_string_free`.
//! Every call returns a [`DsStatus`]; on failure, `ds_last_error_message`
//! and `ds_last_error_code` describe the error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use depsynth::eval_report::{column_distances, emit_report, evaluate, Provenance};
use depsynth::ld_scorer::{q_score, score_all, ColumnSelection, DependencyClass, EnumerationPolicy};
use depsynth::synth::{synthesize_baseline, synthesize_hfgf, GeneratorKind};
use depsynth::{build_dependency_graph, builtin_case, generate_benchmark, mine_fds, parse_config, Config, Error, Seed, Table};

/// Parsed benchmark configuration.
pub struct DsConfig(Config);

/// In-memory table.
pub struct DsTable(Table);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    Table = 5,
    Selection = 6,
    Graph = 7,
    Synthesis = 8,
    Limit = 9,
    Io = 10,
    Internal = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DsClass {
    Fd = 0,
    Ld = 1,
    Independent = 2,
    Degenerate = 3,
}

impl From<DependencyClass> for DsClass {
    fn from(c: DependencyClass) -> Self {
        match c {
            DependencyClass::Fd => DsClass::Fd,
            DependencyClass::Ld => DsClass::Ld,
            DependencyClass::Independent => DsClass::Independent,
            DependencyClass::Degenerate => DsClass::Degenerate,
        }
    }
}

fn status_of(e: &Error) -> DsStatus {
    match e {
        Error::ConfigSyntax { .. } | Error::ConfigSchema { .. } | Error::UnknownCase(_) => DsStatus::Config,
        Error::Csv { .. }
        | Error::RaggedRow { .. }
        | Error::DuplicateColumn(_)
        | Error::EmptyCell { .. }
        | Error::IntegerParse { .. }
        | Error::ColumnKind { .. }
        | Error::ColumnMismatch => DsStatus::Table,
        Error::UnknownColumn(_) | Error::OverlappingSelection(_) | Error::EmptySelection => DsStatus::Selection,
        Error::Cycle(_) | Error::NotBijective { .. } | Error::MappingCoverage { .. } => DsStatus::Graph,
        Error::UnmappedValue { .. }
        | Error::UnknownGenerator(_)
        | Error::HfgfInapplicable
        | Error::EmptyReference => DsStatus::Synthesis,
        Error::IdCapacity { .. } | Error::WidthBound { .. } | Error::Budget { .. } => DsStatus::Limit,
        Error::InvalidArgument(_) | Error::Json(_) => DsStatus::InvalidArgument,
        Error::Io(_) => DsStatus::Io,
        Error::Internal(_) => DsStatus::Internal,
    }
}

struct LastError {
    code: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn set_error(code: &str, message: &str) {
    let clean = |s: &str| CString::new(s.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(LastError {
            code: clean(code),
            message: clean(message),
        })
    });
}

enum Failure {
    Null,
    Utf8,
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, recording any failure (including a panic) for the caller.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err(Failure::Null)) => {
            set_error("null_pointer", "required pointer argument was null");
            DsStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("invalid_utf8", "string argument is not valid UTF-8");
            DsStatus::InvalidUtf8
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.code(), &e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal", "panic inside depsynth");
            DsStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null);
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null);
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null);
    }
    let c = CString::new(s).map_err(|_| Error::InvalidArgument("output contains a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |e| e.message.as_ptr()))
}

/// Stable machine-readable code of the last failure on this thread, or NULL.
#[no_mangle]
pub extern "C" fn ds_last_error_code() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |e| e.code.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_config_parse(json: *const c_char, out: *mut *mut DsConfig) -> DsStatus {
    guard(|| {
        let config = parse_config(str_arg(json)?)?;
        put(out, DsConfig(config))
    })
}

/// Shipped configuration for benchmark case 1 to 4.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_builtin_case(case_number: u32, out: *mut *mut DsConfig) -> DsStatus {
    guard(|| {
        let (config, _) = builtin_case(case_number)?;
        put(out, DsConfig(config))
    })
}

/// Row count declared by the configuration, or 0 for NULL.
///
/// # Safety
/// `config` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_config_rows(config: *const DsConfig) -> usize {
    config.as_ref().map_or(0, |c| c.0.n)
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_config_free(config: *mut DsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_generate_benchmark(
    config: *const DsConfig,
    rows: usize,
    seed: u64,
    out: *mut *mut DsTable,
) -> DsStatus {
    guard(|| {
        let table = generate_benchmark(&handle(config)?.0, rows, Seed(seed))?;
        put(out, DsTable(table))
    })
}

/// Parses CSV bytes (header row first) with inferred column kinds.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_table_read_csv(data: *const u8, len: usize, out: *mut *mut DsTable) -> DsStatus {
    guard(|| {
        if data.is_null() && len > 0 {
            return Err(Failure::Null);
        }
        let bytes = if len == 0 { &[][..] } else { std::slice::from_raw_parts(data, len) };
        put(out, DsTable(depsynth::read_table(bytes, None)?))
    })
}

/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_table_write_csv(table: *const DsTable, out: *mut *mut c_char) -> DsStatus {
    guard(|| {
        let bytes = depsynth::write_table(&handle(table)?.0);
        let text = String::from_utf8(bytes).map_err(|_| Failure::Utf8)?;
        put_string(out, text)
    })
}

/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_table_rows(table: *const DsTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.n_rows())
}

/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_table_cols(table: *const DsTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.n_cols())
}

/// # Safety
/// `table` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_table_free(table: *mut DsTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Minimal FDs as JSON.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_mine_fds_json(table: *const DsTable, max_lhs: usize, out: *mut *mut c_char) -> DsStatus {
    guard(|| {
        let fds = mine_fds(&handle(table)?.0, max_lhs)?;
        put_string(out, fds.to_json())
    })
}

/// Q report over all disjoint selection pairs up to `max_subset` columns.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_score_all_json(table: *const DsTable, max_subset: usize, out: *mut *mut c_char) -> DsStatus {
    guard(|| {
        let report = score_all(&handle(table)?.0, EnumerationPolicy::with_max_subset(max_subset))?;
        put_string(out, report.to_json())
    })
}

/// Q score of column `a` against column `b` as an exact fraction.
///
/// # Safety
/// `table` must be a live handle, `a` and `b` NUL-terminated strings, and
/// every out-pointer writable.
#[no_mangle]
pub unsafe extern "C" fn ds_q_score(
    table: *const DsTable,
    a: *const c_char,
    b: *const c_char,
    numerator: *mut u64,
    denominator: *mut u64,
    class: *mut DsClass,
) -> DsStatus {
    guard(|| {
        let t = &handle(table)?.0;
        let (a, b) = (str_arg(a)?, str_arg(b)?);
        if numerator.is_null() || denominator.is_null() || class.is_null() {
            return Err(Failure::Null);
        }
        let s = q_score(t, &ColumnSelection::single(a), &ColumnSelection::single(b))?;
        *numerator = *s.value.numer();
        *denominator = *s.value.denom();
        *class = s.class.into();
        Ok(())
    })
}

/// HFGF synthesis driven by `config`'s dependencies.
///
/// # Safety
/// Handles must be live, `generator` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_synthesize_hfgf(
    reference: *const DsTable,
    config: *const DsConfig,
    generator: *const c_char,
    rows: usize,
    seed: u64,
    out: *mut *mut DsTable,
) -> DsStatus {
    guard(|| {
        let kind: GeneratorKind = str_arg(generator)?.parse()?;
        let graph = build_dependency_graph(&handle(config)?.0)?;
        let table = synthesize_hfgf(&handle(reference)?.0, &graph, kind, rows, Seed(seed))?;
        put(out, DsTable(table))
    })
}

/// Every column drawn independently by the generator.
///
/// # Safety
/// `reference` must be live, `generator` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_synthesize_baseline(
    reference: *const DsTable,
    generator: *const c_char,
    rows: usize,
    seed: u64,
    out: *mut *mut DsTable,
) -> DsStatus {
    guard(|| {
        let kind: GeneratorKind = str_arg(generator)?.parse()?;
        let table = synthesize_baseline(&handle(reference)?.0, kind, rows, Seed(seed))?;
        put(out, DsTable(table))
    })
}

/// Preservation report of `synth` against `real` as JSON.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_evaluate_json(real: *const DsTable, synth: *const DsTable, out: *mut *mut c_char) -> DsStatus {
    guard(|| {
        let (r, s) = (&handle(real)?.0, &handle(synth)?.0);
        let result = evaluate(r, s, 1, EnumerationPolicy::default())?;
        put_string(out, emit_report(result, column_distances(r, s)?, Provenance::default()))
    })
}
