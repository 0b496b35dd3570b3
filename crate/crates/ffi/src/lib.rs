//! C interface to riskfold.
//!
//! Objects are opaque handles created by calls such as `rf_table_from_csv` and released with
//! the matching `*_free`. Every fallible call returns an [`RfStatus`]; on failure
//! [`rf_last_error`] describes the problem for the calling thread. Strings handed
//! out by the library are freed with [`rf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use riskfold::fit::FittedModel;
use riskfold::microdata::{ingest_csv, Schema, SparseTable};
use riskfold::report::{to_json, ModelDocument};
use riskfold::risk::{estimate_population_uniques, pop_unique_prob, RiskReport};
use riskfold::{Error, Graph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    Parse = 1,
    Domain = 2,
    Usage = 3,
    Contract = 4,
    Conflict = 5,
    Convergence = 6,
    Io = 7,
    NullPointer = 8,
    InvalidUtf8 = 9,
    Panic = 10,
}

impl From<&Error> for RfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } => RfStatus::Parse,
            Error::Domain(_) => RfStatus::Domain,
            Error::Usage(_) => RfStatus::Usage,
            Error::Contract(_) => RfStatus::Contract,
            Error::Conflict(_) => RfStatus::Conflict,
            Error::Convergence { .. } => RfStatus::Convergence,
            Error::Io { .. } => RfStatus::Io,
        }
    }
}

/// A microdata sample together with its schema.
pub struct RfTable(SparseTable);

/// A decomposable model fitted to a table.
pub struct RfModel {
    model: FittedModel,
    cardinalities: Vec<u32>,
}

impl RfModel {
    fn boxed(model: FittedModel, table: &SparseTable) -> *mut RfModel {
        Box::into_raw(Box::new(RfModel { model, cardinalities: table.schema().cardinalities() }))
    }
}

/// Per-record risk of the sample uniques of a table.
pub struct RfRiskReport(RiskReport);

/// Summary statistics of a fitted model.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RfModelStats {
    pub loglik: f64,
    pub aic: f64,
    pub df_raw: i64,
    pub df: i64,
    pub clique_count: usize,
    pub edge_count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Failure {
    Status(RfStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RfStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            let status = RfStatus::from(&e);
            set_error(e.to_string());
            status
        }
        Ok(Err(Failure::Status(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {message}"));
            RfStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(RfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(RfStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior nul removed").into_raw()
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn rf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a schema (TOML text) and comma-separated records.
///
/// # Safety
/// String arguments must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_table_from_csv(
    schema_toml: *const c_char,
    csv: *const c_char,
    has_header: bool,
    out: *mut *mut RfTable,
) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let schema = Schema::from_toml_str(str_arg(schema_toml, "schema_toml")?)?;
        let table = ingest_csv(str_arg(csv, "csv")?, schema, has_header)?;
        *out = Box::into_raw(Box::new(RfTable(table)));
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_table_free(table: *mut RfTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_table_len(table: *const RfTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_table_variables(table: *const RfTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.schema().len())
}

/// Records as CSV text in their original codes; free with [`rf_string_free`].
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_table_to_csv(table: *const RfTable, out: *mut *mut c_char) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = c_string(ref_arg(table, "table")?.0.to_csv());
        Ok(())
    })
}

/// Multi-start hill climbing; returns the model with the smallest AIC.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_model_search(
    table: *const RfTable,
    restarts: usize,
    seed: u64,
    coin_prob: f64,
    out: *mut *mut RfModel,
) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let table = &ref_arg(table, "table")?.0;
        let best = riskfold::search::multi_start(table, restarts, seed, coin_prob)?
            .into_iter()
            .next()
            .expect("at least one restart");
        *out = RfModel::boxed(best.model, table);
        Ok(())
    })
}

/// Fits the model of a chordal graph given as `edge_count` 1-based vertex pairs
/// (`edges[2k]`, `edges[2k+1]`).
///
/// # Safety
/// `edges` must point to `2 * edge_count` values (may be null when `edge_count` is 0).
#[no_mangle]
pub unsafe extern "C" fn rf_model_fit_edges(
    table: *const RfTable,
    edges: *const usize,
    edge_count: usize,
    out: *mut *mut RfModel,
) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let table = &ref_arg(table, "table")?.0;
        let flat: &[usize] = if edge_count == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * edge_count)
        };
        let pairs = flat
            .chunks_exact(2)
            .map(|p| match (p[0].checked_sub(1), p[1].checked_sub(1)) {
                (Some(u), Some(v)) => Ok((u, v)),
                _ => Err(Error::Usage("edge vertices are 1-based".into())),
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let g = Graph::from_edges(table.schema().len(), &pairs)?;
        *out = RfModel::boxed(riskfold::fit(table, &g)?, table);
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_model_free(model: *mut RfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_model_stats(model: *const RfModel, out: *mut RfModelStats) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = &ref_arg(model, "model")?.model;
        *out = RfModelStats {
            loglik: m.loglik(),
            aic: m.aic(),
            df_raw: m.df_raw(),
            df: m.df_reported(),
            clique_count: m.decomposition().cliques().len(),
            edge_count: m.graph().edge_count(),
        };
        Ok(())
    })
}

/// Estimated probability of one cell, given as `len` 0-based category indices.
///
/// # Safety
/// `cell` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_model_mle_cell(model: *const RfModel, cell: *const u32, len: usize, out: *mut f64) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = ref_arg(model, "model")?;
        if cell.is_null() {
            return Err(null("cell"));
        }
        let cell = std::slice::from_raw_parts(cell, len);
        let arity = m.cardinalities.len();
        if len != arity {
            return Err(Error::Usage(format!("cell has {len} coordinates, model has {arity} variables")).into());
        }
        if let Some(v) = (0..len).find(|&v| cell[v] >= m.cardinalities[v]) {
            return Err(Error::Domain(format!("index {} of variable {} out of range", cell[v], v + 1)).into());
        }
        *out = m.model.mle_cell(cell);
        Ok(())
    })
}

/// The model as the JSON model file written by the command-line tool.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_model_to_json(model: *const RfModel, table: *const RfTable, out: *mut *mut c_char) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = &ref_arg(model, "model")?.model;
        let t = &ref_arg(table, "table")?.0;
        *out = c_string(to_json(&ModelDocument::new(m, t.schema(), 1, None)));
        Ok(())
    })
}

/// Scores every sample unique of `table` under `model`.
///
/// # Safety
/// Handles must be live and `model` fitted on `table`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_risk_estimate(table: *const RfTable, model: *const RfModel, out: *mut *mut RfRiskReport) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let t = &ref_arg(table, "table")?.0;
        let m = &ref_arg(model, "model")?.model;
        check_fitted_on(m, t)?;
        *out = Box::into_raw(Box::new(RfRiskReport(estimate_population_uniques(t, m)?)));
        Ok(())
    })
}

fn check_fitted_on(m: &FittedModel, t: &SparseTable) -> Result<(), Failure> {
    let same_shape = m.graph().vertex_count() == t.schema().len() && m.sample_size() == t.total();
    let same_marginals = || {
        m.clique_marginals()
            .iter()
            .all(|c| t.marginalize(c.vars()).is_ok_and(|x| x.to_sorted() == c.to_sorted()))
    };
    if !same_shape || !same_marginals() {
        return Err(Error::Contract("model was not fitted on this table".into()).into());
    }
    Ok(())
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_risk_report_free(report: *mut RfRiskReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Estimated number of population uniques among the sample uniques (NaN for a null handle).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_risk_estimate_total(report: *const RfRiskReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.estimate_total)
}

/// Number of sample uniques scored by the report.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_risk_sample_uniques(report: *const RfRiskReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.entries.len())
}

/// Counts of sample uniques per band: `above 1e-2`, eight decades down to `1e-10`,
/// then `1e-10 and below`. `out` receives 10 values.
///
/// # Safety
/// `out` must point to 10 writable values.
#[no_mangle]
pub unsafe extern "C" fn rf_risk_bands(report: *const RfRiskReport, out: *mut usize) -> RfStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let out = std::slice::from_raw_parts_mut(out, 10);
        out[0] = r.bands.above;
        out[1..9].copy_from_slice(&r.bands.bands);
        out[9] = r.bands.below;
        Ok(())
    })
}

/// `(1 − p)^(N − n)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_pop_unique_prob(p_hat: f64, population: u64, sample: u64, out: *mut f64) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = pop_unique_prob(p_hat, population, sample)?;
        Ok(())
    })
}

/// Swaps up to `max_records` sample uniques with `p̂ ≤ threshold`, lowest first,
/// leaving every clique marginal of `model` unchanged. Writes the new table and
/// the number of records swapped.
///
/// # Safety
/// Handles must be live and `model` fitted on `table`; `out` and `swapped` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_protect(
    table: *const RfTable,
    model: *const RfModel,
    threshold: f64,
    max_records: usize,
    out: *mut *mut RfTable,
    swapped: *mut usize,
) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let swapped = out_arg(swapped, "swapped")?;
        let t = &ref_arg(table, "table")?.0;
        let m = &ref_arg(model, "model")?.model;
        check_fitted_on(m, t)?;
        let report = estimate_population_uniques(t, m)?;
        let (protected, log) = riskfold::swap::protect(t, m, &report, threshold, max_records)?;
        *swapped = log.swapped();
        *out = Box::into_raw(Box::new(RfTable(protected)));
        Ok(())
    })
}

/// Number of labelled chordal graphs on `m ≤ 7` vertices, by enumeration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_count_chordal(m: usize, out: *mut u64) -> RfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = riskfold::oracle::count_chordal(m)?;
        Ok(())
    })
}
