//! C ABI over `scd-core`.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `*_free` function. Every entry point returns an [`ScdStatus`].
//! On failure a message is stored per thread and can be read with
//! [`scd_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::{Duration, Instant};

use scd_core::chainfam::{families_to_chains, parse_family_file, ChainFamily, FamilyError};
use scd_core::cli::{prove_against_target, ProveSummary};
use scd_core::fixtures;
use scd_core::latsum::total_weight;
use scd_core::lattice::{check_scd, lattice_size};
use scd_core::ratproof::{ProveConfig, Verdict};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    UnknownBuiltin = 4,
    InvalidInput = 5,
    SumError = 6,
    Overflow = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScdVerdictKind {
    ProvedZero = 0,
    NotZero = 1,
    Open = 2,
}

/// A parsed set of chain families.
pub struct ScdFamilySet {
    families: Vec<ChainFamily>,
}

/// Result of proving a family set against the target generating function.
pub struct ScdProofReport {
    summary: ProveSummary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Failure = (ScdStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ScdStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ScdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("internal panic: {msg}"));
            ScdStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (ScdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (ScdStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn family_failure(e: FamilyError) -> Failure {
    (ScdStatus::InvalidInput, e.to_string())
}

/// Parses family-file text into a new set.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn scd_family_set_parse(
    text: *const c_char,
    out: *mut *mut ScdFamilySet,
) -> ScdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(text, "text")?;
        let families =
            parse_family_file(text).map_err(|e| (ScdStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(ScdFamilySet { families }));
        Ok(())
    })
}

/// Loads a bundled family set: `l1`, `l2` or `demo6`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn scd_family_set_builtin(
    name: *const c_char,
    out: *mut *mut ScdFamilySet,
) -> ScdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = read_str(name, "name")?;
        let families = match fixtures::load(name) {
            Some(r) => r.map_err(|e| (ScdStatus::ParseError, e.to_string()))?,
            None => {
                return Err((
                    ScdStatus::UnknownBuiltin,
                    format!("unknown builtin family set `{name}`"),
                ))
            }
        };
        *out = Box::into_raw(Box::new(ScdFamilySet { families }));
        Ok(())
    })
}

/// # Safety
/// `set` must come from this library and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn scd_family_set_free(set: *mut ScdFamilySet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of families in the set.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scd_family_set_len(
    set: *const ScdFamilySet,
    out: *mut usize,
) -> ScdStatus {
    guard(|| {
        let set = deref(set, "set")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = set.families.len();
        Ok(())
    })
}

/// Instantiates the families at `n` and checks for a symmetric chain
/// decomposition of L(m, n). Instantiation defects count as a failed check;
/// their message is left in [`scd_last_error`].
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scd_verify(
    set: *const ScdFamilySet,
    n: u32,
    out_pass: *mut bool,
) -> ScdStatus {
    guard(|| {
        let set = deref(set, "set")?;
        if out_pass.is_null() {
            return Err(null("out_pass"));
        }
        let Some(m) = set.families.first().map(|f| f.m) else {
            return Err((ScdStatus::InvalidInput, "family set is empty".into()));
        };
        let chains = match families_to_chains(&set.families, n) {
            Ok(c) => c,
            Err(
                e @ (FamilyError::Malformed { .. }
                | FamilyError::NotSaturated { .. }
                | FamilyError::EmptyChain { .. }
                | FamilyError::NotAdmissible { .. }),
            ) => {
                set_last_error(&e.to_string());
                *out_pass = false;
                return Ok(());
            }
            Err(e) => return Err(family_failure(e)),
        };
        let verdict =
            check_scd(&chains, m, n).map_err(|e| (ScdStatus::InvalidInput, e.to_string()))?;
        *out_pass = verdict.passed();
        Ok(())
    })
}

/// Sums the families and proves the result equal to the target generating
/// function. `budget_ms == 0` means no time limit.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scd_prove(
    set: *const ScdFamilySet,
    budget_ms: u64,
    out: *mut *mut ScdProofReport,
) -> ScdStatus {
    guard(|| {
        let set = deref(set, "set")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let tw = total_weight(&set.families).map_err(|e| (ScdStatus::SumError, e.to_string()))?;
        let cfg = ProveConfig {
            deadline: (budget_ms > 0).then(|| Instant::now() + Duration::from_millis(budget_ms)),
            ..ProveConfig::default()
        };
        let summary = prove_against_target(&tw.expr(), tw.grouped_count(), tw.m, &cfg);
        *out = Box::into_raw(Box::new(ScdProofReport { summary }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn scd_proof_report_free(report: *mut ScdProofReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scd_proof_report_verdict(
    report: *const ScdProofReport,
    out: *mut ScdVerdictKind,
) -> ScdStatus {
    guard(|| {
        let report = deref(report, "report")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match report.summary.report.verdict {
            Verdict::ProvedZero => ScdVerdictKind::ProvedZero,
            Verdict::NotZero(_) => ScdVerdictKind::NotZero,
            Verdict::Open(_) => ScdVerdictKind::Open,
        };
        Ok(())
    })
}

/// Factor counts of the report. Any output pointer may be null.
///
/// # Safety
/// `report` must be valid; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn scd_proof_report_counts(
    report: *const ScdProofReport,
    total: *mut usize,
    closed: *mut usize,
    open: *mut usize,
) -> ScdStatus {
    guard(|| {
        let r = &deref(report, "report")?.summary.report;
        if let Some(t) = total.as_mut() {
            *t = r.total_factors();
        }
        if let Some(c) = closed.as_mut() {
            *c = r.closed_count();
        }
        if let Some(o) = open.as_mut() {
            *o = r.open_count();
        }
        Ok(())
    })
}

/// The report as `Key=Value` lines. Free the string with [`scd_string_free`].
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scd_proof_report_to_string(
    report: *const ScdProofReport,
    out: *mut *mut c_char,
) -> ScdStatus {
    guard(|| {
        let report = deref(report, "report")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CString::new(report.summary.to_kv()).expect("report text has no NUL");
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn scd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// |L(m, n)| = C(m + n, n).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn scd_lattice_count(m: usize, n: u32, out: *mut u64) -> ScdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = u64::try_from(lattice_size(m, n)).map_err(|_| {
            (
                ScdStatus::Overflow,
                format!("|L({m},{n})| does not fit in 64 bits"),
            )
        })?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn scd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
