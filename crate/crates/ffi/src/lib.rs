//! C ABI over `condcoh`.
//!
//! Every function returns a [`CcStatus`]; on failure a message is available
//! from [`cc_last_error`] on the same thread. Strings handed out by the
//! library must be released with [`cc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use condcoh::cli::{problem_is_coherent, run_source, OutputFormat, RunConfig};
use condcoh::compound::frechet_bounds;
use condcoh::dsl::{parse_problem, Problem};
use condcoh::entailment::{full_report, rule, VerificationConfig, DEFAULT_SEED};
use condcoh::rational::{in_unit_interval, ratio};
use condcoh::{Error, Rational};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    UnknownRule = 5,
    PInconsistent = 6,
    Overflow = 7,
    EngineError = 8,
    Panic = 9,
}

/// A parsed problem file.
pub struct CcProblem {
    source: String,
    problem: Problem,
}

/// `num / den` with `den > 0`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CcRational {
    pub num: i64,
    pub den: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul removed"));
}

fn fail(status: CcStatus, msg: impl Into<String>) -> CcStatus {
    set_error(msg);
    status
}

fn engine(e: Error) -> CcStatus {
    let status = match e {
        Error::UnknownRule(_) => CcStatus::UnknownRule,
        Error::PInconsistentPremises => CcStatus::PInconsistent,
        Error::OutOfRange(_) => CcStatus::InvalidArgument,
        _ => CcStatus::EngineError,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> CcStatus) -> CcStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CcStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, CcStatus> {
    if p.is_null() {
        return Err(fail(CcStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CcStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

fn to_c(x: &Rational) -> Option<CcRational> {
    Some(CcRational {
        num: i64::try_from(x.numer()).ok()?,
        den: i64::try_from(x.denom()).ok()?,
    })
}

/// Message for the last failed call on this thread. Empty when none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Seed used by the command-line tool when none is given.
#[no_mangle]
pub extern "C" fn cc_default_seed() -> u64 {
    DEFAULT_SEED
}

/// Parses a problem file. On success `*out` owns a handle to free with
/// [`cc_problem_free`].
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_parse(
    text: *const c_char,
    out: *mut *mut CcProblem,
) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return fail(CcStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let source = match read_str(text) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match parse_problem(source) {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(CcProblem {
                    source: source.to_string(),
                    problem,
                }));
                CcStatus::Ok
            }
            Err(e) => fail(CcStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `problem` must come from [`cc_problem_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_free(problem: *mut CcProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Whether the problem's assessments are jointly coherent.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_is_coherent(
    problem: *const CcProblem,
    out: *mut bool,
) -> CcStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return fail(CcStatus::NullArgument, "null argument");
        }
        match problem_is_coherent(&(*problem).problem) {
            Ok(b) => {
                *out = b;
                CcStatus::Ok
            }
            Err(e) => engine(e),
        }
    })
}

/// Runs every query and writes the report, text or JSON, to `*out`. The
/// command-line exit code goes to `*exit_code`; query failures are part of
/// the report, not of the returned status.
///
/// # Safety
/// `problem` must be a live handle; `exit_code` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_run(
    problem: *const CcProblem,
    seed: u64,
    json: bool,
    exit_code: *mut i32,
    out: *mut *mut c_char,
) -> CcStatus {
    guard(|| {
        if problem.is_null() || exit_code.is_null() || out.is_null() {
            return fail(CcStatus::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let config = RunConfig {
            seed,
            format: if json {
                OutputFormat::Json
            } else {
                OutputFormat::Text
            },
            ..RunConfig::default()
        };
        let outcome = run_source(&(*problem).source, "<input>", &config);
        *exit_code = outcome.code;
        let report = if outcome.stdout.is_empty() {
            outcome.stderr
        } else {
            outcome.stdout
        };
        *out = CString::new(report.replace('\0', " "))
            .expect("nul removed")
            .into_raw();
        CcStatus::Ok
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn cc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Decides a built-in inference rule, e.g. `"weak-transitivity"`. Fails with
/// `InternalDisagreement` surfaced as an engine error if the three decision
/// procedures differ.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_rule_p_entails(
    name: *const c_char,
    seed: u64,
    out: *mut bool,
) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return fail(CcStatus::NullArgument, "null output pointer");
        }
        let name = match read_str(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let report = rule(name).and_then(|(_, q)| {
            full_report(
                &q,
                &VerificationConfig {
                    seed,
                    ..VerificationConfig::default()
                },
            )
        });
        match report {
            Ok(r) => match r.p_valid() {
                Some(v) => {
                    *out = v;
                    CcStatus::Ok
                }
                None => fail(CcStatus::PInconsistent, "premises are not p-consistent"),
            },
            Err(e) => engine(e),
        }
    })
}

/// Lower and upper bounds `max(sum - n + 1, 0)` and `min` on the prevision
/// of a conjunction of `n` conditionals with probabilities `xs`.
///
/// # Safety
/// `xs` must point to `n` values; `lo` and `hi` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cc_frechet_bounds(
    xs: *const CcRational,
    n: usize,
    lo: *mut CcRational,
    hi: *mut CcRational,
) -> CcStatus {
    guard(|| {
        if xs.is_null() || lo.is_null() || hi.is_null() {
            return fail(CcStatus::NullArgument, "null argument");
        }
        if n == 0 {
            return fail(CcStatus::InvalidArgument, "empty family");
        }
        let mut values = Vec::with_capacity(n);
        for x in std::slice::from_raw_parts(xs, n) {
            if x.den <= 0 {
                return fail(CcStatus::InvalidArgument, "denominator must be positive");
            }
            let r = ratio(x.num, x.den);
            if !in_unit_interval(&r) {
                return fail(
                    CcStatus::InvalidArgument,
                    format!("{}/{} outside [0, 1]", x.num, x.den),
                );
            }
            values.push(r);
        }
        let iv = frechet_bounds(&values);
        match (to_c(&iv.lo), to_c(&iv.hi)) {
            (Some(l), Some(h)) => {
                *lo = l;
                *hi = h;
                CcStatus::Ok
            }
            _ => fail(CcStatus::Overflow, "bound does not fit in 64 bits"),
        }
    })
}
