use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use condcoh_ffi::*;

const HALVES: &str = "atoms A B C D
cond T1 = B given A
cond T2 = D given C
assess P(T1) = 1/2
assess P(T2) = 1/2
query coherence
query bounds T1 & T2
";

fn last_error() -> String {
    unsafe { CStr::from_ptr(cc_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn parse(text: &str) -> Result<*mut CcProblem, (CcStatus, String)> {
    let text = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    match unsafe { cc_problem_parse(text.as_ptr(), &mut h) } {
        CcStatus::Ok => Ok(h),
        s => Err((s, last_error())),
    }
}

#[test]
fn parse_run_and_free() {
    let h = parse(HALVES).unwrap();
    let mut coherent = false;
    assert_eq!(
        unsafe { cc_problem_is_coherent(h, &mut coherent) },
        CcStatus::Ok
    );
    assert!(coherent);

    let mut code = -1;
    let mut out = ptr::null_mut();
    let status = unsafe { cc_problem_run(h, cc_default_seed(), false, &mut code, &mut out) };
    assert_eq!(status, CcStatus::Ok);
    assert_eq!(code, 0);
    let report = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { cc_string_free(out) };
    assert!(report.contains("[0, 1/2]"), "{report}");

    let mut out = ptr::null_mut();
    unsafe { cc_problem_run(h, cc_default_seed(), true, &mut code, &mut out) };
    let json: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    unsafe { cc_string_free(out) };
    assert_eq!(json["results"][0]["coherent"], true);
    unsafe { cc_problem_free(h) };
}

#[test]
fn incoherent_problem() {
    let h = parse("atoms A\ncond T = A given A\nassess P(T) = 1/2\n").unwrap();
    let mut coherent = true;
    assert_eq!(
        unsafe { cc_problem_is_coherent(h, &mut coherent) },
        CcStatus::Ok
    );
    assert!(!coherent);
    unsafe { cc_problem_free(h) };
}

#[test]
fn parse_error_carries_location() {
    let (status, msg) = parse("atoms A\ncond T = B given A\n").unwrap_err();
    assert_eq!(status, CcStatus::ParseError);
    assert!(msg.starts_with("line 2, column 10"), "{msg}");
}

#[test]
fn null_arguments_are_rejected() {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { cc_problem_parse(ptr::null(), &mut h) },
        CcStatus::NullArgument
    );
    assert!(h.is_null());
    let mut b = false;
    assert_eq!(
        unsafe { cc_problem_is_coherent(ptr::null(), &mut b) },
        CcStatus::NullArgument
    );
    unsafe {
        cc_problem_free(ptr::null_mut());
        cc_string_free(ptr::null_mut());
    }
}

#[test]
fn rules() {
    let check = |name: &str| {
        let name = CString::new(name).unwrap();
        let mut out = false;
        let s = unsafe { cc_rule_p_entails(name.as_ptr(), cc_default_seed(), &mut out) };
        (s, out)
    };
    assert_eq!(check("weak-transitivity"), (CcStatus::Ok, true));
    assert_eq!(check("transitivity"), (CcStatus::Ok, false));
    assert_eq!(check("no-such-rule").0, CcStatus::UnknownRule);
    assert!(last_error().contains("no-such-rule"));
}

#[test]
fn frechet() {
    let xs = [CcRational { num: 1, den: 2 }, CcRational { num: 3, den: 4 }];
    let mut lo = CcRational { num: 0, den: 0 };
    let mut hi = lo;
    assert_eq!(
        unsafe { cc_frechet_bounds(xs.as_ptr(), 2, &mut lo, &mut hi) },
        CcStatus::Ok
    );
    assert_eq!(
        (lo, hi),
        (CcRational { num: 1, den: 4 }, CcRational { num: 1, den: 2 })
    );

    let bad = [CcRational { num: 3, den: 2 }];
    assert_eq!(
        unsafe { cc_frechet_bounds(bad.as_ptr(), 1, &mut lo, &mut hi) },
        CcStatus::InvalidArgument
    );
    let zero_den = [CcRational { num: 1, den: 0 }];
    assert_eq!(
        unsafe { cc_frechet_bounds(zero_den.as_ptr(), 1, &mut lo, &mut hi) },
        CcStatus::InvalidArgument
    );
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/condcoh.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "cc_problem_parse",
        "cc_problem_free",
        "cc_rule_p_entails",
        "CC_STATUS_OK",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(status.success());
}
