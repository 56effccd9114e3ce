use std::ffi::{CStr, CString};
use std::ptr;

use symmflow_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { sf_string_free(s) };
    out
}

fn problem(name: &str) -> CString {
    let path = format!("{}/../core/problems/{name}.json", env!("CARGO_MANIFEST_DIR"));
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run(cmd: &str, problem: &CString, opts: Option<&str>) -> (SfStatus, Option<String>) {
    let cmd = CString::new(cmd).unwrap();
    let opts = opts.map(|o| CString::new(o).unwrap());
    let mut report = ptr::null_mut();
    let status = unsafe {
        sf_run_command(
            cmd.as_ptr(),
            problem.as_ptr(),
            opts.as_ref().map_or(ptr::null(), |o| o.as_ptr()),
            &mut report,
        )
    };
    let report = (!report.is_null()).then(|| take(report));
    (status, report)
}

#[test]
fn expr_roundtrip_and_eval() {
    let text = CString::new("(1 + eps)*y' + x*y^2").unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { sf_expr_parse(text.as_ptr(), &mut e) }, SfStatus::Ok);
    assert_eq!(unsafe { sf_expr_is_canonical(e) }, 1);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sf_expr_to_string(e, &mut s) }, SfStatus::Ok);
    let printed = CString::new(take(s)).unwrap();

    let jets = [2.0, 3.0];
    let mut v = 0.0;
    assert_eq!(unsafe { sf_expr_eval(e, 0.5, 0.1, jets.as_ptr(), 2, &mut v) }, SfStatus::Ok);
    assert!((v - (1.1 * 3.0 + 0.5 * 4.0)).abs() < 1e-14);

    // printed form reparses to the same function
    let mut e2 = ptr::null_mut();
    assert_eq!(unsafe { sf_expr_parse(printed.as_ptr(), &mut e2) }, SfStatus::Ok);
    let mut v2 = 0.0;
    assert_eq!(unsafe { sf_expr_eval(e2, 0.5, 0.1, jets.as_ptr(), 2, &mut v2) }, SfStatus::Ok);
    assert!((v - v2).abs() < 1e-12);
    unsafe {
        sf_expr_free(e);
        sf_expr_free(e2);
    }
}

#[test]
fn parse_error_sets_message() {
    let text = CString::new("x + * y").unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { sf_expr_parse(text.as_ptr(), &mut e) }, SfStatus::ParseError);
    assert!(e.is_null());
    let msg = take(sf_last_error_message());
    assert!(!msg.is_empty());
    // a successful call clears it
    let ok = CString::new("x").unwrap();
    assert_eq!(unsafe { sf_expr_parse(ok.as_ptr(), &mut e) }, SfStatus::Ok);
    assert!(sf_last_error_message().is_null());
    unsafe { sf_expr_free(e) };
}

#[test]
fn null_arguments_are_rejected() {
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { sf_expr_parse(ptr::null(), &mut e) }, SfStatus::NullPointer);
    let mut v = 0.0;
    assert_eq!(unsafe { sf_expr_eval(ptr::null(), 0.0, 0.0, ptr::null(), 0, &mut v) }, SfStatus::NullPointer);
    assert_eq!(unsafe { sf_run_command(ptr::null(), ptr::null(), ptr::null(), ptr::null_mut()) }, SfStatus::NullPointer);
    unsafe {
        sf_expr_free(ptr::null_mut());
        sf_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8() {
    let bad = [0xffu8, 0xfe, 0];
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { sf_expr_parse(bad.as_ptr().cast(), &mut e) }, SfStatus::InvalidUtf8);
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn symmetries_report() {
    let (status, report) = run("symmetries", &problem("boussinesq_unperturbed"), None);
    assert_eq!(status, SfStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&report.unwrap()).unwrap();
    assert_eq!(v["outputs"]["dimension"], 8);
    assert_eq!(v["command"], "symmetries");
}

#[test]
fn command_options() {
    let p = problem("boussinesq");
    let (status, report) = run("counterpart", &p, Some(r#"{"selector": "X8"}"#));
    assert_eq!(status, SfStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&report.unwrap()).unwrap();
    assert_eq!(v["outputs"]["zeta0"], "y");

    let (status, report) = run("counterpart", &p, None);
    assert_eq!(status, SfStatus::InvalidConfig);
    assert!(report.is_none());

    let (status, _) = run("counterpart", &p, Some(r#"{"bogus": 1}"#));
    assert_eq!(status, SfStatus::ParseError);

    let (status, _) = run("nope", &p, None);
    assert_eq!(status, SfStatus::InvalidConfig);
}

#[test]
fn intfactor_and_validate() {
    let bbm = problem("bbm");
    let (status, report) = run("intfactor", &bbm, Some(r#"{"first_integral": true}"#));
    assert_eq!(status, SfStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&report.unwrap()).unwrap();
    assert_eq!(v["outputs"]["first_integral"]["lambda"], "2");

    let opts = r#"{"eps": [0.05], "grid": {"start": 0.0, "end": 2.0, "step": 0.5}}"#;
    let (status, report) = run("validate", &bbm, Some(opts));
    assert_eq!(status, SfStatus::Ok, "{:?}", report);
}

#[test]
fn status_codes_match_cli() {
    let (status, _) = run("symmetries", &CString::new("{not json").unwrap(), None);
    assert_eq!(status as i32, 2);
    let osc = problem("boussinesq_unperturbed");
    let (status, report) = run("intfactor", &osc, Some(r#"{"check": "y"}"#));
    assert_eq!(status as i32, 5);
    let _ = report;
}

#[test]
fn header_is_current() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/symmflow.h")).unwrap();
    for f in ["sf_expr_parse", "sf_expr_eval", "sf_run_command", "sf_last_error_message", "SF_STATUS_VERIFICATION_FAILED"] {
        assert!(h.contains(f), "{f}");
    }
}
