//! C interface: opaque expression handles, JSON command runs, status codes
//! and a per-thread last-error message.
//!
//! Strings returned through `out` parameters are owned by the caller and
//! must be released with [`sf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde::Deserialize;
use symmflow::cli::{self, CliError, Command, ErrorKind, Options};
use symmflow::expr::{canonicalize, parse, Ast, Bindings, CanonExpr, Env};
use symmflow::perturb::NumericGrid;

/// Status codes; the values 2 to 5 match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    ParseError = 2,
    Inconsistent = 3,
    InvalidConfig = 4,
    VerificationFailed = 5,
    NullPointer = 10,
    InvalidUtf8 = 11,
    Panic = 12,
}

/// Parsed expression; canonical form kept when it exists.
pub struct SfExpr {
    ast: Ast,
    canon: Option<CanonExpr>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg.into()));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: SfStatus, msg: impl Into<String>) -> SfStatus {
    set_error(msg);
    status
}

fn status_of(kind: ErrorKind) -> SfStatus {
    match kind {
        ErrorKind::Parse => SfStatus::ParseError,
        ErrorKind::Inconsistent => SfStatus::Inconsistent,
        ErrorKind::Config => SfStatus::InvalidConfig,
        ErrorKind::Verification => SfStatus::VerificationFailed,
    }
}

fn guard(f: impl FnOnce() -> SfStatus) -> SfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SfStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, SfStatus> {
    if p.is_null() {
        return Err(fail(SfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn to_c(s: String) -> *mut c_char {
    // interior NULs cannot occur in engine output; replace defensively
    CString::new(s.replace('\0', " ")).expect("no interior NUL").into_raw()
}

/// Message of the last failed call on this thread, or null. Free with
/// [`sf_string_free`].
#[no_mangle]
pub extern "C" fn sf_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().clone().map(to_c).unwrap_or(ptr::null_mut()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `text`; on success `*out` receives a handle to free with
/// [`sf_expr_free`].
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_expr_parse(text: *const c_char, out: *mut *mut SfExpr) -> SfStatus {
    guard(|| {
        if out.is_null() {
            return fail(SfStatus::NullPointer, "out is null");
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse(text) {
            Ok(ast) => {
                let canon = canonicalize(&ast, &Bindings::default()).ok();
                *out = Box::into_raw(Box::new(SfExpr { ast, canon }));
                SfStatus::Ok
            }
            Err(e) => fail(SfStatus::ParseError, e.to_string()),
        }
    })
}

/// Canonical text of the expression (the parsed form when it has no
/// canonical form).
///
/// # Safety
/// `expr` must come from [`sf_expr_parse`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_expr_to_string(expr: *const SfExpr, out: *mut *mut c_char) -> SfStatus {
    guard(|| {
        if expr.is_null() || out.is_null() {
            return fail(SfStatus::NullPointer, "null argument");
        }
        let e = &*expr;
        let text = match &e.canon {
            Some(c) => c.to_string(),
            None => e.ast.to_string(),
        };
        *out = to_c(text);
        SfStatus::Ok
    })
}

/// 1 if the expression lies in the canonical fragment, else 0.
///
/// # Safety
/// `expr` must come from [`sf_expr_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn sf_expr_is_canonical(expr: *const SfExpr) -> i32 {
    (!expr.is_null() && (*expr).canon.is_some()) as i32
}

/// Evaluates at `x`, `eps` with jet values `jets[0..n_jets]` (`y, y', …`).
///
/// # Safety
/// `jets` must point to `n_jets` doubles (or be null with `n_jets == 0`).
#[no_mangle]
pub unsafe extern "C" fn sf_expr_eval(
    expr: *const SfExpr,
    x: f64,
    eps: f64,
    jets: *const f64,
    n_jets: usize,
    out: *mut f64,
) -> SfStatus {
    guard(|| {
        if expr.is_null() || out.is_null() || (jets.is_null() && n_jets > 0) {
            return fail(SfStatus::NullPointer, "null argument");
        }
        let jets = if n_jets == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(jets, n_jets).to_vec()
        };
        match (*expr).ast.eval(&Env::at(x).with_eps(eps).with_jets(jets)) {
            Ok(v) => {
                *out = v;
                SfStatus::Ok
            }
            Err(e) => fail(SfStatus::InvalidConfig, e.to_string()),
        }
    })
}

/// # Safety
/// `expr` must be null or come from [`sf_expr_parse`], and not be used after.
#[no_mangle]
pub unsafe extern "C" fn sf_expr_free(expr: *mut SfExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunOptions {
    selector: Option<String>,
    check: Option<String>,
    #[serde(default)]
    first_integral: bool,
    #[serde(default)]
    solve: bool,
    tol: Option<f64>,
    grid: Option<NumericGrid>,
    eps: Option<Vec<f64>>,
}

fn build_command(name: &str, o: &RunOptions) -> Result<Command, CliError> {
    Ok(match name {
        "symmetries" => Command::Symmetries,
        "approx" => Command::Approx,
        "counterpart" => Command::Counterpart {
            selector: o
                .selector
                .clone()
                .ok_or_else(|| CliError::config("counterpart needs options.selector"))?,
        },
        "intfactor" => Command::IntFactor {
            check: o.check.clone(),
            first_integral: o.first_integral,
            solve: o.solve,
        },
        "solve" => Command::Solve,
        "validate" => Command::Validate,
        other => return Err(CliError::config(format!("unknown command `{other}`"))),
    })
}

/// Runs a command on a problem file given as JSON text. `options_json` may
/// be null; keys: `selector`, `check`, `first_integral`, `solve`, `tol`,
/// `grid` (`{start, end, step}`), `eps`.
///
/// `*report_out` receives the JSON report whenever one was produced, which
/// includes the `VerificationFailed` case.
///
/// # Safety
/// String arguments must be NUL-terminated (or null where allowed) and
/// `report_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_run_command(
    command: *const c_char,
    problem_json: *const c_char,
    options_json: *const c_char,
    report_out: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        if report_out.is_null() {
            return fail(SfStatus::NullPointer, "report_out is null");
        }
        *report_out = ptr::null_mut();
        let (name, problem) = match (read_str(command, "command"), read_str(problem_json, "problem_json")) {
            (Ok(c), Ok(p)) => (c, p),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let opts: RunOptions = if options_json.is_null() {
            RunOptions::default()
        } else {
            let text = match read_str(options_json, "options_json") {
                Ok(t) => t,
                Err(s) => return s,
            };
            match serde_json::from_str(text) {
                Ok(o) => o,
                Err(e) => return fail(SfStatus::ParseError, format!("options: {e}")),
            }
        };
        let command = match build_command(name, &opts) {
            Ok(c) => c,
            Err(e) => return fail(status_of(e.kind), e.message),
        };
        let overrides = Options {
            tol: opts.tol,
            grid: opts.grid,
            eps: opts.eps.clone(),
        };
        match cli::run_capped(&command, problem, &overrides) {
            Ok(output) => {
                let verified = output.report.verified();
                *report_out = to_c(output.report.to_json());
                if verified {
                    SfStatus::Ok
                } else {
                    fail(SfStatus::VerificationFailed, "self-audit failed")
                }
            }
            Err(e) => fail(status_of(e.kind), e.message),
        }
    })
}
