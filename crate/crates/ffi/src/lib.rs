//! C interface to `clocklam`.
//!
//! Terms are opaque handles owned by the caller and released with
//! [`clk_term_free`]. Structured results come back as JSON strings released
//! with [`clk_string_free`]. Every function returns a [`ClkStatus`]; on
//! failure [`clk_last_error`] describes what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use clocklam::catalog::{catalog, parse_term, Family};
use clocklam::discrimination::{discriminate, Budgets, Verdict};
use clocklam::reduction::{normalize, reduce_to_hnf, reduce_to_root_stable, reduce_to_whnf, ReductionOutcome};
use clocklam::render::tree_json;
use clocklam::tree::{clocked_tree, Flavor, Limits, Mode};
use clocklam::{print, Style, Term};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClkStrategy {
    Head = 0,
    Whnf = 1,
    RootStable = 2,
    Normalize = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClkOutcome {
    Reached = 0,
    Cycle = 1,
    FuelExhausted = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClkVerdict {
    Inconvertible = 0,
    Convertible = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClkMode {
    Count = 0,
    Atomic = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClkFlavor {
    Bt = 0,
    Llt = 1,
    Bet = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClkBudgets {
    pub depth: usize,
    pub fuel: usize,
    pub search: usize,
    pub max_nodes: usize,
    pub mode: ClkMode,
}

/// A lambda term.
pub struct ClkTerm(Term);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

type Res<T> = Result<T, ClkStatus>;

fn fail<T>(status: ClkStatus, msg: impl Into<String>) -> Res<T> {
    set_error(msg);
    Err(status)
}

fn guard(f: impl FnOnce() -> Res<()>) -> ClkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ClkStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal error".into());
            set_error(msg);
            ClkStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return fail(ClkStatus::NullPointer, format!("{what} is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(e) => fail(ClkStatus::InvalidUtf8, format!("{what}: {e}")),
    }
}

unsafe fn term<'a>(p: *const ClkTerm, what: &str) -> Res<&'a Term> {
    match p.as_ref() {
        Some(t) => Ok(&t.0),
        None => fail(ClkStatus::NullPointer, format!("{what} is null")),
    }
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Res<()> {
    if out.is_null() {
        return fail(ClkStatus::NullPointer, format!("{what} is null"));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

unsafe fn budgets(p: *const ClkBudgets) -> Res<Budgets> {
    let b = match p.as_ref() {
        Some(b) => *b,
        None => clk_budgets_default(),
    };
    if b.depth == 0 || b.fuel == 0 || b.search == 0 || b.max_nodes == 0 {
        return fail(ClkStatus::InvalidArgument, "budgets must be at least 1");
    }
    Ok(Budgets {
        depth: b.depth,
        fuel: b.fuel,
        search: b.search,
        max_nodes: b.max_nodes,
        mode: match b.mode {
            ClkMode::Count => Mode::Count,
            ClkMode::Atomic => Mode::Atomic,
        },
    })
}

/// Default budgets: depth 16, fuel 10000, search 2000, 512 graph nodes, count mode.
#[no_mangle]
pub extern "C" fn clk_budgets_default() -> ClkBudgets {
    let b = Budgets::default();
    ClkBudgets {
        depth: b.depth,
        fuel: b.fuel,
        search: b.search,
        max_nodes: b.max_nodes,
        mode: ClkMode::Count,
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn clk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses `text`, which may use the names Y0, Y1, U2, δ, S, K, I and so on.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn clk_term_parse(text: *const c_char, out: *mut *mut ClkTerm) -> ClkStatus {
    guard(|| {
        let s = str_arg(text, "text")?;
        let t = parse_term(s).or_else(|e| fail(ClkStatus::ParseError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(ClkTerm(t))), "out")
    })
}

/// # Safety
/// `t` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn clk_term_free(t: *mut ClkTerm) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn clk_term_clone(t: *const ClkTerm, out: *mut *mut ClkTerm) -> ClkStatus {
    guard(|| {
        let t = term(t, "term")?;
        put(out, Box::into_raw(Box::new(ClkTerm(t.clone()))), "out")
    })
}

/// Writes the term as text, ASCII (`\x.`) unless `unicode` is nonzero.
///
/// # Safety
/// `t` must be a live handle and `out` writable. Free the string with
/// `clk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn clk_term_print(t: *const ClkTerm, unicode: i32, out: *mut *mut c_char) -> ClkStatus {
    guard(|| {
        let t = term(t, "term")?;
        let style = if unicode != 0 { Style::Unicode } else { Style::Ascii };
        put(out, c_string(print(t, style)), "out")
    })
}

/// Nonzero when the two terms are alpha-equal.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn clk_term_equal(a: *const ClkTerm, b: *const ClkTerm, out: *mut i32) -> ClkStatus {
    guard(|| {
        let (a, b) = (term(a, "a")?, term(b, "b")?);
        put(out, i32::from(a == b), "out")
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn clk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reduces `t` with the given strategy. `result` receives the final term and
/// `steps` the number of steps taken. Either may be null.
///
/// # Safety
/// `t` must be a live handle and `outcome` writable.
#[no_mangle]
pub unsafe extern "C" fn clk_reduce(
    t: *const ClkTerm,
    strategy: ClkStrategy,
    fuel: usize,
    outcome: *mut ClkOutcome,
    steps: *mut usize,
    result: *mut *mut ClkTerm,
) -> ClkStatus {
    guard(|| {
        let t = term(t, "term")?;
        let r = match strategy {
            ClkStrategy::Head => reduce_to_hnf(t, fuel),
            ClkStrategy::Whnf => reduce_to_whnf(t, fuel),
            ClkStrategy::RootStable => reduce_to_root_stable(t, fuel),
            ClkStrategy::Normalize => normalize(t, fuel),
        };
        let o = match r {
            ReductionOutcome::Reached { .. } => ClkOutcome::Reached,
            ReductionOutcome::Cycle { .. } => ClkOutcome::Cycle,
            ReductionOutcome::FuelExhausted { .. } => ClkOutcome::FuelExhausted,
        };
        put(outcome, o, "outcome")?;
        if !steps.is_null() {
            steps.write(r.trace().len());
        }
        if !result.is_null() {
            result.write(Box::into_raw(Box::new(ClkTerm(r.term().clone()))));
        }
        Ok(())
    })
}

/// The clocked tree of `t` as JSON, truncated at `budgets.depth`. Null
/// budgets mean the defaults.
///
/// # Safety
/// `t` must be a live handle, `budgets` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn clk_tree_json(
    t: *const ClkTerm,
    flavor: ClkFlavor,
    budgets_in: *const ClkBudgets,
    out: *mut *mut c_char,
) -> ClkStatus {
    guard(|| {
        let t = term(t, "term")?;
        let b = budgets(budgets_in)?;
        let flavor = match flavor {
            ClkFlavor::Bt => Flavor::Bt,
            ClkFlavor::Llt => Flavor::Llt,
            ClkFlavor::Bet => Flavor::Bet,
        };
        let limits = Limits {
            depth: b.depth,
            fuel: b.fuel,
            mode: b.mode,
        };
        put(out, c_string(tree_json(&clocked_tree(t, flavor, limits)).to_string()), "out")
    })
}

/// Decides whether `m` and `n` are inconvertible. `json` receives the verdict
/// with its certificate and may be null.
///
/// # Safety
/// Both handles must be live, `budgets` null or readable, `verdict` writable.
#[no_mangle]
pub unsafe extern "C" fn clk_discriminate(
    m: *const ClkTerm,
    n: *const ClkTerm,
    budgets_in: *const ClkBudgets,
    verdict: *mut ClkVerdict,
    json: *mut *mut c_char,
) -> ClkStatus {
    guard(|| {
        let (m, n) = (term(m, "m")?, term(n, "n")?);
        let b = budgets(budgets_in)?;
        let v = discriminate(m, n, &b);
        let code = match v {
            Verdict::Inconvertible { .. } => ClkVerdict::Inconvertible,
            Verdict::Convertible { .. } => ClkVerdict::Convertible,
            Verdict::Inconclusive { .. } => ClkVerdict::Inconclusive,
        };
        put(verdict, code, "verdict")?;
        if !json.is_null() {
            json.write(c_string(v.to_json(&b).to_string()));
        }
        Ok(())
    })
}

/// Builds a family (`bohm`, `scott`, `schemes`, `vectors` or `delta`) and
/// returns the report as JSON. `selection` may be null.
///
/// # Safety
/// `family` must be a nul-terminated string, `selection` null or one,
/// `budgets` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn clk_catalog_json(
    family: *const c_char,
    selection: *const c_char,
    budgets_in: *const ClkBudgets,
    out: *mut *mut c_char,
) -> ClkStatus {
    guard(|| {
        let fam: Family = str_arg(family, "family")?
            .parse()
            .or_else(|e: clocklam::catalog::CatalogError| fail(ClkStatus::InvalidArgument, e.to_string()))?;
        let sel = if selection.is_null() {
            None
        } else {
            Some(str_arg(selection, "selection")?)
        };
        let b = budgets(budgets_in)?;
        let report = catalog(fam, sel, &b).or_else(|e| fail(ClkStatus::InvalidArgument, e.to_string()))?;
        put(out, c_string(report.to_json().to_string()), "out")
    })
}
