//! C ABI for the perturba library.
//!
//! Conventions:
//! - Every fallible entry point returns an `int32_t` status from the
//!   `PERTURBA_*` constants; `0` means success.
//! - Inputs are NUL-terminated UTF-8 JSON strings in the same formats the
//!   `perturba` CLI reads.
//! - Objects returned through out-pointers are owned by the caller and must
//!   be released with the matching `*_free` function.
//! - On any nonzero status, [`perturba_last_error_message`] returns a
//!   human-readable diagnostic for the current thread; the pointer stays
//!   valid until the next failing call on that thread.
//! - All entry points catch panics and convert them to `PERTURBA_ERR_PANIC`;
//!   no unwinding crosses the FFI boundary.
//! - A negative `tol` selects the library default (1e-9 for floats; exact
//!   scalars ignore the tolerance entirely).

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use perturba::io::{
    graded_map_from_json, he_from_json, he_to_json, lie_from_json, metric_from_json,
    GradedMapJson, HeBundleJson, LieJson, MetricJson,
};
use perturba::lie_deform::{ce_complex, h2_vanishes, trivialize, BracketFamily, TAU_TRIV};
use perturba::metric_hochschild::{verify_contraction, HomotopyReading};
use perturba::perturbation::{certify, perturb, HEData, Perturbation};
use perturba::scalar::{Rat, Tol};
use perturba::Error;

/// Success.
pub const PERTURBA_OK: i32 = 0;
/// Malformed input: JSON syntax, schema, or shape errors.
pub const PERTURBA_ERR_SCHEMA: i32 = 1;
/// Well-formed input that fails a mathematical requirement.
pub const PERTURBA_ERR_MATH: i32 = 2;
/// A required pointer argument was NULL.
pub const PERTURBA_ERR_NULL: i32 = 3;
/// A string argument was not valid UTF-8.
pub const PERTURBA_ERR_UTF8: i32 = 4;
/// An internal panic was caught at the boundary.
pub const PERTURBA_ERR_PANIC: i32 = 5;

/// Opaque handle to a verified-format homotopy equivalence bundle over
/// exact rationals.
pub struct PerturbaHe {
    inner: HEData<Rat>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> =
        RefCell::new(CString::new("").expect("empty CString"));
}

fn set_error(msg: &str) {
    // NUL bytes cannot survive the CString round-trip; replace them.
    let clean: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("NUL-free message"));
}

fn fail(e: &Error) -> i32 {
    set_error(&e.to_string());
    match e.exit_code() {
        1 => PERTURBA_ERR_SCHEMA,
        _ => PERTURBA_ERR_MATH,
    }
}

fn guard(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic caught at the FFI boundary");
            PERTURBA_ERR_PANIC
        }
    }
}

/// # Safety
/// `p` must be NULL or a valid NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, i32> {
    if p.is_null() {
        set_error(&format!("{what} is NULL"));
        return Err(PERTURBA_ERR_NULL);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        PERTURBA_ERR_UTF8
    })
}

fn tol_arg(tol: f64) -> Tol {
    if tol < 0.0 || !tol.is_finite() {
        Tol::default()
    } else {
        Tol::new(tol)
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, i32> {
    serde_json::from_str(text).map_err(|e| {
        set_error(&format!("schema error in {what}: {e}"));
        PERTURBA_ERR_SCHEMA
    })
}

/// Parse a homotopy-equivalence bundle (the CLI's `verify-he` input format)
/// into an owned handle. Shapes are validated here; mathematical identities
/// are checked by [`perturba_he_verify`].
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn perturba_he_parse(
    json: *const c_char,
    out: *mut *mut PerturbaHe,
) -> i32 {
    guard(|| {
        if out.is_null() {
            set_error("out is NULL");
            return PERTURBA_ERR_NULL;
        }
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(c) => return c,
        };
        let bundle: HeBundleJson = match parse_json(text, "he bundle") {
            Ok(b) => b,
            Err(c) => return c,
        };
        match he_from_json::<Rat>(&bundle, "he") {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(PerturbaHe { inner }));
                PERTURBA_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Check the full homotopy-equivalence contract: both differentials square
/// to zero, `i` and `p` are chain maps, `ip = 1 + dh + hd`, and `i`, `p`
/// are quasi-isomorphisms.
///
/// # Safety
/// `he` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn perturba_he_verify(he: *const PerturbaHe, tol: f64) -> i32 {
    guard(|| {
        let Some(he) = he.as_ref() else {
            set_error("he is NULL");
            return PERTURBA_ERR_NULL;
        };
        match he.inner.verify(&tol_arg(tol)) {
            Ok(()) => PERTURBA_OK,
            Err(e) => fail(&e),
        }
    })
}

/// Transfer the bundle along a perturbation `delta` of `d_M` (a graded-map
/// JSON object with the differential's shift). Verifies the input bundle,
/// certifies smallness of `delta·h`, applies the perturbation lemma, and
/// re-verifies the output before returning it.
///
/// # Safety
/// `he` must be a live handle; `delta_json` a valid NUL-terminated string;
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn perturba_he_perturb(
    he: *const PerturbaHe,
    delta_json: *const c_char,
    tol: f64,
    out: *mut *mut PerturbaHe,
) -> i32 {
    guard(|| {
        if out.is_null() {
            set_error("out is NULL");
            return PERTURBA_ERR_NULL;
        }
        let Some(he) = he.as_ref() else {
            set_error("he is NULL");
            return PERTURBA_ERR_NULL;
        };
        let text = match str_arg(delta_json, "delta_json") {
            Ok(t) => t,
            Err(c) => return c,
        };
        let dj: GradedMapJson = match parse_json(text, "delta") {
            Ok(d) => d,
            Err(c) => return c,
        };
        let tol = tol_arg(tol);
        let run = || -> Result<HEData<Rat>, Error> {
            he.inner.verify(&tol)?;
            let m = he.inner.m.module();
            let delta = graded_map_from_json::<Rat>(&dj, m, m, "delta")?;
            let pert = Perturbation::new(&he.inner.m, delta, &tol)?;
            let cert = certify(&he.inner.m, &he.inner.h, &pert, &tol)?;
            perturb(&he.inner, &pert, &cert, &tol)
        };
        match run() {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(PerturbaHe { inner }));
                PERTURBA_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Serialize a bundle back to its JSON format. The returned string is owned
/// by the caller; release it with [`perturba_string_free`].
///
/// # Safety
/// `he` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn perturba_he_to_json(
    he: *const PerturbaHe,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        if out.is_null() {
            set_error("out is NULL");
            return PERTURBA_ERR_NULL;
        }
        let Some(he) = he.as_ref() else {
            set_error("he is NULL");
            return PERTURBA_ERR_NULL;
        };
        let bundle = he_to_json(&he.inner);
        let text = match serde_json::to_string_pretty(&bundle) {
            Ok(t) => t,
            Err(e) => {
                set_error(&format!("serialization failed: {e}"));
                return PERTURBA_ERR_SCHEMA;
            }
        };
        match CString::new(text) {
            Ok(c) => {
                *out = c.into_raw();
                PERTURBA_OK
            }
            Err(_) => {
                set_error("serialized JSON contained a NUL byte");
                PERTURBA_ERR_SCHEMA
            }
        }
    })
}

/// Release a handle returned by [`perturba_he_parse`] or
/// [`perturba_he_perturb`]. NULL is ignored.
///
/// # Safety
/// `he` must be NULL or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn perturba_he_free(he: *mut PerturbaHe) {
    if !he.is_null() {
        drop(Box::from_raw(he));
    }
}

/// Release a string returned by [`perturba_he_to_json`]. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string returned by this library; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn perturba_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Verify the contraction identity `b′h + hb′ = 1` on the normalized
/// complex of a finite metric space (JSON `{"n": k, "rho": [[...]]}`), for
/// every arity from 2 through `max_arity`. Residuals are exact zeros over
/// the rationals; any violation returns `PERTURBA_ERR_MATH`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn perturba_metric_verify(
    json: *const c_char,
    max_arity: usize,
    tol: f64,
) -> i32 {
    guard(|| {
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(c) => return c,
        };
        let mj: MetricJson = match parse_json(text, "metric space") {
            Ok(m) => m,
            Err(c) => return c,
        };
        let tol = tol_arg(tol);
        let run = || -> Result<(), Error> {
            let ms = metric_from_json::<Rat>(&mj, &tol, "metric")?;
            let rep = verify_contraction(&ms, max_arity, HomotopyReading::default(), &tol)?;
            for check in &rep.per_arity {
                if !(check.exact || check.max_residual <= tol.tau) {
                    return Err(Error::RelationViolation {
                        relation: "b'h + hb' = 1".into(),
                        degree: check.arity as i64,
                        residual: format!("{:e}", check.max_residual),
                    });
                }
            }
            Ok(())
        };
        match run() {
            Ok(()) => PERTURBA_OK,
            Err(e) => fail(&e),
        }
    })
}

/// Certify rigidity of a Lie algebra (JSON `{"dim": n, "c": [[[...]]]}`):
/// checks `H²(g;g) = 0`, then integrates the scaling family `(1+t)·[·,·]`
/// on `[0, t_max]` and requires every isomorphism defect on the grid to
/// stay within the trivialization budget.
///
/// # Safety
/// `json` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn perturba_lie_rigidity(
    json: *const c_char,
    t_max: f64,
    steps: usize,
    tol: f64,
) -> i32 {
    guard(|| {
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(c) => return c,
        };
        let lj: LieJson = match parse_json(text, "lie algebra") {
            Ok(l) => l,
            Err(c) => return c,
        };
        let tol = tol_arg(tol);
        let run = || -> Result<(), Error> {
            let g = lie_from_json::<Rat>(&lj, &tol, "lie")?;
            if !h2_vanishes(&g, &tol)? {
                let dim = ce_complex(&g)?.cohomology_dim(2, &tol)?;
                return Err(Error::CohomologyNonzero { degree: 2, dim });
            }
            let fam = BracketFamily::new(
                vec![g.bracket().clone(), g.bracket().clone()],
                t_max.max(1.0),
                &tol,
            )?;
            let result = trivialize(&fam, t_max, steps, &tol)?;
            let worst = result.defects.iter().cloned().fold(0.0_f64, f64::max);
            if worst > TAU_TRIV {
                return Err(Error::ToleranceMiss {
                    context: "lie rigidity grid defects".into(),
                    residual: worst,
                    tol: TAU_TRIV,
                });
            }
            Ok(())
        };
        match run() {
            Ok(()) => PERTURBA_OK,
            Err(e) => fail(&e),
        }
    })
}

/// Diagnostic for the most recent failure on this thread, as a NUL-terminated
/// UTF-8 string. Never NULL; empty before the first failure. The pointer is
/// invalidated by the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn perturba_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
