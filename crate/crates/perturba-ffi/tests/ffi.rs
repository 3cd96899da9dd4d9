//! Exercises the C ABI from Rust: status codes, ownership, error messages,
//! and the NULL/UTF-8 guards.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::Path;
use std::ptr;

use perturba_ffi::*;

fn sample(name: &str) -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name);
    CString::new(std::fs::read_to_string(path).expect("sample file")).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(perturba_last_error_message()) }
        .to_str()
        .unwrap()
        .to_owned()
}

#[test]
fn he_parse_verify_perturb_roundtrip() {
    unsafe {
        let json = sample("he.json");
        let mut he: *mut PerturbaHe = ptr::null_mut();
        assert_eq!(perturba_he_parse(json.as_ptr(), &mut he), PERTURBA_OK);
        assert!(!he.is_null());
        assert_eq!(perturba_he_verify(he, -1.0), PERTURBA_OK);

        let delta = sample("delta.json");
        let mut out: *mut PerturbaHe = ptr::null_mut();
        assert_eq!(perturba_he_perturb(he, delta.as_ptr(), -1.0, &mut out), PERTURBA_OK);
        assert!(!out.is_null());
        assert_eq!(perturba_he_verify(out, -1.0), PERTURBA_OK);

        let mut text: *mut c_char = ptr::null_mut();
        assert_eq!(perturba_he_to_json(out, &mut text), PERTURBA_OK);
        let serialized = CStr::from_ptr(text).to_str().unwrap().to_owned();
        assert!(serialized.contains("\"L\""));
        assert!(serialized.contains("\"shift\""));

        // the serialized perturbed bundle parses and verifies again
        let reparse = CString::new(serialized).unwrap();
        let mut again: *mut PerturbaHe = ptr::null_mut();
        assert_eq!(perturba_he_parse(reparse.as_ptr(), &mut again), PERTURBA_OK);
        assert_eq!(perturba_he_verify(again, -1.0), PERTURBA_OK);

        perturba_string_free(text);
        perturba_he_free(again);
        perturba_he_free(out);
        perturba_he_free(he);
    }
}

#[test]
fn malformed_json_is_a_schema_error_with_message() {
    unsafe {
        let bad = CString::new("{\"L\": ").unwrap();
        let mut he: *mut PerturbaHe = ptr::null_mut();
        assert_eq!(perturba_he_parse(bad.as_ptr(), &mut he), PERTURBA_ERR_SCHEMA);
        assert!(he.is_null());
        assert!(last_error().contains("schema error"), "got: {}", last_error());
    }
}

#[test]
fn wrong_shape_is_a_schema_error() {
    unsafe {
        let bad = CString::new(
            r#"{
                "L": {"dims": {"0": 1}},
                "M": {"dims": {"0": 2, "1": 1}, "d": {"0": [[0, 1, 5]]}},
                "i": {"shift": 0, "blocks": {"0": [[1], [0]]}},
                "p": {"shift": 0, "blocks": {"0": [[1, 0]]}},
                "h": {"shift": -1, "blocks": {"1": [[0], [-1]]}}
            }"#,
        )
        .unwrap();
        let mut he: *mut PerturbaHe = ptr::null_mut();
        assert_eq!(perturba_he_parse(bad.as_ptr(), &mut he), PERTURBA_ERR_SCHEMA);
        assert!(last_error().contains("expected a 1x2 matrix"), "got: {}", last_error());
    }
}

#[test]
fn broken_homotopy_identity_is_a_math_error() {
    unsafe {
        // h = 0 breaks ip = 1 + dh + hd while every shape stays valid
        let bad = CString::new(
            r#"{
                "L": {"dims": {"0": 1}},
                "M": {"dims": {"0": 2, "1": 1}, "d": {"0": [[0, 1]]}},
                "i": {"shift": 0, "blocks": {"0": [[1], [0]]}},
                "p": {"shift": 0, "blocks": {"0": [[1, 0]]}},
                "h": {"shift": -1}
            }"#,
        )
        .unwrap();
        let mut he: *mut PerturbaHe = ptr::null_mut();
        assert_eq!(perturba_he_parse(bad.as_ptr(), &mut he), PERTURBA_OK);
        assert_eq!(perturba_he_verify(he, -1.0), PERTURBA_ERR_MATH);
        assert!(last_error().contains("homotopy identity"), "got: {}", last_error());
        perturba_he_free(he);
    }
}

#[test]
fn null_and_utf8_guards() {
    unsafe {
        let mut he: *mut PerturbaHe = ptr::null_mut();
        assert_eq!(perturba_he_parse(ptr::null(), &mut he), PERTURBA_ERR_NULL);
        assert_eq!(perturba_he_verify(ptr::null(), -1.0), PERTURBA_ERR_NULL);

        let json = sample("he.json");
        assert_eq!(perturba_he_parse(json.as_ptr(), ptr::null_mut()), PERTURBA_ERR_NULL);

        let bad_utf8 = [0xffu8, 0xfe, 0x00];
        assert_eq!(
            perturba_he_parse(bad_utf8.as_ptr() as *const c_char, &mut he),
            PERTURBA_ERR_UTF8
        );

        // frees ignore NULL
        perturba_he_free(ptr::null_mut());
        perturba_string_free(ptr::null_mut());
    }
}

#[test]
fn metric_verify_ok_and_math_failure() {
    unsafe {
        let good = sample("metric3.json");
        assert_eq!(perturba_metric_verify(good.as_ptr(), 4, -1.0), PERTURBA_OK);

        let neg = CString::new(r#"{"n": 2, "rho": [[0, "-1"], ["-1", 0]]}"#).unwrap();
        assert_eq!(perturba_metric_verify(neg.as_ptr(), 4, -1.0), PERTURBA_ERR_MATH);
        assert!(last_error().contains("positive"), "got: {}", last_error());

        let zero_den = CString::new(r#"{"n": 2, "rho": [[0, "1/0"], ["1/0", 0]]}"#).unwrap();
        assert_eq!(perturba_metric_verify(zero_den.as_ptr(), 4, -1.0), PERTURBA_ERR_SCHEMA);
        assert!(last_error().contains("denominator"), "got: {}", last_error());
    }
}

#[test]
fn lie_rigidity_certifies_sl2_and_rejects_heisenberg() {
    unsafe {
        let sl2 = sample("sl2.json");
        assert_eq!(perturba_lie_rigidity(sl2.as_ptr(), 0.5, 60, -1.0), PERTURBA_OK);

        // the Heisenberg algebra has H² ≠ 0
        let heis = CString::new(
            r#"{
                "dim": 3,
                "c": [
                    [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
                    [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
                    [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]
                ]
            }"#,
        )
        .unwrap();
        assert_eq!(perturba_lie_rigidity(heis.as_ptr(), 0.5, 60, -1.0), PERTURBA_ERR_MATH);
        assert!(last_error().contains("cohomology nonzero"), "got: {}", last_error());
    }
}
