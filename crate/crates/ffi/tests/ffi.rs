//! Exercise the C ABI through the exported functions, the way a foreign
//! binding would.

use qsu2_ffi::*;
use std::ffi::CString;

#[test]
fn context_lifecycle_and_validation() {
    let ctx = qs_ctx_new(1, 2, 128);
    assert!(!ctx.is_null());
    unsafe { qs_ctx_free(ctx) };

    assert!(qs_ctx_new(1, 2, 32).is_null(), "precision too small");
    assert!(qs_ctx_new(3, 2, 128).is_null(), "q outside (0,1)");
    assert!(qs_ctx_new(1, 0, 128).is_null(), "zero denominator");
    unsafe { qs_ctx_free(std::ptr::null_mut()) };
}

#[test]
fn zeta_and_residue_round_trip() {
    let ctx = qs_ctx_new(1, 2, 128);
    let (mut re, mut im, mut tail) = (0.0, 0.0, 0.0);
    let st = unsafe { qs_zeta(ctx, 2.0, 1.0, 5.0, 0.0, &mut re, &mut im, &mut tail) };
    assert_eq!(st, QsStatus::Ok);
    assert!(re > 0.0 && im.abs() < 1e-12 && tail < 1e-20);

    // At the pole the status is PoleHit.
    let st = unsafe { qs_zeta(ctx, 2.0, 1.0, 3.0, 0.0, &mut re, &mut im, &mut tail) };
    assert_eq!(st, QsStatus::PoleHit);

    let (mut res, mut err) = (0.0, 0.0);
    let st = unsafe { qs_residue(ctx, 2.0, 1.0, 3.0, 0, &mut res, &mut err) };
    assert_eq!(st, QsStatus::Ok);
    assert!((res - 14.6074).abs() < 5e-4, "residue {res}");
    assert!(err < 1e-8);

    // Gamma-weighted residue two steps below the dimension vanishes at a = 2.
    let st = unsafe { qs_residue(ctx, 2.0, 1.0, 1.0, 1, &mut res, &mut err) };
    assert_eq!(st, QsStatus::Ok);
    assert!(res.abs() < 1e-10);

    // b = 0 is a double pole.
    let st = unsafe { qs_residue(ctx, 2.0, 0.0, 2.0, 0, &mut res, &mut err) };
    assert_eq!(st, QsStatus::DoublePole);

    unsafe { qs_ctx_free(ctx) };
}

#[test]
fn spectral_dimension_values() {
    let mut n = 0.0;
    let st = unsafe { qs_spectral_dimension(2.0, 1.0, &mut n) };
    assert_eq!(st, QsStatus::Ok);
    assert_eq!(n, 3.0);
    let st = unsafe { qs_spectral_dimension(0.5, 1.0, &mut n) };
    assert_eq!(st, QsStatus::InvalidParams);
}

#[test]
fn haar_state_and_comparison() {
    let ctx = qs_ctx_new(1, 4, 128);
    let expr = CString::new("b c").unwrap();
    let mut h = 0.0;
    let st = unsafe { qs_haar_state(ctx, expr.as_ptr(), &mut h) };
    assert_eq!(st, QsStatus::Ok);
    assert!((h + 4.0 / 17.0).abs() < 1e-15, "haar {h}");

    let (mut phi, mut hh, mut pass) = (0.0, 0.0, 0);
    let st = unsafe {
        qs_haar_check(ctx, expr.as_ptr(), 2.0, 1e-9, &mut phi, &mut hh, &mut pass)
    };
    assert_eq!(st, QsStatus::Ok);
    assert_eq!(pass, 1);
    assert!((phi - hh).abs() < 1e-9);

    let bad = CString::new("z q").unwrap();
    let st = unsafe {
        qs_haar_check(ctx, bad.as_ptr(), 2.0, 1e-9, &mut phi, &mut hh, &mut pass)
    };
    assert_eq!(st, QsStatus::ParseError);

    unsafe { qs_ctx_free(ctx) };
}

#[test]
fn scan_finds_the_root() {
    let ctx = qs_ctx_new(1, 2, 128);
    let mut root = 0.0;
    let st = unsafe { qs_scan_a2(ctx, 1.2, 3.5, &mut root) };
    assert_eq!(st, QsStatus::Ok);
    assert!((root - 2.0).abs() < 1e-8);

    let st = unsafe { qs_scan_a2(ctx, 2.5, 3.5, &mut root) };
    assert_eq!(st, QsStatus::CheckFailed);
    unsafe { qs_ctx_free(ctx) };
}

#[test]
fn null_pointers_are_rejected() {
    let ctx = qs_ctx_new(1, 2, 128);
    let mut x = 0.0;
    unsafe {
        assert_eq!(
            qs_zeta(std::ptr::null(), 2.0, 1.0, 5.0, 0.0, &mut x, &mut x, &mut x),
            QsStatus::NullPointer
        );
        assert_eq!(
            qs_zeta(ctx, 2.0, 1.0, 5.0, 0.0, std::ptr::null_mut(), &mut x, &mut x),
            QsStatus::NullPointer
        );
        let mut pass = 0;
        assert_eq!(
            qs_haar_check(ctx, std::ptr::null(), 2.0, 1e-9, &mut x, &mut x, &mut pass),
            QsStatus::NullPointer
        );
        qs_ctx_free(ctx);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = qs_version();
    assert!(!v.is_null());
    let s = unsafe { std::ffi::CStr::from_ptr(v) }.to_str().unwrap();
    assert!(!s.is_empty());
}

#[test]
fn generated_header_covers_the_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("qsu2.h");
    let text = std::fs::read_to_string(&header).expect("header generated by the build script");
    for symbol in [
        "QsStatus",
        "QsCtx",
        "qs_ctx_new",
        "qs_ctx_free",
        "qs_zeta",
        "qs_residue",
        "qs_spectral_dimension",
        "qs_haar_state",
        "qs_haar_check",
        "qs_scan_a2",
        "qs_version",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}
