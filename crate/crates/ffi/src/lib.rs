//! C ABI for the qsu2 library.
//!
//! Callers create an opaque context holding the deformation parameter and
//! working precision, then evaluate zeta values, residues, Haar comparisons
//! and the residue-root scan through plain functions returning status codes.
//! Results are reported as doubles; the full-precision surface stays on the
//! Rust side. The generated header lives at `include/qsu2.h`.
//!
//! Thread safety: a context is immutable after creation and may be shared
//! across threads; all functions are reentrant.

use libc::{c_char, c_int};
use qsu2::integral::{IntegralContext, WeightSpec};
use qsu2::numerics::DeformationParameter;
use qsu2::zeta::{
    a2_criterion_scan, residue, residue_gamma_weighted, spectral_dimension, zeta_closed,
    ResidueMode, ZetaParams,
};
use qsu2::Error;
use rug::{Complex, Rational};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QsStatus {
    Ok = 0,
    /// A verification or comparison failed its tolerance.
    CheckFailed = 1,
    /// Structurally invalid parameters (q outside (0,1), a +- b <= 0, ...).
    InvalidParams = 2,
    /// Evaluation point too close to a pole of the zeta function.
    PoleHit = 3,
    /// Residue requested at a double pole (b = 0).
    DoublePole = 4,
    /// The gamma factor has a pole at the requested point.
    GammaPole = 5,
    /// Malformed expression text.
    ParseError = 6,
    /// A required pointer argument was null.
    NullPointer = 7,
}

fn status_of(e: &Error) -> QsStatus {
    match e {
        Error::PoleHit { .. } => QsStatus::PoleHit,
        Error::DoublePole { .. } => QsStatus::DoublePole,
        Error::GammaPole { .. } => QsStatus::GammaPole,
        Error::Parse(_) => QsStatus::ParseError,
        Error::DivergentParameters { .. }
        | Error::InvalidParameter(_)
        | Error::SeriesDivergence { .. } => QsStatus::InvalidParams,
    }
}

/// Opaque evaluation context: deformation parameter and working precision.
pub struct QsCtx {
    dp: DeformationParameter,
    prec: u32,
}

/// Create a context for q = q_num/q_den at the given precision (bits).
/// Returns null when the parameters are invalid (q outside (0,1), zero
/// denominator, precision below 64).
#[no_mangle]
pub extern "C" fn qs_ctx_new(q_num: i64, q_den: i64, prec: u32) -> *mut QsCtx {
    if q_den == 0 || prec < 64 {
        return std::ptr::null_mut();
    }
    match DeformationParameter::from_q(Rational::from((q_num, q_den))) {
        Ok(dp) => Box::into_raw(Box::new(QsCtx { dp, prec })),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Free a context created by `qs_ctx_new`. Null is accepted and ignored.
///
/// # Safety
/// `ctx` must be a pointer previously returned by `qs_ctx_new` and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn qs_ctx_free(ctx: *mut QsCtx) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

unsafe fn write_out<T>(ptr: *mut T, value: T) -> bool {
    if ptr.is_null() {
        return false;
    }
    *ptr = value;
    true
}

/// Evaluate the closed-form zeta function at z = z_re + i z_im for the
/// weight exponents (a, b); writes value and tail bound.
///
/// # Safety
/// `ctx` must be a live context; output pointers must be valid or null
/// (null outputs are an error).
#[no_mangle]
pub unsafe extern "C" fn qs_zeta(
    ctx: *const QsCtx,
    a: f64,
    b: f64,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    out_tail: *mut f64,
) -> QsStatus {
    let Some(ctx) = ctx.as_ref() else {
        return QsStatus::NullPointer;
    };
    if out_re.is_null() || out_im.is_null() || out_tail.is_null() {
        return QsStatus::NullPointer;
    }
    let params = ZetaParams::new(ctx.dp.clone(), a, b);
    let z = Complex::with_val(ctx.prec, (z_re, z_im));
    match zeta_closed(&params, &z, ctx.prec, 1e-30) {
        Ok(v) => {
            write_out(out_re, v.value.real().to_f64());
            write_out(out_im, v.value.imag().to_f64());
            write_out(out_tail, v.tail_bound.to_f64());
            QsStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Spectral dimension a + |b| of the weight; fails when a +- b <= 0.
///
/// # Safety
/// `out_n` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_spectral_dimension(a: f64, b: f64, out_n: *mut f64) -> QsStatus {
    if out_n.is_null() {
        return QsStatus::NullPointer;
    }
    let dp = DeformationParameter::from_q(Rational::from((1, 2))).expect("static parameter");
    match spectral_dimension(&ZetaParams::new(dp, a, b)) {
        Ok(n) => {
            write_out(out_n, n);
            QsStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Residue of the zeta function at the real point z0 (optionally weighted by
/// the gamma function there). Writes the residue and the measured error
/// bound of the internal numeric-limit cross-check.
///
/// # Safety
/// `ctx` must be a live context; `out_re` and `out_err` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_residue(
    ctx: *const QsCtx,
    a: f64,
    b: f64,
    z0: f64,
    gamma_weighted: c_int,
    out_re: *mut f64,
    out_err: *mut f64,
) -> QsStatus {
    let Some(ctx) = ctx.as_ref() else {
        return QsStatus::NullPointer;
    };
    if out_re.is_null() || out_err.is_null() {
        return QsStatus::NullPointer;
    }
    let params = ZetaParams::new(ctx.dp.clone(), a, b);
    let result = if gamma_weighted != 0 {
        residue_gamma_weighted(&params, z0, ctx.prec, ResidueMode::Verified)
    } else {
        residue(&params, z0, ctx.prec, ResidueMode::Verified)
    };
    match result {
        Ok(rep) => {
            write_out(out_re, rep.residue.real().to_f64());
            write_out(out_err, rep.error_bound.to_f64());
            QsStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Value of the Haar state on an algebra element given in the plain-text
/// monomial syntax (e.g. "b c" or "a^2 b + -1/4 d").
///
/// # Safety
/// `ctx` must be a live context; `expr` must be a NUL-terminated string;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_haar_state(
    ctx: *const QsCtx,
    expr: *const c_char,
    out: *mut f64,
) -> QsStatus {
    let Some(ctx) = ctx.as_ref() else {
        return QsStatus::NullPointer;
    };
    if expr.is_null() || out.is_null() {
        return QsStatus::NullPointer;
    }
    let Ok(text) = std::ffi::CStr::from_ptr(expr).to_str() else {
        return QsStatus::ParseError;
    };
    let alg = qsu2::qalgebra::AlgebraContext::new(ctx.dp.clone());
    match alg.parse(text) {
        Ok(x) => {
            let h = alg.haar_state(&x);
            let f = match qsu2::numerics::FloatContext::new(ctx.dp.clone(), ctx.prec) {
                Ok(f) => f,
                Err(e) => return status_of(&e),
            };
            write_out(out, f.exact_to_float(&h).to_f64());
            QsStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Compare the normalized non-commutative integral of an expression against
/// the Haar state at weight exponent a: writes both values and a pass flag
/// for the given tolerance. Returns `CheckFailed` when the comparison
/// exceeds the tolerance.
///
/// # Safety
/// As `qs_haar_state`; `out_phi`, `out_h`, `out_pass` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_haar_check(
    ctx: *const QsCtx,
    expr: *const c_char,
    a: f64,
    tol: f64,
    out_phi: *mut f64,
    out_h: *mut f64,
    out_pass: *mut c_int,
) -> QsStatus {
    let Some(ctx) = ctx.as_ref() else {
        return QsStatus::NullPointer;
    };
    if expr.is_null() || out_phi.is_null() || out_h.is_null() || out_pass.is_null() {
        return QsStatus::NullPointer;
    }
    let Ok(text) = std::ffi::CStr::from_ptr(expr).to_str() else {
        return QsStatus::ParseError;
    };
    let ictx = match IntegralContext::new(ctx.dp.clone(), WeightSpec::haar(a), ctx.prec) {
        Ok(i) => i,
        Err(e) => return status_of(&e),
    };
    let x = match ictx.algebra().parse(text) {
        Ok(x) => x,
        Err(e) => return status_of(&e),
    };
    match ictx.haar_equality_check(&x, tol) {
        Ok(rep) => {
            write_out(out_phi, rep.whole_value);
            write_out(out_h, rep.whole_haar);
            write_out(out_pass, if rep.pass { 1 } else { 0 });
            if rep.pass {
                QsStatus::Ok
            } else {
                QsStatus::CheckFailed
            }
        }
        Err(e) => status_of(&e),
    }
}

/// Scan weight exponents (with b = 1) for the root of the residue two steps
/// below the spectral dimension. Writes the root location; returns
/// `CheckFailed` when no sign change lies in the range.
///
/// # Safety
/// `ctx` must be a live context; `out_root` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_scan_a2(
    ctx: *const QsCtx,
    a_min: f64,
    a_max: f64,
    out_root: *mut f64,
) -> QsStatus {
    let Some(ctx) = ctx.as_ref() else {
        return QsStatus::NullPointer;
    };
    if out_root.is_null() {
        return QsStatus::NullPointer;
    }
    match a2_criterion_scan(&ctx.dp, a_min, a_max, ctx.prec) {
        Ok(rep) => match rep.a_star {
            Some(root) => {
                write_out(out_root, root);
                QsStatus::Ok
            }
            None => QsStatus::CheckFailed,
        },
        Err(e) => status_of(&e),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
