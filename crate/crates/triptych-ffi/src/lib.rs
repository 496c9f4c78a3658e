//! C ABI for the triptych library: opaque scheme handles, integer status
//! codes, and JSON strings for structured results. The generated header
//! lands in include/triptych.h.
//!
//! Conventions: every function returns a `TriptychStatus`; out-parameters
//! are written only on `Ok`; strings returned through out-parameters are
//! owned by the caller and must be released with `triptych_string_free`;
//! `triptych_last_error_message` describes the most recent failure on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use triptych::codespace::CodeSpace;
use triptych::infotheory::{DensityMatrix, Label, LogBase};
use triptych::scheme::SchemeSpec;
use triptych::verifier::{certify, Verdict};
use triptych::{Error, Party};

/// Status codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriptychStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotOrthonormal = 3,
    RecoveryImpossible = 4,
    ParseError = 5,
    Internal = 6,
}

/// Verdict of a certification run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriptychVerdict {
    Perfect = 0,
    Imperfect = 1,
    Invalid = 2,
}

/// Opaque handle to a constructed code space.
pub struct TriptychScheme {
    inner: CodeSpace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&ch| ch != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn fail(e: &Error) -> TriptychStatus {
    set_error(&e.to_string());
    match e {
        Error::Dimension(_) | Error::Validation(_) | Error::InvalidDensity(_) => {
            TriptychStatus::InvalidArgument
        }
        Error::NotOrthonormal { .. } => TriptychStatus::NotOrthonormal,
        Error::RecoveryImpossible { .. } => TriptychStatus::RecoveryImpossible,
        Error::Json(_) => TriptychStatus::ParseError,
        _ => TriptychStatus::Internal,
    }
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn triptych_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn make_scheme(
    built: triptych::Result<CodeSpace>,
    out: *mut *mut TriptychScheme,
) -> TriptychStatus {
    if out.is_null() {
        return TriptychStatus::NullPointer;
    }
    match built {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(TriptychScheme { inner })) };
            TriptychStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Builds the cyclic-shift scheme with parameters (d, k1, k2).
#[no_mangle]
pub extern "C" fn triptych_scheme_shift(
    d: usize,
    k1: usize,
    k2: usize,
    out: *mut *mut TriptychScheme,
) -> TriptychStatus {
    make_scheme(
        triptych::codespace::shift_code(d, k1, k2).and_then(CodeSpace::from_tensor),
        out,
    )
}

/// Builds the shift/phase scheme in which party 3 holds the phase leg.
#[no_mangle]
pub extern "C" fn triptych_scheme_vip(d: usize, out: *mut *mut TriptychScheme) -> TriptychStatus {
    make_scheme(
        triptych::codespace::vip_code(d).and_then(CodeSpace::from_tensor),
        out,
    )
}

/// Parses a scheme description (same JSON format the CLI uses) and builds
/// its code space.
#[no_mangle]
pub unsafe extern "C" fn triptych_scheme_from_json(
    json: *const c_char,
    out: *mut *mut TriptychScheme,
) -> TriptychStatus {
    if json.is_null() {
        return TriptychStatus::NullPointer;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("scheme JSON is not valid UTF-8");
            return TriptychStatus::ParseError;
        }
    };
    let built = serde_json::from_str::<SchemeSpec>(text)
        .map_err(Error::from)
        .and_then(|spec| spec.codespace());
    make_scheme(built, out)
}

/// Releases a scheme handle. Passing NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn triptych_scheme_free(scheme: *mut TriptychScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Number of encodable secrets (the rank of the code space).
#[no_mangle]
pub unsafe extern "C" fn triptych_scheme_rank(
    scheme: *const TriptychScheme,
    out: *mut usize,
) -> TriptychStatus {
    if scheme.is_null() || out.is_null() {
        return TriptychStatus::NullPointer;
    }
    *out = (*scheme).inner.rank();
    TriptychStatus::Ok
}

/// Runs the full threshold certification. `out_report_json`, when
/// non-NULL, receives the serialized report; free it with
/// `triptych_string_free`.
#[no_mangle]
pub unsafe extern "C" fn triptych_certify(
    scheme: *const TriptychScheme,
    n_secrets: usize,
    seed: u64,
    tol: f64,
    out_verdict: *mut TriptychVerdict,
    out_report_json: *mut *mut c_char,
) -> TriptychStatus {
    if scheme.is_null() || out_verdict.is_null() {
        return TriptychStatus::NullPointer;
    }
    let report = match certify(&(*scheme).inner, n_secrets, seed, tol) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    *out_verdict = match report.verdict {
        Verdict::Perfect => TriptychVerdict::Perfect,
        Verdict::Imperfect => TriptychVerdict::Imperfect,
        Verdict::Invalid => TriptychVerdict::Invalid,
    };
    if !out_report_json.is_null() {
        let json = match serde_json::to_string(&report) {
            Ok(j) => j,
            Err(e) => return fail(&Error::from(e)),
        };
        *out_report_json = CString::new(json).unwrap().into_raw();
    }
    TriptychStatus::Ok
}

/// Erases party `erased` (1, 2 or 3), runs the recovery channel on the
/// maximally mixed secret, and reports the Uhlmann fidelity.
#[no_mangle]
pub unsafe extern "C" fn triptych_recover_fidelity(
    scheme: *const TriptychScheme,
    erased: u32,
    out_fidelity: *mut f64,
) -> TriptychStatus {
    if scheme.is_null() || out_fidelity.is_null() {
        return TriptychStatus::NullPointer;
    }
    let party = match erased {
        1 => Party::P1,
        2 => Party::P2,
        3 => Party::P3,
        other => {
            set_error(&format!("party index {other} out of range 1..=3"));
            return TriptychStatus::InvalidArgument;
        }
    };
    let cs = &(*scheme).inner;
    let secret = DensityMatrix::maximally_mixed(Label::R, cs.rank());
    match cs.recover(&secret, party) {
        Ok(result) => {
            *out_fidelity = result.fidelity;
            TriptychStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Tripartite information of the uniform purification, in bits. Equals
/// -2 log2 d exactly when the scheme is a perfect threshold scheme.
#[no_mangle]
pub unsafe extern "C" fn triptych_uniform_i3_bits(
    scheme: *const TriptychScheme,
    out_i3: *mut f64,
) -> TriptychStatus {
    if scheme.is_null() || out_i3.is_null() {
        return TriptychStatus::NullPointer;
    }
    let cs = &(*scheme).inner;
    let run = || -> triptych::Result<f64> {
        let phi = cs.uniform_purification()?;
        let info = triptych::infotheory::tripartite_information_purified(&phi, LogBase::Bits)?;
        Ok(info.value.value)
    };
    match run() {
        Ok(v) => {
            *out_i3 = v;
            TriptychStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Frees a string allocated by this library. Passing NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn triptych_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
