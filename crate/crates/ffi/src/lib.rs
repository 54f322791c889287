//! C ABI over the polygon pipeline: opaque chain handles, integer status
//! codes, and a thread-local error message. Chains cross the boundary in
//! the floating backend only; complex buffers interleave re/im pairs.
//!
//! The companion header is `include/grasspenta.h`. Every function returns
//! `GP_OK` (0) on success; on failure the return code classifies the error
//! and `gp_last_error` carries the full message.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use grasspenta::json::{chain_to_json, parse_chain, AnyChain};
use grasspenta::lax::{apply_scaling, observable_deviation, spectral_samples};
use grasspenta::normalize::normalize_lift;
use grasspenta::pentamap::map_moduli;
use grasspenta::polygon::{random_regular_lift, Chain};
use grasspenta::{Error, DEFAULT_EPS};
use num::complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GP_OK: c_int = 0;
pub const GP_ERR_NULL_ARG: c_int = 1;
pub const GP_ERR_INVALID: c_int = 2;
pub const GP_ERR_JSON: c_int = 3;
pub const GP_ERR_NUMERIC: c_int = 4;
pub const GP_ERR_PANIC: c_int = 5;

/// Opaque handle over a moduli chain in the floating backend.
#[allow(non_camel_case_types)]
pub struct gp_chain {
    inner: Chain<Complex64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let stored = CString::new(msg)
        .unwrap_or_else(|_| CString::new("error message contained an interior NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = stored);
}

fn null_arg(name: &str) -> c_int {
    set_error(&format!("argument `{name}` must not be NULL"));
    GP_ERR_NULL_ARG
}

fn invalid(msg: &str) -> c_int {
    set_error(msg);
    GP_ERR_INVALID
}

fn fail(err: Error) -> c_int {
    let code = match err {
        Error::InvalidDims(_) | Error::NotCoprime { .. } | Error::ZeroInput(_) | Error::ZeroMu => {
            GP_ERR_INVALID
        }
        Error::Json(_) | Error::Parse(_) => GP_ERR_JSON,
        // Everything else is a degeneracy of the input polygon or of the
        // requested operation on it.
        _ => GP_ERR_NUMERIC,
    };
    set_error(&err.to_string());
    code
}

/// Panics must not unwind across the ABI; convert them to a status code.
fn guard(body: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            GP_ERR_PANIC
        }
    }
}

fn emit(out: *mut *mut gp_chain, chain: Chain<Complex64>) -> c_int {
    // SAFETY: callers have already checked `out` for NULL.
    unsafe { *out = Box::into_raw(Box::new(gp_chain { inner: chain })) };
    GP_OK
}

fn eps_or_default(tol: f64) -> f64 {
    if tol > 0.0 {
        tol
    } else {
        DEFAULT_EPS
    }
}

/// Message of the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; the string is
/// empty if no call has failed yet.
#[no_mangle]
pub extern "C" fn gp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Draws a random twisted N-gon in Gr(n, mn), normalizes it, and returns
/// the canonical moduli chain. The same seed always yields the same chain.
///
/// # Safety
/// `out` must point to writable storage for one `gp_chain*`.
#[no_mangle]
pub unsafe extern "C" fn gp_chain_random(
    n: usize,
    m: usize,
    big_n: usize,
    seed: u64,
    out: *mut *mut gp_chain,
) -> c_int {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lift = match random_regular_lift::<Complex64, _>(n, m, big_n, &mut rng, DEFAULT_EPS) {
            Ok(l) => l,
            Err(e) => return fail(e),
        };
        match normalize_lift(&lift, DEFAULT_EPS) {
            Ok((_, chain, _)) => emit(out, chain),
            Err(e) => fail(e),
        }
    })
}

/// Parses a chain from its JSON form. Rational-field files are rejected;
/// the C surface is floating-point only.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` must point to writable
/// storage for one `gp_chain*`.
#[no_mangle]
pub unsafe extern "C" fn gp_chain_from_json(json: *const c_char, out: *mut *mut gp_chain) -> c_int {
    guard(|| {
        if json.is_null() {
            return null_arg("json");
        }
        if out.is_null() {
            return null_arg("out");
        }
        // SAFETY: NUL termination is the caller's obligation, checked above
        // for NULL.
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => return invalid("json text is not valid UTF-8"),
        };
        match parse_chain(text) {
            Ok(AnyChain::Complex(chain)) => emit(out, chain),
            Ok(AnyChain::Rational(_)) => {
                invalid("rational chains are not supported over the C ABI")
            }
            Err(e) => fail(e),
        }
    })
}

/// Serializes a chain to JSON. The returned string is owned by the caller
/// and must be released with `gp_string_free`.
///
/// # Safety
/// `chain` must be a live handle from this library; `out` must point to
/// writable storage for one `char*`.
#[no_mangle]
pub unsafe extern "C" fn gp_chain_to_json(chain: *const gp_chain, out: *mut *mut c_char) -> c_int {
    guard(|| {
        if chain.is_null() {
            return null_arg("chain");
        }
        if out.is_null() {
            return null_arg("out");
        }
        // SAFETY: liveness of `chain` is the caller's obligation.
        let text = chain_to_json(&unsafe { &*chain }.inner);
        let stored = CString::new(text).expect("JSON never contains NUL");
        // SAFETY: `out` checked for NULL above.
        unsafe { *out = stored.into_raw() };
        GP_OK
    })
}

/// Writes the dimensions (n, m, N) of a chain.
///
/// # Safety
/// `chain` must be a live handle; `n`, `m`, and `big_n` must each point to
/// writable storage for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn gp_chain_dims(
    chain: *const gp_chain,
    n: *mut usize,
    m: *mut usize,
    big_n: *mut usize,
) -> c_int {
    guard(|| {
        if chain.is_null() {
            return null_arg("chain");
        }
        if n.is_null() {
            return null_arg("n");
        }
        if m.is_null() {
            return null_arg("m");
        }
        if big_n.is_null() {
            return null_arg("big_n");
        }
        // SAFETY: all pointers checked above; liveness is the caller's
        // obligation.
        unsafe {
            let c = &(*chain).inner;
            *n = c.n;
            *m = c.m;
            *big_n = c.big_n;
        }
        GP_OK
    })
}

/// Copies the invariant block a_k^i into `re_im`, row-major with
/// interleaved real and imaginary parts, 2*n*n doubles in total.
///
/// # Safety
/// `chain` must be a live handle and `re_im` must point to writable
/// storage for at least 2*n*n doubles.
#[no_mangle]
pub unsafe extern "C" fn gp_chain_block(
    chain: *const gp_chain,
    k: usize,
    i: usize,
    re_im: *mut f64,
) -> c_int {
    guard(|| {
        if chain.is_null() {
            return null_arg("chain");
        }
        if re_im.is_null() {
            return null_arg("re_im");
        }
        // SAFETY: liveness is the caller's obligation.
        let c = &unsafe { &*chain }.inner;
        if k >= c.big_n || i >= c.m {
            return invalid(&format!(
                "block index (k={k}, i={i}) out of range for N={}, m={}",
                c.big_n, c.m
            ));
        }
        let b = c.block(k, i);
        for r in 0..c.n {
            for col in 0..c.n {
                let v = b.at(r, col);
                // SAFETY: the caller guarantees room for 2*n*n doubles.
                unsafe {
                    *re_im.add(2 * (r * c.n + col)) = v.re;
                    *re_im.add(2 * (r * c.n + col) + 1) = v.im;
                }
            }
        }
        GP_OK
    })
}

/// Applies one step of the map and returns the canonically gauged image
/// chain. Pass `tol <= 0` for the library default tolerance.
///
/// # Safety
/// `chain` must be a live handle and `out` must point to writable storage
/// for one `gp_chain*`.
#[no_mangle]
pub unsafe extern "C" fn gp_chain_map(
    chain: *const gp_chain,
    tol: f64,
    out: *mut *mut gp_chain,
) -> c_int {
    guard(|| {
        if chain.is_null() {
            return null_arg("chain");
        }
        if out.is_null() {
            return null_arg("out");
        }
        // SAFETY: liveness is the caller's obligation.
        match map_moduli(&unsafe { &*chain }.inner, eps_or_default(tol)) {
            Ok((image, _)) => emit(out, image),
            Err(e) => fail(e),
        }
    })
}

/// Applies the scaling symmetry with parameter mu = mu_re + i*mu_im.
///
/// # Safety
/// `chain` must be a live handle and `out` must point to writable storage
/// for one `gp_chain*`.
#[no_mangle]
pub unsafe extern "C" fn gp_chain_scale(
    chain: *const gp_chain,
    mu_re: f64,
    mu_im: f64,
    out: *mut *mut gp_chain,
) -> c_int {
    guard(|| {
        if chain.is_null() {
            return null_arg("chain");
        }
        if out.is_null() {
            return null_arg("out");
        }
        // SAFETY: liveness is the caller's obligation.
        match apply_scaling(&unsafe { &*chain }.inner, Complex64::new(mu_re, mu_im)) {
            Ok(scaled) => emit(out, scaled),
            Err(e) => fail(e),
        }
    })
}

/// Characteristic polynomial of the parameter-twisted monodromy at
/// mu = mu_re + i*mu_im: mn + 1 complex coefficients, lowest degree first,
/// written as 2*(mn + 1) doubles. These coefficients are conserved by the
/// map when |mu| = 1.
///
/// # Safety
/// `chain` must be a live handle and `coeffs` must point to writable
/// storage for at least 2*(m*n + 1) doubles.
#[no_mangle]
pub unsafe extern "C" fn gp_chain_spectral_poly(
    chain: *const gp_chain,
    mu_re: f64,
    mu_im: f64,
    coeffs: *mut f64,
) -> c_int {
    guard(|| {
        if chain.is_null() {
            return null_arg("chain");
        }
        if coeffs.is_null() {
            return null_arg("coeffs");
        }
        // SAFETY: liveness is the caller's obligation.
        let c = &unsafe { &*chain }.inner;
        let samples = match spectral_samples(c, &[Complex64::new(mu_re, mu_im)]) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        for (j, v) in samples[0].iter().enumerate() {
            // SAFETY: the caller guarantees room for 2*(mn + 1) doubles.
            unsafe {
                *coeffs.add(2 * j) = v.re;
                *coeffs.add(2 * j + 1) = v.im;
            }
        }
        GP_OK
    })
}

/// Largest deviation of the gauge-invariant observables of two chains of
/// the same shape: monodromy characteristic polynomial plus the cyclic
/// block-product spectra.
///
/// # Safety
/// `a` and `b` must be live handles and `out` must point to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn gp_observable_deviation(
    a: *const gp_chain,
    b: *const gp_chain,
    out: *mut f64,
) -> c_int {
    guard(|| {
        if a.is_null() {
            return null_arg("a");
        }
        if b.is_null() {
            return null_arg("b");
        }
        if out.is_null() {
            return null_arg("out");
        }
        // SAFETY: liveness is the caller's obligation.
        let (ca, cb) = (&unsafe { &*a }.inner, &unsafe { &*b }.inner);
        if (ca.n, ca.m, ca.big_n) != (cb.n, cb.m, cb.big_n) {
            return invalid("chains have different shapes");
        }
        match observable_deviation(ca, cb) {
            Ok(dev) => {
                // SAFETY: `out` checked for NULL above.
                unsafe { *out = dev };
                GP_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a chain handle. NULL is a no-op.
///
/// # Safety
/// `chain` must be NULL or a handle returned by this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn gp_chain_free(chain: *mut gp_chain) {
    if chain.is_null() {
        return;
    }
    // SAFETY: single ownership is the caller's obligation.
    drop(unsafe { Box::from_raw(chain) });
}

/// Releases a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a string returned by this library that has not been
/// freed yet.
#[no_mangle]
pub unsafe extern "C" fn gp_string_free(s: *mut c_char) {
    if s.is_null() {
        return;
    }
    // SAFETY: single ownership is the caller's obligation.
    drop(unsafe { CString::from_raw(s) });
}
