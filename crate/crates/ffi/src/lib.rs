//! C ABI over `bmw-core`.
//!
//! Channels and designs are opaque heap handles created by `*_new` and
//! released by `*_free`. Every fallible function returns a [`BmwStatus`] and
//! writes results through out-pointers; on failure the message is available
//! from [`bmw_last_error_message`] on the same thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bmw_core::key_rate::{two_level_solve, GameEvaluator, DEFAULT_EPSILON};
use bmw_core::optimizer::{optimize_design, SearchMode};
use bmw_core::rate_engine::{fading_log_rate, wcs_secrecy_rate_with_jam, ChannelParams, CodeDesign};
use bmw_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NonConvergence = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmwSearchMode {
    Uniform = 0,
    Free = 1,
}

/// Opaque channel parameters.
pub struct BmwChannel(ChannelParams);

/// Opaque code design.
pub struct BmwDesign(CodeDesign);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BmwGameResult {
    /// 1-based interval index of Eve's best strategy.
    pub optimal_interval: usize,
    pub secrecy_rate: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BmwTwoLevelResult {
    pub secrecy_rate: f64,
    pub first_branch: f64,
    pub second_branch: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut v = e.borrow_mut();
        v.clear();
        v.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn clear_error() {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
}

fn status_of(e: &Error) -> BmwStatus {
    match e {
        Error::Domain(_) => BmwStatus::Domain,
        Error::NonConvergence(_) => BmwStatus::NonConvergence,
        _ => BmwStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (BmwStatus, String)>) -> BmwStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BmwStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BmwStatus::Panic
        }
    }
}

fn lift<T>(r: bmw_core::Result<T>) -> Result<T, (BmwStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (BmwStatus, String) {
    (BmwStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (BmwStatus, String)> {
    // SAFETY: the caller guarantees `p` is null or valid for reads.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (BmwStatus, String)> {
    // SAFETY: the caller guarantees `p` is null or valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (BmwStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and the caller guarantees `len` readable elements.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn write_buffer(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (BmwStatus, String)> {
    if len < src.len() {
        return Err((
            BmwStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    // SAFETY: `buf` is non-null and holds at least `src.len()` elements.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

/// Creates a channel handle. Free it with [`bmw_channel_free`].
///
/// # Safety
/// `out_channel` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bmw_channel_new(
    lambda_m: f64,
    lambda_w: f64,
    power: f64,
    jam: f64,
    noise_var: f64,
    out_channel: *mut *mut BmwChannel,
) -> BmwStatus {
    guard(|| {
        let slot = unsafe { out(out_channel, "out_channel") }?;
        let p = lift(ChannelParams::new(lambda_m, lambda_w, power, jam, noise_var))?;
        *slot = Box::into_raw(Box::new(BmwChannel(p)));
        Ok(())
    })
}

/// # Safety
/// `channel` must be null or a handle from [`bmw_channel_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bmw_channel_free(channel: *mut BmwChannel) {
    if !channel.is_null() {
        // SAFETY: the handle was created by Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(channel) });
    }
}

/// Creates a design with `len` thresholds and `len` power-splitting
/// coefficients (`len + 1` levels). Free it with [`bmw_design_free`].
///
/// # Safety
/// `thresholds` and `alphas` must each hold `len` readable values (they may
/// be null when `len` is 0); `out_design` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bmw_design_new(
    thresholds: *const f64,
    alphas: *const f64,
    len: usize,
    out_design: *mut *mut BmwDesign,
) -> BmwStatus {
    guard(|| {
        let slot = unsafe { out(out_design, "out_design") }?;
        let q = unsafe { slice(thresholds, len, "thresholds") }?.to_vec();
        let a = unsafe { slice(alphas, len, "alphas") }?.to_vec();
        let d = lift(CodeDesign::new(q, a))?;
        *slot = Box::into_raw(Box::new(BmwDesign(d)));
        Ok(())
    })
}

/// # Safety
/// `design` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bmw_design_free(design: *mut BmwDesign) {
    if !design.is_null() {
        // SAFETY: the handle was created by Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(design) });
    }
}

/// Number of levels of a design, 0 for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bmw_design_levels(design: *const BmwDesign) -> usize {
    // SAFETY: caller contract.
    unsafe { design.as_ref() }.map_or(0, |d| d.0.n())
}

/// Copies the thresholds and alphas of a design (`levels - 1` values each).
///
/// # Safety
/// Buffers must hold `len` writable values each.
#[no_mangle]
pub unsafe extern "C" fn bmw_design_parameters(
    design: *const BmwDesign,
    thresholds: *mut f64,
    alphas: *mut f64,
    len: usize,
) -> BmwStatus {
    guard(|| {
        let d = unsafe { deref(design, "design") }?;
        if d.0.n() == 1 {
            return Ok(());
        }
        unsafe { write_buffer(d.0.thresholds(), thresholds, len) }?;
        unsafe { write_buffer(d.0.alphas(), alphas, len) }
    })
}

/// `E[log2(1 + a·h / (b + c·h))]` for `h ~ Exp(lambda)`.
///
/// # Safety
/// `out_rate` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bmw_fading_log_rate(lambda: f64, a: f64, b: f64, c: f64, out_rate: *mut f64) -> BmwStatus {
    guard(|| {
        let slot = unsafe { out(out_rate, "out_rate") }?;
        *slot = lift(fading_log_rate(lambda, a, b, c))?;
        Ok(())
    })
}

/// Worst-case Wyner rate with effective jam power `jam_power`; pass a
/// negative value to use the channel's jamming budget.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bmw_wcs_secrecy_rate(channel: *const BmwChannel, jam_power: f64, out_rate: *mut f64) -> BmwStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel") }?;
        let slot = unsafe { out(out_rate, "out_rate") }?;
        let jam = if jam_power < 0.0 { ch.0.jam() } else { jam_power };
        *slot = lift(wcs_secrecy_rate_with_jam(&ch.0, jam))?;
        Ok(())
    })
}

/// Writes the level rates `R_1 … R_n` into `buf` (capacity `len`).
///
/// # Safety
/// Handles must be live; `buf` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn bmw_level_rates(
    channel: *const BmwChannel,
    design: *const BmwDesign,
    buf: *mut f64,
    len: usize,
) -> BmwStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel") }?;
        let d = unsafe { deref(design, "design") }?;
        let rates = lift(bmw_core::level_rates(&ch.0, &d.0))?;
        unsafe { write_buffer(rates.as_slice(), buf, len) }
    })
}

/// Game value of a design.
///
/// # Safety
/// Handles must be live; `out_result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bmw_solve_game(
    channel: *const BmwChannel,
    design: *const BmwDesign,
    out_result: *mut BmwGameResult,
) -> BmwStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel") }?;
        let d = unsafe { deref(design, "design") }?;
        let slot = unsafe { out(out_result, "out_result") }?;
        let g = lift(GameEvaluator::new(&ch.0, &d.0, DEFAULT_EPSILON).and_then(|e| e.solve_game()))?;
        *slot = BmwGameResult {
            optimal_interval: g.optimal_interval,
            secrecy_rate: g.secrecy_rate,
        };
        Ok(())
    })
}

/// Writes the key rate of every interval into `buf` (capacity `len`).
///
/// # Safety
/// Handles must be live; `buf` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn bmw_game_key_rates(
    channel: *const BmwChannel,
    design: *const BmwDesign,
    buf: *mut f64,
    len: usize,
) -> BmwStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel") }?;
        let d = unsafe { deref(design, "design") }?;
        let g = lift(GameEvaluator::new(&ch.0, &d.0, DEFAULT_EPSILON).and_then(|e| e.solve_game()))?;
        unsafe { write_buffer(&g.per_interval_key_rates, buf, len) }
    })
}

/// Two-level game value by direct case analysis.
///
/// # Safety
/// `channel` must be live; `out_result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bmw_two_level_solve(
    channel: *const BmwChannel,
    q1: f64,
    alpha1: f64,
    out_result: *mut BmwTwoLevelResult,
) -> BmwStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel") }?;
        let slot = unsafe { out(out_result, "out_result") }?;
        let s = lift(two_level_solve(&ch.0, q1, alpha1))?;
        *slot = BmwTwoLevelResult {
            secrecy_rate: s.secrecy_rate,
            first_branch: s.first_branch,
            second_branch: s.second_branch,
        };
        Ok(())
    })
}

/// Optimizes an `n`-level design. On success `*out_design` receives a new
/// handle owned by the caller.
///
/// # Safety
/// `channel` must be live; out-pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bmw_optimize_design(
    channel: *const BmwChannel,
    n: usize,
    mode: BmwSearchMode,
    budget: usize,
    out_design: *mut *mut BmwDesign,
    out_rate: *mut f64,
) -> BmwStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel") }?;
        let design_slot = unsafe { out(out_design, "out_design") }?;
        let rate_slot = unsafe { out(out_rate, "out_rate") }?;
        let mode = match mode {
            BmwSearchMode::Uniform => SearchMode::Uniform,
            BmwSearchMode::Free => SearchMode::Free,
        };
        let r = lift(optimize_design(&ch.0, n, mode, budget))?;
        *rate_slot = r.secrecy_rate;
        *design_slot = Box::into_raw(Box::new(BmwDesign(r.design)));
        Ok(())
    })
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string (truncated to fit) and returns the full message
/// length excluding the terminator. Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or hold `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bmw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            // SAFETY: `buf` holds at least `len > n` bytes.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bmw_version() -> *const c_char {
    const VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string contains NUL"),
    };
    VERSION.as_ptr()
}
