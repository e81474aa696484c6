//! C ABI for `mimo-rfsel`.
//!
//! Objects cross the boundary as opaque handles created by `mrs_*` constructors
//! and released with the matching `*_free` function. Every call returns an
//! [`MrsStatus`]; on failure a description is available from
//! [`mrs_last_error`] on the calling thread. Panics are caught and reported as
//! [`MrsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mimo_rfsel::allocation::{
    average_sum_rate_closed_form, optimal_rf_count_analytic, waterfill, CircuitBudget,
};
use mimo_rfsel::channel::{draw_drop, trial_rng, ChannelRealization, DropParams, LargeScale};
use mimo_rfsel::selection::{
    bfs_select, complexity_estimate, greedy_select, random_select, ComplexityAlgo, GreedyOptions,
    SelectionResult,
};
use mimo_rfsel::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    Singular = 4,
    Capacity = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Values accepted by the `algo` argument of [`mrs_complexity_estimate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrsComplexityAlgo {
    Bfs = 0,
    Greedy = 1,
}

/// Channel realization: a K x N fading matrix plus per-user large-scale gains.
pub struct MrsChannel {
    inner: ChannelRealization,
}

/// Outcome of an antenna selection run.
pub struct MrsSelection {
    inner: SelectionResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> MrsStatus {
    match e {
        Error::Singular { .. } => MrsStatus::Singular,
        Error::InfeasibleSubset { .. } | Error::Infeasible(_) => MrsStatus::Infeasible,
        Error::Capacity { .. } => MrsStatus::Capacity,
        _ => MrsStatus::InvalidArgument,
    }
}

struct Fail(MrsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(MrsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MrsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            MrsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            MrsStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn channel_ref<'a>(ch: *const MrsChannel) -> Result<&'a ChannelRealization, Fail> {
    ch.as_ref().map(|c| &c.inner).ok_or_else(|| null("channel"))
}

/// Static description of a status code; unknown codes get a generic text.
#[no_mangle]
pub extern "C" fn mrs_status_message(status: i32) -> *const c_char {
    const TABLE: [(MrsStatus, &CStr); 8] = [
        (MrsStatus::Ok, c"ok"),
        (MrsStatus::NullPointer, c"null pointer argument"),
        (MrsStatus::InvalidArgument, c"invalid argument"),
        (MrsStatus::Infeasible, c"infeasible problem instance"),
        (MrsStatus::Singular, c"singular Gram matrix"),
        (MrsStatus::Capacity, c"enumeration cap exceeded"),
        (MrsStatus::BufferTooSmall, c"output buffer too small"),
        (MrsStatus::Panic, c"internal panic"),
    ];
    TABLE
        .iter()
        .find(|(s, _)| *s as i32 == status)
        .map_or(c"unknown status", |(_, m)| m)
        .as_ptr()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next `mrs_*` call on the same thread.
#[no_mangle]
pub extern "C" fn mrs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Draws users uniformly in an annulus and an i.i.d. Rayleigh channel from
/// the substream `(master_seed, trial_index)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mrs_channel_draw(
    users: usize,
    antennas: usize,
    alpha: f64,
    cell_radius: f64,
    min_distance: f64,
    master_seed: u64,
    trial_index: u64,
    out: *mut *mut MrsChannel,
) -> MrsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = DropParams {
            users,
            antennas,
            alpha,
            cell_radius,
            min_distance,
        };
        let drop = draw_drop(&params, &mut trial_rng(master_seed, trial_index))?;
        *out = Box::into_raw(Box::new(MrsChannel {
            inner: drop.channel,
        }));
        Ok(())
    })
}

/// Builds a channel from a row-major K x N matrix given as separate real and
/// imaginary arrays, and K large-scale gains (`NULL` for unit gains).
///
/// # Safety
/// `re` and `im` must point to `users * antennas` doubles, `gains` to `users`
/// doubles or be null, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mrs_channel_from_parts(
    users: usize,
    antennas: usize,
    re: *const f64,
    im: *const f64,
    gains: *const f64,
    alpha: f64,
    out: *mut *mut MrsChannel,
) -> MrsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = users
            .checked_mul(antennas)
            .ok_or_else(|| Fail(MrsStatus::InvalidArgument, "matrix size overflows".into()))?;
        let re = slice(re, len, "re")?;
        let im = slice(im, len, "im")?;
        let h = DMatrix::from_fn(users, antennas, |k, n| {
            Complex64::new(re[k * antennas + n], im[k * antennas + n])
        });
        let large_scale = if gains.is_null() {
            LargeScale::unit(users)
        } else {
            LargeScale::from_gains(slice(gains, users, "gains")?.to_vec(), alpha)?
        };
        let channel = ChannelRealization::new(h, large_scale, 0)?;
        *out = Box::into_raw(Box::new(MrsChannel { inner: channel }));
        Ok(())
    })
}

/// Number of users (rows), or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mrs_channel_users(ch: *const MrsChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.inner.users())
}

/// Number of antennas (columns), or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mrs_channel_antennas(ch: *const MrsChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.inner.antennas())
}

/// # Safety
/// `ch` must be null or a handle from `mrs_channel_*` not freed before.
#[no_mangle]
pub unsafe extern "C" fn mrs_channel_free(ch: *mut MrsChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

unsafe fn select_with(
    ch: *const MrsChannel,
    p_max: f64,
    p_c: f64,
    out: *mut *mut MrsSelection,
    run: impl FnOnce(&ChannelRealization, &CircuitBudget) -> mimo_rfsel::Result<SelectionResult>,
) -> MrsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let channel = channel_ref(ch)?;
        let budget = CircuitBudget::new(p_max, p_c)?;
        let inner = run(channel, &budget)?;
        *out = Box::into_raw(Box::new(MrsSelection { inner }));
        Ok(())
    })
}

/// Greedy RF-chain count and antenna selection. A nonzero `keep_best`
/// returns the best visited point instead of the first-decrease stop.
///
/// # Safety
/// `ch` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mrs_select_greedy(
    ch: *const MrsChannel,
    p_max: f64,
    p_c: f64,
    keep_best: i32,
    out: *mut *mut MrsSelection,
) -> MrsStatus {
    select_with(ch, p_max, p_c, out, |c, b| {
        greedy_select(
            c,
            b,
            &GreedyOptions {
                keep_best: keep_best != 0,
                ..Default::default()
            },
        )
    })
}

/// Exhaustive search over all subsets of feasible size, refusing to enumerate
/// more than `cap` subsets.
///
/// # Safety
/// `ch` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mrs_select_bfs(
    ch: *const MrsChannel,
    p_max: f64,
    p_c: f64,
    cap: u64,
    out: *mut *mut MrsSelection,
) -> MrsStatus {
    select_with(ch, p_max, p_c, out, |c, b| bfs_select(c, b, cap as u128))
}

/// Uniformly random subset of `chains` antennas with water-filling.
///
/// # Safety
/// `ch` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mrs_select_random(
    ch: *const MrsChannel,
    p_max: f64,
    p_c: f64,
    chains: usize,
    seed: u64,
    out: *mut *mut MrsSelection,
) -> MrsStatus {
    select_with(ch, p_max, p_c, out, |c, b| {
        random_select(c, b, chains, &mut trial_rng(seed, 0))
    })
}

/// Selected chain count, or 0 for a null handle.
///
/// # Safety
/// `sel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mrs_selection_chains(sel: *const MrsSelection) -> usize {
    sel.as_ref().map_or(0, |s| s.inner.chains)
}

/// Sum-rate in bit/s/Hz, or NaN for a null handle.
///
/// # Safety
/// `sel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mrs_selection_rate(sel: *const MrsSelection) -> f64 {
    sel.as_ref().map_or(f64::NAN, |s| s.inner.rate)
}

/// ZF normalization factor of the selected subset, or NaN for a null handle.
///
/// # Safety
/// `sel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mrs_selection_eta_sq(sel: *const MrsSelection) -> f64 {
    sel.as_ref().map_or(f64::NAN, |s| s.inner.eta_sq)
}

/// Total transmit power, or NaN for a null handle.
///
/// # Safety
/// `sel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mrs_selection_p_out(sel: *const MrsSelection) -> f64 {
    sel.as_ref().map_or(f64::NAN, |s| s.inner.p_out())
}

unsafe fn copy_out<T: Copy>(
    items: &[T],
    buf: *mut T,
    cap: usize,
    len: *mut usize,
) -> Result<(), Fail> {
    if len.is_null() {
        return Err(null("len"));
    }
    *len = items.len();
    if cap < items.len() {
        return Err(Fail(
            MrsStatus::BufferTooSmall,
            format!("buffer holds {cap} items, {} needed", items.len()),
        ));
    }
    if !items.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(items.as_ptr(), buf, items.len());
    }
    Ok(())
}

/// Copies the ascending antenna indices into `buf`. `*len` always receives the
/// required length; `MRS_STATUS_BUFFER_TOO_SMALL` is returned if `cap` is short.
///
/// # Safety
/// `sel` must be a live handle, `buf` must hold `cap` elements, `len` writable.
#[no_mangle]
pub unsafe extern "C" fn mrs_selection_subset(
    sel: *const MrsSelection,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> MrsStatus {
    guard(|| {
        let sel = sel.as_ref().ok_or_else(|| null("selection"))?;
        copy_out(&sel.inner.subset, buf, cap, len)
    })
}

/// Copies the per-user transmit powers into `buf`, with the same length
/// protocol as [`mrs_selection_subset`].
///
/// # Safety
/// `sel` must be a live handle, `buf` must hold `cap` elements, `len` writable.
#[no_mangle]
pub unsafe extern "C" fn mrs_selection_powers(
    sel: *const MrsSelection,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> MrsStatus {
    guard(|| {
        let sel = sel.as_ref().ok_or_else(|| null("selection"))?;
        copy_out(&sel.inner.allocation.powers, buf, cap, len)
    })
}

/// # Safety
/// `sel` must be null or a handle from `mrs_select_*` not freed before.
#[no_mangle]
pub unsafe extern "C" fn mrs_selection_free(sel: *mut MrsSelection) {
    if !sel.is_null() {
        drop(Box::from_raw(sel));
    }
}

/// Chain count maximizing the closed-form average sum-rate.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mrs_optimal_rf_count(
    users: usize,
    p_max: f64,
    p_c: f64,
    out: *mut usize,
) -> MrsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = optimal_rf_count_analytic(users, &CircuitBudget::new(p_max, p_c)?)?;
        Ok(())
    })
}

/// Closed-form average sum-rate with `chains` active RF chains.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mrs_average_sum_rate(
    chains: usize,
    users: usize,
    p_max: f64,
    p_c: f64,
    out: *mut f64,
) -> MrsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = average_sum_rate_closed_form(chains, users, &CircuitBudget::new(p_max, p_c)?)?;
        Ok(())
    })
}

/// Water-filling of `budget` over `len` positive effective gains; writes `len`
/// powers to `powers`.
///
/// # Safety
/// `gains` must hold `len` doubles and `powers` room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mrs_waterfill(
    gains: *const f64,
    len: usize,
    budget: f64,
    powers: *mut f64,
) -> MrsStatus {
    guard(|| {
        let gains = slice(gains, len, "gains")?;
        let wf = waterfill(gains, budget)?;
        let mut written = 0;
        copy_out(&wf.powers, powers, len, &mut written)
    })
}

/// Operation-count estimate as a decimal string, released with
/// [`mrs_string_free`]. `algo` takes an [`MrsComplexityAlgo`] value.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mrs_complexity_estimate(
    antennas: usize,
    users: usize,
    max_chains: usize,
    algo: u32,
    out: *mut *mut c_char,
) -> MrsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let algo = match algo {
            a if a == MrsComplexityAlgo::Bfs as u32 => ComplexityAlgo::Bfs,
            a if a == MrsComplexityAlgo::Greedy as u32 => ComplexityAlgo::Greedy,
            a => {
                return Err(Fail(
                    MrsStatus::InvalidArgument,
                    format!("unknown algorithm {a}"),
                ))
            }
        };
        let text = complexity_estimate(antennas, users, max_chains, algo).to_string();
        *out = CString::new(text).expect("digits only").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn mrs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
