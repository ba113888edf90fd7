//! C ABI over `wcascade`.
//!
//! States cross the boundary as opaque `WcState` handles owned by the caller
//! and released with `wc_state_free`. Every fallible call returns a
//! `WcStatus`; on failure `wc_last_error_message` describes the most recent
//! error on the calling thread. Panics are caught and reported as
//! `WC_STATUS_PANIC`.

use std::cell::RefCell;
use std::f64::consts::FRAC_PI_4;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wcascade::interaction::{compare_effective_exact_with, ExactModelConfig};
use wcascade::protocol::reduce_to_size;
use wcascade::{
    build_schedule, canonical_w, cascade, estimate_fidelity, expand_double, feasibility, fidelity, run_ideal,
    run_protocol, w_class_fidelity, ComplexAmp, Error, InteractionParams, NoiseConfig, SingleExcitationState,
};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Opaque single-excitation state.
pub struct WcState(SingleExcitationState);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WcFeasibility {
    pub t_pass: f64,
    pub order_time: f64,
    pub rounds: u32,
    pub total_time: f64,
    pub decay_probability_per_atom: f64,
    pub max_rounds: u32,
    /// May exceed every integer type; kept as a double.
    pub max_size: f64,
    pub process_time: f64,
    pub process_max_rounds: u32,
    pub process_max_size: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WcApproximation {
    pub infidelity: f64,
    pub photon_leakage: f64,
    pub delta_over_g: f64,
    pub top_rung_population: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WcFidelityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub decayed: usize,
    pub reduction_failures: usize,
    pub survival_fraction: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|b| *b != 0);
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(bytes).unwrap_or_default());
}

struct Fail(WcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = if e.is_numerical() { WcStatus::Numerical } else { WcStatus::InvalidArgument };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(WcStatus::NullPointer, format!("{what} is null"))
}

fn guarded(f: impl FnOnce() -> Result<(), Fail>) -> WcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            WcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            WcStatus::Panic
        }
    }
}

unsafe fn state_ref<'a>(s: *const WcState, what: &str) -> Result<&'a SingleExcitationState, Fail> {
    s.as_ref().map(|s| &s.0).ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn emit_state(out: *mut *mut WcState, s: SingleExcitationState) -> Result<(), Fail> {
    write_out(out, Box::into_raw(Box::new(WcState(s))), "out")
}

fn params(g_hz: f64, delta_over_g: f64) -> Result<InteractionParams, Fail> {
    Ok(InteractionParams::from_hz(g_hz, delta_over_g, FRAC_PI_4)?)
}

/// Last error message on this thread; empty after a successful call. Valid
/// until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a state from `n` interleaved (re, im) pairs; must be normalized.
///
/// # Safety
/// `re_im` must point to `2 * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_state_new(re_im: *const f64, n: usize, out: *mut *mut WcState) -> WcStatus {
    guarded(|| {
        if re_im.is_null() {
            return Err(null("re_im"));
        }
        let raw = std::slice::from_raw_parts(re_im, 2 * n);
        let amps = raw.chunks_exact(2).map(|c| ComplexAmp::new(c[0], c[1])).collect();
        emit_state(out, SingleExcitationState::new(amps)?)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_canonical_w(n: usize, out: *mut *mut WcState) -> WcStatus {
    guarded(|| emit_state(out, canonical_w(n)?))
}

/// `2^rounds` atoms after `rounds` doubling passes from one excited atom.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_cascade(rounds: u32, out: *mut *mut WcState) -> WcStatus {
    guarded(|| emit_state(out, cascade(rounds)?))
}

/// Runs the full protocol to `target_n` atoms. Targets that are not powers of
/// two consume `seed` for the measurement reduction; `succeeded` reports
/// whether it left a `target_n`-atom state.
///
/// # Safety
/// `out` and `succeeded` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_run(
    g_hz: f64,
    delta_over_g: f64,
    target_n: usize,
    seed: u64,
    out: *mut *mut WcState,
    succeeded: *mut bool,
) -> WcStatus {
    guarded(|| {
        if succeeded.is_null() {
            return Err(null("succeeded"));
        }
        let sched = build_schedule(target_n, &params(g_hz, delta_over_g)?)?;
        let result = if sched.reduction_count == 0 { run_ideal(&sched)? } else { run_protocol(&sched, seed)? };
        emit_state(out, result.state)?;
        succeeded.write(result.succeeded);
        Ok(())
    })
}

/// One doubling round applied to `state`, with fresh ancillas.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_state_expand_double(state: *const WcState, out: *mut *mut WcState) -> WcStatus {
    guarded(|| emit_state(out, expand_double(state_ref(state, "state")?)))
}

/// Measures ancillas of `state` until `target_n` remain.
///
/// # Safety
/// `state` must be a live handle; `out` and `succeeded` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_state_reduce(
    state: *const WcState,
    target_n: usize,
    seed: u64,
    out: *mut *mut WcState,
    succeeded: *mut bool,
) -> WcStatus {
    guarded(|| {
        if succeeded.is_null() {
            return Err(null("succeeded"));
        }
        let result = reduce_to_size(state_ref(state, "state")?, target_n, seed)?;
        emit_state(out, result.state)?;
        succeeded.write(result.succeeded);
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_state_len(state: *const WcState, len: *mut usize) -> WcStatus {
    guarded(|| write_out(len, state_ref(state, "state")?.len(), "len"))
}

/// Copies amplitudes as interleaved (re, im) pairs. `capacity` counts
/// amplitudes, not doubles.
///
/// # Safety
/// `state` must be a live handle; `re_im` must hold `2 * capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn wc_state_amplitudes(state: *const WcState, re_im: *mut f64, capacity: usize) -> WcStatus {
    guarded(|| {
        let s = state_ref(state, "state")?;
        if re_im.is_null() {
            return Err(null("re_im"));
        }
        if capacity < s.len() {
            return Err(Fail(WcStatus::BufferTooSmall, format!("need {} amplitudes, got {capacity}", s.len())));
        }
        let dst = std::slice::from_raw_parts_mut(re_im, 2 * s.len());
        for (pair, a) in dst.chunks_exact_mut(2).zip(s.amps()) {
            pair[0] = a.re;
            pair[1] = a.im;
        }
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_state_w_class_fidelity(state: *const WcState, value: *mut f64) -> WcStatus {
    guarded(|| write_out(value, w_class_fidelity(state_ref(state, "state")?), "value"))
}

/// # Safety
/// `a` and `b` must be live handles; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_state_fidelity(a: *const WcState, b: *const WcState, value: *mut f64) -> WcStatus {
    guarded(|| write_out(value, fidelity(state_ref(a, "a")?, state_ref(b, "b")?)?, "value"))
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wc_state_free(state: *mut WcState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_feasibility(
    g_hz: f64,
    delta_over_g: f64,
    target_n: usize,
    t_r: f64,
    report: *mut WcFeasibility,
) -> WcStatus {
    guarded(|| {
        let f = feasibility(&params(g_hz, delta_over_g)?, target_n, t_r)?;
        let r = WcFeasibility {
            t_pass: f.t_pass,
            order_time: f.order_time,
            rounds: f.rounds,
            total_time: f.total_time,
            decay_probability_per_atom: f.decay_probability_per_atom,
            max_rounds: f.max_rounds,
            max_size: f.max_size,
            process_time: f.process_time,
            process_max_rounds: f.process_max_rounds,
            process_max_size: f.process_max_size,
        };
        write_out(report, r, "report")
    })
}

/// Compares one quarter pass of the effective model against the exact
/// atom-cavity evolution truncated at `n_max` photons.
///
/// # Safety
/// `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_compare_effective_exact(
    g_hz: f64,
    delta_over_g: f64,
    n_max: usize,
    report: *mut WcApproximation,
) -> WcStatus {
    guarded(|| {
        let config = ExactModelConfig { n_max, ..ExactModelConfig::default() };
        let a = compare_effective_exact_with(&params(g_hz, delta_over_g)?, &config)?;
        let r = WcApproximation {
            infidelity: a.infidelity,
            photon_leakage: a.photon_leakage,
            delta_over_g: a.ratio,
            top_rung_population: a.top_rung_population,
        };
        write_out(report, r, "report")
    })
}

/// Monte-Carlo fidelity of the protocol to `target_n` under angle jitter and,
/// when `decay` is set, radiative decay with lifetime `t_r`.
///
/// # Safety
/// `estimate` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_estimate_fidelity(
    g_hz: f64,
    delta_over_g: f64,
    target_n: usize,
    theta_sigma: f64,
    t_r: f64,
    decay: bool,
    trials: usize,
    seed: u64,
    estimate: *mut WcFidelityEstimate,
) -> WcStatus {
    guarded(|| {
        if estimate.is_null() {
            return Err(null("estimate"));
        }
        let sched = build_schedule(target_n, &params(g_hz, delta_over_g)?)?;
        let noise = NoiseConfig { theta_sigma, t_r, decay_enabled: decay, seed };
        let e = estimate_fidelity(&sched, &noise, trials)?;
        let r = WcFidelityEstimate {
            mean: e.mean,
            std_error: e.stderr,
            trials: e.trials,
            decayed: e.decayed,
            reduction_failures: e.reduction_failures,
            survival_fraction: e.survival_fraction(),
        };
        write_out(estimate, r, "estimate")
    })
}
