use std::ffi::CStr;
use std::ptr;

use wcascade_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(wc_last_error_message()) }.to_string_lossy().into_owned()
}

fn amplitudes(s: *const WcState) -> Vec<(f64, f64)> {
    let mut n = 0;
    assert_eq!(unsafe { wc_state_len(s, &mut n) }, WcStatus::Ok);
    let mut buf = vec![0.0; 2 * n];
    assert_eq!(unsafe { wc_state_amplitudes(s, buf.as_mut_ptr(), n) }, WcStatus::Ok);
    buf.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

#[test]
fn cascade_round_trip() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { wc_cascade(3, &mut s) }, WcStatus::Ok);
    let amps = amplitudes(s);
    assert_eq!(amps.len(), 8);
    for (re, im) in amps {
        assert!(((re * re + im * im).sqrt() - 8f64.sqrt().recip()).abs() < 1e-12);
    }
    let mut f = 0.0;
    assert_eq!(unsafe { wc_state_w_class_fidelity(s, &mut f) }, WcStatus::Ok);
    assert!((f - 1.0).abs() < 1e-12);

    let mut doubled = ptr::null_mut();
    assert_eq!(unsafe { wc_state_expand_double(s, &mut doubled) }, WcStatus::Ok);
    assert_eq!(amplitudes(doubled).len(), 16);
    unsafe {
        wc_state_free(s);
        wc_state_free(doubled);
        wc_state_free(ptr::null_mut());
    }
}

#[test]
fn run_matches_cascade() {
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    let mut ok = false;
    assert_eq!(unsafe { wc_run(24e3, 10.0, 4, 0, &mut a, &mut ok) }, WcStatus::Ok);
    assert!(ok);
    assert_eq!(unsafe { wc_cascade(2, &mut b) }, WcStatus::Ok);
    assert_eq!(amplitudes(a), amplitudes(b));
    let mut f = 0.0;
    assert_eq!(unsafe { wc_state_fidelity(a, b, &mut f) }, WcStatus::Ok);
    assert!((f - 1.0).abs() < 1e-12);
    unsafe {
        wc_state_free(a);
        wc_state_free(b);
    }
}

#[test]
fn state_new_and_reduce() {
    let h = 0.5f64;
    let raw = [h, 0.0, h, 0.0, h, 0.0, h, 0.0];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { wc_state_new(raw.as_ptr(), 4, &mut s) }, WcStatus::Ok);
    let mut out = ptr::null_mut();
    let mut ok = false;
    let mut successes = 0;
    for seed in 0..200 {
        assert_eq!(unsafe { wc_state_reduce(s, 3, seed, &mut out, &mut ok) }, WcStatus::Ok);
        successes += ok as usize;
        unsafe { wc_state_free(out) };
    }
    assert!((120..=180).contains(&successes), "{successes}");
    unsafe { wc_state_free(s) };

    let bad = [1.0, 0.0, 1.0, 0.0];
    assert_eq!(unsafe { wc_state_new(bad.as_ptr(), 2, &mut s) }, WcStatus::Numerical);
    assert!(!last_error().is_empty());
}

#[test]
fn error_codes() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { wc_canonical_w(0, &mut s) }, WcStatus::InvalidArgument);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { wc_canonical_w(3, ptr::null_mut()) }, WcStatus::NullPointer);
    let mut len = 0;
    assert_eq!(unsafe { wc_state_len(ptr::null(), &mut len) }, WcStatus::NullPointer);

    assert_eq!(unsafe { wc_canonical_w(3, &mut s) }, WcStatus::Ok);
    assert!(last_error().is_empty());
    let mut buf = [0.0; 4];
    assert_eq!(unsafe { wc_state_amplitudes(s, buf.as_mut_ptr(), 2) }, WcStatus::BufferTooSmall);
    unsafe { wc_state_free(s) };

    let mut rep = WcApproximation::default();
    assert_eq!(unsafe { wc_compare_effective_exact(24e3, 10.0, 1, &mut rep) }, WcStatus::Numerical);
}

#[test]
fn reports() {
    let mut f = WcFeasibility::default();
    assert_eq!(unsafe { wc_feasibility(24e3, 10.0, 1 << 20, 3e-2, &mut f) }, WcStatus::Ok);
    assert_eq!(f.rounds, 20);
    assert_eq!(f.process_max_rounds, 30);
    assert!((f.total_time - 20.0 * f.t_pass).abs() < 1e-18);

    let mut a = WcApproximation::default();
    assert_eq!(unsafe { wc_compare_effective_exact(24e3, 10.0, 5, &mut a) }, WcStatus::Ok);
    assert!((a.infidelity - 2.113782451629298e-4).abs() < 1e-9);
    assert_eq!(a.delta_over_g, 10.0);

    let mut e = WcFidelityEstimate::default();
    assert_eq!(unsafe { wc_estimate_fidelity(24e3, 10.0, 4, 0.0, 3e-2, false, 50, 1, &mut e) }, WcStatus::Ok);
    assert_eq!(e.trials, 50);
    assert!((e.mean - 1.0).abs() < 1e-12);
    assert_eq!(e.survival_fraction, 1.0);
}
