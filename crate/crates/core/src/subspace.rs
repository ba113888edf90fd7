//! Expansion cascade on the single-excitation manifold.
//!
//! Only the `n` one-excitation amplitudes are stored. A pass pairing atoms
//! `i` and `j` at angle `θ` mixes `(c_i, c_j)`; every other amplitude is a
//! `|gg⟩` spectator of that pass and is left untouched.
//!
//! Ancillas for a doubling round are appended at indices `n..2n` and atom `k`
//! is paired with ancilla `n + k`. After `K` rounds starting from a single
//! excited atom 0, atom `k`'s lineage is read off the binary digits of `k`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interaction::effective_propagator;
use crate::state::{project_single_excitation, to_dense, ComplexAmp, SingleExcitationState};

/// Default amplitude cap for a register (2²⁴ amplitudes, 256 MiB).
pub const DEFAULT_MAX_AMPLITUDES: usize = 1 << 24;

/// Doubling rounds wider than this run across the rayon pool.
const PARALLEL_PAIRS: usize = 1 << 14;

/// Storage order of the four-atom output: the Step-1 pair `a2, b2` followed by
/// the ancillas `a1, b1`.
pub const W4_STORAGE_LABELS: [&str; 4] = ["a2", "b2", "a1", "b1"];

/// Storage indices in the ket order `a1', a2', b1', b2'` of the four-atom
/// expansion figure. Use with [`SingleExcitationState::permuted`].
pub const W4_KET_ORDER: [usize; 4] = [2, 0, 3, 1];

/// One cavity pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRotation {
    i: usize,
    j: usize,
    theta: f64,
}

impl PairRotation {
    pub fn new(i: usize, j: usize, theta: f64) -> Result<Self> {
        if i == j {
            return Err(Error::DegeneratePair(i));
        }
        Ok(Self { i, j, theta })
    }

    pub fn atoms(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Coefficients `(e^{-iθ}cos θ, −i e^{-iθ} sin θ)` of one pass.
#[inline]
fn pass_coefficients(theta: f64) -> (Complex64, Complex64) {
    let phase = Complex64::from_polar(1.0, -theta);
    let (s, c) = theta.sin_cos();
    (phase * c, phase * Complex64::new(0.0, -s))
}

#[inline]
fn rotate(ci: &mut Complex64, cj: &mut Complex64, (diag, off): (Complex64, Complex64)) {
    let (a, b) = (*ci, *cj);
    *ci = diag * a + off * b;
    *cj = diag * b + off * a;
}

/// A set of passes executed simultaneously; no atom appears twice.
#[derive(Debug, Clone, PartialEq)]
pub enum RoundPlan {
    /// Atom `k` paired with ancilla `width + k` for every `k < width`.
    Doubling {
        width: usize,
        theta: f64,
    },
    Explicit(Vec<PairRotation>),
}

impl RoundPlan {
    pub fn doubling(width: usize, theta: f64) -> Self {
        RoundPlan::Doubling { width, theta }
    }

    pub fn explicit(pairs: Vec<PairRotation>) -> Result<Self> {
        let top = pairs.iter().map(|p| p.i.max(p.j) + 1).max().unwrap_or(0);
        let mut seen = vec![false; top];
        for p in &pairs {
            for k in [p.i, p.j] {
                if std::mem::replace(&mut seen[k], true) {
                    return Err(Error::OverlappingRound(k));
                }
            }
        }
        Ok(RoundPlan::Explicit(pairs))
    }

    pub fn len(&self) -> usize {
        match self {
            RoundPlan::Doubling { width, .. } => *width,
            RoundPlan::Explicit(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Register size needed to host every index of this round.
    pub fn register_size(&self) -> usize {
        match self {
            RoundPlan::Doubling { width, .. } => 2 * width,
            RoundPlan::Explicit(p) => p.iter().map(|r| r.i.max(r.j) + 1).max().unwrap_or(0),
        }
    }

    pub fn pairs(&self) -> Box<dyn Iterator<Item = PairRotation> + '_> {
        match self {
            RoundPlan::Doubling { width, theta } => {
                let (w, t) = (*width, *theta);
                Box::new((0..w).map(move |k| PairRotation { i: k, j: w + k, theta: t }))
            }
            RoundPlan::Explicit(p) => Box::new(p.iter().copied()),
        }
    }
}

/// One pass applied to a copy of `state`.
pub fn apply_pair(state: &SingleExcitationState, rot: &PairRotation) -> Result<SingleExcitationState> {
    let mut out = state.clone();
    apply_pair_in_place(&mut out, rot)?;
    Ok(out)
}

pub fn apply_pair_in_place(state: &mut SingleExcitationState, rot: &PairRotation) -> Result<()> {
    let n = state.len();
    for k in [rot.i, rot.j] {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
    }
    let amps = state.amps_mut();
    let (lo, hi) = (rot.i.min(rot.j), rot.i.max(rot.j));
    let (left, right) = amps.split_at_mut(hi);
    let (a, b) = (&mut left[lo], &mut right[0]);
    let coeffs = pass_coefficients(rot.theta);
    if rot.i < rot.j {
        rotate(a, b, coeffs);
    } else {
        rotate(b, a, coeffs);
    }
    Ok(())
}

/// Applies a round, first growing the register with ground-state ancillas if
/// the round addresses atoms beyond the current size.
pub fn apply_round(state: &mut SingleExcitationState, plan: &RoundPlan) -> Result<()> {
    apply_round_with(state, plan, None)
}

/// Like [`apply_round`], but `angle(p)` supplies the angle of the `p`-th pass
/// of the round when given.
pub(crate) fn apply_round_with(
    state: &mut SingleExcitationState,
    plan: &RoundPlan,
    angle: Option<&mut dyn FnMut(usize) -> f64>,
) -> Result<()> {
    let needed = plan.register_size();
    if needed > state.len() {
        state.amps_mut().resize(needed, ComplexAmp::new(0.0, 0.0));
    }
    match (plan, angle) {
        (RoundPlan::Doubling { width, theta }, None) => {
            let coeffs = pass_coefficients(*theta);
            let (lo, hi) = state.amps_mut()[..2 * width].split_at_mut(*width);
            if *width >= PARALLEL_PAIRS {
                lo.par_iter_mut().zip(hi.par_iter_mut()).for_each(|(a, b)| rotate(a, b, coeffs));
            } else {
                lo.iter_mut().zip(hi.iter_mut()).for_each(|(a, b)| rotate(a, b, coeffs));
            }
            Ok(())
        }
        (RoundPlan::Doubling { width, .. }, Some(angle)) => {
            let (lo, hi) = state.amps_mut()[..2 * width].split_at_mut(*width);
            for (p, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                rotate(a, b, pass_coefficients(angle(p)));
            }
            Ok(())
        }
        (RoundPlan::Explicit(pairs), mut angle) => {
            for (p, rot) in pairs.iter().enumerate() {
                let theta = angle.as_mut().map_or(rot.theta, |f| f(p));
                apply_pair_in_place(state, &PairRotation { theta, ..*rot })?;
            }
            Ok(())
        }
    }
}

/// `n` atoms → `2n` atoms: appends `n` ground ancillas and runs one
/// quarter-pass round pairing atom `k` with ancilla `n + k`.
pub fn expand_double(state: &SingleExcitationState) -> SingleExcitationState {
    let mut out = state.clone();
    let plan = RoundPlan::doubling(state.len(), FRAC_PI_4);
    apply_round(&mut out, &plan).expect("doubling plan addresses a freshly grown register");
    out
}

/// Output of `rounds` quarter-pass doubling rounds starting from a single
/// excited atom.
pub fn cascade(rounds: u32) -> Result<SingleExcitationState> {
    cascade_capped(rounds, DEFAULT_MAX_AMPLITUDES)
}

pub fn cascade_capped(rounds: u32, max_amplitudes: usize) -> Result<SingleExcitationState> {
    let requested = 1usize.checked_shl(rounds).unwrap_or(usize::MAX);
    if rounds >= usize::BITS || requested > max_amplitudes {
        return Err(Error::CapExceeded { what: "register size", requested, cap: max_amplitudes });
    }
    let size = requested;
    let mut state = SingleExcitationState::excited(1, 0)?;
    state.amps_mut().reserve_exact(size - 1);
    for r in 0..rounds {
        apply_round(&mut state, &RoundPlan::doubling(1 << r, FRAC_PI_4))?;
    }
    Ok(state)
}

/// Closed-form amplitude of atom `k` after `rounds` quarter-pass doublings of
/// a single excited atom.
///
/// Walking back from the last round, an atom in the upper half of a round's
/// register is an ancilla that received the excitation through the swap
/// branch (`−i e^{-iπ/4}/√2`); otherwise it kept it through the stay branch
/// (`e^{-iπ/4}/√2`).
pub fn analytic_amplitude(k: usize, rounds: u32) -> Result<ComplexAmp> {
    let size = 1usize.checked_shl(rounds).unwrap_or(0);
    if rounds >= usize::BITS || k >= size {
        return Err(Error::IndexOutOfRange { index: k, len: size });
    }
    let stay = Complex64::from_polar(FRAC_1_SQRT_2, -FRAC_PI_4);
    let swap = stay * Complex64::new(0.0, -1.0);
    let mut amp = Complex64::new(1.0, 0.0);
    let mut atom = k;
    for r in (0..rounds).rev() {
        let half = 1usize << r;
        if atom >= half {
            atom -= half;
            amp *= swap;
        } else {
            amp *= stay;
        }
    }
    debug_assert_eq!(atom, 0);
    Ok(amp)
}

/// Runs `plans` on the full `2ⁿ` space with the 4×4 effective propagator and
/// projects back. `initial` must already span every atom the plans touch.
pub fn run_dense(initial: &SingleExcitationState, plans: &[RoundPlan]) -> Result<SingleExcitationState> {
    let mut dense = to_dense(initial)?;
    for plan in plans {
        for rot in plan.pairs() {
            let (i, j) = rot.atoms();
            dense.apply_two_atom(&effective_propagator(rot.theta()).0, i, j)?;
        }
    }
    project_single_excitation(&dense)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{canonical_w, w_class_fidelity};
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quarter_pass_on_excited_atom() {
        let s = SingleExcitationState::excited(2, 0).unwrap();
        let out = apply_pair(&s, &PairRotation::new(0, 1, FRAC_PI_4).unwrap()).unwrap();
        let p = Complex64::from_polar(1.0, -FRAC_PI_4);
        assert!((out.amps()[0] - p * FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((out.amps()[1] - p * c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn spectators_untouched() {
        let s = SingleExcitationState::excited(4, 3).unwrap();
        let out = apply_pair(&s, &PairRotation::new(0, 1, 0.77).unwrap()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn inverse_pass() {
        let s = canonical_w(5).unwrap();
        let fwd = apply_pair(&s, &PairRotation::new(1, 3, 0.4).unwrap()).unwrap();
        let back = apply_pair(&fwd, &PairRotation::new(1, 3, -0.4).unwrap()).unwrap();
        for (x, y) in back.amps().iter().zip(s.amps()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn pair_order_is_symmetric() {
        let s = SingleExcitationState::normalized(vec![c(0.3, 0.1), c(0.0, 0.0), c(-0.2, 0.9)]).unwrap();
        let a = apply_pair(&s, &PairRotation::new(0, 2, 0.3).unwrap()).unwrap();
        let b = apply_pair(&s, &PairRotation::new(2, 0, 0.3).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pair_errors() {
        assert!(matches!(PairRotation::new(2, 2, 0.1), Err(Error::DegeneratePair(2))));
        let s = canonical_w(2).unwrap();
        let rot = PairRotation::new(0, 2, 0.1).unwrap();
        assert!(matches!(apply_pair(&s, &rot), Err(Error::IndexOutOfRange { index: 2, len: 2 })));
    }

    #[test]
    fn explicit_round_rejects_overlap() {
        let p = |i, j| PairRotation::new(i, j, FRAC_PI_4).unwrap();
        assert!(RoundPlan::explicit(vec![p(0, 1), p(2, 3)]).is_ok());
        assert!(matches!(RoundPlan::explicit(vec![p(0, 1), p(1, 2)]), Err(Error::OverlappingRound(1))));
    }

    #[test]
    fn doubling_reproduces_step_one_and_two() {
        let w2 = expand_double(&SingleExcitationState::excited(1, 0).unwrap());
        let fixed = w2.with_fixed_global_phase();
        assert!((fixed.amps()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((fixed.amps()[1] - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-12);

        let w4 = expand_double(&w2).with_fixed_global_phase();
        let expect = [c(0.5, 0.0), c(0.0, -0.5), c(0.0, -0.5), c(-0.5, 0.0)];
        for (x, y) in w4.amps().iter().zip(expect) {
            assert!((x - y).norm() < 1e-12);
        }
        // ket order a1', a2', b1', b2': −i, 1, −1, −i
        let ket = w4.permuted(&W4_KET_ORDER).unwrap();
        let expect = [c(0.0, -0.5), c(0.5, 0.0), c(-0.5, 0.0), c(0.0, -0.5)];
        for (x, y) in ket.amps().iter().zip(expect) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn explicit_and_doubling_plans_agree() {
        let s = canonical_w(4).unwrap();
        let pairs = (0..4).map(|k| PairRotation::new(k, 4 + k, 0.3).unwrap()).collect();
        let mut a = s.clone();
        apply_round(&mut a, &RoundPlan::explicit(pairs).unwrap()).unwrap();
        let mut b = s;
        apply_round(&mut b, &RoundPlan::doubling(4, 0.3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn analytic_small_cases() {
        let p = Complex64::from_polar(1.0, -FRAC_PI_4);
        assert!((analytic_amplitude(0, 1).unwrap() - p * FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((analytic_amplitude(1, 1).unwrap() - p * c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
        // K=2 carries e^{-iπ/2} overall
        let g = Complex64::from_polar(0.5, -FRAC_PI_2);
        let expect = [c(1.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(-1.0, 0.0)];
        for (k, e) in expect.iter().enumerate() {
            assert!((analytic_amplitude(k, 2).unwrap() - g * e).norm() < 1e-15);
        }
        assert!(analytic_amplitude(4, 2).is_err());
        assert_eq!(analytic_amplitude(0, 0).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn analytic_matches_iterated_doubling() {
        for rounds in [3u32, 10] {
            let mut s = SingleExcitationState::excited(1, 0).unwrap();
            for _ in 0..rounds {
                s = expand_double(&s);
            }
            for (k, a) in s.amps().iter().enumerate() {
                assert!((a - analytic_amplitude(k, rounds).unwrap()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn cascade_cap() {
        assert!(matches!(cascade_capped(5, 16), Err(Error::CapExceeded { .. })));
        let s = cascade_capped(4, 16).unwrap();
        assert_eq!(s.len(), 16);
        assert!((w_class_fidelity(&s) - 1.0).abs() < 1e-12);
        assert!(cascade(70).is_err());
    }

    #[test]
    fn parallel_round_matches_serial() {
        let rounds = 16;
        let s = cascade(rounds).unwrap();
        let mut serial = vec![c(1.0, 0.0)];
        for r in 0..rounds {
            let w = 1usize << r;
            serial.resize(2 * w, c(0.0, 0.0));
            let coeffs = pass_coefficients(FRAC_PI_4);
            let (lo, hi) = serial.split_at_mut(w);
            lo.iter_mut().zip(hi).for_each(|(a, b)| rotate(a, b, coeffs));
        }
        assert_eq!(s.amps(), &serial[..]);
    }

    #[test]
    fn dense_route_matches_engine() {
        let plans: Vec<_> = (0..3).map(|r| RoundPlan::doubling(1 << r, FRAC_PI_4)).collect();
        let initial = SingleExcitationState::excited(8, 0).unwrap();
        let dense = run_dense(&initial, &plans).unwrap();
        let engine = cascade(3).unwrap();
        for (x, y) in dense.amps().iter().zip(engine.amps()) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
