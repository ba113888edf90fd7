//! Generation plan and its execution: the EPR pass, doubling rounds, and
//! measurement-based reduction to sizes that are not powers of two.

use std::f64::consts::FRAC_PI_4;

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interaction::InteractionParams;
use crate::seed::{derive_seed, rng_from, Rng};
use crate::state::{canonical_w, SingleExcitationState};
use crate::subspace::{apply_round, RoundPlan, DEFAULT_MAX_AMPLITUDES};

/// Binary-tree plan of cavity passes for a `target_n`-atom W state.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub target_n: usize,
    /// Round `r` pairs atom `k` with ancilla `2^r + k` for `k < 2^r`; round 0
    /// is the EPR pass on `|e⟩|g⟩`.
    pub rounds: Vec<RoundPlan>,
    pub theta_per_pass: f64,
    pub pass_duration: f64,
    /// Atoms measured away after the doubling rounds.
    pub reduction_count: usize,
    pub params: InteractionParams,
}

impl Schedule {
    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    /// `2^K`, the register size reached by the doubling rounds.
    pub fn register_size(&self) -> usize {
        1 << self.rounds.len()
    }

    pub fn pass_count(&self) -> usize {
        self.rounds.iter().map(RoundPlan::len).sum()
    }

    /// Indices measured during reduction, in measurement order.
    pub fn measured_atoms(&self) -> impl Iterator<Item = usize> + '_ {
        (self.target_n..self.register_size()).rev()
    }
}

/// Smallest `K` with `2^K ≥ n`.
pub fn rounds_for(n: usize) -> u32 {
    n.max(1).next_power_of_two().trailing_zeros()
}

pub fn build_schedule(target_n: usize, params: &InteractionParams) -> Result<Schedule> {
    build_schedule_capped(target_n, params, DEFAULT_MAX_AMPLITUDES)
}

pub fn build_schedule_capped(target_n: usize, params: &InteractionParams, max_amplitudes: usize) -> Result<Schedule> {
    if target_n < 2 {
        return Err(Error::InvalidSize { size: target_n, reason: "the protocol targets at least two atoms" });
    }
    if (params.theta() - FRAC_PI_4).abs() > 1e-12 {
        return Err(Error::InvalidParameter {
            name: "theta",
            value: params.theta(),
            reason: "doubling passes need a quarter pulse angle",
        });
    }
    let register = target_n.next_power_of_two();
    if register > max_amplitudes {
        return Err(Error::CapExceeded { what: "register size", requested: register, cap: max_amplitudes });
    }
    let k = rounds_for(target_n);
    Ok(Schedule {
        target_n,
        rounds: (0..k).map(|r| RoundPlan::doubling(1 << r, params.theta())).collect(),
        theta_per_pass: params.theta(),
        pass_duration: params.duration(),
        reduction_count: register - target_n,
        params: *params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ground,
    Excited,
}

/// One projective measurement in the `{|g⟩, |e⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub measured_atom: usize,
    pub outcome: Outcome,
    pub probability_of_outcome: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub state: SingleExcitationState,
    pub total_time: f64,
    pub rounds_executed: usize,
    pub reduction_outcomes: Vec<MeasurementRecord>,
    pub succeeded: bool,
    /// Seed of the randomness consumed, if any was.
    pub seed: Option<u64>,
}

pub(crate) fn run_rounds(schedule: &Schedule) -> Result<SingleExcitationState> {
    let mut state = SingleExcitationState::excited(1, 0)?;
    for plan in &schedule.rounds {
        apply_round(&mut state, plan)?;
    }
    Ok(state)
}

/// Deterministic doubling cascade. Targets that are not powers of two need
/// [`run_protocol`].
pub fn run_ideal(schedule: &Schedule) -> Result<ProtocolResult> {
    if schedule.reduction_count > 0 {
        return Err(Error::ReductionRequired { target: schedule.target_n });
    }
    let state = run_rounds(schedule)?;
    Ok(ProtocolResult {
        state,
        total_time: schedule.round_count() as f64 * schedule.pass_duration,
        rounds_executed: schedule.round_count(),
        reduction_outcomes: Vec::new(),
        succeeded: true,
        seed: None,
    })
}

/// Doubling cascade followed by measurement reduction seeded by `seed`.
pub fn run_protocol(schedule: &Schedule, seed: u64) -> Result<ProtocolResult> {
    let state = run_rounds(schedule)?;
    let mut rng = rng_from(seed);
    let reduction = reduce_with_rng(state, schedule.target_n, &mut rng)?;
    Ok(ProtocolResult {
        state: reduction.state,
        total_time: schedule.round_count() as f64 * schedule.pass_duration,
        rounds_executed: schedule.round_count(),
        reduction_outcomes: reduction.records,
        succeeded: reduction.succeeded,
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Reduction {
    pub state: SingleExcitationState,
    pub records: Vec<MeasurementRecord>,
    pub succeeded: bool,
}

/// Measures the highest-index atom until `target_n` remain, or until an
/// excited outcome collapses the register.
pub(crate) fn reduce_with_rng(mut state: SingleExcitationState, target_n: usize, rng: &mut Rng) -> Result<Reduction> {
    if target_n == 0 {
        return Err(Error::InvalidSize { size: 0, reason: "cannot reduce to zero atoms" });
    }
    if target_n > state.len() {
        return Err(Error::TargetTooLarge { target: target_n, available: state.len() });
    }
    let mut records = Vec::with_capacity(state.len() - target_n);
    while state.len() > target_n {
        let atom = state.len() - 1;
        let p_excited = (state.amps()[atom].norm_sqr() / state.norm_sqr()).clamp(0.0, 1.0);
        if rng.gen::<f64>() < p_excited {
            records.push(MeasurementRecord {
                measured_atom: atom,
                outcome: Outcome::Excited,
                probability_of_outcome: p_excited,
            });
            let collapsed = SingleExcitationState::excited(state.len(), atom)?;
            return Ok(Reduction { state: collapsed, records, succeeded: false });
        }
        records.push(MeasurementRecord {
            measured_atom: atom,
            outcome: Outcome::Ground,
            probability_of_outcome: 1.0 - p_excited,
        });
        let mut amps = state.into_amps();
        amps.pop();
        state = SingleExcitationState::normalized(amps)?;
    }
    Ok(Reduction { state, records, succeeded: true })
}

/// Projective reduction of `state` to its first `target_n` atoms.
pub fn reduce_to_size(state: &SingleExcitationState, target_n: usize, seed: u64) -> Result<ProtocolResult> {
    let mut rng = rng_from(seed);
    let r = reduce_with_rng(state.clone(), target_n, &mut rng)?;
    Ok(ProtocolResult {
        state: r.state,
        total_time: 0.0,
        rounds_executed: 0,
        reduction_outcomes: r.records,
        succeeded: r.succeeded,
        seed: Some(seed),
    })
}

/// Ideal `from`-atom input: the cascade output for powers of two, the
/// canonical W state otherwise.
pub fn ideal_w(from: usize) -> Result<SingleExcitationState> {
    if from >= 2 && from.is_power_of_two() {
        let params = InteractionParams::quarter_pass(1.0, 10.0)?;
        return Ok(run_ideal(&build_schedule(from, &params)?)?.state);
    }
    canonical_w(from)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessEstimate {
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
    /// `to / from` for an ideal input.
    pub expected: f64,
    /// Binomial standard error at the expected probability.
    pub stderr: f64,
}

impl SuccessEstimate {
    pub fn z_score(&self) -> f64 {
        if self.stderr == 0.0 {
            return if self.frequency == self.expected { 0.0 } else { f64::INFINITY };
        }
        (self.frequency - self.expected) / self.stderr
    }
}

/// Monte-Carlo success frequency of `W_from → W_to` over seeded trials.
/// Trial `i` uses `derive_seed(seed, i)`, so results do not depend on thread
/// scheduling.
pub fn success_frequency(from: usize, to: usize, trials: usize, seed: u64) -> Result<SuccessEstimate> {
    if trials == 0 {
        return Err(Error::InvalidSize { size: 0, reason: "need at least one trial" });
    }
    if to > from {
        return Err(Error::TargetTooLarge { target: to, available: from });
    }
    let input = ideal_w(from)?;
    let outcomes: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from(derive_seed(seed, i));
            reduce_with_rng(input.clone(), to, &mut rng).map(|r| r.succeeded)
        })
        .collect::<Result<_>>()?;
    let successes = outcomes.iter().filter(|&&s| s).count();
    let expected = to as f64 / from as f64;
    Ok(SuccessEstimate {
        trials,
        successes,
        frequency: successes as f64 / trials as f64,
        expected,
        stderr: (expected * (1.0 - expected) / trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::w_class_fidelity;
    use num_complex::Complex64;

    fn params() -> InteractionParams {
        InteractionParams::from_hz(24e3, 10.0, FRAC_PI_4).unwrap()
    }

    #[test]
    fn schedule_shapes() {
        let s = build_schedule(4, &params()).unwrap();
        assert_eq!(s.round_count(), 2);
        assert_eq!(s.rounds.iter().map(RoundPlan::len).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(s.reduction_count, 0);

        let s = build_schedule(3, &params()).unwrap();
        assert_eq!(s.round_count(), 2);
        assert_eq!(s.reduction_count, 1);
        assert_eq!(s.measured_atoms().collect::<Vec<_>>(), vec![3]);

        let s = build_schedule(2, &params()).unwrap();
        assert_eq!(s.round_count(), 1);
        assert_eq!(s.pass_count(), 1);

        let s = build_schedule(5, &params()).unwrap();
        assert_eq!((s.round_count(), s.reduction_count, s.pass_count()), (3, 3, 7));
    }

    #[test]
    fn schedule_errors() {
        assert!(build_schedule(1, &params()).is_err());
        assert!(build_schedule(0, &params()).is_err());
        let off = InteractionParams::from_hz(24e3, 10.0, 0.5).unwrap();
        assert!(matches!(build_schedule(4, &off), Err(Error::InvalidParameter { name: "theta", .. })));
        assert!(matches!(build_schedule_capped(33, &params(), 32), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn rounds_for_sizes() {
        assert_eq!(rounds_for(2), 1);
        assert_eq!(rounds_for(3), 2);
        assert_eq!(rounds_for(4), 2);
        assert_eq!(rounds_for(1 << 20), 20);
        assert_eq!(rounds_for((1 << 20) + 1), 21);
    }

    #[test]
    fn ideal_runs() {
        let r = run_ideal(&build_schedule(2, &params()).unwrap()).unwrap();
        let s = r.state.with_fixed_global_phase();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amps()[0] - Complex64::new(h, 0.0)).norm() < 1e-12);
        assert!((s.amps()[1] - Complex64::new(0.0, -h)).norm() < 1e-12);
        assert!(r.succeeded);

        let sched = build_schedule(1024, &params()).unwrap();
        let r = run_ideal(&sched).unwrap();
        assert!(r.state.amps().iter().all(|a| (a.norm() - 2f64.powi(-5)).abs() < 1e-10));
        assert!((w_class_fidelity(&r.state) - 1.0).abs() < 1e-9);
        assert_eq!(r.rounds_executed, 10);
        assert_eq!(r.total_time, 10.0 * sched.pass_duration);
        assert_eq!(r.seed, None);
    }

    #[test]
    fn ideal_is_deterministic() {
        let sched = build_schedule(256, &params()).unwrap();
        assert_eq!(run_ideal(&sched).unwrap(), run_ideal(&sched).unwrap());
    }

    #[test]
    fn ideal_refuses_odd_targets() {
        let sched = build_schedule(3, &params()).unwrap();
        assert!(matches!(run_ideal(&sched), Err(Error::ReductionRequired { target: 3 })));
        let r = run_protocol(&sched, 1).unwrap();
        assert_eq!(r.seed, Some(1));
        assert_eq!(r.reduction_outcomes.len(), 1);
        if r.succeeded {
            assert_eq!(r.state.len(), 3);
            assert!((w_class_fidelity(&r.state) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn reduction_identity_and_errors() {
        let w = ideal_w(4).unwrap();
        let r = reduce_to_size(&w, 4, 0).unwrap();
        assert!(r.succeeded);
        assert!(r.reduction_outcomes.is_empty());
        assert_eq!(r.state, w);
        assert!(matches!(reduce_to_size(&w, 5, 0), Err(Error::TargetTooLarge { .. })));
        assert!(reduce_to_size(&w, 0, 0).is_err());
    }

    #[test]
    fn reduction_records_probabilities() {
        let w = ideal_w(8).unwrap();
        // scan seeds for one all-ground path and one failure
        let mut saw_success = false;
        let mut saw_failure = false;
        for seed in 0..64 {
            let r = reduce_to_size(&w, 5, seed).unwrap();
            if r.succeeded {
                saw_success = true;
                let probs: Vec<f64> = r.reduction_outcomes.iter().map(|m| m.probability_of_outcome).collect();
                for (p, e) in probs.iter().zip([7.0 / 8.0, 6.0 / 7.0, 5.0 / 6.0]) {
                    assert!((p - e).abs() < 1e-12);
                }
                assert!((r.state.norm_sqr() - 1.0).abs() < 1e-12);
                assert!(r.state.amps().iter().all(|a| (a.norm() - 5f64.sqrt().recip()).abs() < 1e-12));
            } else {
                saw_failure = true;
                let last = r.reduction_outcomes.last().unwrap();
                assert_eq!(last.outcome, Outcome::Excited);
                assert_eq!(r.state.amps()[last.measured_atom].norm(), 1.0);
            }
        }
        assert!(saw_success && saw_failure);
    }

    #[test]
    fn success_frequency_is_reproducible() {
        let a = success_frequency(4, 3, 2000, 11).unwrap();
        let b = success_frequency(4, 3, 2000, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.z_score().abs() < 4.0);
        assert!(success_frequency(4, 5, 10, 0).is_err());
        assert!(success_frequency(4, 3, 0, 0).is_err());
        let same = success_frequency(4, 4, 10, 0).unwrap();
        assert_eq!(same.frequency, 1.0);
        assert_eq!(same.z_score(), 0.0);
    }
}
