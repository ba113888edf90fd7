//! Monte-Carlo trajectories with pulse-angle jitter and radiative decay, and
//! the timing budget of the cascade against the atomic lifetime.
//!
//! Each trajectory draws from three independent streams derived from its
//! seed (jitter, decay, measurement), so adding one noise source never
//! reshuffles the draws of another.

use std::f64::consts::{FRAC_PI_4, PI};

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interaction::InteractionParams;
use crate::protocol::{reduce_with_rng, rounds_for, Schedule};
use crate::seed::{derive_seed, rng_from, Rng};
use crate::state::{w_class_fidelity, SingleExcitationState};
use crate::subspace::{apply_round, apply_round_with};

const JITTER_STREAM: u64 = 0;
const DECAY_STREAM: u64 = 1;
const MEASURE_STREAM: u64 = 2;

/// Radiative lifetime of the Rydberg levels used in the reference setup, s.
pub const RYDBERG_LIFETIME: f64 = 3e-2;

/// Whole-process duration quoted for the reference setup, s.
pub const REFERENCE_PROCESS_TIME: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Standard deviation of the per-pass pulse-angle error, rad.
    pub theta_sigma: f64,
    /// Atomic radiative lifetime, s.
    pub t_r: f64,
    pub decay_enabled: bool,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn noiseless(seed: u64) -> Self {
        Self { theta_sigma: 0.0, t_r: RYDBERG_LIFETIME, decay_enabled: false, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta_sigma.is_finite() && self.theta_sigma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "theta_sigma",
                value: self.theta_sigma,
                reason: "must be non-negative",
            });
        }
        if self.t_r.is_nan() || self.t_r <= 0.0 {
            return Err(Error::InvalidParameter { name: "t_r", value: self.t_r, reason: "must be positive" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    /// Final state; `None` once the excitation has been lost.
    pub state: Option<SingleExcitationState>,
    pub decayed: bool,
    pub reduction_failed: bool,
    pub fidelity_sample: f64,
}

/// Probability that an excited atom decays during `duration`.
pub fn decay_probability(duration: f64, t_r: f64) -> f64 {
    -(-duration / t_r).exp_m1()
}

/// Amplitude-damping jump check on each atom in turn. Returns true when the
/// excitation is emitted; otherwise applies the no-jump evolution and
/// renormalizes.
fn decay_step(state: &mut SingleExcitationState, p: f64, rng: &mut Rng) -> Result<bool> {
    let keep = (1.0 - p).sqrt();
    let mut norm = state.norm_sqr();
    for c in state.amps_mut().iter_mut() {
        let pop = c.norm_sqr();
        if pop == 0.0 {
            continue;
        }
        if rng.gen::<f64>() < p * pop / norm {
            return Ok(true);
        }
        *c *= keep;
        norm -= p * pop;
    }
    let scale = norm.sqrt().recip();
    state.amps_mut().iter_mut().for_each(|c| *c *= scale);
    Ok(false)
}

pub fn sample_noisy_run(schedule: &Schedule, noise: &NoiseConfig, seed: u64) -> Result<TrajectoryOutcome> {
    noise.validate()?;
    let mut jitter = rng_from(derive_seed(seed, JITTER_STREAM));
    let mut decay = rng_from(derive_seed(seed, DECAY_STREAM));
    let p = decay_probability(schedule.pass_duration, noise.t_r);

    let mut state = SingleExcitationState::excited(1, 0)?;
    for plan in &schedule.rounds {
        if noise.theta_sigma > 0.0 {
            let (mean, sigma) = (schedule.theta_per_pass, noise.theta_sigma);
            let mut angle = |_: usize| mean + sigma * jitter.sample::<f64, _>(StandardNormal);
            apply_round_with(&mut state, plan, Some(&mut angle))?;
        } else {
            apply_round(&mut state, plan)?;
        }
        if noise.decay_enabled && decay_step(&mut state, p, &mut decay)? {
            return Ok(TrajectoryOutcome { state: None, decayed: true, reduction_failed: false, fidelity_sample: 0.0 });
        }
    }

    if schedule.reduction_count > 0 {
        let mut measure = rng_from(derive_seed(seed, MEASURE_STREAM));
        let r = reduce_with_rng(state, schedule.target_n, &mut measure)?;
        let fidelity_sample = if r.succeeded { w_class_fidelity(&r.state) } else { 0.0 };
        return Ok(TrajectoryOutcome {
            state: Some(r.state),
            decayed: false,
            reduction_failed: !r.succeeded,
            fidelity_sample,
        });
    }
    let fidelity_sample = w_class_fidelity(&state);
    Ok(TrajectoryOutcome { state: Some(state), decayed: false, reduction_failed: false, fidelity_sample })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub decayed: usize,
    pub reduction_failures: usize,
}

impl FidelityEstimate {
    pub fn survival_fraction(&self) -> f64 {
        1.0 - self.decayed as f64 / self.trials as f64
    }
}

/// Sample mean and standard error of the fidelity over `trials` trajectories;
/// trial `i` is seeded with `derive_seed(noise.seed, i)`.
pub fn estimate_fidelity(schedule: &Schedule, noise: &NoiseConfig, trials: usize) -> Result<FidelityEstimate> {
    if trials == 0 {
        return Err(Error::InvalidSize { size: 0, reason: "need at least one trial" });
    }
    noise.validate()?;
    let outcomes: Vec<(f64, bool, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            sample_noisy_run(schedule, noise, derive_seed(noise.seed, i))
                .map(|o| (o.fidelity_sample, o.decayed, o.reduction_failed))
        })
        .collect::<Result<_>>()?;

    let n = trials as f64;
    let mean = outcomes.iter().map(|o| o.0).sum::<f64>() / n;
    let stderr = if trials > 1 {
        let var = outcomes.iter().map(|o| (o.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(FidelityEstimate {
        mean,
        stderr,
        trials,
        decayed: outcomes.iter().filter(|o| o.1).count(),
        reduction_failures: outcomes.iter().filter(|o| o.2).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityOptions {
    /// Fraction of the lifetime the protocol may spend.
    pub budget: f64,
    /// Per-process duration used by the coarse accounting, s.
    pub process_time: f64,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        Self { budget: 1.0, process_time: REFERENCE_PROCESS_TIME }
    }
}

/// Timing budget of the cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    /// Quarter-pass duration `πδ/(4g²)`, s.
    pub t_pass: f64,
    /// `πδ/g² = 4·t_pass`, the order-of-magnitude interaction time, s.
    pub order_time: f64,
    pub target_n: usize,
    pub rounds: u32,
    /// `rounds · t_pass`, s.
    pub total_time: f64,
    /// Probability that the excitation decays during `total_time`.
    pub decay_probability_per_atom: f64,
    /// Sequential-pass accounting: largest `K` with `K·t_pass ≤ budget·T_r`.
    pub max_rounds: u32,
    /// `2^max_rounds`.
    pub max_size: f64,
    pub process_time: f64,
    /// Per-process accounting: `⌊budget·T_r / process_time⌋`.
    pub process_max_rounds: u32,
    pub process_max_size: f64,
    pub t_r: f64,
    pub budget: f64,
    pub params: InteractionParams,
}

/// Floor that forgives the last-ulp shortfall of quotients such as 0.03/0.001.
fn floor_count(x: f64) -> u32 {
    let f = (x * (1.0 + 1e-12)).floor();
    if f <= 0.0 {
        0
    } else if f >= u32::MAX as f64 {
        u32::MAX
    } else {
        f as u32
    }
}

pub fn feasibility(params: &InteractionParams, target_n: usize, t_r: f64) -> Result<FeasibilityReport> {
    feasibility_with(params, target_n, t_r, &FeasibilityOptions::default())
}

pub fn feasibility_with(
    params: &InteractionParams,
    target_n: usize,
    t_r: f64,
    opts: &FeasibilityOptions,
) -> Result<FeasibilityReport> {
    if target_n == 0 {
        return Err(Error::InvalidSize { size: 0, reason: "target must have at least one atom" });
    }
    for (name, value) in [("t_r", t_r), ("budget", opts.budget), ("process_time", opts.process_time)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter { name, value, reason: "must be positive" });
        }
    }
    let t_pass = PI * params.delta() / (4.0 * params.g() * params.g());
    debug_assert!((t_pass - FRAC_PI_4 / params.lambda()).abs() <= 1e-12 * t_pass);
    let rounds = rounds_for(target_n);
    let total_time = rounds as f64 * t_pass;
    let max_rounds = floor_count(opts.budget * t_r / t_pass);
    let process_max_rounds = floor_count(opts.budget * t_r / opts.process_time);
    Ok(FeasibilityReport {
        t_pass,
        order_time: 4.0 * t_pass,
        target_n,
        rounds,
        total_time,
        decay_probability_per_atom: decay_probability(total_time, t_r),
        max_rounds,
        max_size: 2f64.powf(max_rounds as f64),
        process_time: opts.process_time,
        process_max_rounds,
        process_max_size: 2f64.powf(process_max_rounds as f64),
        t_r,
        budget: opts.budget,
        params: *params,
    })
}
