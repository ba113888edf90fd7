use std::f64::consts::FRAC_PI_4;

use thiserror::Error;

use super::config::{Command, RunConfig};
use super::output::ResultRecord;
use crate::error::Error;
use crate::interaction::{compare_effective_exact_with, ExactModelConfig, Frame, InteractionParams};
use crate::noise::{estimate_fidelity, feasibility, NoiseConfig};
use crate::protocol::{build_schedule, run_ideal, run_protocol, success_frequency, ProtocolResult, Schedule};
use crate::state::{w_class_fidelity, SingleExcitationState};
use crate::subspace::W4_STORAGE_LABELS;

/// Registers up to this size are reported atom by atom by `expand`.
pub const EXPAND_DETAIL_LIMIT: usize = 64;

/// Detuning ratios always covered by `validate`.
pub const VALIDATION_GRID: [f64; 4] = [10.0, 20.0, 50.0, 100.0];

pub const SWEEP_THETA_SIGMA: [f64; 5] = [0.0, 0.02, 0.05, 0.1, 0.2];

/// Lifetime multipliers of `noise-sweep`; `None` disables decay.
pub const SWEEP_LIFETIME_SCALE: [Option<f64>; 4] = [None, Some(1.0), Some(0.1), Some(0.01)];

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical guard tripped: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Numerical(_) => 3,
            CommandError::Io(_) => 1,
        }
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CommandError::Numerical(e.to_string())
        } else {
            CommandError::Config(e.to_string())
        }
    }
}

type CmdResult = Result<Vec<ResultRecord>, CommandError>;

/// Configuration echo appended to every record.
pub fn config_echo(cfg: &RunConfig) -> ResultRecord {
    ResultRecord::new()
        .text("command", cfg.command.name())
        .int("target_n", cfg.target_n)
        .float("g_hz", cfg.g_hz)
        .float("delta_over_g", cfg.delta_over_g)
        .float("t_r_s", cfg.t_r_s)
        .float("theta_sigma", cfg.theta_sigma)
        .int("trials", cfg.trials)
        .text("seed", cfg.seed.to_string())
        .int("n_max", cfg.n_max)
        .int("from", cfg.from)
        .int("to", cfg.to)
        .flag("decay", cfg.decay)
}

fn params(cfg: &RunConfig) -> Result<InteractionParams, CommandError> {
    Ok(InteractionParams::from_hz(cfg.g_hz, cfg.delta_over_g, FRAC_PI_4)?)
}

pub fn run_command(cfg: &RunConfig) -> CmdResult {
    let echo = config_echo(cfg);
    let records = match cfg.command {
        Command::Epr => epr(cfg)?,
        Command::Expand => expand(cfg)?,
        Command::Simulate => simulate(cfg)?,
        Command::Validate => validate(cfg)?,
        Command::Schedule => schedule(cfg)?,
        Command::Feasibility => feasibility_cmd(cfg)?,
        Command::NoiseSweep => noise_sweep(cfg)?,
        Command::Reduce => reduce(cfg)?,
    };
    let records: Vec<_> = records.into_iter().map(|r| r.extend(&echo)).collect();
    if let Some(key) = records.iter().find_map(|r| r.first_non_finite()) {
        return Err(CommandError::Numerical(format!("non-finite value for {key}")));
    }
    Ok(records)
}

fn guard(state: &SingleExcitationState) -> Result<(), CommandError> {
    state.validate().map_err(|e| CommandError::Numerical(e.to_string()))
}

fn amplitude_records(state: &SingleExcitationState, labels: Option<&[&str]>) -> Vec<ResultRecord> {
    let fixed = state.with_fixed_global_phase();
    let phases = fixed.relative_phases();
    fixed
        .amps()
        .iter()
        .zip(phases)
        .enumerate()
        .map(|(k, (a, phase))| {
            let label = labels.and_then(|l| l.get(k)).map_or_else(|| k.to_string(), |s| s.to_string());
            ResultRecord::new()
                .int("atom", k)
                .text("label", label)
                .float("re", a.re)
                .float("im", a.im)
                .float("magnitude", a.norm())
                .float("relative_phase", phase)
        })
        .collect()
}

fn run_level(r: &ProtocolResult) -> ResultRecord {
    ResultRecord::new()
        .int("rounds", r.rounds_executed)
        .float("total_time", r.total_time)
        .flag("succeeded", r.succeeded)
        .float("w_class_fidelity", w_class_fidelity(&r.state))
}

fn epr(cfg: &RunConfig) -> CmdResult {
    let result = run_ideal(&build_schedule(2, &params(cfg)?)?)?;
    guard(&result.state)?;
    let run = run_level(&result);
    Ok(amplitude_records(&result.state, Some(&W4_STORAGE_LABELS[..2])).into_iter().map(|r| r.extend(&run)).collect())
}

fn run_target(cfg: &RunConfig, sched: &Schedule) -> Result<ProtocolResult, CommandError> {
    if sched.reduction_count == 0 {
        Ok(run_ideal(sched)?)
    } else {
        Ok(run_protocol(sched, cfg.seed)?)
    }
}

fn expand(cfg: &RunConfig) -> CmdResult {
    let sched = build_schedule(cfg.target_n, &params(cfg)?)?;
    let result = run_target(cfg, &sched)?;
    guard(&result.state)?;
    let run = run_level(&result);
    let n = result.state.len();
    if n <= EXPAND_DETAIL_LIMIT && result.succeeded {
        let labels = (n == 4).then_some(&W4_STORAGE_LABELS[..]);
        return Ok(amplitude_records(&result.state, labels).into_iter().map(|r| r.extend(&run)).collect());
    }
    let target_mag = (n as f64).sqrt().recip();
    let mags = result.state.amps().iter().map(|a| a.norm());
    let (min, max) = mags.clone().fold((f64::INFINITY, 0.0f64), |(lo, hi), m| (lo.min(m), hi.max(m)));
    let deviation = mags.map(|m| (m - target_mag).abs()).fold(0.0, f64::max);
    Ok(vec![ResultRecord::new()
        .int("atoms", n)
        .float("norm_error", (result.state.norm_sqr() - 1.0).abs())
        .float("min_magnitude", min)
        .float("max_magnitude", max)
        .float("max_magnitude_deviation", deviation)
        .int("measurements", result.reduction_outcomes.len())
        .extend(&run)])
}

fn simulate(cfg: &RunConfig) -> CmdResult {
    let sched = build_schedule(cfg.target_n, &params(cfg)?)?;
    let noise = NoiseConfig { theta_sigma: cfg.theta_sigma, t_r: cfg.t_r_s, decay_enabled: cfg.decay, seed: cfg.seed };
    let est = estimate_fidelity(&sched, &noise, cfg.trials)?;
    let closed_form =
        if cfg.decay { (-(sched.round_count() as f64) * sched.pass_duration / cfg.t_r_s).exp() } else { 1.0 };
    Ok(vec![ResultRecord::new()
        .float("mean_fidelity", est.mean)
        .float("stderr", est.stderr)
        .float("survival_fraction", est.survival_fraction())
        .float("closed_form_survival", closed_form)
        .int("decayed", est.decayed)
        .int("reduction_failures", est.reduction_failures)
        .int("rounds", sched.round_count())
        .float("t_pass", sched.pass_duration)])
}

fn validate(cfg: &RunConfig) -> CmdResult {
    let mut grid = VALIDATION_GRID.to_vec();
    if !grid.contains(&cfg.delta_over_g) {
        grid.push(cfg.delta_over_g);
        grid.sort_by(f64::total_cmp);
    }
    let exact = ExactModelConfig { n_max: cfg.n_max, frame: Frame::Interaction };
    grid.into_iter()
        .map(|ratio| {
            let p = InteractionParams::from_hz(cfg.g_hz, ratio, FRAC_PI_4)?;
            let rep = compare_effective_exact_with(&p, &exact)?;
            Ok(ResultRecord::new()
                .float("grid_delta_over_g", rep.ratio)
                .float("infidelity", rep.infidelity)
                .float("photon_leakage", rep.photon_leakage)
                .float("top_rung_population", rep.top_rung_population)
                .float("lambda", p.lambda())
                .float("t_pass", p.duration()))
        })
        .collect()
}

fn schedule(cfg: &RunConfig) -> CmdResult {
    let sched = build_schedule(cfg.target_n, &params(cfg)?)?;
    let mut out = Vec::with_capacity(sched.pass_count() + sched.reduction_count);
    for (r, plan) in sched.rounds.iter().enumerate() {
        let start = r as f64 * sched.pass_duration;
        for rot in plan.pairs() {
            let (i, j) = rot.atoms();
            out.push(
                ResultRecord::new()
                    .text("kind", "pass")
                    .int("round", r)
                    .int("atom_i", i)
                    .int("atom_j", j as i64)
                    .float("theta", rot.theta())
                    .float("start_time", start)
                    .float("end_time", start + sched.pass_duration),
            );
        }
    }
    let end = sched.round_count() as f64 * sched.pass_duration;
    for atom in sched.measured_atoms() {
        out.push(
            ResultRecord::new()
                .text("kind", "measure")
                .int("round", sched.round_count())
                .int("atom_i", atom)
                .int("atom_j", -1)
                .float("theta", 0.0)
                .float("start_time", end)
                .float("end_time", end),
        );
    }
    Ok(out)
}

fn feasibility_cmd(cfg: &RunConfig) -> CmdResult {
    let f = feasibility(&params(cfg)?, cfg.target_n, cfg.t_r_s)?;
    Ok(vec![ResultRecord::new()
        .float("t_pass", f.t_pass)
        .float("order_time", f.order_time)
        .int("rounds", f.rounds)
        .float("total_time", f.total_time)
        .float("decay_probability_per_atom", f.decay_probability_per_atom)
        .int("max_rounds", f.max_rounds)
        .float("max_size", f.max_size)
        .float("process_time", f.process_time)
        .int("process_max_rounds", f.process_max_rounds)
        .float("process_max_size", f.process_max_size)
        .float("g_rad_s", f.params.g())
        .float("delta_rad_s", f.params.delta())
        .float("lambda", f.params.lambda())])
}

fn noise_sweep(cfg: &RunConfig) -> CmdResult {
    let sched = build_schedule(cfg.target_n, &params(cfg)?)?;
    let mut out = Vec::new();
    for scale in SWEEP_LIFETIME_SCALE {
        for sigma in SWEEP_THETA_SIGMA {
            let noise = NoiseConfig {
                theta_sigma: sigma,
                t_r: cfg.t_r_s * scale.unwrap_or(1.0),
                decay_enabled: scale.is_some(),
                seed: cfg.seed,
            };
            let est = estimate_fidelity(&sched, &noise, cfg.trials)?;
            out.push(
                ResultRecord::new()
                    .float("sweep_theta_sigma", sigma)
                    .float("sweep_t_r_s", noise.t_r)
                    .flag("decay_enabled", noise.decay_enabled)
                    .float("mean_fidelity", est.mean)
                    .float("stderr", est.stderr)
                    .float("survival_fraction", est.survival_fraction()),
            );
        }
    }
    Ok(out)
}

fn reduce(cfg: &RunConfig) -> CmdResult {
    let est = success_frequency(cfg.from, cfg.to, cfg.trials, cfg.seed)?;
    Ok(vec![ResultRecord::new()
        .int("successes", est.successes)
        .float("frequency", est.frequency)
        .float("expected", est.expected)
        .float("stderr", est.stderr)
        .float("z_score", est.z_score())])
}
