//! Deterministic W-state expansion in cavity QED.
//!
//! A single excitation is shared between atom pairs by detuned passes through
//! a vacuum cavity; repeating the pass with fresh ground-state ancillas
//! doubles a W state each round. The crate provides:
//!
//! * [`state`]: single-excitation and dense state vectors, overlaps, W metrics.
//! * [`interaction`]: the closed-form pass propagator and the exact
//!   atom-cavity model it approximates.
//! * [`subspace`]: the O(n) cascade engine plus closed-form and dense oracles.
//! * [`protocol`]: schedules, ideal runs and measurement reduction.
//! * [`noise`]: jitter/decay trajectories and the lifetime budget.
//! * [`cli`]: configuration, commands and CSV/JSON records for the binary.

pub mod cli;
pub mod error;
pub mod interaction;
pub mod noise;
pub mod protocol;
pub mod seed;
pub mod state;
pub mod subspace;

pub use error::{Error, Result};
pub use interaction::{
    compare_effective_exact, effective_propagator, exact_propagator, ApproximationReport, ExactModelConfig,
    InteractionParams, TwoAtomUnitary,
};
pub use noise::{estimate_fidelity, feasibility, sample_noisy_run, FeasibilityReport, NoiseConfig};
pub use protocol::{build_schedule, reduce_to_size, run_ideal, run_protocol, ProtocolResult, Schedule};
pub use state::{
    canonical_w, fidelity, inner_product, w_class_fidelity, ComplexAmp, PureStateDense, SingleExcitationState,
};
pub use subspace::{analytic_amplitude, apply_pair, cascade, expand_double, PairRotation, RoundPlan};
