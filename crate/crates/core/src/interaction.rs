//! Two atoms crossing a detuned single-mode cavity.
//!
//! Three levels of description live here:
//!
//! * [`effective_propagator`]: the closed-form evolution generated by the
//!   vacuum-sector effective Hamiltonian `λ[Σ_j |e_j⟩⟨e_j| + S₁⁺S₂⁻ + S₁⁻S₂⁺]`,
//!   phases included.
//! * [`build_effective_operator`]: the effective Hamiltonian with its photon
//!   number dependence, `λ[Σ_j(|e_j⟩⟨e_j| a a† − |g_j⟩⟨g_j| a†a) + hopping]`.
//! * [`exact_propagator`]: the full interaction-picture dynamics of
//!   `H(t) = g Σ_j (e^{-iδt} a† S_j⁻ + e^{iδt} a S_j⁺)` on a truncated ladder.
//!
//! Dense operators act on `atom₁ ⊗ atom₂ ⊗ photon`, index
//! `(2·s₁ + s₂)·(n_max + 1) + n` with `s = 1` for an excited atom.

use std::f64::consts::{FRAC_PI_4, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::ComplexAmp;

pub type DenseOperator = DMatrix<Complex64>;

/// Default photon-ladder truncation for the exact model.
pub const DEFAULT_N_MAX: usize = 5;

/// Top-rung population above which the ladder is considered too short.
pub const TRUNCATION_THRESHOLD: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Physical knobs of one cavity pass. Angular quantities in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionParams {
    g: f64,
    delta: f64,
    lambda: f64,
    theta: f64,
    t: f64,
}

impl InteractionParams {
    /// Pass defined by its pulse angle `θ = λt`.
    pub fn new(g: f64, delta: f64, theta: f64) -> Result<Self> {
        let lambda = Self::check(g, delta)?;
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { g, delta, lambda, theta, t: theta / lambda })
    }

    /// Pass defined by its duration.
    pub fn from_duration(g: f64, delta: f64, t: f64) -> Result<Self> {
        let lambda = Self::check(g, delta)?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter { name: "t", value: t, reason: "must be finite and non-negative" });
        }
        Ok(Self { g, delta, lambda, theta: lambda * t, t })
    }

    /// `g = 2π·g_hz`, `δ = delta_over_g·g`.
    pub fn from_hz(g_hz: f64, delta_over_g: f64, theta: f64) -> Result<Self> {
        let g = TAU * g_hz;
        Self::new(g, delta_over_g * g, theta)
    }

    /// The 50/50 excitation-sharing pass, `θ = π/4`.
    pub fn quarter_pass(g: f64, delta: f64) -> Result<Self> {
        Self::new(g, delta, FRAC_PI_4)
    }

    fn check(g: f64, delta: f64) -> Result<f64> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParameter { name: "g", value: g, reason: "must be positive" });
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter { name: "delta", value: delta, reason: "must be positive" });
        }
        Ok(g * g / delta)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `λ = g²/δ`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Pass duration `t = θ/λ` in seconds.
    pub fn duration(&self) -> f64 {
        self.t
    }

    pub fn delta_over_g(&self) -> f64 {
        self.delta / self.g
    }
}

/// 4×4 unitary on `|gg⟩, |ge⟩, |eg⟩, |ee⟩`; `m[r][c] = ⟨r|U|c⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomUnitary(pub [[ComplexAmp; 4]; 4]);

impl TwoAtomUnitary {
    pub fn identity() -> Self {
        let mut m = [[ZERO; 4]; 4];
        (0..4).for_each(|i| m[i][i] = ONE);
        Self(m)
    }

    pub fn entry(&self, row: usize, col: usize) -> ComplexAmp {
        self.0[row][col]
    }

    pub fn column(&self, col: usize) -> [ComplexAmp; 4] {
        [0, 1, 2, 3].map(|r| self.0[r][col])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self(std::array::from_fn(|r| std::array::from_fn(|c| (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum())))
    }

    pub fn adjoint(&self) -> Self {
        Self(std::array::from_fn(|r| std::array::from_fn(|c| self.0[c][r].conj())))
    }

    /// Largest entry of `|U·V − V'|` style differences.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Max-entry norm of `U†U − I`.
    pub fn unitarity_error(&self) -> f64 {
        self.adjoint().matmul(self).max_abs_diff(&Self::identity())
    }
}

/// Closed-form evolution over pulse angle `θ = λt`:
///
/// ```text
/// |gg⟩ → |gg⟩
/// |ge⟩ → e^{-iθ}(cos θ |ge⟩ − i sin θ |eg⟩)
/// |eg⟩ → e^{-iθ}(cos θ |eg⟩ − i sin θ |ge⟩)
/// |ee⟩ → e^{-2iθ} |ee⟩
/// ```
pub fn effective_propagator(theta: f64) -> TwoAtomUnitary {
    let phase = Complex64::from_polar(1.0, -theta);
    let (s, c) = theta.sin_cos();
    let diag = phase * c;
    let off = phase * Complex64::new(0.0, -s);
    TwoAtomUnitary([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, diag, off, ZERO],
        [ZERO, off, diag, ZERO],
        [ZERO, ZERO, ZERO, phase * phase],
    ])
}

fn lowering() -> DenseOperator {
    // |g⟩⟨e| with |g⟩ = 0, |e⟩ = 1
    DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

fn excited_projector() -> DenseOperator {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ZERO, ONE]))
}

fn ground_projector() -> DenseOperator {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ZERO]))
}

/// Truncated annihilation operator on `n_max + 1` Fock levels.
fn annihilation(n_max: usize) -> DenseOperator {
    let dim = n_max + 1;
    DMatrix::from_fn(dim, dim, |r, c| if c == r + 1 { Complex64::new((c as f64).sqrt(), 0.0) } else { ZERO })
}

fn kron3(a: &DenseOperator, b: &DenseOperator, c: &DenseOperator) -> DenseOperator {
    a.kronecker(b).kronecker(c)
}

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max == 0 {
        return Err(Error::InvalidSize { size: 0, reason: "photon ladder needs n_max >= 1" });
    }
    Ok(())
}

/// Effective Hamiltonian with photon-number terms, in units of `λ`:
/// `Σ_j(|e_j⟩⟨e_j| a a† − |g_j⟩⟨g_j| a†a) + S₁⁺S₂⁻ + S₁⁻S₂⁺`.
/// Built from truncated ladder matrices.
pub fn build_effective_operator(n_max: usize) -> Result<DenseOperator> {
    check_n_max(n_max)?;
    let dim = n_max + 1;
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    let idp = DMatrix::<Complex64>::identity(dim, dim);
    let a = annihilation(n_max);
    let ad = a.adjoint();
    let aad = &a * &ad;
    let ada = &ad * &a;
    let (pe, pg, sm) = (excited_projector(), ground_projector(), lowering());
    let sp = sm.adjoint();

    let stark = kron3(&pe, &id2, &aad) - kron3(&pg, &id2, &ada) + kron3(&id2, &pe, &aad) - kron3(&id2, &pg, &ada);
    let hop = kron3(&sp, &sm, &idp) + kron3(&sm, &sp, &idp);
    Ok(stark + hop)
}

/// Vacuum-sector effective Hamiltonian on `|gg⟩,|ge⟩,|eg⟩,|ee⟩`, units of `λ`.
pub fn vacuum_effective_operator() -> DenseOperator {
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    let (pe, sm) = (excited_projector(), lowering());
    let sp = sm.adjoint();
    pe.kronecker(&id2) + id2.kronecker(&pe) + sp.kronecker(&sm) + sm.kronecker(&sp)
}

/// Restriction of a dense `(atom ⊗ atom ⊗ photon)` operator to the zero-photon sector.
pub fn vacuum_block(op: &DenseOperator, n_max: usize) -> DenseOperator {
    let dim = n_max + 1;
    DMatrix::from_fn(4, 4, |r, c| op[(r * dim, c * dim)])
}

/// `exp(−i·H·t)` for Hermitian `H` via eigendecomposition.
pub fn expm_hermitian(h: &DenseOperator, t: f64) -> DenseOperator {
    let eig = h.clone().symmetric_eigen();
    let phases = eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t));
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (c, p) in phases.iter().enumerate() {
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= p;
        }
    }
    scaled * v.adjoint()
}

/// Picture in which [`exact_propagator`] is returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    /// Interaction picture of the time-dependent coupling; directly comparable
    /// with the effective propagator.
    #[default]
    Interaction,
    /// Frame rotating with the cavity, `exp(−i(A + H_c)t)`.
    Rotating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactModelConfig {
    pub n_max: usize,
    pub frame: Frame,
}

impl Default for ExactModelConfig {
    fn default() -> Self {
        Self { n_max: DEFAULT_N_MAX, frame: Frame::Interaction }
    }
}

/// Exact two-atom + cavity propagator on the truncated space.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    pub matrix: DenseOperator,
    pub n_max: usize,
}

impl ExactPropagator {
    pub fn dim(&self) -> usize {
        4 * (self.n_max + 1)
    }

    /// Column for input `|atoms⟩ ⊗ |photons⟩`.
    pub fn propagate_basis(&self, atoms: usize, photons: usize) -> Vec<Complex64> {
        let col = atoms * (self.n_max + 1) + photons;
        self.matrix.column(col).iter().copied().collect()
    }

    /// Population in the highest Fock level, worst over the four atomic
    /// inputs with an empty cavity.
    pub fn top_rung_population(&self) -> f64 {
        let dim = self.n_max + 1;
        (0..4)
            .map(|a| {
                let out = self.propagate_basis(a, 0);
                (0..4).map(|b| out[b * dim + self.n_max].norm_sqr()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn unitarity_error(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        let id = DMatrix::<Complex64>::identity(prod.nrows(), prod.ncols());
        (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Atomic detuning term `δ Σ_j |e_j⟩⟨e_j|` (diagonal) and coupling
/// `g Σ_j (a† S_j⁻ + a S_j⁺)`.
fn exact_generators(params: &InteractionParams, n_max: usize) -> (Vec<f64>, DenseOperator) {
    let dim = n_max + 1;
    let detuning: Vec<f64> = (0..4 * dim)
        .map(|i| {
            let atoms = i / dim;
            params.delta() * ((atoms >> 1) + (atoms & 1)) as f64
        })
        .collect();
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    let a = annihilation(n_max);
    let sm = lowering();
    let emit = kron3(&sm, &id2, &a.adjoint()) + kron3(&id2, &sm, &a.adjoint());
    let coupling = (&emit + emit.adjoint()) * Complex64::new(params.g(), 0.0);
    (detuning, coupling)
}

/// Exact propagator of the time-dependent detuned coupling over the pass
/// duration. With `A = δΣ_j|e_j⟩⟨e_j|` and `H_c = gΣ_j(a†S_j⁻ + aS_j⁺)`,
/// `H(t) = e^{iAt} H_c e^{-iAt}`, so `U(t) = e^{iAt}·exp(−i(A + H_c)t)` with
/// no time ordering left.
pub fn exact_propagator(params: &InteractionParams, config: &ExactModelConfig) -> Result<ExactPropagator> {
    check_n_max(config.n_max)?;
    let t = params.duration();
    let (detuning, coupling) = exact_generators(params, config.n_max);
    let mut generator = coupling;
    for (i, d) in detuning.iter().enumerate() {
        generator[(i, i)] += Complex64::new(*d, 0.0);
    }
    let mut matrix = expm_hermitian(&generator, t);
    if config.frame == Frame::Interaction {
        for (r, d) in detuning.iter().enumerate() {
            let p = Complex64::from_polar(1.0, d * t);
            for c in 0..matrix.ncols() {
                matrix[(r, c)] *= p;
            }
        }
    }
    let prop = ExactPropagator { matrix, n_max: config.n_max };
    let population = prop.top_rung_population();
    if population > TRUNCATION_THRESHOLD {
        return Err(Error::Truncation { n_max: config.n_max, population });
    }
    Ok(prop)
}

/// Accuracy of the effective description for one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproximationReport {
    /// Worst-case infidelity over the four atomic inputs, measured on the
    /// renormalized vacuum-sector atomic state.
    pub infidelity: f64,
    /// Worst-case population left outside the zero-photon sector.
    pub photon_leakage: f64,
    /// `δ/g`.
    pub ratio: f64,
    pub top_rung_population: f64,
}

pub fn compare_effective_exact(params: &InteractionParams) -> Result<ApproximationReport> {
    compare_effective_exact_with(params, &ExactModelConfig::default())
}

pub fn compare_effective_exact_with(
    params: &InteractionParams,
    config: &ExactModelConfig,
) -> Result<ApproximationReport> {
    let config = ExactModelConfig { frame: Frame::Interaction, ..*config };
    let exact = exact_propagator(params, &config)?;
    let effective = effective_propagator(params.theta());
    let dim = config.n_max + 1;

    let mut infidelity: f64 = 0.0;
    let mut photon_leakage: f64 = 0.0;
    for input in 0..4 {
        let out = exact.propagate_basis(input, 0);
        let vacuum: Vec<Complex64> = (0..4).map(|b| out[b * dim]).collect();
        let weight: f64 = vacuum.iter().map(|c| c.norm_sqr()).sum();
        let target = effective.column(input);
        let overlap: Complex64 = target.iter().zip(&vacuum).map(|(t, v)| t.conj() * v).sum();
        let fid = if weight > 0.0 { (overlap.norm_sqr() / weight).min(1.0) } else { 0.0 };
        infidelity = infidelity.max((1.0 - fid).max(0.0));
        photon_leakage = photon_leakage.max((1.0 - weight).clamp(0.0, 1.0));
    }
    Ok(ApproximationReport {
        infidelity,
        photon_leakage,
        ratio: params.delta_over_g(),
        top_rung_population: exact.top_rung_population(),
    })
}
