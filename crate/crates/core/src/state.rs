//! State representations shared by every simulation path.
//!
//! Basis convention, used bit-exactly everywhere: each atom has basis order
//! `|g⟩, |e⟩` (index 0, 1); subsystems are laid out row-major with the first
//! declared subsystem most significant; a photon ladder, when present, is the
//! last subsystem. For an `n`-atom register the basis state with only atom `k`
//! excited therefore sits at dense index `1 << (n - 1 - k)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex probability amplitude.
pub type ComplexAmp = Complex64;

/// Normalization tolerance for stored states.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Largest atom count accepted by [`to_dense`].
pub const DEFAULT_DENSE_CAP: usize = 20;

/// Overlap-capable state representation.
pub trait QuantumState {
    /// Shape used for compatibility checks.
    fn shape(&self) -> Vec<usize>;
    fn amplitudes(&self) -> &[ComplexAmp];
}

/// `⟨a|b⟩`, conjugating `a`.
pub fn inner_product<S: QuantumState>(a: &S, b: &S) -> Result<ComplexAmp> {
    let (sa, sb) = (a.shape(), b.shape());
    if sa != sb {
        return Err(Error::DimensionMismatch { left: sa, right: sb });
    }
    Ok(a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x.conj() * y).sum())
}

/// `|⟨a|b⟩|²`, clamped into `[0, 1]`.
pub fn fidelity<S: QuantumState>(a: &S, b: &S) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr().clamp(0.0, 1.0))
}

fn check_amps(amps: &[ComplexAmp]) -> Result<f64> {
    if let Some(index) = amps.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite { index });
    }
    Ok(amps.iter().map(|c| c.norm_sqr()).sum())
}

fn check_norm(norm_sqr: f64) -> Result<()> {
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sqr, tolerance: NORM_TOLERANCE });
    }
    Ok(())
}

/// Amplitudes over the one-excitation manifold of `n` atoms: `amps[k]` is the
/// coefficient of the basis state with atom `k` excited and all others ground.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    amps: Vec<ComplexAmp>,
}

impl SingleExcitationState {
    pub fn new(amps: Vec<ComplexAmp>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidSize { size: 0, reason: "a register needs at least one atom" });
        }
        check_norm(check_amps(&amps)?)?;
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(mut amps: Vec<ComplexAmp>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidSize { size: 0, reason: "a register needs at least one atom" });
        }
        let norm_sqr = check_amps(&amps)?;
        if norm_sqr == 0.0 {
            return Err(Error::EmptyProjection);
        }
        let scale = norm_sqr.sqrt().recip();
        amps.iter_mut().for_each(|c| *c *= scale);
        Ok(Self { amps })
    }

    /// Single atom excited: `|g…e_k…g⟩`.
    pub fn excited(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { size: 0, reason: "a register needs at least one atom" });
        }
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        let mut amps = vec![ComplexAmp::new(0.0, 0.0); n];
        amps[k] = ComplexAmp::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &[ComplexAmp] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<ComplexAmp> {
        self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut Vec<ComplexAmp> {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Fails when the state drifted off the unit sphere or picked up NaN/Inf.
    pub fn validate(&self) -> Result<()> {
        check_norm(check_amps(&self.amps)?)
    }

    /// Multiplies by the unit phase that makes the first nonzero amplitude
    /// real and positive.
    pub fn with_fixed_global_phase(&self) -> Self {
        let Some(first) = self.amps.iter().find(|c| c.norm_sqr() > 0.0) else {
            return self.clone();
        };
        let phase = first.conj() / first.norm();
        Self { amps: self.amps.iter().map(|c| c * phase).collect() }
    }

    /// Phase of each amplitude relative to amplitude 0, wrapped into `(-π, π]`.
    /// Amplitudes with zero modulus report 0.
    pub fn relative_phases(&self) -> Vec<f64> {
        let reference = self.amps[0];
        self.amps
            .iter()
            .map(|c| {
                if c.norm_sqr() == 0.0 || reference.norm_sqr() == 0.0 {
                    return 0.0;
                }
                wrap_phase((c * reference.conj()).arg())
            })
            .collect()
    }

    /// Reorders atoms so that output atom `p` is input atom `order[p]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.len();
        if order.len() != n {
            return Err(Error::DimensionMismatch { left: vec![n], right: vec![order.len()] });
        }
        let mut seen = vec![false; n];
        for &k in order {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, len: n });
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::OverlappingRound(k));
            }
        }
        Ok(Self { amps: order.iter().map(|&k| self.amps[k]).collect() })
    }
}

/// Maps an angle into `(-π, π]`, snapping values within 1e-12 of `-π` to `π`.
pub fn wrap_phase(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    if a <= -PI + 1e-12 {
        a = PI;
    }
    a
}

impl QuantumState for SingleExcitationState {
    fn shape(&self) -> Vec<usize> {
        vec![self.amps.len()]
    }

    fn amplitudes(&self) -> &[ComplexAmp] {
        &self.amps
    }
}

/// Fidelity to the canonical `W_n` maximized over per-atom phase corrections:
/// `(Σ_k |amps[k]| / √n)²`.
pub fn w_class_fidelity(state: &SingleExcitationState) -> f64 {
    let n = state.len() as f64;
    let sum: f64 = state.amps().iter().map(|c| c.norm()).sum();
    (sum * sum / n).clamp(0.0, 1.0)
}

/// `|W_n⟩ = (1/√n) Σ_k |g…e_k…g⟩` with real amplitudes.
pub fn canonical_w(n: usize) -> Result<SingleExcitationState> {
    if n == 0 {
        return Err(Error::InvalidSize { size: 0, reason: "W state needs at least one atom" });
    }
    let a = (n as f64).sqrt().recip();
    Ok(SingleExcitationState { amps: vec![ComplexAmp::new(a, 0.0); n] })
}

/// Dense state over a product of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateDense {
    dims: Vec<usize>,
    amps: Vec<ComplexAmp>,
}

impl PureStateDense {
    pub fn new(dims: Vec<usize>, amps: Vec<ComplexAmp>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidSize { size: dims.len(), reason: "dims must be non-empty and positive" });
        }
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(Error::DimensionMismatch { left: dims, right: vec![amps.len()] });
        }
        check_norm(check_amps(&amps)?)?;
        Ok(Self { dims, amps })
    }

    /// Basis product state; `indices[s]` selects the level of subsystem `s`.
    pub fn basis(dims: Vec<usize>, indices: &[usize]) -> Result<Self> {
        if indices.len() != dims.len() {
            return Err(Error::DimensionMismatch { left: dims, right: vec![indices.len()] });
        }
        let mut flat = 0;
        for (&i, &d) in indices.iter().zip(&dims) {
            if i >= d {
                return Err(Error::IndexOutOfRange { index: i, len: d });
            }
            flat = flat * d + i;
        }
        let mut amps = vec![ComplexAmp::new(0.0, 0.0); dims.iter().product()];
        amps[flat] = ComplexAmp::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[ComplexAmp] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    fn n_qubits(&self) -> Result<usize> {
        if self.dims.iter().any(|&d| d != 2) {
            return Err(Error::InvalidSize { size: self.dims.len(), reason: "operation needs an all-atom register" });
        }
        Ok(self.dims.len())
    }

    /// Applies a two-atom gate (basis `|gg⟩,|ge⟩,|eg⟩,|ee⟩`, first atom `i`)
    /// to atoms `i` and `j` of an all-atom register.
    pub fn apply_two_atom(&mut self, gate: &[[ComplexAmp; 4]; 4], i: usize, j: usize) -> Result<()> {
        let n = self.n_qubits()?;
        for &k in &[i, j] {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, len: n });
            }
        }
        if i == j {
            return Err(Error::DegeneratePair(i));
        }
        let bi = 1usize << (n - 1 - i);
        let bj = 1usize << (n - 1 - j);
        for base in 0..self.amps.len() {
            if base & (bi | bj) != 0 {
                continue;
            }
            let idx = [base, base | bj, base | bi, base | bi | bj];
            let v = idx.map(|x| self.amps[x]);
            for (r, &x) in idx.iter().enumerate() {
                self.amps[x] = (0..4).map(|c| gate[r][c] * v[c]).sum();
            }
        }
        Ok(())
    }
}

impl QuantumState for PureStateDense {
    fn shape(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn amplitudes(&self) -> &[ComplexAmp] {
        &self.amps
    }
}

/// Embeds a single-excitation state in the full `2ⁿ` atom space.
pub fn to_dense(state: &SingleExcitationState) -> Result<PureStateDense> {
    to_dense_capped(state, DEFAULT_DENSE_CAP)
}

pub fn to_dense_capped(state: &SingleExcitationState, max_atoms: usize) -> Result<PureStateDense> {
    let n = state.len();
    if n > max_atoms {
        return Err(Error::CapExceeded { what: "dense register size", requested: n, cap: max_atoms });
    }
    let mut amps = vec![ComplexAmp::new(0.0, 0.0); 1 << n];
    for (k, &c) in state.amps().iter().enumerate() {
        amps[1 << (n - 1 - k)] = c;
    }
    Ok(PureStateDense { dims: vec![2; n], amps })
}

/// Weight of a dense atom register inside the single-excitation sector.
pub fn single_excitation_weight(dense: &PureStateDense) -> Result<f64> {
    let n = dense.n_qubits()?;
    Ok((0..n).map(|k| dense.amps[1 << (n - 1 - k)].norm_sqr()).sum())
}

/// Projects onto the single-excitation sector and renormalizes.
pub fn project_single_excitation(dense: &PureStateDense) -> Result<SingleExcitationState> {
    let n = dense.n_qubits()?;
    let amps: Vec<_> = (0..n).map(|k| dense.amps[1 << (n - 1 - k)]).collect();
    let weight: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    if (weight - 1.0).abs() <= NORM_TOLERANCE {
        return Ok(SingleExcitationState { amps });
    }
    SingleExcitationState::normalized(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> ComplexAmp {
        ComplexAmp::new(re, im)
    }

    fn eq5() -> SingleExcitationState {
        SingleExcitationState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)]).unwrap()
    }

    fn eq6() -> SingleExcitationState {
        // storage order (a2, b2, a1, b1)
        SingleExcitationState::new(vec![c(0.5, 0.0), c(0.0, -0.5), c(0.0, -0.5), c(-0.5, 0.0)]).unwrap()
    }

    #[test]
    fn self_overlap_is_one() {
        let s = eq6();
        let ip = inner_product(&s, &s).unwrap();
        assert!((ip - c(1.0, 0.0)).norm() < 1e-9);
        let d = to_dense(&s).unwrap();
        assert!((inner_product(&d, &d).unwrap() - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn orthogonal_basis_states() {
        let eg = PureStateDense::basis(vec![2, 2], &[1, 0]).unwrap();
        let ge = PureStateDense::basis(vec![2, 2], &[0, 1]).unwrap();
        assert_eq!(inner_product(&eg, &ge).unwrap(), c(0.0, 0.0));
        assert_eq!(fidelity(&eg, &ge).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = canonical_w(2).unwrap();
        let b = canonical_w(3).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::DimensionMismatch { .. })));
        let d2 = PureStateDense::basis(vec![2, 2], &[0, 0]).unwrap();
        let d3 = PureStateDense::basis(vec![2, 3], &[0, 0]).unwrap();
        assert!(fidelity(&d2, &d3).is_err());
    }

    #[test]
    fn eq6_against_canonical_w4() {
        // direct four-term sum: |1 - i - i - 1|² / 16
        let phases = [c(1.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(-1.0, 0.0)];
        let sum: ComplexAmp = phases.iter().sum();
        let oracle = sum.norm_sqr() / 16.0;
        assert!((oracle - 0.25).abs() < 1e-15);
        let f = fidelity(&canonical_w(4).unwrap(), &eq6()).unwrap();
        assert!((f - oracle).abs() < 1e-12);
        assert!((w_class_fidelity(&eq6()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w_class_fidelity_of_product_state() {
        for n in 1..10 {
            let s = SingleExcitationState::excited(n, 0).unwrap();
            assert!((w_class_fidelity(&s) - 1.0 / n as f64).abs() < 1e-12);
            assert!((w_class_fidelity(&canonical_w(n).unwrap()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_w_values() {
        assert!(canonical_w(0).is_err());
        assert_eq!(canonical_w(1).unwrap().amps(), &[c(1.0, 0.0)]);
        for a in canonical_w(2).unwrap().amps() {
            assert!((a - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
        assert_eq!(canonical_w(4).unwrap().amps(), &[c(0.5, 0.0); 4]);
    }

    #[test]
    fn to_dense_layout() {
        let w1 = to_dense(&canonical_w(1).unwrap()).unwrap();
        assert_eq!(w1.amps(), &[c(0.0, 0.0), c(1.0, 0.0)]);

        // |gg⟩, |ge⟩, |eg⟩, |ee⟩
        let d = to_dense(&eq5()).unwrap();
        let expect = [c(0.0, 0.0), c(0.0, -FRAC_1_SQRT_2), c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0)];
        for (x, y) in d.amps().iter().zip(expect) {
            assert!((x - y).norm() < 1e-15);
        }

        let back = project_single_excitation(&d).unwrap();
        for (x, y) in back.amps().iter().zip(eq5().amps()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn dense_cap() {
        let s = canonical_w(21).unwrap();
        assert!(matches!(to_dense(&s), Err(Error::CapExceeded { .. })));
        assert!(to_dense_capped(&canonical_w(3).unwrap(), 2).is_err());
    }

    #[test]
    fn rejects_bad_states() {
        assert!(SingleExcitationState::new(vec![]).is_err());
        assert!(matches!(SingleExcitationState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]), Err(Error::NotNormalized { .. })));
        assert!(matches!(SingleExcitationState::new(vec![c(f64::NAN, 0.0)]), Err(Error::NonFinite { index: 0 })));
        assert!(PureStateDense::new(vec![], vec![]).is_err());
        assert!(PureStateDense::new(vec![2], vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn global_phase_and_relative_phases() {
        let s = SingleExcitationState::new(eq6().amps().iter().map(|a| a * c(0.0, 1.0)).collect()).unwrap();
        let fixed = s.with_fixed_global_phase();
        for (x, y) in fixed.amps().iter().zip(eq6().amps()) {
            assert!((x - y).norm() < 1e-15);
        }
        let ph = s.relative_phases();
        let expect = [0.0, -FRAC_PI_2, -FRAC_PI_2, PI];
        for (x, y) in ph.iter().zip(expect) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn wrap_phase_snaps_minus_pi() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn permutation() {
        let s = eq6();
        let p = s.permuted(&[2, 0, 3, 1]).unwrap();
        assert_eq!(p.amps()[1], s.amps()[0]);
        assert!(s.permuted(&[0, 0, 1, 2]).is_err());
        assert!(s.permuted(&[0, 1]).is_err());
    }

    #[test]
    fn two_atom_gate_swap() {
        let swap = {
            let o = c(0.0, 0.0);
            let l = c(1.0, 0.0);
            [[l, o, o, o], [o, o, l, o], [o, l, o, o], [o, o, o, l]]
        };
        let mut d = to_dense(&SingleExcitationState::excited(3, 0).unwrap()).unwrap();
        d.apply_two_atom(&swap, 0, 2).unwrap();
        let back = project_single_excitation(&d).unwrap();
        assert_eq!(back.amps()[2], c(1.0, 0.0));
        assert!(d.apply_two_atom(&swap, 1, 1).is_err());
        assert!(d.apply_two_atom(&swap, 0, 3).is_err());
    }
}
