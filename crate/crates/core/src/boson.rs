//! Truncated Fock-space model of the large-spin limit.
//!
//! The bosonic mode replaces system A; the ancilla stays a collective spin.
//! Operators and states reuse the joint `(n_a, n_b)` layout with the Fock
//! number in place of the Dicke index, so propagation goes through the same
//! excitation-block machinery.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{build_hamiltonian, exchange_term, number_on_a, number_on_b, HamiltonianSpec, Picture, Propagator};
use crate::error::{Result, SpinError};
use crate::operator::{Entries, JointOperator};
use crate::spin::{product_state, spin_coherent_state, CollectiveSpinParams, DickeVector, JointState};

/// Truncation budget: probability allowed beyond the cutoff.
pub const TAIL_TOL: f64 = 1e-10;

/// `ceil(|alpha|^2 + 10 sqrt(|alpha|^2 + 1) + 10)`.
pub fn default_cutoff(alpha: C64) -> usize {
    let mean = alpha.norm_sqr();
    (mean + 10.0 * (mean + 1.0).sqrt() + 10.0).ceil() as usize
}

/// Truncated single-mode state over `n = 0..=cutoff`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    cutoff: usize,
    amplitudes: DVector<C64>,
    /// Probability discarded by the truncation.
    tail: f64,
}

impl FockState {
    pub fn vacuum(cutoff: usize) -> Self {
        let mut amplitudes = DVector::zeros(cutoff + 1);
        amplitudes[0] = C64::new(1.0, 0.0);
        FockState { cutoff, amplitudes, tail: 0.0 }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn mean_number(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, a)| n as f64 * a.norm_sqr()).sum()
    }

    /// `|self> ⊗ |ancilla>` in the joint layout.
    pub fn with_ancilla(&self, ancilla: &DickeVector) -> JointState {
        let carrier = DickeVector::from_amplitudes(fock_params(self.cutoff), self.amplitudes.clone())
            .expect("Fock amplitudes are normalized and finite");
        product_state(&carrier, ancilla)
    }
}

/// Dimension carrier for a mode truncated at `cutoff`.
pub fn fock_params(cutoff: usize) -> CollectiveSpinParams {
    CollectiveSpinParams::new(cutoff.max(1)).expect("nonzero cutoff")
}

/// Poisson probability `e^{-mu} mu^n / n!` in log space.
fn ln_poisson(mu: f64, n: usize, ln_factorial: f64) -> f64 {
    -mu + n as f64 * mu.ln() - ln_factorial
}

/// Probability beyond `cutoff` for a coherent state of mean `mu`.
fn poisson_tail(mu: f64, cutoff: usize) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let mut ln_fact: f64 = (1..=cutoff + 1).map(|k| (k as f64).ln()).sum();
    let mut tail = 0.0;
    let mut n = cutoff + 1;
    loop {
        let term = ln_poisson(mu, n, ln_fact).exp();
        tail += term;
        if (n as f64 > mu && term < 1e-18 * tail.max(1e-300)) || term == 0.0 {
            break;
        }
        n += 1;
        ln_fact += (n as f64).ln();
    }
    tail
}

/// `e^{-|alpha|^2/2} sum_n alpha^n / sqrt(n!) |n>`, truncated and renormalized.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<FockState> {
    if !alpha.is_finite() {
        return Err(SpinError::InvalidAmplitude(format!("alpha = {alpha}")));
    }
    if cutoff == 0 {
        return Err(SpinError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let mu = alpha.norm_sqr();
    if mu == 0.0 {
        return Ok(FockState::vacuum(cutoff));
    }
    let tail = poisson_tail(mu, cutoff);
    if tail > TAIL_TOL {
        return Err(SpinError::Cutoff { cutoff, tail, suggested: default_cutoff(alpha) });
    }
    let (r, theta) = alpha.to_polar();
    let mut ln_fact = 0.0;
    let amplitudes = DVector::from_fn(cutoff + 1, |n, _| {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let ln_mag = -mu / 2.0 + n as f64 * r.ln() - ln_fact / 2.0;
        C64::from_polar(ln_mag.exp(), n as f64 * theta)
    });
    let norm = amplitudes.norm();
    Ok(FockState { cutoff, amplitudes: amplitudes / C64::from(norm), tail })
}

/// Single mode coupled to an ancilla of `n_b` spins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BosonModelSpec {
    pub omega_a: f64,
    pub omega_b: f64,
    pub coupling_tilde: f64,
    pub n_b: usize,
    pub cutoff: usize,
}

impl BosonModelSpec {
    fn validate(&self) -> Result<()> {
        if self.cutoff < 1 || self.n_b < 1 {
            return Err(SpinError::InvalidParameter(format!(
                "cutoff = {} and n_b = {} must both be at least 1",
                self.cutoff, self.n_b
            )));
        }
        for (name, v) in [("omega_a", self.omega_a), ("omega_b", self.omega_b), ("coupling_tilde", self.coupling_tilde)] {
            if !v.is_finite() {
                return Err(SpinError::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }

    pub fn ancilla_params(&self) -> Result<CollectiveSpinParams> {
        CollectiveSpinParams::new(self.n_b)
    }
}

/// Nonzero entries of the truncated creation operator.
pub fn creation_entries(cutoff: usize) -> Entries {
    (0..cutoff).map(|n| (n + 1, n, C64::from(((n + 1) as f64).sqrt()))).collect()
}

/// `wA a†a + wB (JzB + NB/2) + (l / sqrt NB) (a JB+ + a† JB-)`.
pub fn build_boson_hamiltonian(spec: &BosonModelSpec) -> Result<JointOperator> {
    spec.validate()?;
    let pb = spec.ancilla_params()?;
    let (da, db) = (spec.cutoff + 1, pb.dim());
    let g = spec.coupling_tilde / (spec.n_b as f64).sqrt();
    let h = exchange_term(da, &creation_entries(spec.cutoff), pb) * g
        + number_on_a(da, db) * spec.omega_a
        + number_on_b(da, db) * spec.omega_b;
    Ok(h)
}

/// Spin-versus-boson disagreement at one big-spin size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BosonComparison {
    pub n_a: usize,
    /// `1 - |<boson(t)|spin(t)>|` with the Dicke index embedded as Fock number.
    pub error: f64,
}

/// Overlap of a spin-model state with a boson-model state; Dicke levels above
/// the cutoff (and Fock levels above `N_A`) contribute nothing.
pub fn embedded_overlap(spin: &JointState, boson: &JointState) -> Result<C64> {
    if spin.params_b() != boson.params_b() {
        return Err(SpinError::DimensionMismatch {
            expected: format!("ancilla N_B = {}", boson.params_b().n_spins()),
            found: format!("ancilla N_B = {}", spin.params_b().n_spins()),
        });
    }
    let rows = spin.params_a().dim().min(boson.params_a().dim());
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..rows {
        for nb in 0..spin.params_b().dim() {
            acc += boson.amplitude(n, nb).conj() * spin.amplitude(n, nb);
        }
    }
    Ok(acc)
}

/// Evolves `SCS(zeta / sqrt N_A) ⊗ ancilla` under the exchange with
/// `lambda = l / sqrt(N_A N_B)` and `coherent(zeta) ⊗ ancilla` under the
/// boson model, both on resonance, and compares them at time `t`.
pub fn compare_spin_to_boson(
    n_a_values: &[usize],
    zeta: C64,
    coupling_tilde: f64,
    t: f64,
    ancilla: &DickeVector,
) -> Result<Vec<BosonComparison>> {
    let pb = ancilla.params();
    let cutoff = default_cutoff(zeta) + pb.n_spins();
    let spec = BosonModelSpec { omega_a: 0.0, omega_b: 0.0, coupling_tilde, n_b: pb.n_spins(), cutoff };
    let boson0 = coherent_state(zeta, cutoff)?.with_ancilla(ancilla);
    let boson_t = Propagator::new(&build_boson_hamiltonian(&spec)?)?.propagate(&boson0, t)?;
    n_a_values
        .par_iter()
        .map(|&n_a| {
            let pa = CollectiveSpinParams::new(n_a)?;
            let z = zeta / (n_a as f64).sqrt();
            let spin0 = product_state(&spin_coherent_state(pa, z)?, ancilla);
            let spin_spec = HamiltonianSpec {
                omega_a: 0.0,
                omega_b: 0.0,
                coupling: coupling_tilde,
                renormalized: true,
                picture: Picture::Interaction,
            };
            let h = build_hamiltonian(pa, pb, &spin_spec)?;
            let spin_t = Propagator::new(&h)?.propagate(&spin0, t)?;
            let overlap = embedded_overlap(&spin_t, &boson_t)?;
            Ok(BosonComparison { n_a, error: 1.0 - overlap.norm() })
        })
        .collect()
}

/// `<n-1| J- |n> / sqrt(N)` for `n = 1..=n_max`, next to `<n-1| a |n> = sqrt(n)`.
pub fn holstein_primakoff_deviation(n_spins: usize, n_max: usize) -> Result<f64> {
    let params = CollectiveSpinParams::new(n_spins)?;
    if n_max > n_spins {
        return Err(SpinError::InvalidParameter(format!("n_max = {n_max} exceeds N = {n_spins}")));
    }
    let scale = (n_spins as f64).sqrt();
    Ok((1..=n_max)
        .map(|n| {
            let spin = crate::spin::raising_element(params, n - 1) / scale;
            (spin - (n as f64).sqrt()).abs()
        })
        .fold(0.0, f64::max))
}

/// Dense truncated annihilation operator.
pub fn annihilation_matrix(cutoff: usize) -> DMatrix<f64> {
    DMatrix::from_fn(cutoff + 1, cutoff + 1, |r, c| if c == r + 1 { (c as f64).sqrt() } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::fidelity;
    use crate::spin::{rotated_dicke, HalfInt};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn vacuum_and_small_alpha() {
        let v = coherent_state(C64::new(0.0, 0.0), 5).unwrap();
        assert_eq!(v.amplitudes()[0], C64::new(1.0, 0.0));
        assert!(v.amplitudes().iter().skip(1).all(|a| a.norm() == 0.0));
        let s = coherent_state(C64::new(1.0, 0.0), 20).unwrap();
        assert!(s.tail() < 1e-15);
        assert_abs_diff_eq!(s.mean_number(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn coherent_amplitudes_match_formula() {
        let alpha = C64::from_polar(1.7, 0.6);
        let s = coherent_state(alpha, default_cutoff(alpha)).unwrap();
        let mut fact = 1.0;
        for n in 0..12 {
            if n > 0 {
                fact *= n as f64;
            }
            let want = (-alpha.norm_sqr() / 2.0).exp() * alpha.powu(n as u32) / fact.sqrt();
            assert!((s.amplitudes()[n] - want).norm() < 1e-12);
        }
        assert_abs_diff_eq!(s.mean_number(), alpha.norm_sqr(), epsilon = TAIL_TOL * 100.0);
    }

    #[test]
    fn short_cutoff_is_rejected_with_suggestion() {
        let alpha = C64::new(4.0, 0.0);
        match coherent_state(alpha, 10) {
            Err(SpinError::Cutoff { cutoff, tail, suggested }) => {
                assert_eq!(cutoff, 10);
                assert!(tail > TAIL_TOL);
                assert_eq!(suggested, default_cutoff(alpha));
                assert!(coherent_state(alpha, suggested).is_ok());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn default_cutoff_rule() {
        assert_eq!(default_cutoff(C64::new(0.0, 0.0)), 20);
        assert_eq!(default_cutoff(C64::new(20f64.sqrt(), 0.0)), (20.0 + 10.0 * 21f64.sqrt() + 10.0f64).ceil() as usize);
    }

    #[test]
    fn number_operator_and_commutator() {
        let cutoff = 8;
        let a = annihilation_matrix(cutoff);
        let n = a.transpose() * &a;
        for k in 0..=cutoff {
            assert_abs_diff_eq!(n[(k, k)], k as f64, epsilon = 1e-14);
        }
        let comm = &a * a.transpose() - a.transpose() * &a;
        for r in 0..cutoff {
            for c in 0..cutoff {
                let want = if r == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(comm[(r, c)], want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn jaynes_cummings_doublet() {
        let spec = BosonModelSpec { omega_a: 1.0, omega_b: 1.0, coupling_tilde: 0.4, n_b: 1, cutoff: 6 };
        let h = build_boson_hamiltonian(&spec).unwrap();
        assert!(h.hermiticity_defect() < 1e-14);
        let blocks = crate::dynamics::excitation_blocks(&h).unwrap();
        let one = blocks.iter().find(|b| b.nu == 1).unwrap();
        let eig = nalgebra::SymmetricEigen::new(one.matrix.clone());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(vals[0], 1.0 - 0.4, epsilon = 1e-13);
        assert_abs_diff_eq!(vals[1], 1.0 + 0.4, epsilon = 1e-13);
    }

    #[test]
    fn uncoupled_model_is_diagonal() {
        let spec = BosonModelSpec { omega_a: 0.3, omega_b: 1.1, coupling_tilde: 0.0, n_b: 3, cutoff: 5 };
        let h = build_boson_hamiltonian(&spec).unwrap();
        assert!(h.entries().iter().all(|&(r, c, _)| r == c));
        assert!(build_boson_hamiltonian(&BosonModelSpec { n_b: 0, ..spec }).is_err());
    }

    #[test]
    fn holstein_primakoff_converges() {
        let errs: Vec<f64> = [100, 1000, 10000].iter().map(|&n| holstein_primakoff_deviation(n, 5).unwrap()).collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0] / 5.0, "{errs:?}");
        }
        // leading correction sqrt(n) (n - 1) / (2N), largest at n = 5
        assert_abs_diff_eq!(errs[2], 5f64.sqrt() * 4.0 / 20000.0, epsilon = 1e-6);
    }

    #[test]
    fn comparison_improves_with_spin_count() {
        let ancilla = DickeVector::basis(CollectiveSpinParams::new(1).unwrap(), 0).unwrap();
        let curve = compare_spin_to_boson(&[25, 100, 400], C64::new(1.0, 0.0), 1.0, 1.0, &ancilla).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].error < w[0].error, "{curve:?}");
        }
    }

    #[test]
    fn comparison_at_zero_time_is_static_overlap() {
        let pb = CollectiveSpinParams::new(2).unwrap();
        let ancilla = DickeVector::basis(pb, 1).unwrap();
        let curve = compare_spin_to_boson(&[100], C64::new(1.0, 0.0), 1.0, 0.0, &ancilla).unwrap();
        let pa = CollectiveSpinParams::new(100).unwrap();
        let scs = spin_coherent_state(pa, C64::new(0.1, 0.0)).unwrap();
        let coh = coherent_state(C64::new(1.0, 0.0), 40).unwrap();
        let direct: C64 = (0..=40).map(|n| coh.amplitudes()[n].conj() * scs.amplitudes()[n]).sum();
        assert_abs_diff_eq!(curve[0].error, 1.0 - direct.norm(), epsilon = 1e-12);
    }

    #[test]
    fn vacuum_maps_exactly() {
        let ancilla = DickeVector::basis(CollectiveSpinParams::new(1).unwrap(), 1).unwrap();
        let curve = compare_spin_to_boson(&[10, 50], C64::new(0.0, 0.0), 1.0, 2.5, &ancilla).unwrap();
        for c in curve {
            assert!(c.error.abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn jaynes_cummings_branch_returns() {
        // |alpha>|D+> is one semi-classical branch; it returns near 4 pi |alpha|
        // after collapsing in between.
        let alpha = C64::new(20f64.sqrt(), 0.0);
        let cutoff = default_cutoff(alpha) + 1;
        let pb = CollectiveSpinParams::new(1).unwrap();
        let spec = BosonModelSpec { omega_a: 0.0, omega_b: 0.0, coupling_tilde: 1.0, n_b: 1, cutoff };
        let prop = Propagator::new(&build_boson_hamiltonian(&spec).unwrap()).unwrap();
        let branch = rotated_dicke(pb, HalfInt::from_twice(1), 0.0).unwrap();
        let psi0 = coherent_state(alpha, cutoff).unwrap().with_ancilla(&branch);
        let t_r = 4.0 * PI * alpha.norm();
        let times: Vec<f64> = (0..=300).map(|k| t_r * (0.5 + k as f64 / 300.0)).collect();
        let traj = prop.evolve(&psi0, &times).unwrap();
        let fids: Vec<f64> = traj.states().iter().map(|s| fidelity(&psi0, s).unwrap()).collect();
        let (best, f_best) = fids.iter().enumerate().fold((0, 0.0), |b, (i, &f)| if f > b.1 { (i, f) } else { b });
        assert!((times[best] / t_r - 1.0).abs() < 0.05, "peak at {}", times[best] / t_r);
        assert!(f_best > 0.5);
        assert!(fids[0] < 0.2 * f_best);
    }
}
