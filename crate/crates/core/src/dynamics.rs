//! Exchange Hamiltonians and exact propagation by excitation blocks.
//!
//! Both pictures conserve `n_a + n_b`, so the Hamiltonian splits into blocks
//! of fixed total excitation `nu`. Each block is diagonalized once and the
//! spectra are reused for every requested time.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Result, SpinError};
use crate::operator::{diagonal_entries, identity_entries, Entries, JointOperator};
use crate::spin::{make_operator, CollectiveSpinParams, JointState, OperatorKind};

/// Entries below this magnitude are ignored when checking block structure.
pub const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Picture {
    Lab,
    /// Rotating frame of `omega_b (Jz_A + Jz_B + (N_A+N_B)/2)`.
    Interaction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub omega_a: f64,
    pub omega_b: f64,
    /// Bare coupling, or the size-independent one when `renormalized` is set.
    pub coupling: f64,
    pub renormalized: bool,
    pub picture: Picture,
}

impl HamiltonianSpec {
    /// On-resonance interaction-picture exchange with coupling `lambda`.
    pub fn exchange(coupling: f64) -> Self {
        HamiltonianSpec { omega_a: 0.0, omega_b: 0.0, coupling, renormalized: false, picture: Picture::Interaction }
    }

    pub fn detuning(&self) -> f64 {
        self.omega_a - self.omega_b
    }

    /// `lambda`, dividing by `sqrt(N_A N_B)` when renormalized.
    pub fn effective_coupling(&self, pa: CollectiveSpinParams, pb: CollectiveSpinParams) -> f64 {
        if self.renormalized {
            self.coupling / ((pa.n_spins() * pb.n_spins()) as f64).sqrt()
        } else {
            self.coupling
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("omega_a", self.omega_a), ("omega_b", self.omega_b), ("coupling", self.coupling)] {
            if !v.is_finite() {
                return Err(SpinError::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }
}

/// `A+ ⊗ B- + A- ⊗ B+` given the raising entries of system A.
pub(crate) fn exchange_term(dim_a: usize, a_plus: &Entries, pb: CollectiveSpinParams) -> JointOperator {
    let a_minus: Entries = a_plus.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
    let b_plus = make_operator(pb, OperatorKind::Jplus).nonzeros();
    let b_minus = make_operator(pb, OperatorKind::Jminus).nonzeros();
    JointOperator::kron_entries(dim_a, a_plus, pb.dim(), &b_minus)
        + JointOperator::kron_entries(dim_a, &a_minus, pb.dim(), &b_plus)
}

/// Number operator `Jz + N/2` of one subsystem lifted to the joint space.
pub(crate) fn number_on_a(dim_a: usize, dim_b: usize) -> JointOperator {
    JointOperator::kron_entries(dim_a, &diagonal_entries((0..dim_a).map(|n| n as f64)), dim_b, &identity_entries(dim_b))
}

pub(crate) fn number_on_b(dim_a: usize, dim_b: usize) -> JointOperator {
    JointOperator::kron_entries(dim_a, &identity_entries(dim_a), dim_b, &diagonal_entries((0..dim_b).map(|n| n as f64)))
}

/// Lab picture: `wA (JzA + NA/2) + wB (JzB + NB/2) + lambda (JA+ JB- + JA- JB+)`.
/// Interaction picture: `Delta (JzA + NA/2) + lambda (JA+ JB- + JA- JB+)`.
pub fn build_hamiltonian(
    pa: CollectiveSpinParams,
    pb: CollectiveSpinParams,
    spec: &HamiltonianSpec,
) -> Result<JointOperator> {
    spec.validate()?;
    let lambda = spec.effective_coupling(pa, pb);
    let (da, db) = (pa.dim(), pb.dim());
    let a_plus = make_operator(pa, OperatorKind::Jplus).nonzeros();
    let mut h = exchange_term(da, &a_plus, pb) * lambda;
    match spec.picture {
        Picture::Lab => {
            h = h + number_on_a(da, db) * spec.omega_a + number_on_b(da, db) * spec.omega_b;
        }
        Picture::Interaction => {
            h = h + number_on_a(da, db) * spec.detuning();
        }
    }
    Ok(h)
}

/// Invariant subspace of fixed `n_a + n_b = nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationBlock {
    pub nu: usize,
    /// `(n_a, n_b)` pairs ordered by ascending `n_a`.
    pub indices: Vec<(usize, usize)>,
    pub matrix: DMatrix<C64>,
}

fn block_indices(dim_a: usize, dim_b: usize, nu: usize) -> Vec<(usize, usize)> {
    let lo = nu.saturating_sub(dim_b - 1);
    let hi = nu.min(dim_a - 1);
    (lo..=hi).map(|na| (na, nu - na)).collect()
}

/// Splits `h` into excitation blocks, failing if any entry couples two blocks.
pub fn excitation_blocks(h: &JointOperator) -> Result<Vec<ExcitationBlock>> {
    let (da, db) = (h.dim_a(), h.dim_b());
    let max_nu = (da - 1) + (db - 1);
    let mut blocks: Vec<ExcitationBlock> = (0..=max_nu)
        .map(|nu| {
            let indices = block_indices(da, db, nu);
            let size = indices.len();
            ExcitationBlock { nu, indices, matrix: DMatrix::zeros(size, size) }
        })
        .collect();
    // Position of (n_a, n_b) inside its block is n_a minus the block's lowest n_a.
    let position = |na: usize, nu: usize| na - nu.saturating_sub(db - 1);
    for &(r, c, v) in h.entries() {
        let (ra, rb) = h.split_index(r);
        let (ca, cb) = h.split_index(c);
        let (nu_r, nu_c) = (ra + rb, ca + cb);
        if nu_r != nu_c {
            if v.norm() > STRUCTURE_TOL {
                return Err(SpinError::Structure { row: r, col: c, magnitude: v.norm() });
            }
            continue;
        }
        blocks[nu_r].matrix[(position(ra, nu_r), position(ca, nu_r))] += v;
    }
    Ok(blocks)
}

/// Inverse of [`excitation_blocks`].
pub fn reassemble(blocks: &[ExcitationBlock], dim_a: usize, dim_b: usize) -> JointOperator {
    let mut entries = Vec::new();
    for block in blocks {
        for (i, &(ra, rb)) in block.indices.iter().enumerate() {
            for (j, &(ca, cb)) in block.indices.iter().enumerate() {
                entries.push((ra * dim_b + rb, ca * dim_b + cb, block.matrix[(i, j)]));
            }
        }
    }
    JointOperator::from_entries(dim_a, dim_b, entries)
}

#[derive(Clone, Debug)]
struct SpectralBlock {
    indices: Vec<(usize, usize)>,
    energies: Vec<f64>,
    vectors: DMatrix<C64>,
}

/// Cached block spectra of a conserving Hamiltonian.
#[derive(Clone, Debug)]
pub struct Propagator {
    dim_a: usize,
    dim_b: usize,
    blocks: Vec<SpectralBlock>,
}

impl Propagator {
    pub fn new(h: &JointOperator) -> Result<Self> {
        let blocks = excitation_blocks(h)?;
        let spectra = blocks
            .into_par_iter()
            .map(|block| {
                let nu = block.nu;
                let eig = SymmetricEigen::try_new(block.matrix, 1e-15, 10_000).ok_or(SpinError::Eigen { block: nu })?;
                Ok(SpectralBlock {
                    indices: block.indices,
                    energies: eig.eigenvalues.iter().copied().collect(),
                    vectors: eig.eigenvectors,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Propagator { dim_a: h.dim_a(), dim_b: h.dim_b(), blocks: spectra })
    }

    /// Eigenvalues of every block, ordered by block.
    pub fn block_energies(&self) -> Vec<Vec<f64>> {
        self.blocks.iter().map(|b| b.energies.clone()).collect()
    }

    /// `exp(-i t H) psi`.
    pub fn propagate(&self, psi: &JointState, t: f64) -> Result<JointState> {
        if psi.shape() != (self.dim_a, self.dim_b) {
            return Err(SpinError::DimensionMismatch {
                expected: format!("{:?}", (self.dim_a, self.dim_b)),
                found: format!("{:?}", psi.shape()),
            });
        }
        if !t.is_finite() {
            return Err(SpinError::InvalidParameter(format!("time {t} is not finite")));
        }
        let amps = psi.amplitudes();
        let mut out = DMatrix::zeros(self.dim_a, self.dim_b);
        for block in &self.blocks {
            let local = DVector::from_iterator(block.indices.len(), block.indices.iter().map(|&ix| amps[ix]));
            let mut coeffs = block.vectors.ad_mul(&local);
            for (c, &e) in coeffs.iter_mut().zip(&block.energies) {
                *c *= C64::from_polar(1.0, -e * t);
            }
            let evolved = &block.vectors * coeffs;
            for (k, &ix) in block.indices.iter().enumerate() {
                out[ix] = evolved[k];
            }
        }
        Ok(JointState::from_raw(psi.params_a(), psi.params_b(), out))
    }

    /// States at each of `times`, computed independently from `psi0`.
    pub fn evolve(&self, psi0: &JointState, times: &[f64]) -> Result<Trajectory> {
        validate_times(times)?;
        let states = times.par_iter().map(|&t| self.propagate(psi0, t)).collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { times: times.to_vec(), states })
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Err(SpinError::InvalidParameter(format!("time {t} is not finite")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpinError::InvalidParameter("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Sampled exact evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<JointState>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[JointState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &JointState)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

/// One-shot exact evolution of `psi0` under `h`.
pub fn evolve(h: &JointOperator, psi0: &JointState, times: &[f64]) -> Result<Trajectory> {
    Propagator::new(h)?.evolve(psi0, times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dense_expm;
    use crate::spin::{inner_product, product_state, spin_coherent_state};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(n: usize) -> CollectiveSpinParams {
        CollectiveSpinParams::new(n).unwrap()
    }

    fn random_state(pa: CollectiveSpinParams, pb: CollectiveSpinParams, rng: &mut impl Rng) -> JointState {
        let m = DMatrix::from_fn(pa.dim(), pb.dim(), |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        JointState::from_amplitudes(pa, pb, m).unwrap()
    }

    fn flat(psi: &JointState) -> DVector<C64> {
        let (da, db) = psi.shape();
        DVector::from_fn(da * db, |i, _| psi.amplitude(i / db, i % db))
    }

    #[test]
    fn single_spin_exchange_block_spectrum() {
        let h = build_hamiltonian(p(1), p(1), &HamiltonianSpec::exchange(1.0)).unwrap();
        let blocks = excitation_blocks(&h).unwrap();
        let prop = Propagator::new(&h).unwrap();
        assert_eq!(blocks[1].indices, vec![(0, 1), (1, 0)]);
        let mut e = prop.block_energies()[1].clone();
        e.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(e[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_coupling_on_resonance_is_zero() {
        let h = build_hamiltonian(p(3), p(2), &HamiltonianSpec::exchange(0.0)).unwrap();
        assert!(h.entries().is_empty());
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        for picture in [Picture::Lab, Picture::Interaction] {
            let spec = HamiltonianSpec { omega_a: 1.3, omega_b: 0.4, coupling: 0.7, renormalized: false, picture };
            let h = build_hamiltonian(p(4), p(2), &spec).unwrap();
            assert!(h.hermiticity_defect() < 1e-14);
        }
    }

    #[test]
    fn lab_picture_matches_interaction_plus_free_part() {
        let (pa, pb) = (p(3), p(2));
        let lab = HamiltonianSpec { omega_a: 1.5, omega_b: 0.5, coupling: 0.3, renormalized: false, picture: Picture::Lab };
        let int = HamiltonianSpec { picture: Picture::Interaction, ..lab };
        let h_lab = build_hamiltonian(pa, pb, &lab).unwrap().to_dense();
        let h_int = build_hamiltonian(pa, pb, &int).unwrap().to_dense();
        let free = (number_on_a(4, 3) + number_on_b(4, 3)).to_dense() * C64::from(0.5);
        assert!((h_lab - h_int - free).norm() < 1e-14);
    }

    #[test]
    fn renormalized_coupling() {
        let spec = HamiltonianSpec { coupling: 6.0, renormalized: true, ..HamiltonianSpec::exchange(0.0) };
        assert_abs_diff_eq!(spec.effective_coupling(p(9), p(4)), 1.0);
        let bad = HamiltonianSpec { coupling: f64::NAN, ..spec };
        assert!(build_hamiltonian(p(1), p(1), &bad).is_err());
    }

    #[test]
    fn block_sizes() {
        let h = build_hamiltonian(p(2), p(1), &HamiltonianSpec::exchange(1.0)).unwrap();
        let sizes: Vec<usize> = excitation_blocks(&h).unwrap().iter().map(|b| b.indices.len()).collect();
        assert_eq!(sizes, vec![1, 2, 2, 1]);

        let h = build_hamiltonian(p(80), p(2), &HamiltonianSpec::exchange(1.0)).unwrap();
        let blocks = excitation_blocks(&h).unwrap();
        assert_eq!(blocks.len(), 83);
        assert_eq!(blocks.iter().map(|b| b.indices.len()).max(), Some(3));
        let covered: usize = blocks.iter().map(|b| b.indices.len()).sum();
        assert_eq!(covered, 81 * 3);
    }

    #[test]
    fn diagonal_hamiltonian_gives_diagonal_blocks() {
        let spec = HamiltonianSpec { omega_a: 2.0, omega_b: 1.0, coupling: 0.0, renormalized: false, picture: Picture::Lab };
        let h = build_hamiltonian(p(5), p(3), &spec).unwrap();
        for block in excitation_blocks(&h).unwrap() {
            let m = &block.matrix;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if i != j {
                        assert_eq!(m[(i, j)], C64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn blocks_reassemble_exactly() {
        let spec = HamiltonianSpec { omega_a: 0.3, omega_b: 1.1, coupling: 0.9, renormalized: false, picture: Picture::Lab };
        let h = build_hamiltonian(p(5), p(3), &spec).unwrap();
        let blocks = excitation_blocks(&h).unwrap();
        let back = reassemble(&blocks, 6, 4);
        assert!((back.to_dense() - h.to_dense()).norm() == 0.0);
        // [H, n_a + n_b] = 0
        let total = (number_on_a(6, 4) + number_on_b(6, 4)).to_dense();
        let hd = h.to_dense();
        assert!((&hd * &total - &total * &hd).norm() < 1e-12);
    }

    #[test]
    fn non_conserving_operator_is_rejected() {
        let pa = p(2);
        let op = JointOperator::on_a(&make_operator(pa, OperatorKind::Jx), 2);
        assert!(matches!(excitation_blocks(&op), Err(SpinError::Structure { .. })));
        assert!(Propagator::new(&op).is_err());
    }

    #[test]
    fn zero_time_is_identity() {
        let (pa, pb) = (p(4), p(2));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_state(pa, pb, &mut rng);
        let h = build_hamiltonian(pa, pb, &HamiltonianSpec::exchange(1.0)).unwrap();
        let traj = evolve(&h, &psi, &[0.0]).unwrap();
        assert!((traj.states()[0].amplitudes() - psi.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn matches_dense_exponential() {
        let (pa, pb) = (p(4), p(2));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = random_state(pa, pb, &mut rng);
        let h = build_hamiltonian(pa, pb, &HamiltonianSpec::exchange(1.0)).unwrap();
        let t = 1.7;
        let exact = evolve(&h, &psi, &[t]).unwrap();
        let u = dense_expm(&(h.to_dense() * C64::new(0.0, -t)));
        let reference = u * flat(&psi);
        assert!((flat(&exact.states()[0]) - reference).norm() < 1e-10);
    }

    #[test]
    fn conservation_along_trajectory() {
        let (pa, pb) = (p(6), p(3));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_state(pa, pb, &mut rng);
        let spec = HamiltonianSpec { omega_a: 0.7, omega_b: 0.2, coupling: 1.3, renormalized: false, picture: Picture::Interaction };
        let h = build_hamiltonian(pa, pb, &spec).unwrap();
        let times: Vec<f64> = (0..30).map(|k| 0.37 * k as f64).collect();
        let traj = evolve(&h, &psi, &times).unwrap();
        let total = number_on_a(7, 4) + number_on_b(7, 4);
        let excitation = |s: &JointState| inner_product(s, &JointState::from_raw(pa, pb, total.apply(s.amplitudes()).unwrap())).unwrap().re;
        let e0 = excitation(&psi);
        for (_, s) in traj.iter() {
            assert!((s.norm() - 1.0).abs() < 1e-10);
            assert!((excitation(s) - e0).abs() < 1e-10);
        }
    }

    #[test]
    fn time_composition() {
        let (pa, pb) = (p(5), p(2));
        let psi = product_state(
            &spin_coherent_state(pa, C64::new(0.8, 0.3)).unwrap(),
            &spin_coherent_state(pb, C64::new(-0.2, 1.0)).unwrap(),
        );
        let prop = Propagator::new(&build_hamiltonian(pa, pb, &HamiltonianSpec::exchange(0.6)).unwrap()).unwrap();
        let (s, t) = (2.3, 4.1);
        let two_step = prop.propagate(&prop.propagate(&psi, s).unwrap(), t).unwrap();
        let one_step = prop.propagate(&psi, s + t).unwrap();
        assert!((two_step.amplitudes() - one_step.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn rejects_bad_time_grids() {
        let (pa, pb) = (p(2), p(1));
        let psi = JointState::basis(pa, pb, 0, 0).unwrap();
        let h = build_hamiltonian(pa, pb, &HamiltonianSpec::exchange(1.0)).unwrap();
        assert!(evolve(&h, &psi, &[0.0, 0.0]).is_err());
        assert!(evolve(&h, &psi, &[1.0, f64::NAN]).is_err());
        let wrong = JointState::basis(p(3), pb, 0, 0).unwrap();
        assert!(evolve(&h, &wrong, &[1.0]).is_err());
    }
}
