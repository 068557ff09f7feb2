//! Analytic approximations to the exchange dynamics.
//!
//! Three models: semi-classical branches for a coherent big spin, one-axis
//! twisting for `zeta = 1`, and the closed-form shifted-phase ansatz whose
//! Fourier resummation at rational times gives multi-component cat states.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Result, SpinError};
use crate::operator::{diagonal_entries, JointOperator};
use crate::spin::{
    make_operator, product_state, rotated_dicke, scs_overlap, spin_coherent_state, CollectiveSpinParams,
    DickeVector, HalfInt, JointState, OperatorKind,
};

/// Tolerance on the overlap with the `zeta = 1` product state accepted by the ansatz.
pub const ANSATZ_INPUT_TOL: f64 = 1e-10;

/// Eigenvalue floor for matrix pseudo-inverse powers.
pub const SPECTRAL_FLOOR: f64 = 1e-12;

/// One semi-classical branch: ancilla in the rotated `Jx` eigenstate `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeaComponentSpec {
    m: HalfInt,
    zeta: C64,
    coupling: f64,
    in_regime: bool,
}

impl GeaComponentSpec {
    pub fn new(
        m: HalfInt,
        zeta: C64,
        coupling: f64,
        pa: CollectiveSpinParams,
        pb: CollectiveSpinParams,
    ) -> Result<Self> {
        if !pb.contains(m) {
            return Err(SpinError::OutsideLadder { value: m.value(), j: pb.j() });
        }
        if !zeta.is_finite() || !coupling.is_finite() {
            return Err(SpinError::InvalidAmplitude(format!("zeta = {zeta}, coupling = {coupling}")));
        }
        if zeta.norm() == 0.0 {
            return Err(SpinError::SingularPhase);
        }
        let (na, nb) = (pa.n_spins() as f64, pb.n_spins() as f64);
        let (lo, hi) = (2.0 * (nb / na).sqrt(), 0.5 * (na / nb).sqrt());
        let in_regime = (lo..=hi).contains(&zeta.norm());
        if !in_regime {
            log::warn!("|zeta| = {} outside the semi-classical window [{lo}, {hi}]", zeta.norm());
        }
        Ok(GeaComponentSpec { m, zeta, coupling, in_regime })
    }

    pub fn m(&self) -> HalfInt {
        self.m
    }

    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn in_regime(&self) -> bool {
        self.in_regime
    }

    /// `phi` with `exp(-i phi) = zeta / |zeta|`.
    pub fn phi(&self) -> f64 {
        -self.zeta.arg()
    }
}

/// `exp(-i t lambda m N_A |z|) |z exp(-i t lambda m / |z|)> ⊗ exp(-i t lambda m (JzB + c) / |z|) |D_m^phi>`.
pub fn gea_component(
    spec: &GeaComponentSpec,
    pa: CollectiveSpinParams,
    pb: CollectiveSpinParams,
    t: f64,
) -> Result<JointState> {
    if !t.is_finite() {
        return Err(SpinError::InvalidParameter(format!("t = {t}")));
    }
    let r = spec.zeta.norm();
    let m = spec.m.value();
    let rate = t * spec.coupling * m / r;
    let a = spin_coherent_state(pa, spec.zeta * C64::from_polar(1.0, -rate))?;
    let d = rotated_dicke(pb, spec.m, spec.phi())?;
    let c = pb.c();
    let b_amps = DVector::from_fn(pb.dim(), |n, _| d.amplitudes()[n] * C64::from_polar(1.0, -rate * (pb.m_z(n) + c)));
    let b = DickeVector::from_amplitudes(pb, b_amps)?;
    let global = -t * spec.coupling * m * pa.n_spins() as f64 * r;
    Ok(product_state(&a, &b).with_global_phase(global))
}

/// Normalized `sum_k w_k |component_k(t)>`; the norm comes from the Gram matrix.
pub fn gea_superposition(
    components: &[(C64, GeaComponentSpec)],
    pa: CollectiveSpinParams,
    pb: CollectiveSpinParams,
    t: f64,
) -> Result<JointState> {
    if components.iter().all(|(w, _)| w.norm() == 0.0) {
        return Err(SpinError::Degenerate("all branch weights vanish".into()));
    }
    let states = components
        .iter()
        .map(|(_, spec)| gea_component(spec, pa, pb, t))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<C64> = components.iter().map(|(w, _)| *w).collect();
    let mut norm_sq = C64::new(0.0, 0.0);
    for (k, sk) in states.iter().enumerate() {
        for (l, sl) in states.iter().enumerate() {
            norm_sq += weights[k].conj() * weights[l] * sk.amplitudes().dotc(sl.amplitudes());
        }
    }
    if norm_sq.re < 1e-24 {
        return Err(SpinError::Degenerate("branches cancel".into()));
    }
    let mut sum = DMatrix::<C64>::zeros(pa.dim(), pb.dim());
    for (w, s) in weights.iter().zip(&states) {
        sum += s.amplitudes() * *w;
    }
    JointState::from_amplitudes(pa, pb, sum / C64::from(norm_sq.re.sqrt()))
}

/// Which approximation a time bound or revival refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Small `|zeta|`, semi-classical branches.
    BosonicSmallZeta,
    /// `zeta = 1`, one-axis twisting and the shifted-phase ansatz.
    ZetaOne,
}

/// Upper bound on `lambda t` (and on `t`) for an approximation to hold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityWindow {
    pub lambda_t: f64,
    pub t: f64,
}

/// Factor turning a "much less than" bound into a number.
pub const WINDOW_FACTOR: f64 = 0.1;

pub fn validity_window(
    regime: Regime,
    pa: CollectiveSpinParams,
    pb: CollectiveSpinParams,
    zeta: C64,
    coupling: f64,
) -> Result<ValidityWindow> {
    if !(coupling > 0.0) {
        return Err(SpinError::InvalidParameter(format!("coupling must be positive, got {coupling}")));
    }
    let (na, nb) = (pa.n_spins() as f64, pb.n_spins() as f64);
    let bound = match regime {
        Regime::BosonicSmallZeta => {
            let r = zeta.norm();
            (2.0 * PI * r / nb).min(2.0 * PI / (na * r.powi(3)))
        }
        Regime::ZetaOne => 2.0 * PI * na.sqrt() / nb,
    };
    let lambda_t = WINDOW_FACTOR * bound;
    Ok(ValidityWindow { lambda_t, t: lambda_t / coupling })
}

/// Characteristic times of a regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RevivalTimes {
    /// Period of the phase pattern (`T` for `zeta = 1`).
    pub period: f64,
    /// First return of the initial state.
    pub revival: f64,
    /// Time of the two-component cat.
    pub cat: f64,
}

pub fn revival_times(
    pa: CollectiveSpinParams,
    pb: CollectiveSpinParams,
    zeta: C64,
    coupling: f64,
    regime: Regime,
) -> Result<RevivalTimes> {
    if !(coupling > 0.0) {
        return Err(SpinError::InvalidParameter(format!("coupling must be positive, got {coupling}")));
    }
    let (na, nb) = (pa.n_spins() as f64, pb.n_spins() as f64);
    Ok(match regime {
        Regime::BosonicSmallZeta => {
            let revival = 4.0 * PI * zeta.norm() / (coupling * nb);
            RevivalTimes { period: revival, revival, cat: revival / 4.0 }
        }
        Regime::ZetaOne => {
            let period = 2.0 * PI * na / (coupling * nb);
            let revival = if pa.n_spins() % 2 == 1 { 4.0 * period } else { period };
            RevivalTimes { period, revival, cat: period / 4.0 }
        }
    })
}

/// `lambda (2 s - JzA^2 / s) ⊗ JxB` with `s = sqrt(j (j + 1))`.
pub fn oat_hamiltonian(pa: CollectiveSpinParams, pb: CollectiveSpinParams, coupling: f64) -> JointOperator {
    let s = (pa.j() * (pa.j() + 1.0)).sqrt();
    let a = diagonal_entries((0..pa.dim()).map(|n| 2.0 * s - pa.m_z(n).powi(2) / s));
    let bx = make_operator(pb, OperatorKind::Jx).nonzeros();
    JointOperator::kron_entries(pa.dim(), &a, pb.dim(), &bx) * coupling
}

/// `[(|down> + |up>)/sqrt 2]^{⊗ N_A + N_B}`.
pub fn zeta_one_state(pa: CollectiveSpinParams, pb: CollectiveSpinParams) -> JointState {
    let one = C64::new(1.0, 0.0);
    product_state(
        &spin_coherent_state(pa, one).expect("finite zeta"),
        &spin_coherent_state(pb, one).expect("finite zeta"),
    )
}

/// Phase pattern `exp[i t lambda N_B (x^2 + 2 c x) / N_A]`, `x = n - N_A/2`.
fn ansatz_phase(pa: CollectiveSpinParams, pb: CollectiveSpinParams, coupling: f64, t: f64, n: f64) -> C64 {
    let x = n - pa.j();
    let c = pb.c();
    let nb = pb.n_spins() as f64;
    C64::from_polar(1.0, t * coupling * nb * (x * x + 2.0 * c * x) / pa.n_spins() as f64)
}

/// Closed-form ansatz evolution of the `zeta = 1` product state.
///
/// The A phase pattern is generated with the ancilla frozen in its `Jx`
/// eigenstate and then shifted by `JzB + c` back into the lab frame.
pub fn ansatz_evolve(
    pa: CollectiveSpinParams,
    pb: CollectiveSpinParams,
    coupling: f64,
    initial: &JointState,
    t: f64,
) -> Result<JointState> {
    if !t.is_finite() || !coupling.is_finite() {
        return Err(SpinError::InvalidParameter(format!("t = {t}, coupling = {coupling}")));
    }
    let reference = zeta_one_state(pa, pb);
    if initial.shape() != reference.shape() {
        return Err(SpinError::DimensionMismatch {
            expected: format!("{:?}", reference.shape()),
            found: format!("{:?}", initial.shape()),
        });
    }
    let overlap = reference.amplitudes().dotc(initial.amplitudes()).norm();
    if (1.0 - overlap).abs() > ANSATZ_INPUT_TOL {
        return Err(SpinError::UnsupportedInitialState(format!(
            "ansatz needs the zeta = 1 product state (overlap {overlap})"
        )));
    }
    let c = pb.c();
    let global = C64::from_polar(1.0, -t * coupling * (pa.n_spins() * pb.n_spins()) as f64 / 2.0);
    let amps = DMatrix::from_fn(pa.dim(), pb.dim(), |na, nb| {
        let shifted = na as f64 + pb.m_z(nb) + c;
        initial.amplitude(na, nb) * global * ansatz_phase(pa, pb, coupling, t, shifted)
    });
    JointState::from_amplitudes(pa, pb, amps)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Fourier weights of the ansatz phase pattern at `t = p T / q`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussCatPrediction {
    pub p: u64,
    pub q: u64,
    pub n_a: usize,
    pub n_b: usize,
    pub fourier_weights: Vec<C64>,
    /// `exp(-2 pi i l / q)`: the `zeta` of component `l`.
    pub component_phases: Vec<C64>,
    /// `exp(2 pi i l (N_B/2 - c) / q)`.
    pub extra_phases: Vec<C64>,
}

impl GaussCatPrediction {
    /// Indices `l` with `|F_l|` above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.fourier_weights.len()).filter(|&l| self.fourier_weights[l].norm() > tol).collect()
    }
}

/// `F_l = q^{-1/2} sum_n exp[2 pi i p (x^2 + 2 c x) / q] exp[2 pi i l n / q]`.
pub fn gauss_dft(p: u64, q: u64, pa: CollectiveSpinParams, pb: CollectiveSpinParams) -> Result<GaussCatPrediction> {
    if p == 0 || q == 0 || gcd(p, q) != 1 {
        return Err(SpinError::InvalidParameter(format!("need coprime positive p, q; got p = {p}, q = {q}")));
    }
    let qf = q as f64;
    let c = pb.c();
    // The pattern is q-periodic in n; reduce p x^2 mod q in integer-free form
    // by working with the phase fraction directly.
    let pattern: Vec<C64> = (0..q)
        .map(|n| {
            let x = n as f64 - pa.j();
            let frac = ((p as f64) * (x * x + 2.0 * c * x) / qf).rem_euclid(1.0);
            C64::from_polar(1.0, 2.0 * PI * frac)
        })
        .collect();
    let fourier_weights = (0..q)
        .map(|l| {
            let s: C64 = pattern
                .iter()
                .enumerate()
                .map(|(n, g)| g * C64::from_polar(1.0, 2.0 * PI * ((l * n as u64) % q) as f64 / qf))
                .sum();
            s / qf.sqrt()
        })
        .collect();
    let component_phases = (0..q).map(|l| C64::from_polar(1.0, -2.0 * PI * l as f64 / qf)).collect();
    let shift = pb.j() - c;
    let extra_phases = (0..q).map(|l| C64::from_polar(1.0, 2.0 * PI * l as f64 * shift / qf)).collect();
    Ok(GaussCatPrediction {
        p,
        q,
        n_a: pa.n_spins(),
        n_b: pb.n_spins(),
        fourier_weights,
        component_phases,
        extra_phases,
    })
}

/// `sum_l F_l e_l [(|down> + z_l |up>)/sqrt 2]^{⊗ N_A + N_B}`, normalized through
/// closed-form coherent-state overlaps.
pub fn fractional_revival_state(
    pred: &GaussCatPrediction,
    pa: CollectiveSpinParams,
    pb: CollectiveSpinParams,
) -> Result<JointState> {
    if (pred.n_a, pred.n_b) != (pa.n_spins(), pb.n_spins()) {
        return Err(SpinError::DimensionMismatch {
            expected: format!("N_A = {}, N_B = {}", pred.n_a, pred.n_b),
            found: format!("N_A = {}, N_B = {}", pa.n_spins(), pb.n_spins()),
        });
    }
    let weights: Vec<C64> = pred.fourier_weights.iter().zip(&pred.extra_phases).map(|(f, e)| f * e).collect();
    let zetas = &pred.component_phases;
    let total = pa.n_spins() + pb.n_spins();
    let mut norm_sq = C64::new(0.0, 0.0);
    for (k, &zk) in zetas.iter().enumerate() {
        for (l, &zl) in zetas.iter().enumerate() {
            norm_sq += weights[k].conj() * weights[l] * scs_overlap(total, zk, zl);
        }
    }
    assert!(norm_sq.re > 1e-24, "Gauss weights vanish for coprime p, q");
    let mut sum = DMatrix::<C64>::zeros(pa.dim(), pb.dim());
    for (w, &z) in weights.iter().zip(zetas) {
        if w.norm() == 0.0 {
            continue;
        }
        let comp = product_state(&spin_coherent_state(pa, z)?, &spin_coherent_state(pb, z)?);
        sum += comp.amplitudes() * *w;
    }
    JointState::from_amplitudes(pa, pb, sum / C64::from(norm_sq.re.sqrt()))
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
fn hermitian_function(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<C64>> {
    let eig = SymmetricEigen::try_new(m.clone(), 1e-15, 10_000)
        .ok_or_else(|| SpinError::Numerical("Hermitian eigendecomposition did not converge".into()))?;
    let vals = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from(f(e))));
    Ok(&eig.eigenvectors * vals * eig.eigenvectors.adjoint())
}

fn matrix_power(m: &DMatrix<C64>, k: usize) -> DMatrix<C64> {
    (0..k).fold(DMatrix::identity(m.nrows(), m.ncols()), |acc, _| acc * m)
}

/// Max deviation in `Q^{-1} sqrt(JA- JA+) Q = sqrt(J^2 - (JzA - JzB - c)(JzA - JzB - c + 1))`
/// over the interior subspace where `Q` acts unitarily.
///
/// `P = (JA- JA+)^{-1/2} JA-` and `Q = P^{JzB + c}`, built as explicit matrices.
pub fn verify_q_transform(pa: CollectiveSpinParams, pb: CollectiveSpinParams) -> Result<f64> {
    let (da, db) = (pa.dim(), pb.dim());
    let a_minus = make_operator(pa, OperatorKind::Jminus).to_dense();
    let a_plus = make_operator(pa, OperatorKind::Jplus).to_dense();
    let lowering = &a_minus * &a_plus;
    let inv_sqrt = hermitian_function(&lowering, |e| if e > SPECTRAL_FLOOR { 1.0 / e.sqrt() } else { 0.0 })?;
    let shift = inv_sqrt * &a_minus;
    let shift_inv = shift
        .clone()
        .pseudo_inverse(SPECTRAL_FLOOR)
        .map_err(|e| SpinError::Numerical(format!("pseudo-inverse of P: {e}")))?;
    let c = pb.c();

    // Q is block diagonal in the ancilla Dicke index.
    let power = |nb: usize| -> DMatrix<C64> {
        let k = (pb.m_z(nb) + c).round() as i64;
        if k >= 0 {
            matrix_power(&shift, k as usize)
        } else {
            matrix_power(&shift_inv, (-k) as usize)
        }
    };
    let sqrt_lowering = hermitian_function(&lowering, |e| e.max(0.0).sqrt())?;
    let j = pa.j();
    let interior = |n: usize| {
        let n = n as f64;
        n > pb.j() + c && n < pa.n_spins() as f64 - pb.j() - c
    };
    let mut deviation: f64 = 0.0;
    for nb in 0..db {
        let q = power(nb);
        let q_inv = q
            .clone()
            .pseudo_inverse(SPECTRAL_FLOOR)
            .map_err(|e| SpinError::Numerical(format!("pseudo-inverse of Q: {e}")))?;
        let lhs = &q_inv * &sqrt_lowering * &q;
        for r in (0..da).filter(|&r| interior(r)) {
            for col in (0..da).filter(|&col| interior(col)) {
                let rhs = if r == col {
                    let y = pa.m_z(r) - pb.m_z(nb) - c;
                    (j * (j + 1.0) - y * (y + 1.0)).max(0.0).sqrt()
                } else {
                    0.0
                };
                deviation = deviation.max((lhs[(r, col)] - C64::from(rhs)).norm());
            }
        }
    }
    Ok(deviation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_hamiltonian, HamiltonianSpec, Propagator};
    use crate::observables::{reduced_purity, squeezing_kitagawa_ueda, Subsystem};
    use crate::oracle::dense_expm;
    use crate::spin::inner_product;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(n: usize) -> CollectiveSpinParams {
        CollectiveSpinParams::new(n).unwrap()
    }

    fn fid(x: &JointState, y: &JointState) -> f64 {
        inner_product(x, y).unwrap().norm()
    }

    fn half(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn gea_component_at_zero_time() {
        let (pa, pb) = (p(50), p(3));
        let zeta = C64::from_polar(0.8, 0.7);
        let spec = GeaComponentSpec::new(half(1), zeta, 1.0, pa, pb).unwrap();
        let got = gea_component(&spec, pa, pb, 0.0).unwrap();
        let want = product_state(&spin_coherent_state(pa, zeta).unwrap(), &rotated_dicke(pb, half(1), -0.7).unwrap());
        assert!((got.amplitudes() - want.amplitudes()).norm() < 1e-13);
    }

    #[test]
    fn gea_rejects_zero_zeta_and_bad_m() {
        assert!(matches!(
            GeaComponentSpec::new(half(1), C64::new(0.0, 0.0), 1.0, p(10), p(1)),
            Err(SpinError::SingularPhase)
        ));
        assert!(GeaComponentSpec::new(half(2), C64::new(1.0, 0.0), 1.0, p(10), p(1)).is_err());
    }

    #[test]
    fn regime_flag() {
        let (pa, pb) = (p(400), p(1));
        assert!(GeaComponentSpec::new(half(1), C64::new(1.0, 0.0), 1.0, pa, pb).unwrap().in_regime());
        assert!(!GeaComponentSpec::new(half(1), C64::new(0.01, 0.0), 1.0, pa, pb).unwrap().in_regime());
        assert!(!GeaComponentSpec::new(half(1), C64::new(50.0, 0.0), 1.0, pa, pb).unwrap().in_regime());
    }

    #[test]
    fn single_ancilla_branches_match_explicit_form() {
        let (pa, pb) = (p(30), p(1));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let zeta = C64::from_polar(rng.gen_range(0.2..3.0), rng.gen_range(-PI..PI));
            let lambda = rng.gen_range(0.1..2.0);
            let t = rng.gen_range(0.0..10.0);
            let phi = -zeta.arg();
            let r = zeta.norm();
            for sign in [1.0, -1.0] {
                let spec = GeaComponentSpec::new(half(sign as i64), zeta, lambda, pa, pb).unwrap();
                let state = gea_component(&spec, pa, pb, t).unwrap();
                let a = spin_coherent_state(pa, zeta * C64::from_polar(1.0, -sign * t * lambda / (2.0 * r))).unwrap();
                let up = C64::from_polar(1.0, -phi / 2.0 - sign * t * lambda / (2.0 * r)) / 2f64.sqrt();
                let down = sign * C64::from_polar(1.0, phi / 2.0) / 2f64.sqrt();
                let b = DickeVector::from_amplitudes(pb, DVector::from_vec(vec![down, up])).unwrap();
                let global = C64::from_polar(1.0, -sign * t * lambda * 30.0 * r / 2.0);
                let want = product_state(&a, &b).amplitudes() * global;
                assert!((state.amplitudes() - want).norm() < 1e-12, "zeta {zeta} t {t}");
            }
        }
    }

    #[test]
    fn branches_return_at_revival_time() {
        for (nb, m) in [(1, 1), (1, -1), (2, 2), (3, 3), (3, -1)] {
            let (pa, pb) = (p(100), p(nb));
            let zeta = C64::from_polar(1.3, 0.4);
            let spec = GeaComponentSpec::new(half(m), zeta, 1.0, pa, pb).unwrap();
            let t_r = 4.0 * PI * zeta.norm();
            let s0 = gea_component(&spec, pa, pb, 0.0).unwrap();
            let s1 = gea_component(&spec, pa, pb, t_r).unwrap();
            assert_abs_diff_eq!(fid(&s0, &s1), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn attractor_disentangles_ancilla() {
        for nb in [1usize, 2, 3] {
            let (pa, pb) = (p(200), p(nb));
            let zeta = C64::from_polar(1.0, -0.3);
            let plus = GeaComponentSpec::new(half(nb as i64), zeta, 1.0, pa, pb).unwrap();
            let minus = GeaComponentSpec::new(half(-(nb as i64)), zeta, 1.0, pa, pb).unwrap();
            let t = 4.0 * PI * zeta.norm() / (4.0 * nb as f64);
            let sp = gea_component(&plus, pa, pb, t).unwrap();
            let sm = gea_component(&minus, pa, pb, t).unwrap();
            // B factors agree up to phase: the rank-one factorization shows it.
            let bp = sp.amplitudes().row(0).transpose();
            let bm = sm.amplitudes().row(0).transpose();
            let overlap = bp.dotc(&bm).norm() / (bp.norm() * bm.norm());
            assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
            let cat = gea_superposition(&[(C64::new(1.0, 0.0), plus), (C64::new(1.0, 0.0), minus)], pa, pb, t).unwrap();
            assert_abs_diff_eq!(reduced_purity(&cat, Subsystem::B), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(cat.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn superposition_edge_cases() {
        let (pa, pb) = (p(20), p(1));
        let spec = GeaComponentSpec::new(half(1), C64::new(0.5, 0.5), 1.0, pa, pb).unwrap();
        let single = gea_superposition(&[(C64::new(1.0, 0.0), spec)], pa, pb, 0.3).unwrap();
        let direct = gea_component(&spec, pa, pb, 0.3).unwrap();
        assert!((single.amplitudes() - direct.amplitudes()).norm() < 1e-13);
        let zero = C64::new(0.0, 0.0);
        assert!(matches!(gea_superposition(&[(zero, spec)], pa, pb, 0.3), Err(SpinError::Degenerate(_))));
    }

    #[test]
    fn validity_window_examples() {
        let w = validity_window(Regime::BosonicSmallZeta, p(400), p(1), C64::new(2.0, 0.0), 1.0).unwrap();
        assert_abs_diff_eq!(w.lambda_t, 2.0 * PI / 32000.0, epsilon = 1e-15);
        let w = validity_window(Regime::ZetaOne, p(80), p(2), C64::new(1.0, 0.0), 2.0).unwrap();
        assert_abs_diff_eq!(w.lambda_t, 2.0 * PI * 80f64.sqrt() / 2.0 / 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.t, w.lambda_t / 2.0, epsilon = 1e-15);
        let w4 = validity_window(Regime::ZetaOne, p(80), p(4), C64::new(1.0, 0.0), 2.0).unwrap();
        assert_abs_diff_eq!(w4.lambda_t, w.lambda_t / 2.0, epsilon = 1e-12);
        assert!(validity_window(Regime::ZetaOne, p(80), p(4), C64::new(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn revival_time_examples() {
        let one = C64::new(1.0, 0.0);
        let r = revival_times(p(80), p(2), one, 1.0, Regime::ZetaOne).unwrap();
        assert_abs_diff_eq!(r.revival, 80.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(r.cat, 20.0 * PI, epsilon = 1e-12);
        let r1 = revival_times(p(80), p(1), one, 1.0, Regime::ZetaOne).unwrap();
        assert_abs_diff_eq!(r1.revival, 2.0 * r.revival, epsilon = 1e-12);
        let odd = revival_times(p(81), p(2), one, 1.0, Regime::ZetaOne).unwrap();
        assert_abs_diff_eq!(odd.revival, 4.0 * odd.period, epsilon = 1e-12);
        let b = revival_times(p(400), p(1), one, 1.0, Regime::BosonicSmallZeta).unwrap();
        assert_abs_diff_eq!(b.revival, 4.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(b.cat, PI, epsilon = 1e-12);
        assert!(revival_times(p(4), p(1), one, -1.0, Regime::ZetaOne).is_err());
    }

    #[test]
    fn oat_hamiltonian_structure() {
        let (pa, pb) = (p(12), p(2));
        let h = oat_hamiltonian(pa, pb, 0.7);
        assert!(h.hermiticity_defect() < 1e-14);
        // commutes with JzA and JxB, so it is diagonal in Dicke-A ⊗ Jx-B
        let dense = h.to_dense();
        for op in [
            JointOperator::on_a(&make_operator(pa, OperatorKind::Jz), pb.dim()),
            JointOperator::on_b(pa.dim(), &make_operator(pb, OperatorKind::Jx)),
        ] {
            let o = op.to_dense();
            assert!((&dense * &o - &o * &dense).norm() < 1e-12);
        }
    }

    #[test]
    fn oat_expectation_in_initial_state() {
        let (pa, pb) = (p(40), p(3));
        let lambda = 0.9;
        let h = oat_hamiltonian(pa, pb, lambda);
        let psi = zeta_one_state(pa, pb);
        let e = crate::observables::expectation(&h, &psi).unwrap();
        let s = (20.0f64 * 21.0).sqrt();
        assert_abs_diff_eq!(e.re, lambda * 1.5 * (2.0 * s - 10.0 / s), epsilon = 1e-10);
    }

    #[test]
    fn oat_squeezes_at_short_times() {
        let (pa, pb) = (p(20), p(1));
        let h = oat_hamiltonian(pa, pb, 1.0).to_dense();
        let psi = zeta_one_state(pa, pb);
        let flat = DVector::from_fn(pa.dim() * pb.dim(), |i, _| psi.amplitude(i / pb.dim(), i % pb.dim()));
        let u = dense_expm(&(h * C64::new(0.0, -0.5)));
        let out = u * flat;
        let amps = DMatrix::from_fn(pa.dim(), pb.dim(), |a, b| out[a * pb.dim() + b]);
        let state = JointState::from_amplitudes(pa, pb, amps).unwrap();
        assert!(squeezing_kitagawa_ueda(&state, Subsystem::A).unwrap().chi_squared < 1.0);
    }

    #[test]
    fn ansatz_special_times() {
        for (na, nb) in [(80, 2), (40, 1), (20, 3), (81, 1), (81, 2)] {
            let (pa, pb) = (p(na), p(nb));
            let psi0 = zeta_one_state(pa, pb);
            let t_period = revival_times(pa, pb, C64::new(1.0, 0.0), 1.0, Regime::ZetaOne).unwrap().period;
            let at = |t| ansatz_evolve(pa, pb, 1.0, &psi0, t).unwrap();
            assert_abs_diff_eq!(fid(&at(0.0), &psi0), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(fid(&at(t_period), &psi0), 1.0, epsilon = 1e-12);
            let minus = C64::new(-1.0, 0.0);
            let flipped = product_state(&spin_coherent_state(pa, minus).unwrap(), &spin_coherent_state(pb, minus).unwrap());
            // half period: spin flip when N_A + N_B is even, plain revival otherwise
            let half_target = if (na + nb) % 2 == 0 { &flipped } else { &psi0 };
            assert_abs_diff_eq!(fid(&at(t_period / 2.0), half_target), 1.0, epsilon = 1e-12);
            for t in [3.1, 17.0, 52.5] {
                assert_abs_diff_eq!(fid(&at(t), &at(t + t_period)), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ansatz_rejects_other_states() {
        let (pa, pb) = (p(10), p(1));
        let other = product_state(&spin_coherent_state(pa, C64::new(0.5, 0.0)).unwrap(), &DickeVector::basis(pb, 0).unwrap());
        assert!(matches!(ansatz_evolve(pa, pb, 1.0, &other, 1.0), Err(SpinError::UnsupportedInitialState(_))));
        let phased = zeta_one_state(pa, pb).with_global_phase(0.4);
        assert!(ansatz_evolve(pa, pb, 1.0, &phased, 1.0).is_ok());
    }

    #[test]
    fn gauss_weights_for_quarter_period() {
        let pred = gauss_dft(1, 4, p(80), p(2)).unwrap();
        let want = [C64::new(1.0, 1.0), C64::new(0.0, 0.0), C64::new(1.0, -1.0), C64::new(0.0, 0.0)];
        for (got, want) in pred.fourier_weights.iter().zip(want) {
            assert!((got - want).norm() < 1e-12);
        }
        assert_eq!(pred.support(1e-9), vec![0, 2]);
    }

    #[test]
    fn gauss_weights_examples() {
        let single = gauss_dft(1, 1, p(80), p(2)).unwrap();
        assert_abs_diff_eq!(single.fourier_weights[0].norm(), 1.0, epsilon = 1e-14);
        for k in 1..=4u64 {
            let pred = gauss_dft(1, 4 * k, p(80), p(2)).unwrap();
            let support = pred.support(1e-9);
            assert_eq!(support.len() as u64, 2 * k);
            let mag = pred.fourier_weights[support[0]].norm();
            assert!(support.iter().all(|&l| (pred.fourier_weights[l].norm() - mag).abs() < 1e-12));
        }
        assert!(gauss_dft(2, 4, p(80), p(2)).is_err());
        assert!(gauss_dft(1, 0, p(80), p(2)).is_err());
    }

    #[test]
    fn gauss_weights_satisfy_parseval() {
        for (p_, q_) in [(1, 3), (2, 5), (3, 7), (5, 12), (7, 9)] {
            for (na, nb) in [(80, 2), (81, 1), (33, 3)] {
                let pred = gauss_dft(p_, q_, p(na), p(nb)).unwrap();
                let s: f64 = pred.fourier_weights.iter().map(|f| f.norm_sqr()).sum();
                assert_abs_diff_eq!(s, q_ as f64, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fourier_resummation_matches_ansatz() {
        for (na, nb) in [(80, 2), (40, 1), (31, 3), (24, 4)] {
            let (pa, pb) = (p(na), p(nb));
            let psi0 = zeta_one_state(pa, pb);
            let period = 2.0 * PI * na as f64 / nb as f64;
            for (p_, q_) in [(1, 1), (1, 2), (1, 3), (1, 4), (2, 5), (3, 8)] {
                let pred = gauss_dft(p_, q_, pa, pb).unwrap();
                let cat = fractional_revival_state(&pred, pa, pb).unwrap();
                let ansatz = ansatz_evolve(pa, pb, 1.0, &psi0, period * p_ as f64 / q_ as f64).unwrap();
                assert_abs_diff_eq!(fid(&cat, &ansatz), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn full_revival_prediction_is_initial_state() {
        let (pa, pb) = (p(80), p(2));
        let pred = gauss_dft(1, 1, pa, pb).unwrap();
        let state = fractional_revival_state(&pred, pa, pb).unwrap();
        assert_abs_diff_eq!(fid(&state, &zeta_one_state(pa, pb)), 1.0, epsilon = 1e-12);
        assert!(fractional_revival_state(&pred, p(81), pb).is_err());
    }

    #[test]
    fn transform_identity_holds_on_interior() {
        for na in 2..=12 {
            for nb in 1..=3 {
                let dev = verify_q_transform(p(na), p(nb)).unwrap();
                assert!(dev <= 1e-10, "N_A = {na}, N_B = {nb}: {dev:e}");
            }
        }
    }

    #[test]
    fn exact_short_time_tracks_branches() {
        // N_A = 200, N_B = 1, |zeta| = 2: the two-branch approximation of
        // |zeta>|up> stays close to the exact state inside its window.
        let (pa, pb) = (p(200), p(1));
        let zeta = C64::new(2.0, 0.0);
        let psi0 = product_state(&spin_coherent_state(pa, zeta).unwrap(), &DickeVector::basis(pb, 1).unwrap());
        let specs: Vec<(C64, GeaComponentSpec)> = [1, -1]
            .into_iter()
            .map(|m| {
                let spec = GeaComponentSpec::new(half(m), zeta, 1.0, pa, pb).unwrap();
                let d = rotated_dicke(pb, half(m), spec.phi()).unwrap();
                (d.amplitudes()[1].conj(), spec)
            })
            .collect();
        let start = gea_superposition(&specs, pa, pb, 0.0).unwrap();
        assert_abs_diff_eq!(fid(&start, &psi0), 1.0, epsilon = 1e-12);
        let h = build_hamiltonian(pa, pb, &HamiltonianSpec::exchange(1.0)).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let window = validity_window(Regime::BosonicSmallZeta, pa, pb, zeta, 1.0).unwrap();
        for k in 1..=5 {
            let t = window.t * k as f64 / 5.0;
            let exact = prop.propagate(&psi0, t).unwrap();
            let approx = gea_superposition(&specs, pa, pb, t).unwrap();
            assert!(fid(&exact, &approx) >= 0.99);
        }
    }
}
