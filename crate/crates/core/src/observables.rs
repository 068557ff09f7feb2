//! Expectations, variances, squeezing, Q-functions and fidelities.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Result, SpinError};
use crate::operator::JointOperator;
use crate::spin::{
    make_operator, CollectiveOperator, CollectiveSpinParams, DickeVector, JointState, OperatorKind, StateVector,
};

/// Variances whose magnitude is below this are eigenstate round-off.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// An operator that can act on a particular kind of state.
pub trait Observable {
    type State: StateVector;

    /// `O |psi>` in the state's flat amplitude layout.
    fn act(&self, psi: &Self::State) -> Result<Vec<C64>>;
}

impl Observable for CollectiveOperator {
    type State = DickeVector;

    fn act(&self, psi: &DickeVector) -> Result<Vec<C64>> {
        if psi.params() != self.params() {
            return Err(SpinError::DimensionMismatch {
                expected: self.params().dim().to_string(),
                found: psi.params().dim().to_string(),
            });
        }
        Ok(self.apply(psi.amplitudes()).as_slice().to_vec())
    }
}

impl Observable for JointOperator {
    type State = JointState;

    fn act(&self, psi: &JointState) -> Result<Vec<C64>> {
        Ok(self.apply(psi.amplitudes())?.as_slice().to_vec())
    }
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// `<psi|O|psi>`.
pub fn expectation<O: Observable>(op: &O, psi: &O::State) -> Result<C64> {
    let out = op.act(psi)?;
    Ok(dot(psi.amplitudes_flat(), &out))
}

/// `<O^2> - <O>^2` for Hermitian `O`, clamped at zero.
pub fn variance<O: Observable>(op: &O, psi: &O::State) -> Result<f64> {
    let out = op.act(psi)?;
    let mean = dot(psi.amplitudes_flat(), &out).re;
    let second: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    let var = second - mean * mean;
    Ok(if var < VARIANCE_FLOOR { var.max(0.0) } else { var })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Collective operator of one subsystem lifted to the joint space.
pub fn subsystem_operator(
    pa: CollectiveSpinParams,
    pb: CollectiveSpinParams,
    subsystem: Subsystem,
    kind: OperatorKind,
) -> JointOperator {
    match subsystem {
        Subsystem::A => JointOperator::on_a(&make_operator(pa, kind), pb.dim()),
        Subsystem::B => JointOperator::on_b(pa.dim(), &make_operator(pb, kind)),
    }
}

fn subsystem_params(psi: &JointState, subsystem: Subsystem) -> CollectiveSpinParams {
    match subsystem {
        Subsystem::A => psi.params_a(),
        Subsystem::B => psi.params_b(),
    }
}

/// `(Jx, Jy, Jz)` of one subsystem applied to `psi`.
fn spin_components(psi: &JointState, subsystem: Subsystem) -> Result<[DMatrix<C64>; 3]> {
    let (pa, pb) = (psi.params_a(), psi.params_b());
    let apply = |kind| subsystem_operator(pa, pb, subsystem, kind).apply(psi.amplitudes());
    Ok([apply(OperatorKind::Jx)?, apply(OperatorKind::Jy)?, apply(OperatorKind::Jz)?])
}

/// `(<Jx>, <Jy>, <Jz>)` of one subsystem.
pub fn mean_spin(psi: &JointState, subsystem: Subsystem) -> Result<[f64; 3]> {
    let comps = spin_components(psi, subsystem)?;
    let amps = psi.amplitudes();
    Ok([0, 1, 2].map(|k| amps.dotc(&comps[k]).re))
}

/// Purity `tr(rho^2)` of a subsystem's reduced state.
pub fn reduced_purity(psi: &JointState, subsystem: Subsystem) -> f64 {
    let amps = psi.amplitudes();
    let rho = match subsystem {
        Subsystem::A => amps * amps.adjoint(),
        Subsystem::B => amps.transpose() * amps.map(|z| z.conj()),
    };
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Sum of the three collective-spin variances of a subsystem.
///
/// For a single ancilla spin this fixes the purity: `P = 2 - 2 * total`.
pub fn total_spin_variance(psi: &JointState, subsystem: Subsystem) -> Result<f64> {
    let (pa, pb) = (psi.params_a(), psi.params_b());
    [OperatorKind::Jx, OperatorKind::Jy, OperatorKind::Jz]
        .into_iter()
        .map(|kind| variance(&subsystem_operator(pa, pb, subsystem, kind), psi))
        .sum()
}

/// Kitagawa-Ueda squeezing of one subsystem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezingResult {
    pub chi_squared: f64,
    pub mean_direction: [f64; 3],
    pub min_perp_direction: [f64; 3],
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / n)
}

/// `chi^2 = 4 min Var(J_perp) / N`, the minimum taken in closed form over the
/// plane perpendicular to the mean spin.
pub fn squeezing_kitagawa_ueda(psi: &JointState, subsystem: Subsystem) -> Result<SqueezingResult> {
    let comps = spin_components(psi, subsystem)?;
    let amps = psi.amplitudes();
    let mean = [0, 1, 2].map(|k| amps.dotc(&comps[k]).re);
    let len = (mean.iter().map(|x| x * x).sum::<f64>()).sqrt();
    if len < 1e-12 {
        return Err(SpinError::UndefinedDirection);
    }
    let n = mean.map(|x| x / len);
    let helper = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let e1 = normalized(cross(n, helper));
    let e2 = cross(n, e1);
    let along = |e: [f64; 3]| -> DMatrix<C64> {
        &comps[0] * C64::from(e[0]) + &comps[1] * C64::from(e[1]) + &comps[2] * C64::from(e[2])
    };
    let (v1, v2) = (along(e1), along(e2));
    let (m1, m2) = (amps.dotc(&v1).re, amps.dotc(&v2).re);
    let c11 = v1.norm_squared() - m1 * m1;
    let c22 = v2.norm_squared() - m2 * m2;
    let c12 = v1.dotc(&v2).re - m1 * m2;
    let min_var = 0.5 * (c11 + c22 - ((c11 - c22).powi(2) + 4.0 * c12 * c12).sqrt());
    let (a, b) = if c12.abs() > 1e-14 {
        let (a, b) = (c12, min_var - c11);
        let r = (a * a + b * b).sqrt();
        (a / r, b / r)
    } else if c11 <= c22 {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let perp = normalized([0, 1, 2].map(|k| a * e1[k] + b * e2[k]));
    let n_spins = subsystem_params(psi, subsystem).n_spins() as f64;
    Ok(SqueezingResult { chi_squared: 4.0 * min_var.max(0.0) / n_spins, mean_direction: n, min_perp_direction: perp })
}

/// `|<x|y>|`.
pub fn fidelity<S: StateVector>(x: &S, y: &S) -> Result<f64> {
    Ok(crate::spin::inner_product(x, y)?.norm())
}

/// Sphere lattice: `n_theta` nodes on `[0, pi]` inclusive, `n_phi` on `[0, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for QGrid {
    fn default() -> Self {
        QGrid { n_theta: 181, n_phi: 360 }
    }
}

impl QGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 1 {
            return Err(SpinError::InvalidParameter(format!("Q grid {n_theta}x{n_phi} too small")));
        }
        Ok(QGrid { n_theta, n_phi })
    }

    pub fn theta(&self, i: usize) -> f64 {
        std::f64::consts::PI * i as f64 / (self.n_theta - 1) as f64
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.n_phi as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QFunctionField {
    pub grid: QGrid,
    /// Row-major over `(theta, phi)`.
    pub values: Vec<f64>,
}

/// Grid node holding a local maximum of a Q-function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QPeak {
    pub theta: f64,
    pub phi: f64,
    pub value: f64,
}

impl QFunctionField {
    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.grid.n_phi + i_phi]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> (usize, usize) {
        let idx = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0;
        (idx / self.grid.n_phi, idx % self.grid.n_phi)
    }

    /// Strict local maxima (8-neighbour, periodic in phi) with value at least
    /// `min_fraction` of the global maximum.
    pub fn peaks(&self, min_fraction: f64) -> Vec<QPeak> {
        let (nt, np) = (self.grid.n_theta, self.grid.n_phi);
        let threshold = min_fraction * self.max();
        let mut out = Vec::new();
        for i in 0..nt {
            for k in 0..np {
                let v = self.value(i, k);
                if v < threshold {
                    continue;
                }
                let mut is_peak = true;
                'nb: for di in [-1i64, 0, 1] {
                    let ii = i as i64 + di;
                    if ii < 0 || ii >= nt as i64 {
                        continue;
                    }
                    for dk in [-1i64, 0, 1] {
                        if di == 0 && dk == 0 {
                            continue;
                        }
                        let kk = (k as i64 + dk).rem_euclid(np as i64) as usize;
                        let w = self.value(ii as usize, kk);
                        // ties broken toward the lower flat index
                        let later = (ii as usize, kk) > (i, k);
                        if w > v || (w == v && !later) {
                            is_peak = false;
                            break 'nb;
                        }
                    }
                }
                if is_peak {
                    out.push(QPeak { theta: self.grid.theta(i), phi: self.grid.phi(k), value: v });
                }
            }
        }
        out
    }
}

fn scs_magnitudes(n_spins: usize, theta: f64) -> Vec<f64> {
    let params = CollectiveSpinParams::new(n_spins).expect("positive spin count");
    crate::spin::spin_coherent_state_angles(params, theta, 0.0)
        .expect("finite angles")
        .amplitudes()
        .iter()
        .map(|z| z.re)
        .collect()
}

/// `Q = |<psi|zeta>_AB|` with the `(N_A+N_B)`-spin coherent probe
/// `zeta = exp(-i phi) tan(theta/2)`, which factorizes into `A ⊗ B` probes.
pub fn q_function(psi: &JointState, grid: QGrid) -> QFunctionField {
    let (pa, pb) = (psi.params_a(), psi.params_b());
    let amps = psi.amplitudes();
    let max_nu = pa.n_spins() + pb.n_spins();
    let rows: Vec<Vec<f64>> = (0..grid.n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = grid.theta(i);
            let ma = scs_magnitudes(pa.n_spins(), theta);
            let mb = scs_magnitudes(pb.n_spins(), theta);
            // The probe phase only depends on n_a + n_b: collapse onto nu first.
            let mut by_nu = DVector::<C64>::zeros(max_nu + 1);
            for na in 0..pa.dim() {
                for nb in 0..pb.dim() {
                    by_nu[na + nb] += amps[(na, nb)] * (ma[na] * mb[nb]);
                }
            }
            (0..grid.n_phi)
                .map(|k| {
                    let phi = grid.phi(k);
                    let overlap: C64 = by_nu
                        .iter()
                        .enumerate()
                        .map(|(nu, s)| s * C64::from_polar(1.0, nu as f64 * phi))
                        .sum();
                    overlap.norm()
                })
                .collect()
        })
        .collect();
    QFunctionField { grid, values: rows.concat() }
}
