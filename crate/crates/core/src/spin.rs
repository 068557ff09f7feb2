//! Symmetric-subspace (j = N/2) representation of a collective spin.
//!
//! Dicke index `n` counts up-spins, so `Jz |n> = (n - N/2) |n>` and the basis
//! is ordered by ascending `n`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Result, SpinError};

/// Amplitude tolerance used for normalization invariants.
pub const AMPLITUDE_TOL: f64 = 1e-12;

/// Half-integer stored as twice its value, so no rounding is ever involved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    /// Accepts any finite `x` with `2x` integral.
    pub fn new(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 {
            return Err(SpinError::InvalidParameter(format!("{x} is not a half-integer")));
        }
        Ok(HalfInt(twice.round() as i64))
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl std::fmt::Display for HalfInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Spin count of one collective spin and the bookkeeping derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CollectiveSpinParams {
    n_spins: usize,
}

impl CollectiveSpinParams {
    pub fn new(n_spins: usize) -> Result<Self> {
        if n_spins == 0 {
            return Err(SpinError::InvalidParameter("spin count must be at least 1".into()));
        }
        Ok(CollectiveSpinParams { n_spins })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.n_spins + 1
    }

    pub fn j(&self) -> f64 {
        self.n_spins as f64 / 2.0
    }

    pub fn j_half(&self) -> HalfInt {
        HalfInt::from_twice(self.n_spins as i64)
    }

    /// Offset making `Jz + c` integral: 0 for even N, 1/2 for odd N.
    pub fn c(&self) -> f64 {
        if self.n_spins % 2 == 0 {
            0.0
        } else {
            0.5
        }
    }

    /// `Jz` eigenvalue of Dicke state `n`.
    pub fn m_z(&self, n: usize) -> f64 {
        n as f64 - self.j()
    }

    /// Whether `m` is one of `-j, -j+1, ..., j`.
    pub fn contains(&self, m: HalfInt) -> bool {
        let tj = self.n_spins as i64;
        m.twice().abs() <= tj && (m.twice() - tj) % 2 == 0
    }
}

/// Normalized state of a single collective spin in the Dicke basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DickeVector {
    params: CollectiveSpinParams,
    amplitudes: DVector<C64>,
}

impl DickeVector {
    /// Normalizes the supplied amplitudes.
    pub fn from_amplitudes(params: CollectiveSpinParams, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != params.dim() {
            return Err(SpinError::DimensionMismatch {
                expected: params.dim().to_string(),
                found: amplitudes.len().to_string(),
            });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(SpinError::InvalidAmplitude("non-finite Dicke amplitude".into()));
        }
        let norm = amplitudes.norm();
        if norm < AMPLITUDE_TOL {
            return Err(SpinError::Degenerate("zero vector".into()));
        }
        Ok(DickeVector { params, amplitudes: amplitudes / C64::from(norm) })
    }

    /// The Dicke state `|n>`.
    pub fn basis(params: CollectiveSpinParams, n: usize) -> Result<Self> {
        if n > params.n_spins() {
            return Err(SpinError::InvalidParameter(format!(
                "Dicke index {n} exceeds N = {}",
                params.n_spins()
            )));
        }
        let mut amplitudes = DVector::zeros(params.dim());
        amplitudes[n] = C64::new(1.0, 0.0);
        Ok(DickeVector { params, amplitudes })
    }

    pub fn params(&self) -> CollectiveSpinParams {
        self.params
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Jx,
    Jy,
    Jz,
    Jplus,
    Jminus,
    Jsquared,
    /// `Jz + N/2`, the analogue of a number operator.
    NumberOp,
}

/// Collective operator in the Dicke basis, stored as three diagonals.
///
/// `upper[n]` is the matrix entry `(n, n+1)` and `lower[n]` is `(n+1, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveOperator {
    params: CollectiveSpinParams,
    kind: OperatorKind,
    diag: Vec<C64>,
    upper: Vec<C64>,
    lower: Vec<C64>,
}

/// `<n+1| J+ |n>`.
pub fn raising_element(params: CollectiveSpinParams, n: usize) -> f64 {
    let big_n = params.n_spins() as f64;
    let n = n as f64;
    ((n + 1.0) * (big_n - n)).sqrt()
}

pub fn make_operator(params: CollectiveSpinParams, kind: OperatorKind) -> CollectiveOperator {
    let dim = params.dim();
    let zero = C64::new(0.0, 0.0);
    let ladder: Vec<f64> = (0..dim - 1).map(|n| raising_element(params, n)).collect();
    let (diag, upper, lower): (Vec<C64>, Vec<C64>, Vec<C64>) = match kind {
        OperatorKind::Jz => (
            (0..dim).map(|n| C64::from(params.m_z(n))).collect(),
            vec![zero; dim - 1],
            vec![zero; dim - 1],
        ),
        OperatorKind::NumberOp => (
            (0..dim).map(|n| C64::from(n as f64)).collect(),
            vec![zero; dim - 1],
            vec![zero; dim - 1],
        ),
        OperatorKind::Jsquared => {
            let j = params.j();
            (vec![C64::from(j * (j + 1.0)); dim], vec![zero; dim - 1], vec![zero; dim - 1])
        }
        OperatorKind::Jplus => (
            vec![zero; dim],
            vec![zero; dim - 1],
            ladder.iter().map(|&b| C64::from(b)).collect(),
        ),
        OperatorKind::Jminus => (
            vec![zero; dim],
            ladder.iter().map(|&b| C64::from(b)).collect(),
            vec![zero; dim - 1],
        ),
        OperatorKind::Jx => {
            let half: Vec<C64> = ladder.iter().map(|&b| C64::from(0.5 * b)).collect();
            (vec![zero; dim], half.clone(), half)
        }
        OperatorKind::Jy => (
            vec![zero; dim],
            // Jy = (J+ - J-) / 2i
            ladder.iter().map(|&b| C64::new(0.0, 0.5 * b)).collect(),
            ladder.iter().map(|&b| C64::new(0.0, -0.5 * b)).collect(),
        ),
    };
    CollectiveOperator { params, kind, diag, upper, lower }
}

impl CollectiveOperator {
    pub fn params(&self) -> CollectiveSpinParams {
        self.params
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn diag(&self) -> &[C64] {
        &self.diag
    }

    pub fn upper(&self) -> &[C64] {
        &self.upper
    }

    pub fn lower(&self) -> &[C64] {
        &self.lower
    }

    /// Entry `(row, col)`; zero outside the band.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        if row == col {
            self.diag[row]
        } else if col == row + 1 {
            self.upper[row]
        } else if row == col + 1 {
            self.lower[col]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Matrix-vector product on raw amplitudes.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let dim = self.params.dim();
        assert_eq!(v.len(), dim, "operator dimension mismatch");
        DVector::from_fn(dim, |n, _| {
            let mut acc = self.diag[n] * v[n];
            if n + 1 < dim {
                acc += self.upper[n] * v[n + 1];
            }
            if n > 0 {
                acc += self.lower[n - 1] * v[n - 1];
            }
            acc
        })
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = self.params.dim();
        DMatrix::from_fn(dim, dim, |r, c| self.entry(r, c))
    }
}

fn ln_binomials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 0..n {
        acc += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        out.push(acc);
    }
    out
}

/// Spin coherent state `|zeta>` with amplitudes `C_n = sqrt(binom(N,n)) zeta^n / (1+|zeta|^2)^(N/2)`.
pub fn spin_coherent_state(params: CollectiveSpinParams, zeta: C64) -> Result<DickeVector> {
    if !zeta.is_finite() {
        return Err(SpinError::InvalidAmplitude(format!("zeta = {zeta}")));
    }
    let big_n = params.n_spins();
    let modulus = zeta.norm();
    let mut amplitudes = DVector::zeros(params.dim());
    if modulus == 0.0 {
        amplitudes[0] = C64::new(1.0, 0.0);
        return Ok(DickeVector { params, amplitudes });
    }
    let arg = zeta.arg();
    let ln_norm = 0.5 * big_n as f64 * (1.0 + modulus * modulus).ln();
    let ln_mod = modulus.ln();
    for (n, lb) in ln_binomials(big_n).into_iter().enumerate() {
        let ln_mag = 0.5 * lb + n as f64 * ln_mod - ln_norm;
        amplitudes[n] = C64::from_polar(ln_mag.exp(), n as f64 * arg);
    }
    DickeVector::from_amplitudes(params, amplitudes)
}

/// Spin coherent state pointing along polar angle `theta` and azimuth `phi`,
/// i.e. `zeta = exp(-i phi) tan(theta / 2)`. Regular at both poles.
pub fn spin_coherent_state_angles(params: CollectiveSpinParams, theta: f64, phi: f64) -> Result<DickeVector> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(SpinError::InvalidAmplitude(format!("theta = {theta}, phi = {phi}")));
    }
    let big_n = params.n_spins();
    let (s, c) = (0.5 * theta).sin_cos();
    let (s, c) = (s.abs(), c.abs());
    let mut amplitudes = DVector::zeros(params.dim());
    for (n, lb) in ln_binomials(big_n).into_iter().enumerate() {
        let up = n as i32;
        let down = (big_n - n) as i32;
        let mag = if (s == 0.0 && up > 0) || (c == 0.0 && down > 0) {
            0.0
        } else {
            let ls = if up > 0 { up as f64 * s.ln() } else { 0.0 };
            let lc = if down > 0 { down as f64 * c.ln() } else { 0.0 };
            (0.5 * lb + ls + lc).exp()
        };
        amplitudes[n] = C64::from_polar(mag, -(n as f64) * phi);
    }
    DickeVector::from_amplitudes(params, amplitudes)
}

/// Closed-form overlap `<zeta|eta>` of two spin coherent states of `n_spins` spins.
pub fn scs_overlap(n_spins: usize, zeta: C64, eta: C64) -> C64 {
    let num = C64::new(1.0, 0.0) + zeta.conj() * eta;
    let den = ((1.0 + zeta.norm_sqr()) * (1.0 + eta.norm_sqr())).sqrt();
    (num / den).powu(n_spins as u32)
}

/// Eigenvector of `exp(-i phi Jz) Jx exp(i phi Jz)` with eigenvalue `m`.
///
/// Built as `exp(-i phi Jz)` applied to the `Jx` eigenvector whose highest-n
/// amplitude is real and positive.
pub fn rotated_dicke(params: CollectiveSpinParams, m: HalfInt, phi: f64) -> Result<DickeVector> {
    if !params.contains(m) {
        return Err(SpinError::OutsideLadder { value: m.value(), j: params.j() });
    }
    if !phi.is_finite() {
        return Err(SpinError::InvalidAmplitude(format!("phi = {phi}")));
    }
    let dim = params.dim();
    let jx = DMatrix::<f64>::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            0.5 * raising_element(params, r)
        } else if r == c + 1 {
            0.5 * raising_element(params, c)
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(jx, 1e-15, 10_000)
        .ok_or_else(|| SpinError::Numerical("Jx eigendecomposition did not converge".into()))?;
    let target = m.value();
    let (idx, dist) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &e)| (i, (e - target).abs()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if dist > 1e-8 {
        return Err(SpinError::Numerical(format!("no Jx eigenvalue near {target}")));
    }
    let column = eig.eigenvectors.column(idx);
    let sign = if column[dim - 1] < 0.0 { -1.0 } else { 1.0 };
    let amplitudes = DVector::from_fn(dim, |n, _| {
        C64::from_polar(sign * column[n], -phi * params.m_z(n))
    });
    DickeVector::from_amplitudes(params, amplitudes)
}

/// Normalized state of the composite system, indexed by `(n_a, n_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    params_a: CollectiveSpinParams,
    params_b: CollectiveSpinParams,
    amplitudes: DMatrix<C64>,
}

impl JointState {
    /// Normalizes the supplied `(N_A+1) x (N_B+1)` amplitude array.
    pub fn from_amplitudes(
        params_a: CollectiveSpinParams,
        params_b: CollectiveSpinParams,
        amplitudes: DMatrix<C64>,
    ) -> Result<Self> {
        let shape = (params_a.dim(), params_b.dim());
        if amplitudes.shape() != shape {
            return Err(SpinError::DimensionMismatch {
                expected: format!("{shape:?}"),
                found: format!("{:?}", amplitudes.shape()),
            });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(SpinError::InvalidAmplitude("non-finite joint amplitude".into()));
        }
        let norm = amplitudes.norm();
        if norm < AMPLITUDE_TOL {
            return Err(SpinError::Degenerate("zero joint vector".into()));
        }
        Ok(JointState { params_a, params_b, amplitudes: amplitudes / C64::from(norm) })
    }

    /// Wraps amplitudes without renormalizing; callers guarantee unit norm
    /// up to propagation round-off.
    pub(crate) fn from_raw(
        params_a: CollectiveSpinParams,
        params_b: CollectiveSpinParams,
        amplitudes: DMatrix<C64>,
    ) -> Self {
        debug_assert_eq!(amplitudes.shape(), (params_a.dim(), params_b.dim()));
        JointState { params_a, params_b, amplitudes }
    }

    pub fn basis(params_a: CollectiveSpinParams, params_b: CollectiveSpinParams, n_a: usize, n_b: usize) -> Result<Self> {
        let a = DickeVector::basis(params_a, n_a)?;
        let b = DickeVector::basis(params_b, n_b)?;
        Ok(product_state(&a, &b))
    }

    pub fn params_a(&self) -> CollectiveSpinParams {
        self.params_a
    }

    pub fn params_b(&self) -> CollectiveSpinParams {
        self.params_b
    }

    pub fn amplitudes(&self) -> &DMatrix<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, n_a: usize, n_b: usize) -> C64 {
        self.amplitudes[(n_a, n_b)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.params_a.dim(), self.params_b.dim())
    }

    /// Multiplies by a unit-modulus phase; keeps the norm.
    pub fn with_global_phase(mut self, phase: f64) -> Self {
        self.amplitudes *= C64::from_polar(1.0, phase);
        self
    }
}

pub fn product_state(a: &DickeVector, b: &DickeVector) -> JointState {
    let amplitudes = a.amplitudes() * b.amplitudes().transpose();
    JointState { params_a: a.params(), params_b: b.params(), amplitudes }
}

/// Anything with a flat amplitude array and a shape.
pub trait StateVector {
    fn shape(&self) -> (usize, usize);
    fn amplitudes_flat(&self) -> &[C64];
}

impl StateVector for DickeVector {
    fn shape(&self) -> (usize, usize) {
        (self.amplitudes.len(), 1)
    }

    fn amplitudes_flat(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }
}

impl StateVector for JointState {
    fn shape(&self) -> (usize, usize) {
        JointState::shape(self)
    }

    fn amplitudes_flat(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }
}

/// `<x|y>`, conjugate-linear in `x`.
pub fn inner_product<S: StateVector>(x: &S, y: &S) -> Result<C64> {
    if x.shape() != y.shape() {
        return Err(SpinError::DimensionMismatch {
            expected: format!("{:?}", x.shape()),
            found: format!("{:?}", y.shape()),
        });
    }
    Ok(x.amplitudes_flat()
        .iter()
        .zip(y.amplitudes_flat())
        .map(|(a, b)| a.conj() * b)
        .sum())
}
