//! Sparse operators on the composite `(n_a, n_b)` space.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Result, SpinError};
use crate::spin::{CollectiveOperator, JointState};

/// Nonzero entries `(row, col, value)` of a single-system matrix.
pub type Entries = Vec<(usize, usize, C64)>;

impl CollectiveOperator {
    pub fn nonzeros(&self) -> Entries {
        let dim = self.params().dim();
        let mut out = Vec::with_capacity(3 * dim);
        for r in 0..dim {
            for c in r.saturating_sub(1)..(r + 2).min(dim) {
                let v = self.entry(r, c);
                if v != C64::new(0.0, 0.0) {
                    out.push((r, c, v));
                }
            }
        }
        out
    }
}

/// Entries of the `dim x dim` identity.
pub fn identity_entries(dim: usize) -> Entries {
    (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect()
}

/// Entries of a diagonal matrix.
pub fn diagonal_entries(values: impl IntoIterator<Item = f64>) -> Entries {
    values.into_iter().enumerate().map(|(i, v)| (i, i, C64::from(v))).collect()
}

/// Operator on the joint space, stored as sorted coordinate entries.
///
/// Joint basis index is `n_a * dim_b + n_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointOperator {
    dim_a: usize,
    dim_b: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl JointOperator {
    pub fn zeros(dim_a: usize, dim_b: usize) -> Self {
        JointOperator { dim_a, dim_b, entries: Vec::new() }
    }

    /// Sums duplicate coordinates and drops exact zeros.
    pub fn from_entries(dim_a: usize, dim_b: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let dim = dim_a * dim_b;
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "joint operator entry out of range");
            *acc.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += v;
        }
        let entries = acc
            .into_iter()
            .filter(|(_, v)| *v != C64::new(0.0, 0.0))
            .map(|((r, c), v)| (r, c, v))
            .collect();
        JointOperator { dim_a, dim_b, entries }
    }

    /// `A ⊗ B` from entry lists of each factor.
    pub fn kron_entries(dim_a: usize, a: &[(usize, usize, C64)], dim_b: usize, b: &[(usize, usize, C64)]) -> Self {
        let mut out = Vec::with_capacity(a.len() * b.len());
        for &(ra, ca, va) in a {
            for &(rb, cb, vb) in b {
                out.push((ra * dim_b + rb, ca * dim_b + cb, va * vb));
            }
        }
        Self::from_entries(dim_a, dim_b, out)
    }

    pub fn kron(a: &CollectiveOperator, b: &CollectiveOperator) -> Self {
        Self::kron_entries(a.params().dim(), &a.nonzeros(), b.params().dim(), &b.nonzeros())
    }

    /// `A ⊗ I`.
    pub fn on_a(a: &CollectiveOperator, dim_b: usize) -> Self {
        Self::kron_entries(a.params().dim(), &a.nonzeros(), dim_b, &identity_entries(dim_b))
    }

    /// `I ⊗ B`.
    pub fn on_b(dim_a: usize, b: &CollectiveOperator) -> Self {
        Self::kron_entries(dim_a, &identity_entries(dim_a), b.params().dim(), &b.nonzeros())
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * self.dim_b + n_b
    }

    pub fn split_index(&self, idx: usize) -> (usize, usize) {
        (idx / self.dim_b, idx % self.dim_b)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_entries(self.dim_a, self.dim_b, self.entries.iter().map(|&(r, c, v)| (r, c, v * factor)))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_entries(self.dim_a, self.dim_b, self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())))
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let diff = self.clone() + self.adjoint().scaled(C64::new(-1.0, 0.0));
        diff.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    /// Matrix-vector product on an `(dim_a, dim_b)` amplitude array.
    pub fn apply(&self, amps: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if amps.shape() != (self.dim_a, self.dim_b) {
            return Err(SpinError::DimensionMismatch {
                expected: format!("{:?}", (self.dim_a, self.dim_b)),
                found: format!("{:?}", amps.shape()),
            });
        }
        let mut out = DMatrix::zeros(self.dim_a, self.dim_b);
        for &(r, c, v) in &self.entries {
            let (ra, rb) = (r / self.dim_b, r % self.dim_b);
            let (ca, cb) = (c / self.dim_b, c % self.dim_b);
            out[(ra, rb)] += v * amps[(ca, cb)];
        }
        Ok(out)
    }

    pub fn apply_state(&self, psi: &JointState) -> Result<DMatrix<C64>> {
        self.apply(psi.amplitudes())
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

impl Add for JointOperator {
    type Output = JointOperator;

    fn add(self, rhs: JointOperator) -> JointOperator {
        assert_eq!((self.dim_a, self.dim_b), (rhs.dim_a, rhs.dim_b), "joint operator shapes differ");
        JointOperator::from_entries(self.dim_a, self.dim_b, self.entries.into_iter().chain(rhs.entries))
    }
}

impl Mul<f64> for JointOperator {
    type Output = JointOperator;

    fn mul(self, rhs: f64) -> JointOperator {
        self.scaled(C64::from(rhs))
    }
}
