//! Reference routines that share no code path with the block propagator.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The argument is scaled until its 1-norm is below 1/2, where 24 Taylor
/// terms are far below double-precision round-off.
pub fn dense_expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm1 * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = a * C64::from(scale);
    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled * C64::from(1.0 / k as f64);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponentiates_pauli_rotation() {
        // exp(-i theta sigma_x) = cos theta - i sin theta sigma_x
        let theta = 2.7;
        let a = DMatrix::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(0.0, -theta),
            C64::new(0.0, -theta), C64::new(0.0, 0.0),
        ]);
        let u = dense_expm(&a);
        assert!((u[(0, 0)] - C64::from(theta.cos())).norm() < 1e-14);
        assert!((u[(0, 1)] - C64::new(0.0, -theta.sin())).norm() < 1e-14);
    }

    #[test]
    fn diagonal_matrix() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(-40.0, 0.0)]));
        let u = dense_expm(&a);
        assert!((u[(0, 0)].re - 3f64.exp()).abs() < 1e-12);
        assert!((u[(1, 1)].re - (-40f64).exp()).abs() < 1e-25);
    }
}
