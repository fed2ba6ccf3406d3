//! Matrix exponential by scaling and squaring of a truncated Taylor series.
//!
//! Used only for displacement generators, which are anti-Hermitian, so the
//! series is well conditioned once the scaled norm is below 1/2.

use ndarray::Array2;
use num_complex::Complex64;

const SCALED_NORM_TARGET: f64 = 0.5;
const MAX_TERMS: usize = 40;

fn one_norm(a: &Array2<Complex64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` for a square complex matrix.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let squarings = if norm > SCALED_NORM_TARGET {
        (norm / SCALED_NORM_TARGET).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * Complex64::new(0.5f64.powi(squarings), 0.0);

    let mut result = Array2::<Complex64>::eye(n);
    let mut term = Array2::<Complex64>::eye(n);
    for k in 1..=MAX_TERMS {
        term = term.dot(&scaled) * Complex64::new(1.0 / k as f64, 0.0);
        result += &term;
        if one_norm(&term) < f64::EPSILON * 1e-3 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn diagonal_matrix() {
        let a = array![[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 2.0)
        ]];
        let e = expm(&a);
        assert!((e[[0, 0]] - Complex64::new(1f64.exp(), 0.0)).norm() < 1e-13);
        assert!((e[[1, 1]] - Complex64::from_polar(1.0, 2.0)).norm() < 1e-13);
        assert!(e[[0, 1]].norm() < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        // exp(t [[0, -1], [1, 0]]) is a rotation by t.
        let t = 7.3;
        let a = array![[Complex64::new(0.0, 0.0), Complex64::new(-t, 0.0)], [
            Complex64::new(t, 0.0),
            Complex64::new(0.0, 0.0)
        ]];
        let e = expm(&a);
        assert!((e[[0, 0]].re - t.cos()).abs() < 1e-12);
        assert!((e[[1, 0]].re - t.sin()).abs() < 1e-12);
        assert!((e[[0, 1]].re + t.sin()).abs() < 1e-12);
    }

    #[test]
    fn nilpotent() {
        let a = array![[Complex64::new(0.0, 0.0), Complex64::new(3.0, 1.0)], [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0)
        ]];
        let e = expm(&a);
        assert!((e[[0, 1]] - Complex64::new(3.0, 1.0)).norm() < 1e-13);
        assert!((e[[0, 0]] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
    }
}
