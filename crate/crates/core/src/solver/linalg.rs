use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;

use crate::poly::{complex_recip, Real};

/// Solves `a x = b` in place by LU with partial pivoting; `a` is row-major `n x n`.
/// Returns `false` on an exactly zero pivot.
pub(crate) fn lu_solve<F: Real>(a: &mut [Complex<F>], n: usize, b: &mut [Complex<F>]) -> bool {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm_sqr();
        for row in col + 1..n {
            let v = a[row * n + col].norm_sqr();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best.is_zero() || !best.is_finite() {
            return false;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            b.swap(piv, col);
        }
        let d = complex_recip(a[col * n + col]);
        for row in col + 1..n {
            let factor = a[row * n + col] * d;
            if factor.is_zero() {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[row * n + j] = a[row * n + j] - factor * v;
            }
            let v = b[col];
            b[row] = b[row] - factor * v;
        }
    }
    for row in (0..n).rev() {
        let mut s = b[row];
        for j in row + 1..n {
            s = s - a[row * n + j] * b[j];
        }
        b[row] = s * complex_recip(a[row * n + row]);
    }
    true
}

/// `sigma_min / sigma_max` of a row-major square matrix.
pub(crate) fn rcond(a: &[Complex<f64>], n: usize) -> f64 {
    let m = DMatrix::from_row_slice(n, n, a);
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

pub(crate) fn max_norm<F: Real>(v: &[Complex<F>]) -> f64 {
    v.iter().map(|z| z.norm().to_f64()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use twofloat::TwoFloat;

    #[test]
    fn solves_small_system() {
        let c = |re: f64, im: f64| Complex::new(re, im);
        let mut a = vec![c(0.0, 0.0), c(2.0, 1.0), c(1.0, 0.0), c(3.0, 0.0)];
        let x = [c(1.0, -1.0), c(0.5, 2.0)];
        let mut b = vec![a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]];
        assert!(lu_solve(&mut a, 2, &mut b));
        assert!((b[0] - x[0]).norm() < 1e-15 && (b[1] - x[1]).norm() < 1e-15);
    }

    #[test]
    fn double_double_residual_is_tiny() {
        let n = 5;
        let entry = |i: usize, j: usize| {
            Complex::new(TwoFloat::from(1.0 / (i + j + 1) as f64), TwoFloat::from((i as f64 - j as f64) * 0.1))
        };
        let a: Vec<_> = (0..n * n).map(|k| entry(k / n, k % n)).collect();
        let rhs: Vec<_> = (0..n).map(|i| Complex::new(TwoFloat::from(i as f64 + 1.0), TwoFloat::from(0.0))).collect();
        let mut lu = a.clone();
        let mut x = rhs.clone();
        assert!(lu_solve(&mut lu, n, &mut x));
        for i in 0..n {
            let mut s = Complex::new(TwoFloat::from(0.0), TwoFloat::from(0.0));
            for j in 0..n {
                s += a[i * n + j] * x[j];
            }
            let res = (s - rhs[i]).norm().to_f64();
            assert!(res < 1e-25, "{res:e}");
        }
    }

    #[test]
    fn rcond_of_singular_and_identity() {
        let one = Complex::new(1.0, 0.0);
        let z = Complex::new(0.0, 0.0);
        assert!((rcond(&[one, z, z, one], 2) - 1.0).abs() < 1e-15);
        assert!(rcond(&[one, one, one, one], 2) < 1e-15);
    }
}
