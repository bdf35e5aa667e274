//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `max |MᴴM - I|`, the orthonormality defect of the columns of `m`.
pub fn gram_identity_defect(m: &CMat) -> f64 {
    let gram = m.adjoint() * m;
    let eye = CMat::identity(gram.nrows(), gram.ncols());
    max_abs_diff(&gram, &eye)
}

/// Moore-Penrose pseudo-inverse through the SVD. Singular values below
/// `max(m, n) * eps * s_max` are treated as zero.
pub fn pinv(m: &CMat) -> Result<CMat> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(CMat::zeros(m.ncols(), m.nrows()));
    }
    let svd = m.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let tol = (m.nrows().max(m.ncols()) as f64) * f64::EPSILON * s_max;
    svd.pseudo_inverse(tol)
        .map_err(|e| Error::invalid(format!("pseudo-inverse failed: {e}")))
}

pub fn check_mul(lhs: (usize, usize), rhs: (usize, usize), what: &str) -> Result<()> {
    if lhs.1 != rhs.0 {
        return Err(Error::dims(format!(
            "{what}: {}x{} times {}x{}",
            lhs.0, lhs.1, rhs.0, rhs.1
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_wide_matrix_is_right_inverse() {
        let m = CMat::from_fn(2, 4, |i, j| Complex64::new((i + 2 * j) as f64, (i * j) as f64 - 1.0));
        let p = pinv(&m).unwrap();
        let eye = CMat::identity(2, 2);
        assert!(max_abs_diff(&(&m * &p), &eye) < 1e-12);
    }

    #[test]
    fn pinv_of_zero_is_zero() {
        let m = CMat::zeros(3, 2);
        let p = pinv(&m).unwrap();
        assert_eq!(p.shape(), (2, 3));
        assert!(p.iter().all(|z| z.norm() == 0.0));
    }
}
