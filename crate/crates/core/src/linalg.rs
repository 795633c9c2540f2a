//! Small dense complex matrix helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;

/// Inverse of a square complex matrix; fails when the reciprocal condition estimate is tiny.
pub fn inverse(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("inverse of {}x{} matrix", m.nrows(), m.ncols())));
    }
    let cond = condition(m);
    if !(cond < 1e13) {
        return Err(Error::Singular(format!("condition number {cond:.3e}")));
    }
    m.clone().try_inverse().ok_or_else(|| Error::Singular("LU pivot vanished".into()))
}

/// 2-norm condition number from the singular values.
pub fn condition(m: &CMat) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let mx = sv.iter().cloned().fold(0.0, f64::max);
    let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if mn == 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    }
}

/// Real and imaginary parts.
pub fn re(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn im(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Symmetric eigenvalues of a real matrix, ascending.
pub fn sym_eigenvalues(m: &RMat) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Principal square root of a Hermitian positive definite matrix.
pub fn hermitian_sqrt(m: &CMat) -> Result<CMat> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Consistency(format!("matrix not positive definite: {:?}", eig.eigenvalues.as_slice())));
    }
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.sqrt(), 0.0)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Row-major construction.
pub fn from_rows(rows: &[Vec<C64>]) -> CMat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

/// Integer matrix as complex.
pub fn from_int_rows(rows: &[Vec<i64>]) -> CMat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    CMat::from_fn(n, m, |i, j| C64::new(rows[i][j] as f64, 0.0))
}

/// Determinant via LU.
pub fn det(m: &CMat) -> C64 {
    m.clone().determinant()
}

/// 8x8 symplectic form `J = [[0, I], [-I, 0]]` for genus `g`.
pub fn symplectic_j(g: usize) -> nalgebra::DMatrix<i64> {
    let mut j = nalgebra::DMatrix::<i64>::zeros(2 * g, 2 * g);
    for i in 0..g {
        j[(i, g + i)] = 1;
        j[(g + i, i)] = -1;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = from_rows(&[
            vec![C64::new(2.0, 1.0), C64::new(0.5, 0.0)],
            vec![C64::new(0.0, -1.0), C64::new(3.0, 0.2)],
        ]);
        let inv = inverse(&m).unwrap();
        let id = &m * &inv;
        assert!(max_abs(&(id - CMat::identity(2, 2))) < 1e-14);
        let sing = from_int_rows(&[vec![1, 2], vec![2, 4]]);
        assert!(inverse(&sing).is_err());
    }

    #[test]
    fn sqrt_squares_back() {
        let m = from_rows(&[
            vec![C64::new(2.0, 0.0), C64::new(0.5, 0.5)],
            vec![C64::new(0.5, -0.5), C64::new(3.0, 0.0)],
        ]);
        let s = hermitian_sqrt(&m).unwrap();
        assert!(max_abs(&(&s * &s - &m)) < 1e-13);
    }
}
