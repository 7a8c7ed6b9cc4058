//! Small dense helpers on complex matrices.

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, CMatrix, Real};

const EIGEN_MAX_ITER: usize = 10_000;

pub fn conjugate<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.map(|z| z.conj())
}

pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()) * Complex::new(lit::<T>(0.5), T::zero())
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    m.diagonal()
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
}

/// `‖M*M − I‖_F`.
pub fn unitarity_defect<T: Real>(m: &CMatrix<T>) -> T {
    if !m.is_square() {
        return T::max_value().unwrap_or_else(T::one);
    }
    let n = m.nrows();
    (m.adjoint() * m - CMatrix::<T>::identity(n, n)).norm()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> Result<(DVector<T>, CMatrix<T>)> {
    let eig = SymmetricEigen::try_new(m.clone(), T::default_epsilon(), EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("Hermitian eigen-decomposition did not converge".into()))?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Nearest unitary matrix in Frobenius norm (polar factor).
pub fn closest_unitary<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let svd = SVD::try_new(m.clone(), true, true, T::default_epsilon(), EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok(u * v_t),
        _ => Err(Error::Numerical("SVD factors unavailable".into())),
    }
}

/// Singular values of a real matrix, descending.
pub fn singular_values<T: Real>(m: &DMatrix<T>) -> Result<DVector<T>> {
    let svd = SVD::try_new(
        m.clone(),
        false,
        false,
        T::default_epsilon(),
        EIGEN_MAX_ITER,
    )
    .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    Ok(svd.singular_values)
}

/// Places `block` (indexed by `indices`) into an `ambient × ambient` zero matrix.
pub fn embed<T: Real>(block: &CMatrix<T>, indices: &[usize], ambient: usize) -> CMatrix<T> {
    let mut out = CMatrix::zeros(ambient, ambient);
    for (a, &i) in indices.iter().enumerate() {
        for (b, &j) in indices.iter().enumerate() {
            out[(i, j)] = block[(a, b)];
        }
    }
    out
}

/// Principal submatrix on `indices`.
pub fn compress<T: Real>(m: &CMatrix<T>, indices: &[usize]) -> CMatrix<T> {
    CMatrix::from_fn(indices.len(), indices.len(), |a, b| {
        m[(indices[a], indices[b])]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn eigenvalues_sorted_and_reconstruct() {
        let m = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[
                cplx(2.0, 0.0),
                cplx(0.0, -1.0),
                cplx(0.0, 1.0),
                cplx(2.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        let diag = CMatrix::from_diagonal(&vals.map(|v| Complex::new(v, 0.0)));
        let back = &vecs * diag * vecs.adjoint();
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn closest_unitary_of_scaled_unitary() {
        let m = CMatrix::<f64>::identity(3, 3) * cplx(2.0, 0.0);
        let u = closest_unitary(&m).unwrap();
        assert!(unitarity_defect(&u) < 1e-12);
        assert!((u - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn embed_then_compress_is_identity() {
        let block = CMatrix::<f64>::from_fn(2, 2, |r, c| cplx(r as f64, c as f64));
        let big = embed(&block, &[1, 3], 4);
        assert_eq!(compress(&big, &[1, 3]), block);
    }
}
