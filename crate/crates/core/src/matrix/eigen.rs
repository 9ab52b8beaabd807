use nalgebra::{DVector, Schur, SymmetricEigen};

use super::{check_finite, hermitian_defect, CMatrix, C64, HERMITIAN_RTOL, ONE, ZERO};
use crate::error::{Error, Result};

/// Eigenvalues (ascending) and orthonormal eigenvectors of a hermitian matrix.
pub fn hermitian_eigen(x: &CMatrix) -> Result<(DVector<f64>, CMatrix)> {
    check_finite(x)?;
    if x.nrows() != x.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", x.nrows(), x.ncols())));
    }
    let tol = HERMITIAN_RTOL * x.norm().max(f64::MIN_POSITIVE);
    let deviation = hermitian_defect(x);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation, tol });
    }
    let h = super::hermitian_part(x);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("hermitian eigensolver did not converge".into()))?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let vecs = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((vals, vecs))
}

/// Diagonalization `x = V diag(values) V^{-1}` of a general square matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<C64>,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
    /// Frobenius-norm condition number of `vectors`.
    pub condition: f64,
}

/// Largest admissible eigenvector condition number.
pub const MAX_EIGEN_CONDITION: f64 = 1e8;

impl EigenSystem {
    pub fn reconstruct_with<F: Fn(C64) -> C64>(&self, f: F) -> CMatrix {
        let mut w = self.vectors.clone();
        for (j, mut col) in w.column_iter_mut().enumerate() {
            col *= f(self.values[j]);
        }
        w * &self.inverse
    }
}

/// Eigendecomposition from the complex Schur form, with eigenvectors obtained
/// by back substitution in the triangular factor.
pub fn eigen_general(x: &CMatrix) -> Result<EigenSystem> {
    check_finite(x)?;
    let n = x.nrows();
    if n != x.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", n, x.ncols())));
    }
    let schur = Schur::try_new(x.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * scale;
    let mut vt = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        vt[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for l in (j + 1)..=k {
                acc += t[(j, l)] * vt[(l, k)];
            }
            let mut den = t[(j, j)] - lambda;
            if den.norm() < small {
                den = C64::from(small);
            }
            vt[(j, k)] = -acc / den;
        }
    }
    let mut vectors = q * vt;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= C64::from(nrm);
        }
    }
    let inverse = vectors
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    let condition = vectors.norm() * inverse.norm() / n as f64;
    if !condition.is_finite() || condition > MAX_EIGEN_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    let values = (0..n).map(|k| t[(k, k)]).collect();
    Ok(EigenSystem { values, vectors, inverse, condition })
}
