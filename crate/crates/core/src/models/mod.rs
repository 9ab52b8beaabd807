//! Concrete semigroup models: Schur multipliers, the free group Poisson
//! semigroup, q-deformed Fock spaces, spin systems and matrix martingales.

pub mod clifford;
pub mod fock;
pub mod freegroup;
pub mod martingale;
pub mod schur;

use crate::error::Result;
use crate::funcalc::LpOperator;
use crate::matrix::{hermitian_eigen, hermitian_part, matrix_unit, CMatrix};

/// Choi matrix `Σ_ij E_ij ⊗ T(E_ij)`.
pub fn choi_matrix(op: &LpOperator) -> Result<CMatrix> {
    let d = op.dim();
    let mut c = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let t = op.apply(&matrix_unit(d, d, i, j))?;
            c.view_mut((i * d, j * d), (d, d)).copy_from(&t);
        }
    }
    Ok(c)
}

/// Smallest eigenvalue of the hermitian part of the Choi matrix; a map is
/// completely positive iff this is nonnegative.
pub fn choi_min_eigenvalue(op: &LpOperator) -> Result<f64> {
    let c = choi_matrix(op)?;
    let (vals, _) = hermitian_eigen(&hermitian_part(&c))?;
    Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
}
