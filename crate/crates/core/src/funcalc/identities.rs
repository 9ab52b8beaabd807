//! Quadrature checks of two integral representations:
//! the Gaussian average `e^{-B^2/2} = (2π)^{-1/2} ∫ e^{-s^2/2} e^{isB} ds` for a
//! self-adjoint `B`, and the subordination formula
//! `e^{-t C^{1/2}} = ∫_0^∞ h(s) e^{-s t^2 C} ds`,
//! `h(s) = (2√π)^{-1} e^{-1/(4s)} s^{-3/2}`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigen, kron, max_abs, psd_sqrt, CMatrix, C64};

/// Gauss–Hermite nodes and weights for `∫ e^{-x^2} φ(x) dx` (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::Invalid("Gauss-Hermite rule needs at least one node".into()));
    }
    let jac = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            ((i.max(j)) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(jac, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("Jacobi matrix eigensolver did not converge".into()))?;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], sqrt_pi * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rule)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IdentityReport {
    /// Largest entry of the difference between the two sides.
    pub residual: f64,
    pub nodes: usize,
    /// Quadrature of the weight itself (ideally 1).
    pub mass: f64,
}

/// `e^{isB}` for hermitian `B` through its eigendecomposition.
fn unitary_group(vals: &nalgebra::DVector<f64>, vecs: &CMatrix, s: f64) -> CMatrix {
    let mut w = vecs.clone();
    for (j, mut col) in w.column_iter_mut().enumerate() {
        col *= C64::from_polar(1.0, s * vals[j]);
    }
    w * vecs.adjoint()
}

/// Gaussian average of the unitary group generated by a hermitian `b`,
/// compared with `e^{-b^2/2}` from the scaling-and-squaring exponential.
pub fn group_average_identity(b: &CMatrix, nodes: usize) -> Result<IdentityReport> {
    let (vals, vecs) = hermitian_eigen(b)?;
    let rule = gauss_hermite(nodes)?;
    let n = b.nrows();
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let mut avg = CMatrix::zeros(n, n);
    let mut mass = 0.0;
    for &(x, w) in &rule {
        avg += unitary_group(&vals, &vecs, std::f64::consts::SQRT_2 * x) * C64::from(w * inv_sqrt_pi);
        mass += w * inv_sqrt_pi;
    }
    let direct = (b * b * C64::from(-0.5)).exp();
    Ok(IdentityReport { residual: max_abs(&(avg - direct)), nodes, mass })
}

/// The same identity for `B = Ad_{(a,b)}` acting on `M_d`, with `a`, `b`
/// hermitian, represented as `I ⊗ a - b^T ⊗ I` on `vec(x)`.
pub fn ad_group_average_identity(a: &CMatrix, b: &CMatrix, nodes: usize) -> Result<IdentityReport> {
    let d = a.nrows();
    let id = CMatrix::identity(d, d);
    let gen = kron(&id, a) - kron(&b.transpose(), &id);
    group_average_identity(&gen, nodes)
}

/// Subordination density `h(s)`.
pub fn subordination_density(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    (-0.25 / s).exp() / (2.0 * std::f64::consts::PI.sqrt() * s.powf(1.5))
}

/// Log-substituted trapezoid grid `s = e^v`, `v ∈ [ln 1e-3, ln 1e22]`.
pub fn subordination_grid(nodes: usize) -> Result<Vec<(f64, f64)>> {
    if nodes < 8 {
        return Err(Error::Invalid("subordination grid needs at least 8 nodes".into()));
    }
    let (a, b) = (1e-3f64.ln(), 1e22f64.ln());
    let h = (b - a) / (nodes - 1) as f64;
    Ok((0..nodes)
        .map(|k| {
            let s = (a + h * k as f64).exp();
            let w = if k == 0 || k + 1 == nodes { 0.5 * h } else { h };
            (s, w * s)
        })
        .collect())
}

pub const SUBORDINATION_NODES: usize = 4000;

/// `∫ h(s) e^{-s t^2 C} ds` against `e^{-t C^{1/2}}` for hermitian PSD `C`.
pub fn subordination_identity(c: &CMatrix, t: f64, nodes: usize) -> Result<IdentityReport> {
    if !(t >= 0.0) {
        return Err(Error::Invalid(format!("time must be nonnegative, got {t}")));
    }
    let root = psd_sqrt(c)?;
    let (vals, vecs) = hermitian_eigen(c)?;
    let grid = subordination_grid(nodes)?;
    let n = c.nrows();
    let mut weights = vec![0.0f64; n];
    let mut mass = 0.0;
    for &(s, w) in &grid {
        let hs = subordination_density(s) * w;
        mass += hs;
        for (acc, &l) in weights.iter_mut().zip(vals.iter()) {
            *acc += hs * (-s * t * t * l.max(0.0)).exp();
        }
    }
    let mut lhs = vecs.clone();
    for (j, mut col) in lhs.column_iter_mut().enumerate() {
        col *= C64::from(weights[j]);
    }
    let lhs = lhs * vecs.adjoint();
    let direct = (root * C64::from(-t)).exp();
    Ok(IdentityReport { residual: max_abs(&(lhs - direct)), nodes, mass })
}
