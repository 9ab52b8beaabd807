//! Norms of superoperators on `S^p`.

use rayon::prelude::*;

use super::operator::{unvectorize, LpOperator, MAX_MATERIALIZE_DIM};
use crate::error::Result;
use crate::matrix::{polar_dual, schatten_norm, svd, CMatrix, PExponent};
use crate::random::{gaussian_matrix, seeded};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormCfg {
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for NormCfg {
    fn default() -> Self {
        NormCfg { starts: 50, iterations: 60, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Input with `‖witness‖_p = 1` and `‖T witness‖_p = value`.
    pub witness: CMatrix,
    /// True when the value is the exact norm rather than a lower bound.
    pub exact: bool,
}

/// `‖T‖_{S^p -> S^p}`. Exact at `p = 2` through the singular values of the
/// materialized map; otherwise the best value of a dual power iteration over
/// random starts, which is a lower bound.
pub fn superop_norm(op: &LpOperator, p: PExponent, cfg: &NormCfg) -> Result<NormEstimate> {
    let d = op.dim();
    if p.value() == 2.0 && d <= MAX_MATERIALIZE_DIM {
        let m = op.materialize()?;
        let dec = svd(&m)?;
        let (k, value) = dec
            .singular_values
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        let v = dec.v_t.row(k).adjoint();
        return Ok(NormEstimate { value, witness: unvectorize(&v, d), exact: true });
    }
    power_norm(op, p, cfg)
}

/// Dual power iteration: `x -> J_{p'}(T'(J_p(T x)))` where `J` maps to the
/// norming functional and `T'` is the adjoint for the pairing `tr(xy)`.
pub fn power_norm(op: &LpOperator, p: PExponent, cfg: &NormCfg) -> Result<NormEstimate> {
    let d = op.dim();
    let adj = op.adjoint();
    let q = p.conjugate();
    let mut rng = seeded(cfg.seed);
    let starts: Vec<CMatrix> = (0..cfg.starts.max(1)).map(|_| gaussian_matrix(&mut rng, d, d)).collect();
    let runs: Vec<(f64, CMatrix)> = starts
        .into_par_iter()
        .map(|x0| -> Result<(f64, CMatrix)> {
            let n0 = schatten_norm(&x0, p)?;
            let mut x = x0 / crate::matrix::C64::from(n0);
            let mut best = (schatten_norm(&op.apply_unchecked(&x), p)?, x.clone());
            for _ in 0..cfg.iterations {
                let y = op.apply_unchecked(&x);
                let w = polar_dual(&y, p)?;
                let z = adj.apply_unchecked(&w.adjoint()).adjoint();
                if z.iter().all(|v| v.norm() == 0.0) {
                    break;
                }
                x = polar_dual(&z, q)?;
                let val = schatten_norm(&op.apply_unchecked(&x), p)?;
                if val > best.0 * (1.0 + 1e-13) {
                    best = (val, x.clone());
                } else if val >= best.0 * (1.0 - 1e-13) {
                    break;
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let (value, witness) = runs
        .into_iter()
        .fold((f64::NEG_INFINITY, CMatrix::zeros(d, d)), |b, r| if r.0 > b.0 { r } else { b });
    Ok(NormEstimate { value, witness, exact: false })
}

/// `‖id_{M_m} ⊗ T‖` on `S^p(M_m ⊗ M_d)`, a lower bound for the cb norm.
pub fn amplified_norm(op: &LpOperator, p: PExponent, m: usize, cfg: &NormCfg) -> Result<NormEstimate> {
    superop_norm(&op.amplify(m)?, p, cfg)
}
