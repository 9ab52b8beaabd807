//! Matrix martingales on `M_2^{⊗N}`: towers of conditional expectations,
//! Stein-type boundedness of `{E_k}` and Cesàro square functions.

use crate::convex::{ConvexCfg, SolverStatus};
use crate::error::{Error, Result};
use crate::funcalc::{Direction, LpOperator, TowerLevel};
use crate::hvnorms::{rad_norm, MatrixFamily};
use crate::matrix::{schatten_norm, CMatrix, PExponent, C64};
use crate::rbound::{col_bound_estimate, BoundEstimate, OperatorFamily, SearchCfg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MartingaleTower {
    factors: usize,
    direction: Direction,
}

impl MartingaleTower {
    pub fn new(factors: usize, direction: Direction) -> Result<Self> {
        TowerLevel::new(factors, 0, direction)?;
        Ok(MartingaleTower { factors, direction })
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn dim(&self) -> usize {
        1 << self.factors
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn level(&self, k: usize) -> Result<TowerLevel> {
        TowerLevel::new(self.factors, k, self.direction)
    }

    pub fn operator(&self, k: usize) -> Result<LpOperator> {
        Ok(LpOperator::cond_exp(self.level(k)?))
    }

    /// `E_j ∘ E_k = E_{meet(j, k)}`.
    pub fn meet(&self, j: usize, k: usize) -> usize {
        match self.direction {
            Direction::Increasing => j.min(k),
            Direction::Decreasing => j.max(k),
        }
    }

    /// `E_k − E_{k−1}` along the filtration; `d_0 = E_0` (increasing) or
    /// `d_N = E_N` (decreasing) is the coarsest level.
    pub fn difference(&self, k: usize, x: &CMatrix) -> Result<CMatrix> {
        let coarser = match self.direction {
            Direction::Increasing => k.checked_sub(1),
            Direction::Decreasing => (k < self.factors).then_some(k + 1),
        };
        let e = cond_exp(self, k, x)?;
        Ok(match coarser {
            Some(c) => e - cond_exp(self, c, x)?,
            None => e,
        })
    }
}

/// `E_k(x)`.
pub fn cond_exp(tower: &MartingaleTower, k: usize, x: &CMatrix) -> Result<CMatrix> {
    tower.operator(k)?.apply(x)
}

/// Column boundedness estimate of `{E_0, …, E_N}` amplified by `M_2`.
pub fn stein_colbound(tower: &MartingaleTower, p: PExponent, cfg: &SearchCfg) -> Result<BoundEstimate> {
    let members = (0..=tower.factors).map(|k| tower.operator(k)?.amplify(2)).collect::<Result<Vec<_>>>()?;
    col_bound_estimate(&OperatorFamily::new(members)?, p, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CesaroReport {
    /// Rademacher-type norm of `(√m D_m x)_{1 ≤ m ≤ M}`.
    pub value: f64,
    /// `value / ‖x‖_p`.
    pub ratio: f64,
    pub status: SolverStatus,
}

/// `D_m = S_m − S_{m−1}` with `S_m = (1/(m+1)) Σ_{k ≤ m} T^k`, measured on
/// the family `(√m D_m x)`.
pub fn cesaro_square_function(t: &LpOperator, x: &CMatrix, m_max: usize, p: PExponent, cfg: &ConvexCfg) -> Result<CesaroReport> {
    if m_max == 0 {
        return Err(Error::Invalid("need at least one Cesàro index".into()));
    }
    let mut power = x.clone();
    let mut mean = x.clone();
    let mut family = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        power = t.apply(&power)?;
        // D_m = (T^m x − S_{m−1} x) / (m + 1)
        let d = (&power - &mean) / C64::from((m + 1) as f64);
        mean += &d;
        family.push(d * C64::from((m as f64).sqrt()));
    }
    let norm = rad_norm(&MatrixFamily::new(family)?, p, cfg)?;
    let nx = schatten_norm(x, p)?;
    Ok(CesaroReport { value: norm.value, ratio: if nx > 0.0 { norm.value / nx } else { 0.0 }, status: norm.status })
}

/// `(Σ_{m ≤ M} 1/(m(m+1)^2))^{1/2}`: the Cesàro value per unit `‖Ex − x‖`
/// for a conditional expectation `E` and `p ≥ 2`.
pub fn cesaro_projection_constant(m_max: usize) -> f64 {
    (1..=m_max).map(|m| 1.0 / (m as f64 * ((m + 1) as f64).powi(2))).sum::<f64>().sqrt()
}
