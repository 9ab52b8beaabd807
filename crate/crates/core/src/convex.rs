//! First-order minimization of sums of Schatten norms of affine maps.
//!
//! Objectives have the form `z -> sum_i ‖L_i(z) + b_i‖_p` over a family `z`
//! of matrices. Each norm is smoothed as `‖(M*M + mu^2)^{1/2}‖_p`, which is
//! convex, differentiable and within `rank^{1/p} mu` of the true norm. The
//! smoothing parameter is driven to zero by continuation while an accelerated
//! gradient method with backtracking runs on the smoothed objective. The best
//! iterate under the exact objective is returned, so the reported value is
//! always attained by the returned witness.

use crate::error::Result;
use crate::matrix::{lp_of_values, svd, CMatrix, PExponent, C64, REDUCE_ASPECT};
use crate::random::{gaussian_matrix, seeded};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConvexCfg {
    pub restarts: usize,
    pub iterations: usize,
    /// Relative stationarity tolerance on the exact objective.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ConvexCfg {
    fn default() -> Self {
        ConvexCfg { restarts: 16, iterations: 500, tolerance: 1e-4, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolverStatus {
    Converged,
    /// The iteration budget ran out before the stopping test was met; the
    /// value is the best found so far.
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub value: f64,
    pub argmin: Vec<CMatrix>,
    pub status: SolverStatus,
}

/// One summand `‖L(z) + b‖_p` of the objective.
pub trait NormTerm: Sync {
    /// `L(z) + b`.
    fn eval(&self, z: &[CMatrix]) -> CMatrix;
    /// Adjoint of the linear part `L` for the real inner product `Re tr(A* B)`.
    fn adjoint(&self, g: &CMatrix) -> Vec<CMatrix>;
}

/// Exponent used to smooth the `p = inf` case.
const INF_SURROGATE: f64 = 64.0;

/// Smoothed value and gradient of `‖m‖_p`.
fn smoothed_norm(m: &CMatrix, p: PExponent, mu: f64) -> Result<(f64, CMatrix)> {
    let (rows, cols) = m.shape();
    if cols >= REDUCE_ASPECT * rows {
        let (v, g) = smoothed_norm(&m.adjoint(), p, mu)?;
        return Ok((v, g.adjoint()));
    }
    let tall = rows >= REDUCE_ASPECT * cols;
    // For tall m = QR only the small factor is decomposed.
    let d = if tall { svd(&m.clone().qr().r())? } else { svd(m)? };
    let pv = if p.is_infinite() { INF_SURROGATE } else { p.value() };
    let s = &d.singular_values;
    let shifted: Vec<f64> = s.iter().map(|&v| (v * v + mu * mu).sqrt()).collect();
    let top = shifted.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok((0.0, CMatrix::zeros(rows, cols)));
    }
    let sum: f64 = shifted.iter().map(|v| (v / top).powf(pv)).sum();
    let value = top * sum.powf(1.0 / pv);
    // d/dM = U diag(s_i c_i) V* = M V diag(c_i) V*, c_i = shifted_i^{p-2} / value^{p-1}
    let coef: Vec<f64> = shifted.iter().map(|&hi| (hi / value).powf(pv - 2.0) / value).collect();
    if tall {
        let mut v = d.v_t.adjoint();
        let vt = d.v_t;
        for (j, mut col) in v.column_iter_mut().enumerate() {
            col *= C64::from(coef[j]);
        }
        return Ok((value, m * (v * vt)));
    }
    let mut u = d.u.clone();
    for (j, mut col) in u.column_iter_mut().enumerate() {
        col *= C64::from(s[j] * coef[j]);
    }
    Ok((value, u * d.v_t))
}

fn exact_objective(terms: &[&dyn NormTerm], p: PExponent, z: &[CMatrix]) -> Result<f64> {
    let mut total = 0.0;
    for t in terms {
        let s = crate::matrix::singular_values(&t.eval(z))?;
        total += lp_of_values(s.iter(), p);
    }
    Ok(total)
}

fn smoothed_objective(terms: &[&dyn NormTerm], p: PExponent, z: &[CMatrix], mu: f64) -> Result<(f64, Vec<CMatrix>)> {
    let mut total = 0.0;
    let mut grad: Vec<CMatrix> = z.iter().map(|m| CMatrix::zeros(m.nrows(), m.ncols())).collect();
    for t in terms {
        let (v, g) = smoothed_norm(&t.eval(z), p, mu)?;
        total += v;
        for (acc, gk) in grad.iter_mut().zip(t.adjoint(&g)) {
            *acc += gk;
        }
    }
    Ok((total, grad))
}

fn axpy(z: &[CMatrix], a: f64, g: &[CMatrix]) -> Vec<CMatrix> {
    z.iter().zip(g).map(|(zi, gi)| zi + gi * C64::from(a)).collect()
}

fn sq_norm(g: &[CMatrix]) -> f64 {
    g.iter().map(|m| m.norm_squared()).sum()
}

fn descend(
    terms: &[&dyn NormTerm],
    p: PExponent,
    start: Vec<CMatrix>,
    scale: f64,
    cfg: &ConvexCfg,
) -> Result<SolverOutcome> {
    let mut best_z = start.clone();
    let mut best = exact_objective(terms, p, &start)?;
    let mu_floor = 1e-9 * scale;
    let mut mu = 0.05 * scale;
    let mut lip = 1.0 / mu;
    let mut x = start.clone();
    let mut y = start;
    let mut t_acc = 1.0f64;
    let mut since_improved = 0usize;
    let window = 40usize;
    let mut window_start_best = best;
    let mut status = SolverStatus::BudgetExhausted;
    for it in 0..cfg.iterations {
        let (fy, gy) = smoothed_objective(terms, p, &y, mu)?;
        let gn2 = sq_norm(&gy);
        let mut x_next;
        loop {
            x_next = axpy(&y, -1.0 / lip, &gy);
            let (fx, _) = smoothed_objective(terms, p, &x_next, mu)?;
            if fx <= fy - 0.5 * gn2 / lip + 1e-15 * fy.abs() || lip > 1e16 {
                break;
            }
            lip *= 2.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_acc * t_acc).sqrt());
        let momentum = (t_acc - 1.0) / t_next;
        y = x_next.iter().zip(&x).map(|(a, b)| a + (a - b) * C64::from(momentum)).collect();
        x = x_next;
        t_acc = t_next;
        lip *= 0.95;

        let fx_exact = exact_objective(terms, p, &x)?;
        if fx_exact < best {
            best = fx_exact;
            best_z = x.clone();
        }
        since_improved += 1;
        if since_improved >= window {
            let gain = (window_start_best - best) / best.max(f64::MIN_POSITIVE);
            if gain < cfg.tolerance * 1e-2 {
                if mu <= mu_floor {
                    status = SolverStatus::Converged;
                    break;
                }
                // tighten smoothing and restart momentum from the best point
                mu = (mu * 0.2).max(mu_floor);
                lip = lip.max(1.0 / mu);
                x = best_z.clone();
                y = best_z.clone();
                t_acc = 1.0;
            }
            since_improved = 0;
            window_start_best = best;
        }
        if it + 1 == cfg.iterations {
            status = SolverStatus::BudgetExhausted;
        }
    }
    Ok(SolverOutcome { value: best, argmin: best_z, status })
}

/// Minimizes `sum_i ‖L_i(z) + b_i‖_p`.
///
/// `starts` are tried first; the remaining restarts begin at random Gaussian
/// families of the same shapes scaled to `scale`.
pub fn minimize_norm_sum(
    terms: &[&dyn NormTerm],
    p: PExponent,
    starts: Vec<Vec<CMatrix>>,
    scale: f64,
    cfg: &ConvexCfg,
) -> Result<SolverOutcome> {
    assert!(!starts.is_empty(), "at least one start point is required");
    let shapes: Vec<(usize, usize)> = starts[0].iter().map(|m| (m.nrows(), m.ncols())).collect();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut rng = seeded(cfg.seed);
    let mut all_starts = starts;
    while all_starts.len() < cfg.restarts.max(1) {
        let count: usize = shapes.iter().map(|(r, c)| r * c).sum::<usize>().max(1);
        let amp = scale / (count as f64).sqrt();
        all_starts.push(
            shapes
                .iter()
                .map(|&(r, c)| gaussian_matrix(&mut rng, r, c) * C64::from(amp))
                .collect(),
        );
    }
    let mut best: Option<SolverOutcome> = None;
    let mut any_converged = false;
    for start in all_starts {
        let out = descend(terms, p, start, scale, cfg)?;
        any_converged |= out.status == SolverStatus::Converged;
        if best.as_ref().is_none_or(|b| out.value < b.value) {
            best = Some(out);
        }
    }
    let mut best = best.expect("non-empty");
    best.status = if any_converged { SolverStatus::Converged } else { SolverStatus::BudgetExhausted };
    Ok(best)
}
