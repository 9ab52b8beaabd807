//! Lower-bound estimation of Rademacher, column and row boundedness
//! constants of finite operator families.
//!
//! For a family `F` the constants are suprema of
//! `‖(T_k x_k)‖ / ‖(x_k)‖` over selections `T_k ∈ F` and matrix families
//! `(x_k)`, in the Rademacher, column or row norm. The supremum is
//! approached by seeded random restarts, alternating an ascent over the
//! matrices with greedy reselection of the operators. Every returned value
//! is the ratio of its stored witness, hence a certified lower bound.

use rand::Rng as _;
use rayon::prelude::*;

use crate::convex::SolverStatus;
use crate::error::{Error, Result};
use crate::funcalc::{resolvent, scale_op, LpOperator};
use crate::hvnorms::{stack_column, stack_row, unstack_column, unstack_row};
use crate::matrix::{polar_dual, schatten_norm, CMatrix, PExponent, C64};
use crate::random::{gaussian_matrix, seeded};

/// Nonempty family of maps on a common `M_d`.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    members: Vec<LpOperator>,
}

impl OperatorFamily {
    pub fn new(members: Vec<LpOperator>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::Invalid("operator family must be nonempty".into()))?;
        let d = first.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != d) {
            return Err(Error::Shape(format!("family mixes maps on M_{d} and M_{}", bad.dim())));
        }
        Ok(OperatorFamily { members })
    }

    pub fn members(&self) -> &[LpOperator] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `{y -> T(y*)* : T ∈ F}`; its column constant is the row constant of `F`.
    pub fn star_conjugates(&self) -> Result<OperatorFamily> {
        OperatorFamily::new(self.members.iter().map(|m| m.star_conjugate()).collect::<Result<_>>()?)
    }

    pub fn with_member(&self, extra: LpOperator) -> Result<OperatorFamily> {
        let mut members = self.members.clone();
        members.push(extra);
        OperatorFamily::new(members)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Notion {
    Rad,
    Col,
    Row,
}

impl std::fmt::Display for Notion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Notion::Rad => "rad",
            Notion::Col => "col",
            Notion::Row => "row",
        })
    }
}

/// Largest family length for exact sign enumeration in the Rademacher objective.
pub const RAD_MAX_LENGTH: usize = 12;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchCfg {
    pub restarts: usize,
    pub lengths: Vec<usize>,
    /// Alternations between ascent and reselection per restart.
    pub rounds: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for SearchCfg {
    fn default() -> Self {
        SearchCfg { restarts: 64, lengths: vec![1, 2, 4, 8], rounds: 4, ascent_steps: 30, seed: 0 }
    }
}

/// Operators chosen (by index into the family) and the test family.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub selection: Vec<usize>,
    pub family: Vec<CMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundEstimate {
    pub notion: Notion,
    pub value: f64,
    pub witness: Witness,
    pub status: SolverStatus,
    pub restarts: usize,
    pub seed: u64,
}

fn images(fam: &OperatorFamily, w: &Witness) -> Vec<CMatrix> {
    w.selection.iter().zip(&w.family).map(|(&k, x)| fam.members[k].apply_unchecked(x)).collect()
}

/// Sign patterns with the first sign fixed to `+1`.
fn sign_patterns(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << (n - 1))
        .map(|mask| (0..n).map(|k| if k == 0 || (mask >> (k - 1)) & 1 == 0 { 1.0 } else { -1.0 }).collect())
        .collect()
}

fn signed(xs: &[CMatrix], eps: &[f64]) -> CMatrix {
    let mut acc = CMatrix::zeros(xs[0].nrows(), xs[0].ncols());
    for (x, &e) in xs.iter().zip(eps) {
        acc += x * C64::from(e);
    }
    acc
}

fn rad_avg(xs: &[CMatrix], p: PExponent, patterns: &[Vec<f64>]) -> Result<f64> {
    let mut total = 0.0;
    for eps in patterns {
        total += schatten_norm(&signed(xs, eps), p)?;
    }
    Ok(total / patterns.len() as f64)
}

fn family_norm(notion: Notion, xs: &[CMatrix], p: PExponent, patterns: &[Vec<f64>]) -> Result<f64> {
    match notion {
        Notion::Col => schatten_norm(&stack_column(xs), p),
        Notion::Row => schatten_norm(&stack_row(xs), p),
        Notion::Rad => rad_avg(xs, p, patterns),
    }
}

/// `‖(T_k x_k)‖ / ‖(x_k)‖` for a stored witness.
pub fn witness_ratio(notion: Notion, fam: &OperatorFamily, p: PExponent, w: &Witness) -> Result<f64> {
    if w.selection.len() != w.family.len() || w.family.is_empty() {
        return Err(Error::Shape("witness selection and family lengths differ".into()));
    }
    if let Some(&k) = w.selection.iter().find(|&&k| k >= fam.len()) {
        return Err(Error::Invalid(format!("witness selects operator {k} of a family of {}", fam.len())));
    }
    if notion == Notion::Rad && w.family.len() > RAD_MAX_LENGTH {
        return Err(Error::TooLarge(format!("Rademacher objective enumerates at most {RAD_MAX_LENGTH} signs")));
    }
    let patterns = if notion == Notion::Rad { sign_patterns(w.family.len()) } else { Vec::new() };
    ratio_with(notion, fam, p, w, &patterns)
}

fn ratio_with(notion: Notion, fam: &OperatorFamily, p: PExponent, w: &Witness, patterns: &[Vec<f64>]) -> Result<f64> {
    let den = family_norm(notion, &w.family, p, patterns)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(family_norm(notion, &images(fam, w), p, patterns)? / den)
}

/// Dual power iteration for the block-diagonal map `(x_k) -> (T_k x_k)` on
/// the column or row space.
fn power_ascent(notion: Notion, fam: &OperatorFamily, p: PExponent, w: &mut Witness, steps: usize) -> Result<()> {
    let q = p.conjugate();
    let l = w.family.len();
    let adjoints: Vec<LpOperator> = w.selection.iter().map(|&k| fam.members[k].adjoint()).collect();
    let mut best = ratio_with(notion, fam, p, w, &[])?;
    for _ in 0..steps {
        let ys = images(fam, w);
        let (dual, z) = match notion {
            Notion::Col => {
                let d = polar_dual(&stack_column(&ys), p)?;
                let ws = unstack_row(&d, l);
                let zs: Vec<CMatrix> =
                    ws.iter().zip(&adjoints).map(|(wk, a)| a.apply_unchecked(&wk.adjoint()).adjoint()).collect();
                (polar_dual(&stack_row(&zs), q)?, true)
            }
            Notion::Row => {
                let d = polar_dual(&stack_row(&ys), p)?;
                let ws = unstack_column(&d, l);
                let zs: Vec<CMatrix> =
                    ws.iter().zip(&adjoints).map(|(wk, a)| a.apply_unchecked(&wk.adjoint()).adjoint()).collect();
                (polar_dual(&stack_column(&zs), q)?, false)
            }
            Notion::Rad => unreachable!("Rademacher ascent is gradient based"),
        };
        if dual.iter().all(|v| v.norm() == 0.0) {
            break;
        }
        let next = if z { unstack_column(&dual, l) } else { unstack_row(&dual, l) };
        let candidate = Witness { selection: w.selection.clone(), family: next };
        let val = ratio_with(notion, fam, p, &candidate, &[])?;
        if val > best * (1.0 + 1e-12) {
            best = val;
            *w = candidate;
        } else {
            break;
        }
    }
    Ok(())
}

/// Gradient of `E ‖Σ ε_k S_k x_k‖_p` in `x_k` for the real inner product.
fn rad_gradient(ops: &[Option<&LpOperator>], xs: &[CMatrix], p: PExponent, patterns: &[Vec<f64>]) -> Result<(f64, Vec<CMatrix>)> {
    let ys: Vec<CMatrix> =
        ops.iter().zip(xs).map(|(op, x)| op.map_or_else(|| x.clone(), |t| t.apply_unchecked(x))).collect();
    let mut grads: Vec<CMatrix> = xs.iter().map(|x| CMatrix::zeros(x.nrows(), x.ncols())).collect();
    let mut total = 0.0;
    for eps in patterns {
        let y = signed(&ys, eps);
        total += schatten_norm(&y, p)?;
        let j = polar_dual(&y, p)?.adjoint();
        for ((g, op), &e) in grads.iter_mut().zip(ops).zip(eps) {
            let back = op.map_or_else(|| j.clone(), |t| t.adjoint().apply_unchecked(&j));
            *g += back * C64::from(e);
        }
    }
    let m = patterns.len() as f64;
    Ok((total / m, grads.into_iter().map(|g| g / C64::from(m)).collect()))
}

fn rad_ascent(fam: &OperatorFamily, p: PExponent, w: &mut Witness, steps: usize, patterns: &[Vec<f64>]) -> Result<()> {
    let sel: Vec<Option<&LpOperator>> = w.selection.iter().map(|&k| Some(&fam.members[k])).collect();
    let ident: Vec<Option<&LpOperator>> = vec![None; w.family.len()];
    let mut best = ratio_with(Notion::Rad, fam, p, w, patterns)?;
    let mut step = 0.5;
    for _ in 0..steps {
        let (n, gn) = rad_gradient(&sel, &w.family, p, patterns)?;
        let (d, gd) = rad_gradient(&ident, &w.family, p, patterns)?;
        if n == 0.0 || d == 0.0 {
            break;
        }
        let dir: Vec<CMatrix> = gn.iter().zip(&gd).map(|(a, b)| a / C64::from(n) - b / C64::from(d)).collect();
        let gnorm = dir.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        let xnorm = w.family.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            break;
        }
        let mut improved = false;
        for _ in 0..20 {
            let eta = step * xnorm / gnorm;
            let cand: Vec<CMatrix> = w.family.iter().zip(&dir).map(|(x, g)| x + g * C64::from(eta)).collect();
            let cand = Witness { selection: w.selection.clone(), family: cand };
            let val = ratio_with(Notion::Rad, fam, p, &cand, patterns)?;
            if val > best * (1.0 + 1e-12) {
                best = val;
                let scale = C64::from(1.0 / cand.family.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt());
                *w = Witness { selection: cand.selection, family: cand.family.into_iter().map(|x| x * scale).collect() };
                step = (step * 1.5).min(4.0);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(())
}

fn ascend(notion: Notion, fam: &OperatorFamily, p: PExponent, w: &mut Witness, steps: usize, patterns: &[Vec<f64>]) -> Result<()> {
    match notion {
        Notion::Rad => rad_ascent(fam, p, w, steps, patterns),
        _ => power_ascent(notion, fam, p, w, steps),
    }
}

/// Replaces each selected operator by the best member, one position at a time.
fn reselect(notion: Notion, fam: &OperatorFamily, p: PExponent, w: &mut Witness, patterns: &[Vec<f64>]) -> Result<bool> {
    let mut best = ratio_with(notion, fam, p, w, patterns)?;
    let mut changed = false;
    for pos in 0..w.selection.len() {
        let current = w.selection[pos];
        for k in 0..fam.len() {
            if k == current {
                continue;
            }
            let mut cand = w.clone();
            cand.selection[pos] = k;
            let val = ratio_with(notion, fam, p, &cand, patterns)?;
            if val > best * (1.0 + 1e-12) {
                best = val;
                *w = cand;
                changed = true;
            }
        }
    }
    Ok(changed)
}

fn restart_seed(seed: u64, r: usize) -> u64 {
    seed ^ (r as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Estimates the Rad, Col or Row constant of `fam` on `S^p`.
pub fn bound_estimate(notion: Notion, fam: &OperatorFamily, p: PExponent, cfg: &SearchCfg) -> Result<BoundEstimate> {
    if cfg.lengths.is_empty() || cfg.lengths.contains(&0) {
        return Err(Error::Invalid("family lengths must be positive".into()));
    }
    if notion == Notion::Rad {
        if let Some(&l) = cfg.lengths.iter().find(|&&l| l > RAD_MAX_LENGTH) {
            return Err(Error::TooLarge(format!(
                "Rademacher search at length {l} exceeds the exact enumeration limit {RAD_MAX_LENGTH}"
            )));
        }
    }
    let d = fam.dim();
    let restarts = cfg.restarts.max(1);
    let runs: Vec<(f64, Witness, bool)> = (0..restarts)
        .into_par_iter()
        .map(|r| -> Result<(f64, Witness, bool)> {
            let mut rng = seeded(restart_seed(cfg.seed, r));
            let l = cfg.lengths[r % cfg.lengths.len()];
            let patterns = if notion == Notion::Rad { sign_patterns(l) } else { Vec::new() };
            let selection: Vec<usize> = (0..l).map(|_| rng.random_range(0..fam.len())).collect();
            let family: Vec<CMatrix> = (0..l).map(|_| gaussian_matrix(&mut rng, d, d)).collect();
            let mut w = Witness { selection, family };
            let mut settled = false;
            for _ in 0..cfg.rounds.max(1) {
                let before = ratio_with(notion, fam, p, &w, &patterns)?;
                ascend(notion, fam, p, &mut w, cfg.ascent_steps, &patterns)?;
                let changed = reselect(notion, fam, p, &mut w, &patterns)?;
                let after = ratio_with(notion, fam, p, &w, &patterns)?;
                if !changed && after <= before * (1.0 + 1e-9) {
                    settled = true;
                    break;
                }
            }
            Ok((ratio_with(notion, fam, p, &w, &patterns)?, w, settled))
        })
        .collect::<Result<_>>()?;
    let any_settled = runs.iter().any(|r| r.2);
    let (value, witness, _) = runs
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one restart");
    Ok(BoundEstimate {
        notion,
        value,
        witness,
        status: if any_settled { SolverStatus::Converged } else { SolverStatus::BudgetExhausted },
        restarts,
        seed: cfg.seed,
    })
}

pub fn col_bound_estimate(fam: &OperatorFamily, p: PExponent, cfg: &SearchCfg) -> Result<BoundEstimate> {
    bound_estimate(Notion::Col, fam, p, cfg)
}

pub fn row_bound_estimate(fam: &OperatorFamily, p: PExponent, cfg: &SearchCfg) -> Result<BoundEstimate> {
    bound_estimate(Notion::Row, fam, p, cfg)
}

pub fn rad_bound_estimate(fam: &OperatorFamily, p: PExponent, cfg: &SearchCfg) -> Result<BoundEstimate> {
    bound_estimate(Notion::Rad, fam, p, cfg)
}

/// Number of sample points per ray in a sector profile.
pub const PROFILE_POINTS_PER_RAY: usize = 12;

/// `{z R(z, A)}` for `z` on both rays of angle `theta`, log-spaced radii in
/// `[1e-3, 1e3] ρ`.
pub fn resolvent_family(op: &LpOperator, theta: f64, per_ray: usize) -> Result<OperatorFamily> {
    let rho = op.spectrum()?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rho = if rho > 0.0 { rho } else { 1.0 };
    let members = crate::funcalc::ray_points(theta, rho, per_ray)
        .into_iter()
        .map(|z| Ok(scale_op(&resolvent(op, z)?, z)))
        .collect::<Result<Vec<_>>>()?;
    OperatorFamily::new(members)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ProfileRow {
    pub theta: f64,
    pub rad: f64,
    pub col: f64,
    pub row: f64,
}

/// Rad, Col and Row estimates of `{z R(z, A) : z ∈ ∂Σ_θ}` for each `θ`.
pub fn sector_rbound_profile(op: &LpOperator, p: PExponent, thetas: &[f64], cfg: &SearchCfg) -> Result<Vec<ProfileRow>> {
    let omega = crate::funcalc::sector_type(op, &[], PExponent::TWO, cfg.seed)?.omega_hat;
    thetas
        .iter()
        .map(|&theta| {
            if theta <= omega {
                return Err(Error::Invalid(format!("probe angle {theta} is not above the spectral angle {omega}")));
            }
            let fam = resolvent_family(op, theta, PROFILE_POINTS_PER_RAY)?;
            let rad_cfg = SearchCfg {
                lengths: cfg.lengths.iter().map(|&l| l.min(RAD_MAX_LENGTH)).collect(),
                ..cfg.clone()
            };
            Ok(ProfileRow {
                theta,
                rad: rad_bound_estimate(&fam, p, &rad_cfg)?.value,
                col: col_bound_estimate(&fam, p, cfg)?.value,
                row: row_bound_estimate(&fam, p, cfg)?.value,
            })
        })
        .collect()
}
