//! Square functions of sectorial operators on matrix spaces.
//!
//! For `u(t) = F(tA)x` the column and row square functions are
//! `‖(∫ u*u dt/t)^{1/2}‖_p` and `‖(∫ uu* dt/t)^{1/2}‖_p`. The integral is
//! replaced by trapezoid quadrature in `log t` on a finite window, so each
//! square function becomes a column or row norm of the node family
//! `u_j = √w_j F(t_j A)x`.

use rayon::prelude::*;

use crate::convex::{minimize_norm_sum, ConvexCfg, NormTerm, SolverStatus};
use crate::error::{Error, Result};
use crate::funcalc::{EigenPrep, HolFn, LpOperator};
use crate::hvnorms::{stack_column, stack_row, sum_norm_members, unstack_column, unstack_row};
use crate::matrix::{hermitian_part, schatten_norm, sqrt_psd_norm, CMatrix, PExponent, C64};
use crate::random::{gaussian_matrix, seeded};

/// Log-uniform nodes on `[t_min, t_max]` with trapezoid weights for `dt/t`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LogGrid {
    t_min: f64,
    t_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Node count of the default grid before tail extension.
pub const DEFAULT_GRID_NODES: usize = 512;

/// Relative size of `|F|²` at which the default grid stops extending.
pub const TAIL_TOL: f64 = 1e-18;

impl LogGrid {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::Invalid(format!("grid window [{t_min}, {t_max}] must satisfy 0 < t_min < t_max")));
        }
        if n < 2 {
            return Err(Error::Invalid("grid needs at least two nodes".into()));
        }
        let (a, b) = (t_min.ln(), t_max.ln());
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n).map(|j| (a + h * j as f64).exp()).collect();
        let weights = (0..n).map(|j| if j == 0 || j == n - 1 { h / 2.0 } else { h }).collect();
        Ok(LogGrid { t_min, t_max, nodes, weights })
    }

    /// `[1e-4/ρ, 1e4/ρ]` with 512 nodes, `ρ` the spectral radius of `op`,
    /// extended at the same spacing until `|F(tλ)|²` is below
    /// [`TAIL_TOL`] at both ends for every nonzero eigenvalue `λ`.
    pub fn default_for(op: &LpOperator, f: &HolFn) -> Result<Self> {
        let spectrum: Vec<C64> = op.spectrum()?;
        let rho = spectral_scale(op)?;
        let base = LogGrid::new(1e-4 / rho, 1e4 / rho, DEFAULT_GRID_NODES)?;
        let h = (base.t_max / base.t_min).ln() / (DEFAULT_GRID_NODES - 1) as f64;
        let live: Vec<C64> = spectrum.into_iter().filter(|z| z.norm() > 1e-10 * rho).collect();
        let scale = live.iter().map(|&l| f.eval(l / C64::from(l.norm())).norm_sqr()).fold(f64::MIN_POSITIVE, f64::max);
        let small = |t: f64| live.iter().all(|&l| f.eval(l * t).norm_sqr() <= TAIL_TOL * scale);
        let (mut lo, mut hi) = (base.t_min, base.t_max);
        while !small(lo) && lo > 1e-40 / rho {
            lo /= 10.0;
        }
        while !small(hi) && hi < 1e40 / rho {
            hi *= 10.0;
        }
        let n = ((hi / lo).ln() / h).round() as usize + 1;
        LogGrid::new(lo, hi, n)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same window, twice the nodes.
    pub fn refined(&self) -> Self {
        LogGrid::new(self.t_min, self.t_max, 2 * self.n()).expect("valid grid")
    }

    /// Window scaled by `factor` on both sides, keeping the node spacing.
    pub fn widened(&self, factor: f64) -> Result<Self> {
        let h = (self.t_max / self.t_min).ln() / (self.n() - 1) as f64;
        let (lo, hi) = (self.t_min / factor, self.t_max * factor);
        let n = ((hi / lo).ln() / h).round() as usize + 1;
        LogGrid::new(lo, hi, n)
    }

    /// `Σ_j w_j |F(t_j λ)|²`.
    pub fn scalar_square(&self, f: &HolFn, lambda: C64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f.eval(lambda * t).norm_sqr()).sum()
    }
}

fn spectral_scale(op: &LpOperator) -> Result<f64> {
    let rho = op.spectrum()?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(if rho > 0.0 { rho } else { 1.0 })
}

/// `c_F = (∫_0^∞ |F(t)|² dt/t)^{1/2}` on a grid.
pub fn c_f(f: &HolFn, grid: &LogGrid) -> f64 {
    grid.scalar_square(f, C64::from(1.0)).sqrt()
}

/// `F(t_j A)`, one operator per node.
pub struct NodeOperators {
    ops: Vec<LpOperator>,
    weights: Vec<f64>,
    truncated: bool,
}

/// Relative size of the integrand at the window ends above which a report
/// is flagged as truncated.
pub const TRUNCATION_TOL: f64 = 1e-6;

impl NodeOperators {
    pub fn new(op: &LpOperator, f: &HolFn, grid: &LogGrid) -> Result<Self> {
        let prep = EigenPrep::new(op)?;
        let ops = grid
            .nodes()
            .par_iter()
            .map(|&t| prep.operator(&|z| f.eval(z * t)))
            .collect();
        let mut truncated = false;
        for &lam in prep.spectrum() {
            if lam.norm() <= 1e-10 * prep.spectrum().iter().map(|z| z.norm()).fold(0.0, f64::max) {
                continue;
            }
            let total = grid.scalar_square(f, lam);
            let ends = f.eval(lam * grid.t_min()).norm_sqr().max(f.eval(lam * grid.t_max()).norm_sqr());
            if total > 0.0 && ends > TRUNCATION_TOL * total {
                truncated = true;
            }
        }
        Ok(NodeOperators { ops, weights: grid.weights().to_vec(), truncated })
    }

    /// `u_j = √w_j F(t_j A) x`.
    pub fn family(&self, x: &CMatrix) -> Result<Vec<CMatrix>> {
        let d = self.ops[0].dim();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::Shape(format!("expected a {d}x{d} matrix, got {}x{}", x.nrows(), x.ncols())));
        }
        Ok(self.ops.par_iter().zip(&self.weights).map(|(t, &w)| t.apply_unchecked(x) * C64::from(w.sqrt())).collect())
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

/// Entrywise compensated sum of `m_j` in index order.
fn compensated_sum(ms: impl Iterator<Item = CMatrix>, rows: usize, cols: usize) -> CMatrix {
    let mut sum = CMatrix::zeros(rows, cols);
    let mut comp = CMatrix::zeros(rows, cols);
    for m in ms {
        for k in 0..rows * cols {
            let y = m[k] - comp[k];
            let t = sum[k] + y;
            comp[k] = (t - sum[k]) - y;
            sum[k] = t;
        }
    }
    sum
}

fn col_of(us: &[CMatrix], p: PExponent) -> Result<f64> {
    let d = us[0].ncols();
    let s = compensated_sum(us.iter().map(|u| u.adjoint() * u), d, d);
    sqrt_psd_norm(&hermitian_part(&s), p)
}

fn row_of(us: &[CMatrix], p: PExponent) -> Result<f64> {
    let d = us[0].nrows();
    let s = compensated_sum(us.iter().map(|u| u * u.adjoint()), d, d);
    sqrt_psd_norm(&hermitian_part(&s), p)
}

/// Column square function `‖x‖_{F,c}`.
pub fn sq_col(op: &LpOperator, x: &CMatrix, f: &HolFn, grid: &LogGrid, p: PExponent) -> Result<f64> {
    col_of(&NodeOperators::new(op, f, grid)?.family(x)?, p)
}

/// Row square function `‖x‖_{F,r}`.
pub fn sq_row(op: &LpOperator, x: &CMatrix, f: &HolFn, grid: &LogGrid, p: PExponent) -> Result<f64> {
    row_of(&NodeOperators::new(op, f, grid)?.family(x)?, p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvedNorm {
    pub value: f64,
    pub status: SolverStatus,
}

fn rad_of(us: &[CMatrix], p: PExponent, cfg: &ConvexCfg) -> Result<SolvedNorm> {
    if p.value() >= 2.0 {
        return Ok(SolvedNorm { value: col_of(us, p)?.max(row_of(us, p)?), status: SolverStatus::Converged });
    }
    // Convex in the splitting: the fixed starts suffice.
    let s = sum_norm_members(us, p, &ConvexCfg { restarts: 3, ..*cfg })?;
    Ok(SolvedNorm { value: s.value, status: s.status })
}

/// `‖x‖_F`: the larger of the two square functions for `p ≥ 2`, the
/// infimum of `‖u_1‖_c + ‖u_2‖_r` over splittings of the node family below 2.
pub fn sq_rad(op: &LpOperator, x: &CMatrix, f: &HolFn, grid: &LogGrid, p: PExponent, cfg: &ConvexCfg) -> Result<SolvedNorm> {
    rad_of(&NodeOperators::new(op, f, grid)?.family(x)?, p, cfg)
}

#[derive(Debug, Clone)]
pub struct Bracket {
    pub value: f64,
    /// Column part `x_1` of the best splitting `x = x_1 + x_2`.
    pub column_part: CMatrix,
    pub status: SolverStatus,
}

struct NodeColumn<'a> {
    nodes: &'a NodeOperators,
    adjoints: Vec<LpOperator>,
}

impl NormTerm for NodeColumn<'_> {
    fn eval(&self, z: &[CMatrix]) -> CMatrix {
        stack_column(&self.nodes.family(&z[0]).expect("shape checked"))
    }

    fn adjoint(&self, g: &CMatrix) -> Vec<CMatrix> {
        let blocks = unstack_column(g, self.adjoints.len());
        vec![weighted_adjoint_sum(&self.adjoints, &self.nodes.weights, &blocks)]
    }
}

struct NodeRowResidual<'a> {
    nodes: &'a NodeOperators,
    adjoints: Vec<LpOperator>,
    x: &'a CMatrix,
}

impl NormTerm for NodeRowResidual<'_> {
    fn eval(&self, z: &[CMatrix]) -> CMatrix {
        stack_row(&self.nodes.family(&(self.x - &z[0])).expect("shape checked"))
    }

    fn adjoint(&self, g: &CMatrix) -> Vec<CMatrix> {
        let blocks = unstack_row(g, self.adjoints.len());
        vec![-weighted_adjoint_sum(&self.adjoints, &self.nodes.weights, &blocks)]
    }
}

fn weighted_adjoint_sum(adjoints: &[LpOperator], weights: &[f64], blocks: &[CMatrix]) -> CMatrix {
    let d = blocks[0].nrows();
    compensated_sum(
        adjoints.iter().zip(weights).zip(blocks).map(|((a, &w), b)| a.apply_unchecked(b) * C64::from(w.sqrt())),
        d,
        d,
    )
}

/// Entry budget for each dense stacked map.
const DENSE_STACK_ENTRIES: usize = 1 << 21;

/// The node family as two dense maps on `vec(x)`: `col · vec(x)` is the
/// column-major `vec` of the column stack, `row · vec(x)` that of the row stack.
struct StackedMaps {
    col: CMatrix,
    row: CMatrix,
    n: usize,
    d: usize,
}

impl StackedMaps {
    fn new(nodes: &NodeOperators) -> Result<Option<Self>> {
        let (n, d) = (nodes.ops.len(), nodes.ops[0].dim());
        let dd = d * d;
        if n * dd * dd > DENSE_STACK_ENTRIES {
            return Ok(None);
        }
        let mut col = CMatrix::zeros(n * dd, dd);
        let mut row = CMatrix::zeros(n * dd, dd);
        for (j, (t, &w)) in nodes.ops.iter().zip(&nodes.weights).enumerate() {
            let m = t.materialize()? * C64::from(w.sqrt());
            row.view_mut((j * dd, 0), (dd, dd)).copy_from(&m);
            for c in 0..d {
                for r in 0..d {
                    col.row_mut(c * n * d + j * d + r).copy_from(&m.row(c * d + r));
                }
            }
        }
        Ok(Some(StackedMaps { col, row, n, d }))
    }
}

fn vec_of(m: &CMatrix) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

struct DenseColumn<'a>(&'a StackedMaps);

impl NormTerm for DenseColumn<'_> {
    fn eval(&self, z: &[CMatrix]) -> CMatrix {
        let m = self.0;
        CMatrix::from_column_slice(m.n * m.d, m.d, (&m.col * vec_of(&z[0])).as_slice())
    }

    fn adjoint(&self, g: &CMatrix) -> Vec<CMatrix> {
        let m = self.0;
        vec![CMatrix::from_column_slice(m.d, m.d, m.col.ad_mul(&vec_of(g)).as_slice())]
    }
}

struct DenseRowResidual<'a> {
    maps: &'a StackedMaps,
    x: &'a CMatrix,
}

impl NormTerm for DenseRowResidual<'_> {
    fn eval(&self, z: &[CMatrix]) -> CMatrix {
        let m = self.maps;
        CMatrix::from_column_slice(m.d, m.n * m.d, (&m.row * vec_of(&(self.x - &z[0]))).as_slice())
    }

    fn adjoint(&self, g: &CMatrix) -> Vec<CMatrix> {
        let m = self.maps;
        vec![-CMatrix::from_column_slice(m.d, m.d, m.row.ad_mul(&vec_of(g)).as_slice())]
    }
}

fn bracket_of(nodes: &NodeOperators, x: &CMatrix, p: PExponent, cfg: &ConvexCfg) -> Result<Bracket> {
    let us = nodes.family(x)?;
    let col = col_of(&us, p)?;
    let row = row_of(&us, p)?;
    let zero = CMatrix::zeros(x.nrows(), x.ncols());
    if col == 0.0 || row == 0.0 {
        let part = if col == 0.0 { x.clone() } else { zero };
        return Ok(Bracket { value: 0.0, column_part: part, status: SolverStatus::Converged });
    }
    let starts = vec![vec![x.clone()], vec![zero.clone()], vec![x * C64::from(0.5)]];
    // Convex in `x_1`: the fixed starts suffice.
    let cfg = &ConvexCfg { restarts: starts.len(), ..*cfg };
    let out = match StackedMaps::new(nodes)? {
        Some(maps) => {
            let ct = DenseColumn(&maps);
            let rt = DenseRowResidual { maps: &maps, x };
            minimize_norm_sum(&[&ct, &rt], p, starts, col.min(row), cfg)?
        }
        None => {
            let adjoints: Vec<LpOperator> = nodes.ops.iter().map(|t| t.adjoint()).collect();
            let ct = NodeColumn { nodes, adjoints: adjoints.clone() };
            let rt = NodeRowResidual { nodes, adjoints, x };
            minimize_norm_sum(&[&ct, &rt], p, starts, col.min(row), cfg)?
        }
    };
    let (mut value, mut part) = (out.value, out.argmin.into_iter().next().expect("one variable"));
    if col < value {
        value = col;
        part = x.clone();
    }
    if row < value {
        value = row;
        part = zero;
    }
    Ok(Bracket { value, column_part: part, status: out.status })
}

/// `[x]_F = inf { ‖x_1‖_{F,c} + ‖x_2‖_{F,r} : x = x_1 + x_2 }`.
pub fn bracket_norm(op: &LpOperator, x: &CMatrix, f: &HolFn, grid: &LogGrid, p: PExponent, cfg: &ConvexCfg) -> Result<Bracket> {
    bracket_of(&NodeOperators::new(op, f, grid)?, x, p, cfg)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SquareReport {
    pub col: f64,
    pub row: f64,
    pub rad: f64,
    pub bracket: f64,
    pub grid: LogGrid,
    pub truncated: bool,
    pub converged: bool,
}

/// All four square norms of `x` on one grid.
pub fn square_report(op: &LpOperator, x: &CMatrix, f: &HolFn, grid: &LogGrid, p: PExponent, cfg: &ConvexCfg) -> Result<SquareReport> {
    let nodes = NodeOperators::new(op, f, grid)?;
    let us = nodes.family(x)?;
    let rad = rad_of(&us, p, cfg)?;
    let bracket = bracket_of(&nodes, x, p, cfg)?;
    Ok(SquareReport {
        col: col_of(&us, p)?,
        row: row_of(&us, p)?,
        rad: rad.value,
        bracket: bracket.value,
        grid: grid.clone(),
        truncated: nodes.truncated(),
        converged: rad.status == SolverStatus::Converged && bracket.status == SolverStatus::Converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Variant {
    Col,
    Row,
    Rad,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "col" => Ok(Variant::Col),
            "row" => Ok(Variant::Row),
            "rad" => Ok(Variant::Rad),
            _ => Err(Error::Invalid(format!("unknown square function variant '{s}' (col, row, rad)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Equivalence {
    /// `min (‖x‖_F + ‖Px‖) / ‖x‖` over the sample.
    pub k1: f64,
    /// `max ‖x‖_F / ‖x‖` over the sample.
    pub k2: f64,
    pub samples: usize,
}

/// Projection onto the kernel of `op` along the closure of its range.
pub fn kernel_projection(op: &LpOperator) -> Result<LpOperator> {
    let prep = EigenPrep::new(op)?;
    let on_range = prep.operator(&|_| C64::from(1.0));
    let id = LpOperator::identity(op.dim());
    id.add(&crate::funcalc::scale_op(&on_range, C64::from(-1.0)))
}

/// Empirical two-sided constants of `‖x‖ ≍ ‖x‖_F + ‖Px‖` on seeded random `x`.
#[allow(clippy::too_many_arguments)]
pub fn equivalence_experiment(
    op: &LpOperator,
    f: &HolFn,
    p: PExponent,
    variant: Variant,
    samples: usize,
    seed: u64,
    grid: &LogGrid,
    cfg: &ConvexCfg,
) -> Result<Equivalence> {
    if samples == 0 {
        return Err(Error::Invalid("equivalence experiment needs at least one sample".into()));
    }
    let nodes = NodeOperators::new(op, f, grid)?;
    let proj = kernel_projection(op)?;
    let mut rng = seeded(seed);
    let xs: Vec<CMatrix> = (0..samples).map(|_| gaussian_matrix(&mut rng, op.dim(), op.dim())).collect();
    let ratios = xs
        .iter()
        .map(|x| {
            let us = nodes.family(x)?;
            let sq = match variant {
                Variant::Col => col_of(&us, p)?,
                Variant::Row => row_of(&us, p)?,
                Variant::Rad => rad_of(&us, p, cfg)?.value,
            };
            let nx = schatten_norm(x, p)?;
            let px = schatten_norm(&proj.apply_unchecked(x), p)?;
            Ok(((sq + px) / nx, sq / nx))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Equivalence {
        k1: ratios.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
        k2: ratios.iter().map(|r| r.1).fold(0.0, f64::max),
        samples,
    })
}

/// `d_k = ∫ F(t) F(2^k t) dt/t = 2^{k/2}/(1+2^k)` for `F(z) = √z e^{-z}`.
pub fn gap_coefficient(k: usize) -> f64 {
    let q = 2f64.powi(k as i32);
    q.sqrt() / (1.0 + q)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RowColGap {
    pub n: usize,
    pub fc: f64,
    pub fr: f64,
    pub fr_closed_form: f64,
    /// `fc / fr`.
    pub ratio: f64,
}

/// Column and row square functions of `x = (e⊗e)/√n` under left
/// multiplication by `diag(2, 4, …, 2^n)` with `F(z) = √z e^{-z}`.
pub fn row_col_gap(n: usize, p: PExponent, grid: Option<&LogGrid>) -> Result<RowColGap> {
    if n == 0 {
        return Err(Error::Invalid("gap experiment needs n >= 1".into()));
    }
    if p.value() <= 2.0 {
        return Err(Error::Invalid(format!("gap experiment needs p > 2, got {p}")));
    }
    let diag: Vec<f64> = (1..=n).map(|i| 2f64.powi(i as i32)).collect();
    let op = LpOperator::left(crate::matrix::real_diag(&diag))?;
    let f = HolFn::sqrtzexp();
    let grid = match grid {
        Some(g) => g.clone(),
        None => LogGrid::default_for(&op, &f)?,
    };
    let x = CMatrix::from_element(n, n, C64::from(1.0 / (n as f64).sqrt()));
    let nodes = NodeOperators::new(&op, &f, &grid)?;
    let us = nodes.family(&x)?;
    let fc = col_of(&us, p)?;
    let fr = row_of(&us, p)?;
    let delta = CMatrix::from_fn(n, n, |i, j| C64::from(gap_coefficient(i.abs_diff(j))));
    let fr_closed_form = sqrt_psd_norm(&delta, p)?;
    Ok(RowColGap { n, fc, fr, fr_closed_form, ratio: fc / fr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::real_diag;

    #[test]
    fn dense_maps_agree_with_node_terms() {
        let op = LpOperator::left(real_diag(&[1.0, 3.0, 7.0])).unwrap();
        let grid = LogGrid::new(1e-3, 1e2, 40).unwrap();
        let nodes = NodeOperators::new(&op, &HolFn::sqrtzexp(), &grid).unwrap();
        let maps = StackedMaps::new(&nodes).unwrap().unwrap();
        let adjoints: Vec<LpOperator> = nodes.ops.iter().map(|t| t.adjoint()).collect();
        let mut rng = seeded(5);
        let x = gaussian_matrix(&mut rng, 3, 3);
        let z = vec![gaussian_matrix(&mut rng, 3, 3)];
        let pairs: [(&dyn NormTerm, &dyn NormTerm); 2] = [
            (&DenseColumn(&maps), &NodeColumn { nodes: &nodes, adjoints: adjoints.clone() }),
            (&DenseRowResidual { maps: &maps, x: &x }, &NodeRowResidual { nodes: &nodes, adjoints: adjoints.clone(), x: &x }),
        ];
        for (a, b) in pairs {
            let (ea, eb) = (a.eval(&z), b.eval(&z));
            assert!((&ea - &eb).norm() <= 1e-12 * eb.norm());
            let g = gaussian_matrix(&mut rng, ea.nrows(), ea.ncols());
            let (ga, gb) = (&a.adjoint(&g)[0], &b.adjoint(&g)[0]);
            assert!((ga - gb).norm() <= 1e-12 * gb.norm());
        }
    }
}
