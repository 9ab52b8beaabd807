//! Resolvents and the sectorial functional calculus.
//!
//! Every operator is reduced to a *core*: either a square matrix `c` whose
//! matrix functions `f(c)` determine `f(A)` (left and right multipliers,
//! dense superoperators), or a table of scalars on which `f` acts entrywise
//! (Schur symbols, Ad pairs in the joint eigenbasis, conditional
//! expectations). Contour integrals are then evaluated on the core.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::holfn::{FnClass, HolFn};
use super::operator::{LpOperator, OpKind};
use crate::error::{Error, Result};
use crate::matrix::{eigen_general, max_abs, CMatrix, C64, ONE, ZERO};

/// Quadrature on `Γ_γ`: both rays `r e^{±iγ}`, trapezoid in `u = ln r`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ContourSpec {
    pub gamma: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
}

/// Relative size of eigenvalues treated as zero.
pub const ZERO_RTOL: f64 = 1e-10;
/// Tail mass targeted by automatically chosen truncation radii.
const TAIL_TARGET: f64 = 1e-16;
/// Trapezoid spacing is `2π a / STRIP_FACTOR` for an analyticity half-width `a`.
const STRIP_FACTOR: f64 = 36.0;
const MAX_NODES: usize = 40_001;

impl ContourSpec {
    pub fn new(gamma: f64, r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < PI) {
            return Err(Error::Invalid(format!("contour angle {gamma} must lie in (0, pi)")));
        }
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::Invalid(format!("contour radii need 0 < r_min < r_max, got {r_min}, {r_max}")));
        }
        if n_points < 8 {
            return Err(Error::Invalid(format!("contour needs at least 8 points per ray, got {n_points}")));
        }
        Ok(ContourSpec { gamma, r_min, r_max, n_points })
    }

    /// Contour for `f(A)`: angle halfway between the spectral angle and the
    /// sector of `f`, radii chosen from the decay envelope of `f`, spacing
    /// from the width of the strip of analyticity.
    pub fn auto(op: &LpOperator, f: &HolFn) -> Result<Self> {
        let info = SpectralInfo::of(&op.spectrum()?);
        Self::auto_from(&info, f, None)
    }

    /// As [`ContourSpec::auto`] with a prescribed angle.
    pub fn auto_with_gamma(op: &LpOperator, f: &HolFn, gamma: f64) -> Result<Self> {
        let info = SpectralInfo::of(&op.spectrum()?);
        Self::auto_from(&info, f, Some(gamma))
    }

    fn auto_from(info: &SpectralInfo, f: &HolFn, gamma: Option<f64>) -> Result<Self> {
        if info.omega_hat >= f.theta() {
            return Err(Error::Invalid(format!(
                "spectral angle {:.6} is not below the sector angle {:.6} of {}",
                info.omega_hat,
                f.theta(),
                f.name()
            )));
        }
        let gamma = gamma.unwrap_or(0.5 * (info.omega_hat + f.theta()));
        let a = (gamma - info.omega_hat).min(f.theta() - gamma);
        if a <= 0.0 {
            return Err(Error::Invalid(format!("contour angle {gamma} is not strictly between the spectral and sector angles")));
        }
        let (s, c) = match f.decay() {
            Some(d) => (d.s, d.c.max(f64::MIN_POSITIVE)),
            None => (1.0, 1.0),
        };
        let lo = if info.rho_min > 0.0 { info.rho_min } else { 1.0 };
        let hi = if info.rho_max > 0.0 { info.rho_max } else { 1.0 };
        let r_min = (TAIL_TARGET * s / c).powf(1.0 / s).min(1e-3 * lo);
        let r_max = (c / (TAIL_TARGET * s)).powf(1.0 / s).max(1e3 * hi);
        let h = 2.0 * PI * a / STRIP_FACTOR;
        let n = (((r_max / r_min).ln() / h).ceil() as usize + 1).min(MAX_NODES);
        Self::new(gamma, r_min, r_max, n | 1)
    }

    /// Nodes `u_k` and trapezoid weights.
    fn nodes(&self) -> Vec<(f64, f64)> {
        let (a, b) = (self.r_min.ln(), self.r_max.ln());
        let n = self.n_points;
        let h = (b - a) / (n - 1) as f64;
        (0..n)
            .map(|k| {
                let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
                (a + h * k as f64, w)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SpectralInfo {
    pub omega_hat: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub zero_tol: f64,
    pub has_zero: bool,
}

impl SpectralInfo {
    pub fn of(spec: &[C64]) -> Self {
        let rho_max = spec.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let zero_tol = ZERO_RTOL * rho_max.max(f64::MIN_POSITIVE);
        let mut omega_hat = 0.0f64;
        let mut rho_min = f64::INFINITY;
        let mut has_zero = false;
        for z in spec {
            if z.norm() <= zero_tol {
                has_zero = true;
            } else {
                omega_hat = omega_hat.max(z.arg().abs());
                rho_min = rho_min.min(z.norm());
            }
        }
        if !rho_min.is_finite() {
            rho_min = 0.0;
        }
        SpectralInfo { omega_hat, rho_min, rho_max, zero_tol, has_zero }
    }
}

/// Result of a quadrature-based calculus evaluation.
#[derive(Debug, Clone)]
pub struct CalculusResult {
    pub op: LpOperator,
    /// Half-grid discrepancy plus tail estimate, in the max-entry norm of the core.
    pub error_estimate: f64,
    pub spec: ContourSpec,
}

impl CalculusResult {
    pub fn within(&self, tol: f64) -> bool {
        self.error_estimate <= tol
    }
}

enum Core {
    Matrix(CMatrix),
    Symbol(CMatrix),
}

enum Rebuild {
    Left,
    Right,
    Dense,
    Schur,
    Frames { left: CMatrix, left_inv: CMatrix, right: CMatrix, right_inv: CMatrix },
    Projection(super::operator::TowerLevel),
    Amplified(Box<Rebuild>, usize),
}

impl Rebuild {
    fn build(&self, m: CMatrix) -> LpOperator {
        match self {
            Rebuild::Left => LpOperator::left(m).expect("square"),
            Rebuild::Right => LpOperator::right(m).expect("square"),
            Rebuild::Dense => LpOperator::dense(m).expect("square"),
            Rebuild::Schur => LpOperator::schur(m).expect("square"),
            Rebuild::Frames { left, left_inv, right, right_inv } => {
                LpOperator::conjugated(left.clone(), left_inv.clone(), m, right.clone(), right_inv.clone())
            }
            Rebuild::Projection(level) => LpOperator::projection_pair(*level, m[(0, 0)], m[(0, 1)]),
            Rebuild::Amplified(inner, k) => inner.build(m).amplify(*k).expect("k >= 1"),
        }
    }
}

fn decompose(op: &LpOperator) -> Result<(Core, Rebuild)> {
    Ok(match op.kind() {
        OpKind::LeftMult(a) => (Core::Matrix(a.clone()), Rebuild::Left),
        OpKind::RightMult(b) => (Core::Matrix(b.clone()), Rebuild::Right),
        OpKind::Dense(d) => (Core::Matrix(d.clone()), Rebuild::Dense),
        OpKind::SchurMult(m) => (Core::Symbol(m.clone()), Rebuild::Schur),
        OpKind::AdPair(a, b) => match (eigen_general(a), eigen_general(b)) {
            (Ok(ea), Ok(eb)) => {
                let n = a.nrows();
                let symbol = CMatrix::from_fn(n, n, |i, j| ea.values[i] - eb.values[j]);
                (
                    Core::Symbol(symbol),
                    Rebuild::Frames { left: ea.vectors, left_inv: ea.inverse, right: eb.vectors, right_inv: eb.inverse },
                )
            }
            (Err(Error::IllConditioned(_)), _) | (_, Err(Error::IllConditioned(_))) => {
                (Core::Matrix(op.materialize()?), Rebuild::Dense)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        },
        OpKind::Conjugated { left, left_inv, symbol, right, right_inv } => (
            Core::Symbol(symbol.clone()),
            Rebuild::Frames {
                left: left.clone(),
                left_inv: left_inv.clone(),
                right: right.clone(),
                right_inv: right_inv.clone(),
            },
        ),
        OpKind::CondExp(level) => (Core::Symbol(CMatrix::from_row_slice(1, 2, &[ONE, ZERO])), Rebuild::Projection(*level)),
        OpKind::ProjectionPair { level, on_range, on_kernel } => {
            (Core::Symbol(CMatrix::from_row_slice(1, 2, &[*on_range, *on_kernel])), Rebuild::Projection(*level))
        }
        OpKind::Amplified { inner, m } => {
            let (core, rb) = decompose(inner)?;
            (core, Rebuild::Amplified(Box::new(rb), *m))
        }
    })
}

fn core_spectrum(core: &Core) -> Result<Vec<C64>> {
    Ok(match core {
        Core::Matrix(c) => super::operator::matrix_spectrum(c)?,
        Core::Symbol(s) => s.iter().cloned().collect(),
    })
}

fn collision(z: C64, distance: f64) -> Error {
    Error::SpectralCollision { z: format!("{z}"), distance }
}

/// `R(z, A) = (z - A)^{-1}`.
pub fn resolvent(op: &LpOperator, z: C64) -> Result<LpOperator> {
    let (core, rb) = decompose(op)?;
    let spec = core_spectrum(&core)?;
    let scale = spec.iter().fold(1.0f64, |m, l| m.max(l.norm()));
    let dist = spec.iter().fold(f64::INFINITY, |m, l| m.min((z - l).norm()));
    if dist <= 1e-12 * scale {
        return Err(collision(z, dist));
    }
    let out = match core {
        Core::Matrix(c) => matrix_resolvent(&c, z).ok_or_else(|| collision(z, dist))?,
        Core::Symbol(s) => s.map(|l| ONE / (z - l)),
    };
    Ok(rb.build(out))
}

fn matrix_resolvent(c: &CMatrix, z: C64) -> Option<CMatrix> {
    let n = c.nrows();
    (CMatrix::identity(n, n) * z - c).try_inverse()
}

/// Checks that the spectrum sits strictly inside `Σ_γ` (zero allowed).
fn check_contour(spec: &[C64], contour: &ContourSpec) -> Result<()> {
    let info = SpectralInfo::of(spec);
    for &l in spec {
        let r = l.norm();
        if r <= info.zero_tol {
            continue;
        }
        let gap = contour.gamma - l.arg().abs();
        let distance = if gap >= PI / 2.0 { r } else { r * gap.sin() };
        if gap <= 0.0 || distance <= 1e-10 * info.rho_max {
            return Err(collision(C64::from_polar(r, contour.gamma * l.arg().signum()), distance.max(0.0)));
        }
    }
    Ok(())
}

/// `(1/2πi) Σ_k w_k [f(z_-) R(z_-) z_- - f(z_+) R(z_+) z_+]` on the core,
/// with a half-grid error estimate.
fn contour_core(core: &Core, f: &(dyn Fn(C64) -> C64 + Sync), contour: &ContourSpec, s: f64) -> Result<(CMatrix, f64)> {
    let nodes = contour.nodes();
    let dir_p = C64::from_polar(1.0, contour.gamma);
    let dir_m = dir_p.conj();
    let term = |u: f64| -> Option<CMatrix> {
        let r = u.exp();
        let (zp, zm) = (dir_p * r, dir_m * r);
        let (fp, fm) = (f(zp), f(zm));
        match core {
            Core::Matrix(c) => {
                let rp = matrix_resolvent(c, zp)?;
                let rm = matrix_resolvent(c, zm)?;
                Some(rm * (fm * zm) - rp * (fp * zp))
            }
            Core::Symbol(sym) => Some(sym.map(|l| fm * zm / (zm - l) - fp * zp / (zp - l))),
        }
    };
    let terms: Vec<Option<CMatrix>> = nodes.par_iter().map(|&(u, _)| term(u)).collect();
    let (rows, cols) = match core {
        Core::Matrix(c) | Core::Symbol(c) => c.shape(),
    };
    let mut full = CMatrix::zeros(rows, cols);
    let mut half = CMatrix::zeros(rows, cols);
    let n = nodes.len();
    for (k, (t, &(_, w))) in terms.iter().zip(&nodes).enumerate() {
        let t = t.as_ref().ok_or_else(|| collision(dir_p, 0.0))?;
        full += t * C64::from(w);
        if k % 2 == 0 {
            half += t * C64::from(2.0 * w);
        }
    }
    let scale = C64::new(0.0, -1.0 / (2.0 * PI));
    full *= scale;
    half *= scale;
    let tail = (max_abs(terms[0].as_ref().expect("checked")) + max_abs(terms[n - 1].as_ref().expect("checked")))
        / (2.0 * PI * s.max(1e-3));
    let err = max_abs(&(&full - &half)) + tail;
    Ok((full, err))
}

/// Zeroes entries of a symbol core below the zero tolerance.
fn kill_zero_symbols(sym: &CMatrix, out: &mut CMatrix) {
    let info = SpectralInfo::of(&sym.iter().cloned().collect::<Vec<_>>());
    for (o, l) in out.iter_mut().zip(sym.iter()) {
        if l.norm() <= info.zero_tol {
            *o = ZERO;
        }
    }
}

/// `f(A) = (1/2πi) ∫_{Γ_γ} f(z) R(z, A) dz` for `f ∈ H∞_0`.
pub fn contour_calculus(op: &LpOperator, f: &HolFn, contour: &ContourSpec) -> Result<CalculusResult> {
    if f.class() != FnClass::Hinf0 {
        return Err(Error::Invalid(format!(
            "{} is not in H-infinity_0; use the extended calculus",
            f.name()
        )));
    }
    if contour.gamma >= f.theta() {
        return Err(Error::Invalid(format!(
            "contour angle {} must be below the sector angle {} of {}",
            contour.gamma,
            f.theta(),
            f.name()
        )));
    }
    let (core, rb) = decompose(op)?;
    check_contour(&core_spectrum(&core)?, contour)?;
    let s = f.decay().map(|d| d.s).unwrap_or(1.0);
    let (mut out, err) = contour_core(&core, &|z| f.eval(z), contour, s)?;
    if let Core::Symbol(sym) = &core {
        kill_zero_symbols(sym, &mut out);
    }
    Ok(CalculusResult { op: rb.build(out), error_estimate: err, spec: *contour })
}

/// Contour calculus with an automatically chosen contour.
pub fn contour_calculus_auto(op: &LpOperator, f: &HolFn) -> Result<CalculusResult> {
    contour_calculus(op, f, &ContourSpec::auto(op, f)?)
}

/// Riesz projection onto the generalized kernel of a matrix core, by a
/// trapezoid rule on a small circle around the origin.
fn kernel_projection(c: &CMatrix, info: &SpectralInfo) -> Result<CMatrix> {
    let n = c.nrows();
    if !info.has_zero {
        return Ok(CMatrix::zeros(n, n));
    }
    if info.rho_min == 0.0 {
        return Ok(CMatrix::identity(n, n));
    }
    let radius = 0.5 * info.rho_min;
    let m = 256;
    let mut acc = CMatrix::zeros(n, n);
    for k in 0..m {
        let z = C64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / m as f64);
        let r = matrix_resolvent(c, z).ok_or_else(|| collision(z, radius))?;
        acc += r * z;
    }
    Ok(acc / C64::from(m as f64))
}

/// `f(A) = g(A)^{-1} (fg)(A)` on the range part, zero on the kernel, with
/// `g(z) = z / (1 + z)^2`. Accepts any bounded analytic `f`.
pub fn extended_calculus(op: &LpOperator, f: &HolFn, contour: Option<&ContourSpec>) -> Result<CalculusResult> {
    let g = HolFn::g();
    let fg = HolFn::product(f, &g);
    let (core, rb) = decompose(op)?;
    let spec = core_spectrum(&core)?;
    let info = SpectralInfo::of(&spec);
    match core {
        Core::Symbol(sym) => {
            let contour = match contour {
                Some(c) => *c,
                None => ContourSpec::auto_from(&info, &fg, None)?,
            };
            check_contour(&spec, &contour)?;
            let (num, e1) = contour_core(&Core::Symbol(sym.clone()), &|z| fg.eval(z), &contour, 1.0)?;
            let (den, e2) = contour_core(&Core::Symbol(sym.clone()), &|z| g.eval(z), &contour, 1.0)?;
            let mut out = num.zip_map(&den, |a, b| a / b);
            kill_zero_symbols(&sym, &mut out);
            let den_min = den
                .iter()
                .zip(sym.iter())
                .filter(|(_, l)| l.norm() > info.zero_tol)
                .fold(f64::INFINITY, |m, (d, _)| m.min(d.norm()));
            let err = if den_min.is_finite() { (e1 + e2 * f.bound()) / den_min } else { 0.0 };
            Ok(CalculusResult { op: rb.build(out), error_estimate: err, spec: contour })
        }
        Core::Matrix(c) => {
            let n = c.nrows();
            if info.rho_max == 0.0 {
                return Ok(CalculusResult {
                    op: rb.build(CMatrix::zeros(n, n)),
                    error_estimate: 0.0,
                    spec: contour.copied().unwrap_or(ContourSpec::new(0.5, 1e-3, 1e3, 8)?),
                });
            }
            let p0 = kernel_projection(&c, &info)?;
            let shifted = &c + &p0 * C64::from(info.rho_min.max(info.zero_tol));
            let sinfo = SpectralInfo::of(&super::operator::matrix_spectrum(&shifted)?);
            let contour = match contour {
                Some(k) => *k,
                None => ContourSpec::auto_from(&sinfo, &fg, None)?,
            };
            let core = Core::Matrix(shifted);
            check_contour(&core_spectrum(&core)?, &contour)?;
            let (num, e1) = contour_core(&core, &|z| fg.eval(z), &contour, 1.0)?;
            let (den, e2) = contour_core(&core, &|z| g.eval(z), &contour, 1.0)?;
            let den_inv = den
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numeric("g(A) is singular on the range component".into()))?;
            let inv_norm = crate::matrix::operator_norm(&den_inv)?;
            let out = &den_inv * num * (CMatrix::identity(n, n) - p0);
            let err = inv_norm * (e1 + e2 * f.bound() * inv_norm * crate::matrix::operator_norm(&den)?);
            Ok(CalculusResult { op: rb.build(out), error_estimate: err, spec: contour })
        }
    }
}

/// `A^{is}` on the range component of `A`.
pub fn imaginary_power(op: &LpOperator, s: f64, contour: Option<&ContourSpec>) -> Result<CalculusResult> {
    extended_calculus(op, &HolFn::zis(s), contour)
}

/// `V f(Λ) V^{-1}` on the core, with `f(0)` replaced by zero on the kernel.
pub fn eigen_calculus(op: &LpOperator, f: &dyn Fn(C64) -> C64) -> Result<LpOperator> {
    let (core, rb) = decompose(op)?;
    let info = SpectralInfo::of(&core_spectrum(&core)?);
    let ring = |z: C64| if z.norm() <= info.zero_tol { ZERO } else { f(z) };
    let out = match core {
        Core::Symbol(s) => s.map(ring),
        Core::Matrix(c) => eigen_general(&c)?.reconstruct_with(ring),
    };
    Ok(rb.build(out))
}

/// Eigendecomposition of an operator kept for evaluating many functions of it.
pub struct EigenPrep {
    core: PrepCore,
    rebuild: Rebuild,
    zero_tol: f64,
    spectrum: Vec<C64>,
}

enum PrepCore {
    Symbol(CMatrix),
    Matrix(crate::matrix::EigenSystem),
}

impl EigenPrep {
    pub fn new(op: &LpOperator) -> Result<Self> {
        let (core, rebuild) = decompose(op)?;
        let spectrum = core_spectrum(&core)?;
        let zero_tol = SpectralInfo::of(&spectrum).zero_tol;
        let core = match core {
            Core::Symbol(s) => PrepCore::Symbol(s),
            Core::Matrix(c) => PrepCore::Matrix(eigen_general(&c)?),
        };
        Ok(EigenPrep { core, rebuild, zero_tol, spectrum })
    }

    pub fn spectrum(&self) -> &[C64] {
        &self.spectrum
    }

    /// `f(A)` with `f(0)` replaced by zero on the kernel.
    pub fn operator(&self, f: &dyn Fn(C64) -> C64) -> LpOperator {
        let ring = |z: C64| if z.norm() <= self.zero_tol { ZERO } else { f(z) };
        let out = match &self.core {
            PrepCore::Symbol(s) => s.map(ring),
            PrepCore::Matrix(e) => e.reconstruct_with(ring),
        };
        self.rebuild.build(out)
    }
}

/// Oracle through the eigendecomposition of the materialized superoperator.
pub fn eigen_calculus_dense(op: &LpOperator, f: &dyn Fn(C64) -> C64) -> Result<LpOperator> {
    let d = op.materialize()?;
    eigen_calculus(&LpOperator::dense(d)?, f)
}

/// `T_t = e^{-tA}`.
pub fn semigroup(op: &LpOperator, t: f64) -> Result<LpOperator> {
    let (core, rb) = decompose(op)?;
    let out = match core {
        Core::Symbol(s) => s.map(|l| (-l * t).exp()),
        Core::Matrix(c) => (c * C64::from(-t)).exp(),
    };
    Ok(rb.build(out))
}

/// `f` applied to the core without any kernel convention.
pub fn scalar_map(op: &LpOperator, f: &dyn Fn(C64) -> C64) -> Result<LpOperator> {
    let (core, rb) = decompose(op)?;
    let out = match core {
        Core::Symbol(s) => s.map(f),
        Core::Matrix(c) => eigen_general(&c)?.reconstruct_with(f),
    };
    Ok(rb.build(out))
}

/// Sampled sectoriality data.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SectorProfile {
    pub omega_hat: f64,
    /// `(θ, K_θ)` with `K_θ = max ‖z R(z, A)‖` over the sampled rays.
    pub constants: Vec<(f64, f64)>,
}

/// Points `r e^{±iθ}` with `count` log-spaced radii in `[1e-3, 1e3] ρ` per ray.
pub fn ray_points(theta: f64, rho: f64, count: usize) -> Vec<C64> {
    let mut pts = Vec::with_capacity(2 * count);
    for sgn in [1.0, -1.0] {
        for k in 0..count {
            let r = rho * 10f64.powf(-3.0 + 6.0 * k as f64 / (count - 1).max(1) as f64);
            pts.push(C64::from_polar(r, sgn * theta));
        }
    }
    pts
}

/// Spectral angle and sampled resolvent bounds `K_θ`. At `p = 2` the norms
/// are exact; otherwise they are power-iteration lower bounds.
pub fn sector_type(op: &LpOperator, thetas: &[f64], p: crate::matrix::PExponent, seed: u64) -> Result<SectorProfile> {
    let spec = op.spectrum()?;
    let info = SpectralInfo::of(&spec);
    let rho = if info.rho_max > 0.0 { info.rho_max } else { 1.0 };
    let mut constants = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        if theta <= info.omega_hat || theta >= PI {
            return Err(Error::Invalid(format!(
                "probe angle {theta} must lie in ({}, pi)",
                info.omega_hat
            )));
        }
        let mut k = 0.0f64;
        for z in ray_points(theta, rho, 64) {
            let zr = scale_op(&resolvent(op, z)?, z);
            let n = super::opnorm::superop_norm(&zr, p, &super::opnorm::NormCfg { seed, ..Default::default() })?.value;
            k = k.max(n);
        }
        constants.push((theta, k));
    }
    Ok(SectorProfile { omega_hat: info.omega_hat, constants })
}

/// Default probe angles: seven equally spaced values strictly between the
/// spectral angle and `π`.
pub fn default_thetas(op: &LpOperator) -> Result<Vec<f64>> {
    let w = SpectralInfo::of(&op.spectrum()?).omega_hat;
    Ok((1..8).map(|k| w + (PI - w) * k as f64 / 8.0).collect())
}

/// `z · T` for a structured operator.
pub fn scale_op(op: &LpOperator, z: C64) -> LpOperator {
    match op.kind() {
        OpKind::LeftMult(a) => LpOperator::left(a * z).expect("square"),
        OpKind::RightMult(b) => LpOperator::right(b * z).expect("square"),
        OpKind::SchurMult(m) => LpOperator::schur(m * z).expect("square"),
        OpKind::Dense(d) => LpOperator::dense(d * z).expect("square"),
        OpKind::AdPair(a, b) => LpOperator::ad_pair(a * z, b * z).expect("square"),
        OpKind::Conjugated { left, left_inv, symbol, right, right_inv } => {
            LpOperator::conjugated(left.clone(), left_inv.clone(), symbol * z, right.clone(), right_inv.clone())
        }
        OpKind::CondExp(level) => LpOperator::projection_pair(*level, z, ZERO),
        OpKind::ProjectionPair { level, on_range, on_kernel } => {
            LpOperator::projection_pair(*level, on_range * z, on_kernel * z)
        }
        OpKind::Amplified { inner, m } => scale_op(inner, z).amplify(*m).expect("m >= 1"),
    }
}
