//! Structured linear maps on `M_d`.

use crate::error::{Error, Result};
use crate::matrix::{check_finite, max_abs, CMatrix, C64, ONE, ZERO};

/// Largest matrix size for which a superoperator is materialized as a
/// `d^2 x d^2` matrix.
pub const MAX_MATERIALIZE_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    /// `E_k` keeps the first `k` tensor factors; `E_0` is the normalized trace.
    Increasing,
    /// `E_k` keeps the last `N - k` factors; `E_N` is the normalized trace.
    Decreasing,
}

/// Conditional expectation of `M_2^{⊗N}` onto a tensor sub-block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TowerLevel {
    pub factors: usize,
    pub index: usize,
    pub direction: Direction,
}

impl TowerLevel {
    pub fn new(factors: usize, index: usize, direction: Direction) -> Result<Self> {
        if factors > 10 {
            return Err(Error::TooLarge(format!("tower with {factors} factors exceeds 10")));
        }
        if index > factors {
            return Err(Error::Invalid(format!("level {index} is outside 0..={factors}")));
        }
        Ok(TowerLevel { factors, index, direction })
    }

    pub fn dim(&self) -> usize {
        1 << self.factors
    }

    /// `(kept factors at the front, kept factors at the back)`.
    fn kept(&self) -> (usize, usize) {
        match self.direction {
            Direction::Increasing => (self.index, 0),
            Direction::Decreasing => (0, self.factors - self.index),
        }
    }

    /// Identity on the kept factors, normalized trace on the others.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let (front, back) = self.kept();
        let n = self.factors;
        let traced = n - front - back;
        let (df, dt, db) = (1usize << front, 1usize << traced, 1usize << back);
        let idx = |f: usize, t: usize, b: usize| (f * dt + t) * db + b;
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        let norm = C64::from(1.0 / dt as f64);
        for f1 in 0..df {
            for f2 in 0..df {
                for b1 in 0..db {
                    for b2 in 0..db {
                        let mut acc = ZERO;
                        for t in 0..dt {
                            acc += x[(idx(f1, t, b1), idx(f2, t, b2))];
                        }
                        acc *= norm;
                        for t in 0..dt {
                            out[(idx(f1, t, b1), idx(f2, t, b2))] = acc;
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpKind {
    /// `x -> a x`
    LeftMult(CMatrix),
    /// `x -> x b`
    RightMult(CMatrix),
    /// `x -> m ⊙ x`
    SchurMult(CMatrix),
    /// `x -> a x - x b`
    AdPair(CMatrix, CMatrix),
    CondExp(TowerLevel),
    /// Matrix acting on column-major `vec(x)`.
    Dense(CMatrix),
    /// `x -> left (symbol ⊙ (left_inv x right)) right_inv`
    Conjugated { left: CMatrix, left_inv: CMatrix, symbol: CMatrix, right: CMatrix, right_inv: CMatrix },
    /// `x -> on_range E(x) + on_kernel (x - E(x))`
    ProjectionPair { level: TowerLevel, on_range: C64, on_kernel: C64 },
    /// `id_{M_m} ⊗ inner`, acting blockwise on `M_m(M_d)`.
    Amplified { inner: Box<LpOperator>, m: usize },
}

/// Linear map on `M_d` in structured form.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOperator {
    kind: OpKind,
    dim: usize,
}

fn square(a: &CMatrix, what: &str) -> Result<usize> {
    check_finite(a)?;
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!("{what} must be square, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(a.nrows())
}

pub(crate) fn vec_index(i: usize, j: usize, d: usize) -> usize {
    i + j * d
}

pub(crate) fn vectorize(x: &CMatrix) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(x.as_slice())
}

pub(crate) fn unvectorize(v: &nalgebra::DVector<C64>, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

impl LpOperator {
    pub fn left(a: CMatrix) -> Result<Self> {
        let dim = square(&a, "left multiplier")?;
        Ok(LpOperator { kind: OpKind::LeftMult(a), dim })
    }

    pub fn right(b: CMatrix) -> Result<Self> {
        let dim = square(&b, "right multiplier")?;
        Ok(LpOperator { kind: OpKind::RightMult(b), dim })
    }

    pub fn schur(m: CMatrix) -> Result<Self> {
        let dim = square(&m, "Schur symbol")?;
        Ok(LpOperator { kind: OpKind::SchurMult(m), dim })
    }

    pub fn ad_pair(a: CMatrix, b: CMatrix) -> Result<Self> {
        let dim = square(&a, "left factor")?;
        if square(&b, "right factor")? != dim {
            return Err(Error::Shape("Ad pair factors must have equal size".into()));
        }
        Ok(LpOperator { kind: OpKind::AdPair(a, b), dim })
    }

    pub fn cond_exp(level: TowerLevel) -> Self {
        LpOperator { kind: OpKind::CondExp(level), dim: level.dim() }
    }

    pub fn dense(d: CMatrix) -> Result<Self> {
        let n = square(&d, "superoperator")?;
        let dim = (n as f64).sqrt().round() as usize;
        if dim * dim != n {
            return Err(Error::Shape(format!("superoperator size {n} is not a perfect square")));
        }
        Ok(LpOperator { kind: OpKind::Dense(d), dim })
    }

    pub(crate) fn conjugated(left: CMatrix, left_inv: CMatrix, symbol: CMatrix, right: CMatrix, right_inv: CMatrix) -> Self {
        let dim = left.nrows();
        LpOperator { kind: OpKind::Conjugated { left, left_inv, symbol, right, right_inv }, dim }
    }

    pub(crate) fn projection_pair(level: TowerLevel, on_range: C64, on_kernel: C64) -> Self {
        LpOperator { kind: OpKind::ProjectionPair { level, on_range, on_kernel }, dim: level.dim() }
    }

    pub fn identity(dim: usize) -> Self {
        LpOperator { kind: OpKind::LeftMult(CMatrix::identity(dim, dim)), dim }
    }

    /// Builds a Dense operator from a closure by applying it to matrix units.
    pub fn from_fn<F: Fn(&CMatrix) -> CMatrix>(dim: usize, f: F) -> Result<Self> {
        Self::dense(materialize_fn(dim, f)?)
    }

    pub fn kind(&self) -> &OpKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::Shape(format!(
                "operator acts on {}x{} matrices, got {}x{}",
                self.dim,
                self.dim,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CMatrix) -> CMatrix {
        match &self.kind {
            OpKind::LeftMult(a) => a * x,
            OpKind::RightMult(b) => x * b,
            OpKind::SchurMult(m) => m.component_mul(x),
            OpKind::AdPair(a, b) => a * x - x * b,
            OpKind::CondExp(level) => level.apply(x),
            OpKind::Dense(d) => unvectorize(&(d * vectorize(x)), self.dim),
            OpKind::Conjugated { left, left_inv, symbol, right, right_inv } => {
                left * symbol.component_mul(&(left_inv * x * right)) * right_inv
            }
            OpKind::ProjectionPair { level, on_range, on_kernel } => {
                let e = level.apply(x);
                &e * *on_range + (x - &e) * *on_kernel
            }
            OpKind::Amplified { inner, m } => {
                let d = inner.dim;
                let mut out = CMatrix::zeros(self.dim, self.dim);
                for bi in 0..*m {
                    for bj in 0..*m {
                        let block = x.view((bi * d, bj * d), (d, d)).into_owned();
                        out.view_mut((bi * d, bj * d), (d, d)).copy_from(&inner.apply_unchecked(&block));
                    }
                }
                out
            }
        }
    }

    /// `d^2 x d^2` matrix acting on column-major `vec(x)`.
    pub fn materialize(&self) -> Result<CMatrix> {
        if let OpKind::Dense(d) = &self.kind {
            return Ok(d.clone());
        }
        materialize_fn(self.dim, |x| self.apply_unchecked(x))
    }

    /// Adjoint for the Hilbert–Schmidt inner product `tr(x* y)`.
    pub fn adjoint(&self) -> LpOperator {
        let kind = match &self.kind {
            OpKind::LeftMult(a) => OpKind::LeftMult(a.adjoint()),
            OpKind::RightMult(b) => OpKind::RightMult(b.adjoint()),
            OpKind::SchurMult(m) => OpKind::SchurMult(m.conjugate()),
            OpKind::AdPair(a, b) => OpKind::AdPair(a.adjoint(), b.adjoint()),
            OpKind::CondExp(level) => OpKind::CondExp(*level),
            OpKind::Dense(d) => OpKind::Dense(d.adjoint()),
            OpKind::Conjugated { left, left_inv, symbol, right, right_inv } => OpKind::Conjugated {
                left: left_inv.adjoint(),
                left_inv: left.adjoint(),
                symbol: symbol.conjugate(),
                right: right_inv.adjoint(),
                right_inv: right.adjoint(),
            },
            OpKind::ProjectionPair { level, on_range, on_kernel } => {
                OpKind::ProjectionPair { level: *level, on_range: on_range.conj(), on_kernel: on_kernel.conj() }
            }
            OpKind::Amplified { inner, m } => OpKind::Amplified { inner: Box::new(inner.adjoint()), m: *m },
        };
        LpOperator { kind, dim: self.dim }
    }

    /// `id_{M_m} ⊗ self`.
    pub fn amplify(&self, m: usize) -> Result<LpOperator> {
        if m == 0 {
            return Err(Error::Invalid("amplification level must be at least 1".into()));
        }
        Ok(LpOperator { kind: OpKind::Amplified { inner: Box::new(self.clone()), m }, dim: m * self.dim })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LpOperator) -> Result<LpOperator> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("cannot compose maps on M_{} and M_{}", self.dim, other.dim)));
        }
        let dim = self.dim;
        let kind = match (&self.kind, &other.kind) {
            (OpKind::LeftMult(a), OpKind::LeftMult(b)) => OpKind::LeftMult(a * b),
            (OpKind::RightMult(a), OpKind::RightMult(b)) => OpKind::RightMult(b * a),
            (OpKind::SchurMult(a), OpKind::SchurMult(b)) => OpKind::SchurMult(a.component_mul(b)),
            _ => OpKind::Dense(self.materialize()? * other.materialize()?),
        };
        Ok(LpOperator { kind, dim })
    }

    /// `self + other`.
    pub fn add(&self, other: &LpOperator) -> Result<LpOperator> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("cannot add maps on M_{} and M_{}", self.dim, other.dim)));
        }
        let kind = match (&self.kind, &other.kind) {
            (OpKind::LeftMult(a), OpKind::LeftMult(b)) => OpKind::LeftMult(a + b),
            (OpKind::RightMult(a), OpKind::RightMult(b)) => OpKind::RightMult(a + b),
            (OpKind::SchurMult(a), OpKind::SchurMult(b)) => OpKind::SchurMult(a + b),
            _ => OpKind::Dense(self.materialize()? + other.materialize()?),
        };
        Ok(LpOperator { kind, dim: self.dim })
    }

    /// The map `y -> T(y*)*`, which carries column norms to row norms.
    pub fn star_conjugate(&self) -> Result<LpOperator> {
        let kind = match &self.kind {
            OpKind::LeftMult(a) => OpKind::RightMult(a.adjoint()),
            OpKind::RightMult(b) => OpKind::LeftMult(b.adjoint()),
            OpKind::SchurMult(m) => OpKind::SchurMult(m.adjoint()),
            OpKind::AdPair(a, b) => OpKind::AdPair(-b.adjoint(), -a.adjoint()),
            OpKind::CondExp(level) => OpKind::CondExp(*level),
            _ => return LpOperator::from_fn(self.dim, |y| self.apply_unchecked(&y.adjoint()).adjoint()),
        };
        Ok(LpOperator { kind, dim: self.dim })
    }

    /// `self + eps I`.
    pub fn shifted(&self, eps: f64) -> Result<LpOperator> {
        let e = C64::from(eps);
        let id = CMatrix::identity(self.dim, self.dim);
        let kind = match &self.kind {
            OpKind::LeftMult(a) => OpKind::LeftMult(a + &id * e),
            OpKind::RightMult(b) => OpKind::RightMult(b + &id * e),
            OpKind::SchurMult(m) => OpKind::SchurMult(m.add_scalar(e)),
            OpKind::AdPair(a, b) => OpKind::AdPair(a + &id * e, b.clone()),
            OpKind::CondExp(level) => OpKind::ProjectionPair { level: *level, on_range: ONE + e, on_kernel: e },
            OpKind::Dense(d) => OpKind::Dense(d + CMatrix::identity(d.nrows(), d.nrows()) * e),
            OpKind::Conjugated { left, left_inv, symbol, right, right_inv } => OpKind::Conjugated {
                left: left.clone(),
                left_inv: left_inv.clone(),
                symbol: symbol.add_scalar(e),
                right: right.clone(),
                right_inv: right_inv.clone(),
            },
            OpKind::ProjectionPair { level, on_range, on_kernel } => {
                OpKind::ProjectionPair { level: *level, on_range: on_range + e, on_kernel: on_kernel + e }
            }
            OpKind::Amplified { inner, m } => OpKind::Amplified { inner: Box::new(inner.shifted(eps)?), m: *m },
        };
        Ok(LpOperator { kind, dim: self.dim })
    }

    /// Eigenvalues of the map. Structured kinds report the values of their
    /// symbol (without multiplicities); Dense kinds go through the Schur form.
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        Ok(match &self.kind {
            OpKind::LeftMult(a) | OpKind::RightMult(a) => matrix_spectrum(a)?,
            OpKind::SchurMult(m) | OpKind::Conjugated { symbol: m, .. } => m.iter().cloned().collect(),
            OpKind::AdPair(a, b) => {
                let (ea, eb) = (matrix_spectrum(a)?, matrix_spectrum(b)?);
                ea.iter().flat_map(|x| eb.iter().map(move |y| x - y)).collect()
            }
            OpKind::CondExp(level) => {
                if level.kept().0 + level.kept().1 == level.factors {
                    vec![ONE]
                } else {
                    vec![ONE, ZERO]
                }
            }
            OpKind::ProjectionPair { on_range, on_kernel, .. } => vec![*on_range, *on_kernel],
            OpKind::Dense(d) => matrix_spectrum(d)?,
            OpKind::Amplified { inner, .. } => inner.spectrum()?,
        })
    }

    /// Spot check that the structured action agrees with its materialization
    /// on a random matrix.
    pub fn self_check(&self, seed: u64) -> Result<f64> {
        let mut rng = crate::random::seeded(seed);
        let x = crate::random::gaussian_matrix(&mut rng, self.dim, self.dim);
        let direct = self.apply_unchecked(&x);
        let via = unvectorize(&(self.materialize()? * vectorize(&x)), self.dim);
        Ok(max_abs(&(direct - via)))
    }
}

fn materialize_fn<F: Fn(&CMatrix) -> CMatrix>(dim: usize, f: F) -> Result<CMatrix> {
    if dim > MAX_MATERIALIZE_DIM {
        return Err(Error::TooLarge(format!(
            "materializing a map on M_{dim} needs a {}x{} matrix; the limit is M_{MAX_MATERIALIZE_DIM}",
            dim * dim,
            dim * dim
        )));
    }
    let n = dim * dim;
    let mut out = CMatrix::zeros(n, n);
    for j in 0..dim {
        for i in 0..dim {
            let mut e = CMatrix::zeros(dim, dim);
            e[(i, j)] = ONE;
            let col = vectorize(&f(&e));
            out.column_mut(vec_index(i, j, dim)).copy_from(&col);
        }
    }
    Ok(out)
}

/// Eigenvalues from the complex Schur form; no diagonalizability needed.
pub fn matrix_spectrum(a: &CMatrix) -> Result<Vec<C64>> {
    check_finite(a)?;
    let schur = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}
