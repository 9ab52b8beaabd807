//! Spin systems: anticommuting hermitian unitaries `W_1, …, W_n` on
//! `C^{2^n}` built from Z-strings, and the maps acting diagonally on the
//! products `V_F = W_{i_1} ⋯ W_{i_k}`, `i_1 < … < i_k`.
//!
//! Every `V_F` has exactly one nonzero entry per row, so they are stored as
//! monomial matrices. Maps defined on `span{V_F}` are extended to all of
//! `M_{2^n}` by first taking the trace-preserving conditional expectation
//! onto that span.

use crate::error::{Error, Result};
use crate::funcalc::LpOperator;
use crate::matrix::{CMatrix, C64, ONE, ZERO};

/// Largest spin count.
pub const MAX_SPINS: usize = 10;

/// Largest spin count for which maps are materialized as operators.
pub const MAX_OPERATOR_SPINS: usize = 5;

/// Matrix with entry `phase[r]` at `(r, col[r])` and zeros elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub col: Vec<usize>,
    pub phase: Vec<C64>,
}

impl Monomial {
    pub fn identity(dim: usize) -> Self {
        Monomial { col: (0..dim).collect(), phase: vec![ONE; dim] }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let col = self.col.iter().map(|&c| other.col[c]).collect();
        let phase = self.phase.iter().zip(&self.col).map(|(p, &c)| p * other.phase[c]).collect();
        Monomial { col, phase }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.col.len();
        let mut m = CMatrix::zeros(n, n);
        for (r, (&c, &p)) in self.col.iter().zip(&self.phase).enumerate() {
            m[(r, c)] = p;
        }
        m
    }

    /// Normalized trace `τ(V* x)`.
    pub fn coefficient(&self, x: &CMatrix) -> C64 {
        let s: C64 = self.col.iter().zip(&self.phase).enumerate().map(|(r, (&c, p))| p.conj() * x[(r, c)]).sum();
        s / C64::from(self.col.len() as f64)
    }

    /// Normalized trace.
    pub fn trace(&self) -> C64 {
        let s: C64 = self.col.iter().zip(&self.phase).enumerate().filter(|(r, (c, _))| r == *c).map(|(_, (_, p))| *p).sum();
        s / C64::from(self.col.len() as f64)
    }
}

/// Generators and all products `V_F`, indexed by the bitmask of `F`.
#[derive(Debug, Clone)]
pub struct SpinRep {
    n: usize,
    generators: Vec<Monomial>,
    products: Vec<Monomial>,
}

/// `Z ⊗ … ⊗ Z ⊗ X ⊗ I ⊗ … ⊗ I` with `X` in slot `i` (0-based), first
/// factor most significant.
fn z_string(n: usize, i: usize) -> Monomial {
    let dim = 1usize << n;
    let flip = 1usize << (n - 1 - i);
    let before: usize = (0..i).map(|j| 1usize << (n - 1 - j)).sum();
    let col = (0..dim).map(|r| r ^ flip).collect();
    let phase = (0..dim).map(|r| if (r & before).count_ones() % 2 == 1 { -ONE } else { ONE }).collect();
    Monomial { col, phase }
}

/// Representation of `n` spins on `C^{2^n}`.
pub fn spin_generators(n: usize) -> Result<SpinRep> {
    if n == 0 || n > MAX_SPINS {
        return Err(Error::TooLarge(format!("spin count {n} outside 1..={MAX_SPINS}")));
    }
    let generators: Vec<Monomial> = (0..n).map(|i| z_string(n, i)).collect();
    let mut products = vec![Monomial::identity(1 << n)];
    for mask in 1usize..1 << n {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let rest = mask & !(1 << top);
        products.push(products[rest].mul(&generators[top]));
    }
    Ok(SpinRep { n, generators, products })
}

impl SpinRep {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn generator(&self, i: usize) -> &Monomial {
        &self.generators[i]
    }

    /// `V_F` for `F` given as a bitmask over the generators.
    pub fn product(&self, mask: usize) -> &Monomial {
        &self.products[mask]
    }

    /// `(mask, τ(V_F* x))` for every `F`.
    pub fn coefficients(&self, x: &CMatrix) -> Vec<C64> {
        self.products.iter().map(|v| v.coefficient(x)).collect()
    }

    /// `Σ_F c_F V_F`.
    pub fn synthesize(&self, coeffs: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for (v, &c) in self.products.iter().zip(coeffs) {
            if c == ZERO {
                continue;
            }
            for (r, (&col, &p)) in v.col.iter().zip(&v.phase).enumerate() {
                out[(r, col)] += c * p;
            }
        }
        out
    }
}

/// Map `V_F -> m(|F|) V_F`, composed with the conditional expectation onto
/// `span{V_F}`.
#[derive(Debug, Clone)]
pub struct CliffordMap {
    rep: SpinRep,
    /// `m(k)` for `k = 0..=n`.
    multipliers: Vec<C64>,
}

impl CliffordMap {
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let d = self.rep.dim();
        if x.shape() != (d, d) {
            return Err(Error::Shape(format!("expected a {d}x{d} matrix, got {}x{}", x.nrows(), x.ncols())));
        }
        let coeffs: Vec<C64> = self
            .rep
            .coefficients(x)
            .into_iter()
            .enumerate()
            .map(|(mask, c)| c * self.multipliers[mask.count_ones() as usize])
            .collect();
        Ok(self.rep.synthesize(&coeffs))
    }

    pub fn rep(&self) -> &SpinRep {
        &self.rep
    }

    pub fn multiplier(&self, k: usize) -> C64 {
        self.multipliers[k]
    }

    /// Dense superoperator; available up to [`MAX_OPERATOR_SPINS`] spins.
    pub fn to_operator(&self) -> Result<LpOperator> {
        if self.rep.n > MAX_OPERATOR_SPINS {
            return Err(Error::TooLarge(format!(
                "materializing a map on {} spins exceeds {MAX_OPERATOR_SPINS}",
                self.rep.n
            )));
        }
        LpOperator::from_fn(self.rep.dim(), |x| self.apply(x).expect("shape checked"))
    }
}

/// `V_F -> f(|F|) V_F`.
pub fn clifford_multiplier(rep: &SpinRep, f: &dyn Fn(usize) -> C64) -> CliffordMap {
    CliffordMap { rep: rep.clone(), multipliers: (0..=rep.n).map(f).collect() }
}

/// `T_t(V_F) = e^{-t|F|} V_F`.
pub fn clifford_semigroup(rep: &SpinRep, t: f64) -> Result<CliffordMap> {
    if !(t >= 0.0) {
        return Err(Error::Invalid(format!("semigroup time must be nonnegative, got {t}")));
    }
    Ok(clifford_multiplier(rep, &|k| C64::from((-t * k as f64).exp())))
}
