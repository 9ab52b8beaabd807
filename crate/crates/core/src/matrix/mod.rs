//! Dense complex matrices as elements of the Schatten classes `S^p`.
//!
//! The trace is the ordinary (unnormalized) matrix trace throughout this
//! module. Norms are computed from singular values; positive square roots and
//! moduli go through the hermitian eigensolver.

mod eigen;
pub(crate) mod io;

pub use eigen::{eigen_general, hermitian_eigen, EigenSystem};
pub use io::{parse_matrix, write_matrix};

use std::fmt;

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative tolerance used for hermiticity checks and PSD eigenvalue clamping.
pub const HERMITIAN_RTOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Exponent `1 <= p <= inf` of a Schatten class.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct PExponent(f64);

impl PExponent {
    pub const ONE: PExponent = PExponent(1.0);
    pub const TWO: PExponent = PExponent(2.0);
    pub const INFINITY: PExponent = PExponent(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 1.0 {
            return Err(Error::Invalid(format!("exponent p = {value} must satisfy 1 <= p <= inf")));
        }
        Ok(PExponent(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// The conjugate exponent `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> PExponent {
        if self.0 == 1.0 {
            PExponent::INFINITY
        } else if self.0.is_infinite() {
            PExponent::ONE
        } else {
            PExponent(self.0 / (self.0 - 1.0))
        }
    }

    /// `p/2`, used when passing from `|x|` to `x*x`. Only meaningful for `p >= 2`.
    pub fn half(self) -> f64 {
        self.0 / 2.0
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for PExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(PExponent::INFINITY);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Invalid(format!("cannot parse exponent '{s}'")))?;
        PExponent::new(v)
    }
}

pub fn check_finite(x: &CMatrix) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Shape("matrix must have at least one row and one column".into()));
    }
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric("matrix has non-finite entries".into()))
    }
}

/// Thin singular value decomposition `x = U diag(s) V*`.
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: DVector<f64>,
    pub v_t: CMatrix,
}

fn svd_failure(x: &CMatrix) -> Error {
    let fro = x.norm();
    Error::Numeric(format!(
        "singular value decomposition did not converge ({}x{} matrix, Frobenius norm {fro:e})",
        x.nrows(),
        x.ncols()
    ))
}

pub fn svd(x: &CMatrix) -> Result<Svd> {
    check_finite(x)?;
    let d = SVD::try_new(x.clone(), true, true, f64::EPSILON, 10_000).ok_or_else(|| svd_failure(x))?;
    Ok(Svd {
        u: d.u.expect("requested"),
        singular_values: d.singular_values,
        v_t: d.v_t.expect("requested"),
    })
}

/// Aspect ratio from which tall or wide matrices are first reduced by QR.
pub(crate) const REDUCE_ASPECT: usize = 4;

/// Square triangular factor carrying the singular values of a tall (or,
/// through the adjoint, wide) matrix; `None` for nearly square input.
pub(crate) fn triangular_factor(x: &CMatrix) -> Option<CMatrix> {
    let (r, c) = x.shape();
    if r >= REDUCE_ASPECT * c {
        Some(x.clone().qr().r())
    } else if c >= REDUCE_ASPECT * r {
        Some(x.adjoint().qr().r())
    } else {
        None
    }
}

pub fn singular_values(x: &CMatrix) -> Result<DVector<f64>> {
    check_finite(x)?;
    let reduced = triangular_factor(x);
    SVD::try_new(reduced.unwrap_or_else(|| x.clone()), false, false, f64::EPSILON, 10_000)
        .map(|d| d.singular_values)
        .ok_or_else(|| svd_failure(x))
}

/// `(sum s_i^p)^(1/p)` of a list of nonnegative values, or the maximum when `p = inf`.
pub fn lp_of_values<'a, I>(values: I, p: PExponent) -> f64
where
    I: IntoIterator<Item = &'a f64>,
{
    let vals: Vec<f64> = values.into_iter().map(|v| v.abs()).collect();
    let top = vals.iter().cloned().fold(0.0, f64::max);
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    let pv = p.value();
    let s: f64 = vals.iter().map(|v| (v / top).powf(pv)).sum();
    top * s.powf(1.0 / pv)
}

/// Schatten p-norm, `(tr |x|^p)^(1/p)`.
pub fn schatten_norm(x: &CMatrix, p: PExponent) -> Result<f64> {
    let s = singular_values(x)?;
    Ok(lp_of_values(s.iter(), p))
}

pub fn operator_norm(x: &CMatrix) -> Result<f64> {
    schatten_norm(x, PExponent::INFINITY)
}

/// `‖y^{1/2}‖_p` for a PSD `y`, i.e. `‖y‖_{p/2}^{1/2}` read off the eigenvalues.
pub fn sqrt_psd_norm(y: &CMatrix, p: PExponent) -> Result<f64> {
    let (vals, _) = hermitian_eigen(y)?;
    let tol = psd_tolerance(&vals);
    if let Some(min) = vals.iter().cloned().reduce(f64::min) {
        if min < -tol {
            return Err(Error::NotPsd { min, tol });
        }
    }
    let roots: Vec<f64> = vals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    Ok(lp_of_values(roots.iter(), p))
}

fn psd_tolerance(vals: &DVector<f64>) -> f64 {
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    HERMITIAN_RTOL * scale.max(f64::MIN_POSITIVE)
}

pub fn adjoint(x: &CMatrix) -> CMatrix {
    x.adjoint()
}

/// Positive square root of a hermitian PSD matrix; eigenvalues in
/// `[-tol, 0)` are clamped to zero.
pub fn psd_sqrt(x: &CMatrix) -> Result<CMatrix> {
    psd_power(x, 0.5)
}

/// `x^r` for hermitian PSD `x` and `r > 0`.
pub fn psd_power(x: &CMatrix, r: f64) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(x)?;
    let tol = psd_tolerance(&vals);
    if let Some(min) = vals.iter().cloned().reduce(f64::min) {
        if min < -tol {
            return Err(Error::NotPsd { min, tol });
        }
    }
    let scaled = DVector::from_iterator(vals.len(), vals.iter().map(|&v| C64::from(v.max(0.0).powf(r))));
    let mut w = vecs.clone();
    for (j, mut col) in w.column_iter_mut().enumerate() {
        col *= scaled[j];
    }
    let y = &w * vecs.adjoint();
    Ok(hermitian_part(&y))
}

/// The modulus `|x| = (x*x)^{1/2}`.
pub fn modulus(x: &CMatrix) -> Result<CMatrix> {
    check_finite(x)?;
    psd_sqrt(&(x.adjoint() * x))
}

/// Trace duality pairing `<x, y> = tr(xy)`.
pub fn trace_pair(x: &CMatrix, y: &CMatrix) -> Result<C64> {
    if x.ncols() != y.nrows() || x.nrows() != y.ncols() {
        return Err(Error::Shape(format!(
            "trace pairing needs {}x{} against {}x{}",
            x.nrows(),
            x.ncols(),
            x.ncols(),
            x.nrows()
        )));
    }
    let mut acc = ZERO;
    for i in 0..x.nrows() {
        for k in 0..x.ncols() {
            acc += x[(i, k)] * y[(k, i)];
        }
    }
    Ok(acc)
}

/// Matrix `y` with `‖y‖_{p'} = 1` and `tr(x y) = ‖x‖_p`; the zero matrix when `x = 0`.
pub fn polar_dual(x: &CMatrix, p: PExponent) -> Result<CMatrix> {
    let d = svd(x)?;
    let s = &d.singular_values;
    let norm = lp_of_values(s.iter(), p);
    let (r, c) = (x.nrows(), x.ncols());
    if norm == 0.0 {
        return Ok(CMatrix::zeros(c, r));
    }
    let top = s.iter().cloned().fold(0.0, f64::max);
    let weights: Vec<f64> = if p.is_infinite() {
        let mut w = vec![0.0; s.len()];
        let k = s.iter().position(|&v| v == top).unwrap_or(0);
        w[k] = 1.0;
        w
    } else if p.value() == 1.0 {
        s.iter().map(|&v| if v > top * 1e-14 { 1.0 } else { 0.0 }).collect()
    } else {
        let pv = p.value();
        s.iter().map(|&v| (v / norm).powf(pv - 1.0)).collect()
    };
    // y = V diag(w) U*
    let mut v = d.v_t.adjoint();
    for (j, mut col) in v.column_iter_mut().enumerate() {
        col *= C64::from(weights[j]);
    }
    Ok(v * d.u.adjoint())
}

pub fn hermitian_part(x: &CMatrix) -> CMatrix {
    (x + x.adjoint()) * C64::from(0.5)
}

/// Largest entrywise deviation from hermiticity relative to the operator norm.
pub fn hermitian_defect(x: &CMatrix) -> f64 {
    max_abs(&(x - x.adjoint()))
}

/// Largest entry modulus.
pub fn max_abs(x: &CMatrix) -> f64 {
    x.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Matrix unit `E_ij` of an `rows x cols` matrix space (zero-based indices).
pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(rows, cols);
    e[(i, j)] = ONE;
    e
}

pub fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_fn(entries.len(), entries.len(), |i, j| if i == j { C64::from(entries[i]) } else { ZERO })
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Relative distance `‖x - y‖_F / max(‖y‖_F, floor)`.
pub fn relative_distance(x: &CMatrix, y: &CMatrix, floor: f64) -> f64 {
    (x - y).norm() / y.norm().max(floor)
}
