//! Schur multiplier semigroups with symbol `a_ij = ‖α_i − β_j‖`.

use crate::error::{Error, Result};
use crate::funcalc::{HolFn, LpOperator};
use crate::matrix::{CMatrix, C64, ZERO};

/// Two point sets in `R^n` and their distance matrix.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SchurSymbol {
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
}

impl SchurSymbol {
    pub fn new(alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::Shape(format!(
                "need equally many alpha and beta points, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        let n = alpha[0].len();
        if alpha.iter().chain(&beta).any(|v| v.len() != n || v.iter().any(|c| !c.is_finite())) {
            return Err(Error::Invalid("points must be finite vectors of a common dimension".into()));
        }
        Ok(SchurSymbol { alpha, beta })
    }

    /// `α_i = β_i = i·e_1` for `i = 1..=n`.
    pub fn collinear(n: usize) -> Result<Self> {
        let pts: Vec<Vec<f64>> = (1..=n).map(|i| vec![i as f64]).collect();
        SchurSymbol::new(pts.clone(), pts)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// `[‖α_i − β_j‖]`.
    pub fn matrix(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| {
            let s: f64 = self.alpha[i].iter().zip(&self.beta[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            C64::from(s.sqrt())
        })
    }

    /// The generator `x -> [a_ij] ⊙ x`.
    pub fn generator(&self) -> LpOperator {
        LpOperator::schur(self.matrix()).expect("square symbol")
    }
}

/// `T_t = [e^{-t a_ij}] ⊙ ·`.
pub fn schur_semigroup(sym: &SchurSymbol, t: f64) -> Result<LpOperator> {
    if !(t >= 0.0) {
        return Err(Error::Invalid(format!("semigroup time must be nonnegative, got {t}")));
    }
    LpOperator::schur(sym.matrix().map(|a| (-a * t).exp()))
}

/// `[f̊(a_ij)] ⊙ x` with `f̊(0) = 0`.
pub fn schur_hinf_apply(sym: &SchurSymbol, f: &HolFn, x: &CMatrix) -> Result<CMatrix> {
    let a = sym.matrix();
    if x.shape() != a.shape() {
        return Err(Error::Shape(format!("symbol is {}x{}, data is {}x{}", a.nrows(), a.ncols(), x.nrows(), x.ncols())));
    }
    let m = a.map(|v| if v.re == 0.0 { ZERO } else { f.eval(v) });
    Ok(m.component_mul(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalc::{extended_calculus, OpKind};
    use crate::matrix::hermitian_eigen;
    use crate::models::choi_min_eigenvalue;
    use crate::random::{gaussian_matrix, seeded, uniform};

    #[test]
    fn time_zero_is_the_identity() {
        let sym = SchurSymbol::collinear(4).unwrap();
        let mut rng = seeded(1);
        let x = gaussian_matrix(&mut rng, 4, 4);
        assert_eq!(schur_semigroup(&sym, 0.0).unwrap().apply(&x).unwrap(), x);
        assert!(schur_semigroup(&sym, -1.0).is_err());
    }

    #[test]
    fn semigroup_law_is_exact_entrywise() {
        let sym = SchurSymbol::new(vec![vec![0.0, 1.0], vec![2.0, 0.5]], vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let a = schur_semigroup(&sym, 0.3).unwrap();
        let b = schur_semigroup(&sym, 0.45).unwrap();
        let ab = schur_semigroup(&sym, 0.75).unwrap();
        let (OpKind::SchurMult(ma), OpKind::SchurMult(mb), OpKind::SchurMult(mab)) = (a.kind(), b.kind(), ab.kind())
        else {
            panic!("schur kinds expected");
        };
        assert!((ma.component_mul(mb) - mab).camax() < 1e-15);
    }

    #[test]
    fn collinear_symbol_is_positive_definite() {
        let sym = SchurSymbol::collinear(8).unwrap();
        let OpKind::SchurMult(m) = schur_semigroup(&sym, 0.7).unwrap().kind().clone() else { panic!() };
        let (vals, _) = hermitian_eigen(&m).unwrap();
        assert!(vals.iter().cloned().fold(f64::INFINITY, f64::min) >= -1e-10);
    }

    #[test]
    fn completely_contractive_and_positive() {
        let sym = SchurSymbol::collinear(4).unwrap();
        let t = schur_semigroup(&sym, 0.7).unwrap();
        let n = crate::funcalc::opnorm::amplified_norm(&t, crate::matrix::PExponent::TWO, 4, &Default::default())
            .unwrap();
        assert!(n.value <= 1.0 + 1e-9, "{}", n.value);
        assert!(choi_min_eigenvalue(&t).unwrap() >= -1e-10);
        let one = CMatrix::identity(4, 4);
        assert!((t.apply(&one).unwrap() - &one).camax() < 1e-15);
    }

    #[test]
    fn bounded_functions_act_entrywise() {
        let sym = SchurSymbol::new(vec![vec![0.0], vec![3.0]], vec![vec![1.0], vec![2.0]]).unwrap();
        let x = CMatrix::from_element(2, 2, C64::from(1.0));
        let y = schur_hinf_apply(&sym, &HolFn::g(), &x).unwrap();
        for (i, j, v) in [(0, 0, 0.25), (0, 1, 2.0 / 9.0), (1, 0, 2.0 / 9.0), (1, 1, 0.25)] {
            assert!((y[(i, j)] - C64::from(v)).norm() < 1e-15);
        }
        let touching = SchurSymbol::collinear(2).unwrap();
        assert_eq!(schur_hinf_apply(&touching, &HolFn::g(), &x).unwrap()[(1, 1)], ZERO);
    }

    #[test]
    fn agrees_with_the_functional_calculus() {
        let mut rng = seeded(5);
        let pts = |rng: &mut crate::random::Rng| -> Vec<Vec<f64>> {
            (0..4).map(|_| (0..2).map(|_| uniform(rng, -2.0, 2.0)).collect()).collect()
        };
        let sym = SchurSymbol::new(pts(&mut rng), pts(&mut rng)).unwrap();
        let x = gaussian_matrix(&mut rng, 4, 4);
        for f in [HolFn::g(), HolFn::zis(0.7)] {
            let direct = schur_hinf_apply(&sym, &f, &x).unwrap();
            let via = extended_calculus(&sym.generator(), &f, None).unwrap().op.apply(&x).unwrap();
            assert!((&direct - via).camax() < 1e-8 * direct.camax(), "{}", f.name());
        }
        let one = HolFn::new("one", 0.9 * std::f64::consts::PI, crate::funcalc::FnClass::Hinf, 0.0, |_| C64::from(1.0))
            .unwrap();
        assert_eq!(schur_hinf_apply(&sym, &one, &x).unwrap(), x);
    }
}
