//! Truncated q-deformed Fock spaces over `C^d`.
//!
//! Level `k` is `(C^d)^{⊗k}` with basis words `e_{i_1} ⊗ … ⊗ e_{i_k}`
//! indexed in base `d`, first factor most significant. The q-inner product
//! is `⟨u, v⟩_q = u* G v` with `G` block diagonal, `G_k = Σ_σ q^{ι(σ)} P_σ`.
//! Levels above `N` are cut off, so creation from level `N` is zero.

use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigen, kron, CMatrix, C64, ONE, ZERO};

/// Largest level for which the permutation sum is formed.
pub const MAX_GRAM_LEVEL: usize = 6;

/// Permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push(perm.clone());
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else { break };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("successor exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

fn inversions(perm: &[usize]) -> i32 {
    let mut c = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                c += 1;
            }
        }
    }
    c
}

fn digits(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = idx % d;
        idx /= d;
    }
    out
}

fn index_of(word: &[usize], d: usize) -> usize {
    word.iter().fold(0, |acc, &i| acc * d + i)
}

fn check_q(q: f64) -> Result<()> {
    if !(q > -1.0 && q < 1.0) {
        return Err(Error::Invalid(format!("deformation q = {q} must lie in (-1, 1)")));
    }
    Ok(())
}

/// `Q_q = Σ_σ q^{ι(σ)} P_σ` on `(C^d)^{⊗n}`, where `P_σ` sends
/// `h_1 ⊗ … ⊗ h_n` to `h_{σ(1)} ⊗ … ⊗ h_{σ(n)}`.
pub fn q_gram(n: usize, d: usize, q: f64) -> Result<CMatrix> {
    check_q(q)?;
    if n > MAX_GRAM_LEVEL {
        return Err(Error::TooLarge(format!("level {n} exceeds {MAX_GRAM_LEVEL}")));
    }
    if d == 0 {
        return Err(Error::Invalid("one-particle dimension must be positive".into()));
    }
    let size = d.pow(n as u32);
    let mut g = CMatrix::zeros(size, size);
    for perm in permutations(n) {
        let w = C64::from(q.powi(inversions(&perm)));
        for col in 0..size {
            let word = digits(col, d, n);
            let moved: Vec<usize> = perm.iter().map(|&s| word[s]).collect();
            g[(index_of(&moved, d), col)] += w;
        }
    }
    Ok(g)
}

/// Truncated Fock space with its gram blocks.
#[derive(Debug, Clone)]
pub struct FockBasis {
    d: usize,
    max_level: usize,
    q: f64,
    offsets: Vec<usize>,
    gram: Vec<CMatrix>,
    gram_inv: Vec<CMatrix>,
}

impl FockBasis {
    pub fn new(d: usize, max_level: usize, q: f64) -> Result<Self> {
        check_q(q)?;
        let mut offsets = vec![0];
        let mut gram = Vec::new();
        let mut gram_inv = Vec::new();
        for k in 0..=max_level {
            let g = q_gram(k, d, q)?;
            let inv = g.clone().try_inverse().ok_or_else(|| Error::Numeric(format!("gram block {k} is singular")))?;
            offsets.push(offsets[k] + g.nrows());
            gram.push(g);
            gram_inv.push(inv);
        }
        Ok(FockBasis { d, max_level, q, offsets, gram, gram_inv })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().expect("nonempty")
    }

    pub fn gram_block(&self, k: usize) -> &CMatrix {
        &self.gram[k]
    }

    /// Block-diagonal gram matrix of the whole truncated space.
    pub fn gram(&self) -> CMatrix {
        let mut g = CMatrix::zeros(self.dim(), self.dim());
        for (k, b) in self.gram.iter().enumerate() {
            g.view_mut((self.offsets[k], self.offsets[k]), b.shape()).copy_from(b);
        }
        g
    }

    /// Position of a basis word in the full space.
    pub fn index(&self, word: &[usize]) -> usize {
        self.offsets[word.len()] + index_of(word, self.d)
    }

    pub fn vacuum(&self) -> nalgebra::DVector<C64> {
        let mut v = nalgebra::DVector::zeros(self.dim());
        v[0] = ONE;
        v
    }

    /// Level of a basis index.
    pub fn level_of(&self, idx: usize) -> usize {
        (0..=self.max_level).find(|&k| idx < self.offsets[k + 1]).expect("index in range")
    }

    /// `⟨u, v⟩_q`.
    pub fn inner(&self, u: &nalgebra::DVector<C64>, v: &nalgebra::DVector<C64>) -> C64 {
        let mut acc = ZERO;
        for (k, g) in self.gram.iter().enumerate() {
            let (o, n) = (self.offsets[k], g.nrows());
            let uk = u.rows(o, n);
            let vk = v.rows(o, n);
            acc += (uk.adjoint() * g * vk)[(0, 0)];
        }
        acc
    }

    fn check_vector(&self, h: &[C64]) -> Result<()> {
        if h.len() != self.d {
            return Err(Error::Shape(format!("vector of length {} in a space of dimension {}", h.len(), self.d)));
        }
        if h.iter().all(|c| *c == ZERO) {
            return Err(Error::Invalid("vector must be nonzero".into()));
        }
        Ok(())
    }
}

/// Matrix on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOp {
    pub matrix: CMatrix,
    /// Set when the operator has a component into or out of the top level
    /// that the untruncated operator would not have.
    pub truncated: bool,
}

impl FockOp {
    pub fn identity(b: &FockBasis) -> Self {
        FockOp { matrix: CMatrix::identity(b.dim(), b.dim()), truncated: false }
    }

    pub fn mul(&self, other: &FockOp) -> FockOp {
        FockOp { matrix: &self.matrix * &other.matrix, truncated: self.truncated || other.truncated }
    }

    pub fn add(&self, other: &FockOp) -> FockOp {
        FockOp { matrix: &self.matrix + &other.matrix, truncated: self.truncated || other.truncated }
    }
}

/// `c(h)`: prepends `h` to every tensor word.
pub fn fock_creation(b: &FockBasis, h: &[C64]) -> Result<FockOp> {
    b.check_vector(h)?;
    let mut m = CMatrix::zeros(b.dim(), b.dim());
    for k in 0..b.max_level {
        for w in 0..b.d.pow(k as u32) {
            let word = digits(w, b.d, k);
            let col = b.index(&word);
            for (i, &hi) in h.iter().enumerate() {
                let mut up = vec![i];
                up.extend_from_slice(&word);
                m[(b.index(&up), col)] += hi;
            }
        }
    }
    Ok(FockOp { matrix: m, truncated: true })
}

/// Adjoint in the q-inner product, `G^{-1} x* G`.
pub fn q_adjoint(b: &FockBasis, x: &FockOp) -> FockOp {
    let mut out = CMatrix::zeros(b.dim(), b.dim());
    let xs = x.matrix.adjoint();
    for (k, gk_inv) in b.gram_inv.iter().enumerate() {
        for (l, gl) in b.gram.iter().enumerate() {
            let blk = xs.view((b.offsets[k], b.offsets[l]), (gk_inv.nrows(), gl.nrows()));
            if blk.iter().all(|c| *c == ZERO) {
                continue;
            }
            let v = gk_inv * blk * gl;
            out.view_mut((b.offsets[k], b.offsets[l]), v.shape()).copy_from(&v);
        }
    }
    FockOp { matrix: out, truncated: x.truncated }
}

/// `a(h) = c(h)*` in the q-inner product.
pub fn fock_annihilation(b: &FockBasis, h: &[C64]) -> Result<FockOp> {
    Ok(q_adjoint(b, &fock_creation(b, h)?))
}

/// `w(h) = a(h) + c(h)`.
pub fn fock_gaussian(b: &FockBasis, h: &[C64]) -> Result<FockOp> {
    Ok(fock_annihilation(b, h)?.add(&fock_creation(b, h)?))
}

/// `τ(x) = ⟨Ω, xΩ⟩_q`.
pub fn fock_trace(x: &FockOp) -> C64 {
    x.matrix[(0, 0)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub value: C64,
    pub truncated: bool,
}

/// `τ(w(h_1) ⋯ w(h_m))` on the level-`N` truncation, `N ≥ m`.
pub fn gaussian_moment(hs: &[Vec<C64>], q: f64, max_level: usize) -> Result<Moment> {
    let d = hs.first().map(|h| h.len()).ok_or_else(|| Error::Invalid("moment of no factors".into()))?;
    if max_level < hs.len() {
        return Err(Error::Invalid(format!(
            "truncation level {max_level} is below the number of factors {}",
            hs.len()
        )));
    }
    let b = FockBasis::new(d, max_level, q)?;
    let mut v = b.vacuum();
    let mut top = 0usize;
    // creation acting on the top level is where the cut-off bites
    for h in hs.iter().rev() {
        let reached = (0..b.dim()).filter(|&i| v[i] != ZERO).map(|i| b.level_of(i)).max().unwrap_or(0);
        top = top.max(reached);
        v = fock_gaussian(&b, h)?.matrix * v;
    }
    Ok(Moment { value: v[0], truncated: top >= max_level })
}

/// `F_q(a) = ⊕_k a^{⊗k}` for a contraction `a` on `C^d`.
pub fn second_quantization(b: &FockBasis, a: &CMatrix) -> Result<FockOp> {
    if a.shape() != (b.d, b.d) {
        return Err(Error::Shape(format!("expected a {}x{} matrix", b.d, b.d)));
    }
    let norm = crate::matrix::operator_norm(a)?;
    if norm > 1.0 + 1e-9 {
        return Err(Error::Invalid(format!("second quantization needs a contraction, got norm {norm}")));
    }
    let mut m = CMatrix::zeros(b.dim(), b.dim());
    let mut power = CMatrix::identity(1, 1);
    for k in 0..=b.max_level {
        m.view_mut((b.offsets[k], b.offsets[k]), power.shape()).copy_from(&power);
        power = kron(&power, a);
    }
    Ok(FockOp { matrix: m, truncated: false })
}

/// Smallest eigenvalue of the gram block of level `n`.
pub fn gram_min_eigenvalue(n: usize, d: usize, q: f64) -> Result<f64> {
    let (vals, _) = hermitian_eigen(&q_gram(n, d, q)?)?;
    Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{seeded, Rng};
    use crate::random::normal;

    fn real_vec(rng: &mut Rng, d: usize) -> Vec<C64> {
        (0..d).map(|_| C64::from(normal(rng))).collect()
    }

    fn dot(a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn gram_examples() {
        assert_eq!(q_gram(3, 2, 0.0).unwrap(), CMatrix::identity(8, 8));
        assert!((q_gram(2, 1, 0.3).unwrap()[(0, 0)] - C64::from(1.3)).norm() < 1e-15);
        let (vals, _) = hermitian_eigen(&q_gram(2, 2, 0.4).unwrap()).unwrap();
        let mut vals: Vec<f64> = vals.iter().cloned().collect();
        vals.sort_by(f64::total_cmp);
        let want = [0.6, 1.4, 1.4, 1.4];
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-12);
        }
        assert_eq!(permutations(4).len(), 24);
        assert!(q_gram(7, 1, 0.1).is_err());
        assert!(q_gram(2, 2, 1.0).is_err());
    }

    #[test]
    fn gram_blocks_are_positive() {
        for q in [-0.9, -0.5, 0.0, 0.5, 0.9] {
            for d in 1..=3 {
                for n in 0..=5 {
                    assert!(gram_min_eigenvalue(n, d, q).unwrap() >= -1e-10, "q={q} d={d} n={n}");
                }
            }
        }
    }

    #[test]
    fn creation_and_annihilation() {
        let b = FockBasis::new(2, 3, 0.3).unwrap();
        let h = vec![C64::new(1.0, 0.5), C64::new(-0.3, 2.0)];
        let c = fock_creation(&b, &h).unwrap();
        let a = fock_annihilation(&b, &h).unwrap();
        let ch = c.matrix.clone() * b.vacuum();
        assert_eq!(ch[b.index(&[0])], h[0]);
        assert_eq!(ch[b.index(&[1])], h[1]);
        // q-adjointness
        let mut rng = seeded(3);
        for _ in 0..4 {
            let u = nalgebra::DVector::from_fn(b.dim(), |_, _| C64::new(normal(&mut rng), normal(&mut rng)));
            let v = nalgebra::DVector::from_fn(b.dim(), |_, _| C64::new(normal(&mut rng), normal(&mut rng)));
            let lhs = b.inner(&(&c.matrix * &u), &v);
            let rhs = b.inner(&u, &(&a.matrix * &v));
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        }
        // a(h) h' = ⟨h, h'⟩ Ω
        let hp = vec![C64::new(0.2, 0.1), C64::new(1.0, -1.0)];
        let mut v = b.vacuum() * ZERO;
        v[b.index(&[0])] = hp[0];
        v[b.index(&[1])] = hp[1];
        let out = &a.matrix * v;
        assert!((out[0] - dot(&h, &hp)).norm() < 1e-13);
        assert!(out.rows(1, b.dim() - 1).norm() < 1e-13);
        assert!(FockBasis::new(1, 2, -1.0).is_err());
    }

    #[test]
    fn annihilation_matches_the_sum_formula() {
        let (d, n, q) = (2, 3, -0.45);
        let b = FockBasis::new(d, n, q).unwrap();
        let h = vec![C64::new(0.7, -0.2), C64::new(0.1, 1.1)];
        let a = fock_annihilation(&b, &h).unwrap();
        for k in 1..=n {
            for w in 0..d.pow(k as u32) {
                let word = digits(w, d, k);
                let mut want = nalgebra::DVector::<C64>::zeros(b.dim());
                for j in 0..k {
                    let mut rest = word.clone();
                    rest.remove(j);
                    want[b.index(&rest)] += C64::from(q.powi(j as i32)) * h[word[j]].conj();
                }
                let got = a.matrix.column(b.index(&word)).into_owned();
                assert!((got - want).norm() < 1e-12, "word {word:?}");
            }
        }
    }

    #[test]
    fn traces_and_moments() {
        let b = FockBasis::new(2, 3, 0.2).unwrap();
        let h = vec![C64::from(0.6), C64::from(-1.2)];
        let n2 = dot(&h, &h).re;
        assert_eq!(fock_trace(&FockOp::identity(&b)), ONE);
        assert_eq!(fock_trace(&fock_creation(&b, &h).unwrap()), ZERO);
        let w = fock_gaussian(&b, &h).unwrap();
        assert!((fock_trace(&w.mul(&w)) - C64::from(n2)).norm() < 1e-13);
        for q in [-0.8, 0.0, 0.5] {
            let m2 = gaussian_moment(&[h.clone(), h.clone()], q, 2).unwrap();
            assert!((m2.value - C64::from(n2)).norm() < 1e-13 && !m2.truncated);
            let unit: Vec<C64> = h.iter().map(|c| c / n2.sqrt()).collect();
            let m4 = gaussian_moment(&vec![unit.clone(); 4], q, 4).unwrap();
            assert!((m4.value - C64::from(2.0 + q)).norm() < 1e-12, "q={q}");
            let m4b = gaussian_moment(&vec![unit.clone(); 4], q, 5).unwrap();
            assert!((m4.value - m4b.value).norm() < 1e-13);
            let m3 = gaussian_moment(&vec![unit.clone(); 3], q, 3).unwrap();
            assert!(m3.value.norm() < 1e-14);
        }
        assert!(gaussian_moment(&vec![h.clone(); 4], 0.1, 3).is_err());
    }

    #[test]
    fn four_point_pairings() {
        let mut rng = seeded(9);
        let q = 0.35;
        let hs: Vec<Vec<C64>> = (0..4).map(|_| real_vec(&mut rng, 3)).collect();
        let ip = |i: usize, j: usize| dot(&hs[i], &hs[j]);
        let want = ip(0, 1) * ip(2, 3) + C64::from(q) * ip(0, 2) * ip(1, 3) + ip(0, 3) * ip(1, 2);
        let got = gaussian_moment(&hs, q, 4).unwrap().value;
        assert!((got - want).norm() < 1e-12 * want.norm().max(1.0));
        // cyclic invariance of the vacuum state on real vectors
        let rolled: Vec<Vec<C64>> = (1..5).map(|k| hs[k % 4].clone()).collect();
        let got2 = gaussian_moment(&rolled, q, 4).unwrap().value;
        assert!((got - got2).norm() < 1e-12 * got.norm().max(1.0));
    }

    #[test]
    fn second_quantization_functor() {
        let b = FockBasis::new(2, 3, 0.6).unwrap();
        let id = second_quantization(&b, &CMatrix::identity(2, 2)).unwrap();
        assert_eq!(id.matrix, CMatrix::identity(b.dim(), b.dim()));
        let zero = second_quantization(&b, &CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(zero.matrix[(0, 0)], ONE);
        assert!(zero.matrix.iter().filter(|c| **c != ZERO).count() == 1);
        let mut rng = seeded(1);
        let mk = |rng: &mut Rng| {
            let m = crate::random::gaussian_matrix(rng, 2, 2);
            let n = crate::matrix::operator_norm(&m).unwrap();
            m / C64::from(1.01 * n)
        };
        let (a, a2) = (mk(&mut rng), mk(&mut rng));
        let fa = second_quantization(&b, &a).unwrap();
        let fa2 = second_quantization(&b, &a2).unwrap();
        let fprod = second_quantization(&b, &(&a * &a2)).unwrap();
        assert!((fa.mul(&fa2).matrix - fprod.matrix).norm() < 1e-12);
        assert!((&fa.matrix * b.vacuum() - b.vacuum()).norm() < 1e-15);
        let adj = q_adjoint(&b, &fa);
        let fadj = second_quantization(&b, &a.adjoint()).unwrap();
        assert!((adj.matrix - fadj.matrix).norm() < 1e-10);
        let t: f64 = 0.4;
        let ou = second_quantization(&b, &(CMatrix::identity(2, 2) * C64::from((-t).exp()))).unwrap();
        for k in 0..=3 {
            let idx = b.index(&vec![1; k]);
            assert!((ou.matrix[(idx, idx)] - C64::from((-t * k as f64).exp())).norm() < 1e-15);
        }
        assert!(second_quantization(&b, &(CMatrix::identity(2, 2) * C64::from(1.5))).is_err());
    }
}
