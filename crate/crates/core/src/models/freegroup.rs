//! Group algebra of a free group: reduced words, finitely supported
//! polynomials, exact even `L^p` norms, Poisson semigroup and length
//! multipliers.
//!
//! Words are written with one letter per generator, lower case for the
//! generator and upper case for its inverse. The letter `e` is reserved for
//! the empty word, so generators use `a b c d f g ...`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{C64, ZERO};
use crate::random::{normal, Rng};
use rand::Rng as _;

const ALPHABET: &[u8] = b"abcdfghijklmnopqrstuvwxyz";

/// Largest number of generators with a letter.
pub const MAX_RANK: usize = ALPHABET.len();

/// Default cap on the support of a product.
pub const SUPPORT_CAP: usize = 2_000_000;

/// Reduced word; letter `k > 0` is generator `k`, `-k` its inverse.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_RANK {
            return Err(Error::Invalid(format!("generator index {k} outside 1..={MAX_RANK}")));
        }
        Ok(Word(vec![k as i32]))
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn from_letters(letters: &[i32]) -> Result<Self> {
        let mut out: Vec<i32> = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 || l.unsigned_abs() as usize > MAX_RANK {
                return Err(Error::Invalid(format!("letter {l} is not a generator")));
            }
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(Word(out))
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut k = 0;
        let (a, b) = (&self.0, &other.0);
        while k < a.len() && k < b.len() && a[a.len() - 1 - k] == -b[k] {
            k += 1;
        }
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * k);
        out.extend_from_slice(&a[..a.len() - k]);
        out.extend_from_slice(&b[k..]);
        Word(out)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &l in &self.0 {
            let c = ALPHABET[l.unsigned_abs() as usize - 1] as char;
            write!(f, "{}", if l > 0 { c } else { c.to_ascii_uppercase() })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.split_whitespace().collect();
        if s == "e" || s.is_empty() {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let lower = c.to_ascii_lowercase();
            let k = ALPHABET
                .iter()
                .position(|&a| a as char == lower)
                .ok_or_else(|| Error::Invalid(format!("'{c}' is not a generator letter")))?;
            letters.push(if c.is_ascii_lowercase() { k as i32 + 1 } else { -(k as i32 + 1) });
        }
        Word::from_letters(&letters)
    }
}

/// Finitely supported `Σ α_g λ(g)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupPoly {
    coeffs: BTreeMap<Word, C64>,
}

impl GroupPoly {
    pub fn zero() -> Self {
        GroupPoly::default()
    }

    /// `λ(g)`.
    pub fn word(g: Word) -> Self {
        GroupPoly::from_terms([(g, C64::from(1.0))])
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, C64)>>(terms: I) -> Self {
        let mut p = GroupPoly::zero();
        for (g, c) in terms {
            p.add_term(g, c);
        }
        p
    }

    pub fn add_term(&mut self, g: Word, c: C64) {
        let e = self.coeffs.entry(g).or_insert(ZERO);
        *e += c;
    }

    pub fn coeff(&self, g: &Word) -> C64 {
        self.coeffs.get(g).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// `τ(x) = α_e`.
    pub fn trace(&self) -> C64 {
        self.coeff(&Word::identity())
    }

    /// `x* = Σ conj(α_g) λ(g^{-1})`.
    pub fn star(&self) -> GroupPoly {
        GroupPoly { coeffs: self.coeffs.iter().map(|(g, c)| (g.inverse(), c.conj())).collect() }
    }

    pub fn scale(&self, s: C64) -> GroupPoly {
        GroupPoly { coeffs: self.coeffs.iter().map(|(g, c)| (g.clone(), c * s)).collect() }
    }

    pub fn add(&self, other: &GroupPoly) -> GroupPoly {
        let mut out = self.clone();
        for (g, c) in &other.coeffs {
            out.add_term(g.clone(), *c);
        }
        out
    }

    /// `(Σ |α_g|²)^{1/2}`.
    pub fn l2(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies `α_g -> f(|g|) α_g` to every coefficient, including `e`.
    fn map_lengths(&self, f: impl Fn(usize) -> C64) -> GroupPoly {
        GroupPoly { coeffs: self.coeffs.iter().map(|(g, c)| (g.clone(), c * f(g.len()))).collect() }
    }
}

/// Convolution product with free reduction.
pub fn word_multiply(x: &GroupPoly, y: &GroupPoly) -> Result<GroupPoly> {
    word_multiply_capped(x, y, SUPPORT_CAP)
}

pub fn word_multiply_capped(x: &GroupPoly, y: &GroupPoly, cap: usize) -> Result<GroupPoly> {
    let mut out: BTreeMap<Word, C64> = BTreeMap::new();
    for (g, a) in &x.coeffs {
        for (h, b) in &y.coeffs {
            *out.entry(g.mul(h)).or_insert(ZERO) += a * b;
            if out.len() > cap {
                return Err(Error::SupportOverflow { size: out.len(), cap });
            }
        }
    }
    out.retain(|_, c| *c != ZERO);
    Ok(GroupPoly { coeffs: out })
}

/// `τ(a b) = Σ_g α_g β_{g^{-1}}`.
fn trace_of_product(a: &GroupPoly, b: &GroupPoly) -> C64 {
    let (small, large) = if a.support_len() <= b.support_len() { (a, b) } else { (b, a) };
    small.coeffs.iter().map(|(g, c)| c * large.coeff(&g.inverse())).sum()
}

/// `τ((x*x)^{p/2})^{1/p}` for `p ∈ {2, 4, 6, 8}`.
pub fn group_lp_norm_even(x: &GroupPoly, p: u32) -> Result<f64> {
    if !matches!(p, 2 | 4 | 6 | 8) {
        return Err(Error::Invalid(format!("exact group norms need p in {{2, 4, 6, 8}}, got {p}")));
    }
    if p == 2 {
        return Ok(x.l2());
    }
    let y = word_multiply(&x.star(), x)?;
    let k = p / 2;
    // τ(y^k) = τ(y^{⌈k/2⌉} y^{⌊k/2⌋})
    let mut lo = y.clone();
    for _ in 1..k / 2 {
        lo = word_multiply(&lo, &y)?;
    }
    let hi = if k % 2 == 1 { word_multiply(&lo, &y)? } else { lo.clone() };
    let t = trace_of_product(&hi, &lo).re;
    Ok(t.max(0.0).powf(1.0 / p as f64))
}

/// `λ(g) -> e^{-t|g|} λ(g)`.
pub fn poisson_apply(x: &GroupPoly, t: f64) -> Result<GroupPoly> {
    if !(t >= 0.0) {
        return Err(Error::Invalid(format!("semigroup time must be nonnegative, got {t}")));
    }
    Ok(x.map_lengths(|m| C64::from((-t * m as f64).exp())))
}

/// `Σ α_g f(|g|) λ(g)` over `g ≠ e`; the coefficient of `e` is kept.
pub fn length_multiplier(x: &GroupPoly, f: &dyn Fn(usize) -> C64) -> GroupPoly {
    x.map_lengths(|m| if m == 0 { C64::from(1.0) } else { f(m) })
}

/// Largest number of shells in [`dyadic_unconditionality`].
pub const MAX_SHELLS: usize = 12;

/// `max_ε ‖Σ ε_k x_k‖_4 / ‖Σ x_k‖_4` for `x_k` supported on words of
/// length `2^{j_k}`.
pub fn dyadic_unconditionality(xs: &[GroupPoly]) -> Result<f64> {
    if xs.is_empty() || xs.len() > MAX_SHELLS {
        return Err(Error::Invalid(format!("need between 1 and {MAX_SHELLS} shells, got {}", xs.len())));
    }
    for (k, x) in xs.iter().enumerate() {
        let lens: std::collections::BTreeSet<usize> = x.terms().map(|(g, _)| g.len()).collect();
        if lens.len() != 1 || !lens.iter().next().expect("one length").is_power_of_two() {
            return Err(Error::Invalid(format!("member {k} is not supported on a single dyadic length shell")));
        }
    }
    let total = xs.iter().fold(GroupPoly::zero(), |a, x| a.add(x));
    let base = group_lp_norm_even(&total, 4)?;
    if base == 0.0 {
        return Err(Error::Invalid("sum of the shells vanishes".into()));
    }
    let n = xs.len();
    let mut best = 0.0f64;
    for mask in 0..1usize << (n - 1) {
        let mut acc = xs[0].clone();
        for (k, x) in xs.iter().enumerate().skip(1) {
            let s = if (mask >> (k - 1)) & 1 == 1 { -1.0 } else { 1.0 };
            acc = acc.add(&x.scale(C64::from(s)));
        }
        best = best.max(group_lp_norm_even(&acc, 4)? / base);
    }
    Ok(best)
}

/// Random reduced word of the given length in `F_rank`.
pub fn random_word(rng: &mut Rng, rank: usize, len: usize) -> Word {
    let mut letters: Vec<i32> = Vec::with_capacity(len);
    while letters.len() < len {
        let k = rng.random_range(1..=rank) as i32;
        let l = if rng.random::<bool>() { k } else { -k };
        if letters.last() != Some(&-l) {
            letters.push(l);
        }
    }
    Word(letters)
}

/// `terms` Gaussian coefficients on random words of length `len`.
pub fn random_shell(rng: &mut Rng, rank: usize, len: usize, terms: usize) -> GroupPoly {
    GroupPoly::from_terms((0..terms).map(|_| (random_word(rng, rank, len), C64::new(normal(rng), normal(rng)))))
}

/// Text format: one `word re im` per line.
pub fn write_group_poly(x: &GroupPoly) -> String {
    let mut s = String::new();
    for (g, c) in x.terms() {
        s.push_str(&format!("{} {:e} {:e}\n", g, c.re, c.im));
    }
    s
}

pub fn parse_group_poly(text: &str) -> Result<GroupPoly> {
    let mut p = GroupPoly::zero();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(Error::Parse { line: i + 1, msg: "expected 'word re im'".into() });
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, msg: format!("'{s}': {e}") });
        let (re, im) = (num(toks[toks.len() - 2])?, num(toks[toks.len() - 1])?);
        let w: Word = toks[..toks.len() - 2]
            .join(" ")
            .parse()
            .map_err(|e: Error| Error::Parse { line: i + 1, msg: e.to_string() })?;
        p.add_term(w, C64::new(re, im));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn products_of_words() {
        let x = word_multiply(&GroupPoly::word(w("a")), &GroupPoly::word(w("A"))).unwrap();
        assert_eq!(x, GroupPoly::word(Word::identity()));
        let y = word_multiply(&GroupPoly::word(w("a")), &GroupPoly::word(w("b"))).unwrap();
        assert_eq!(y, GroupPoly::word(w("ab")));
        assert_eq!(w("ab").len(), 2);
        let s = GroupPoly::from_terms([(w("a"), C64::from(1.0)), (w("A"), C64::from(1.0))]);
        let sq = word_multiply(&s, &s).unwrap();
        let want = GroupPoly::from_terms([
            (w("aa"), C64::from(1.0)),
            (Word::identity(), C64::from(2.0)),
            (w("AA"), C64::from(1.0)),
        ]);
        assert_eq!(sq, want);
        assert!(matches!(
            word_multiply_capped(&s, &s, 2),
            Err(Error::SupportOverflow { .. })
        ));
    }

    #[test]
    fn word_text_round_trip() {
        assert_eq!(w("a B a").letters(), &[1, -2, 1]);
        assert_eq!(w("aBbA"), Word::identity());
        assert_eq!(w("e").to_string(), "e");
        assert_eq!(w("aBf").to_string(), "aBf");
        assert!("aEx!".parse::<Word>().is_err());
        let mut rng = seeded(2);
        let p = random_shell(&mut rng, 3, 4, 5).add(&GroupPoly::word(Word::identity()));
        let back = parse_group_poly(&write_group_poly(&p)).unwrap();
        for (g, c) in p.terms() {
            assert!((back.coeff(g) - c).norm() <= 1e-15 * c.norm());
        }
        assert!(parse_group_poly("a 1").is_err());
    }

    #[test]
    fn even_norms() {
        for p in [2, 4, 6, 8] {
            assert!((group_lp_norm_even(&GroupPoly::word(w("aBa")), p).unwrap() - 1.0).abs() < 1e-15);
        }
        let two = GroupPoly::from_terms([(w("a"), C64::from(1.0)), (w("bb"), C64::from(1.0))]);
        assert!((group_lp_norm_even(&two, 2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let s = GroupPoly::from_terms([(w("a"), C64::from(1.0)), (w("A"), C64::from(1.0))]);
        assert!((group_lp_norm_even(&s, 4).unwrap() - 6f64.powf(0.25)).abs() < 1e-14);
        // τ(s^6) = C(6,3) = 20 counts closed walks on Z
        assert!((group_lp_norm_even(&s, 6).unwrap() - 20f64.powf(1.0 / 6.0)).abs() < 1e-14);
        assert!(group_lp_norm_even(&s, 3).is_err());
    }

    #[test]
    fn poisson_semigroup() {
        let mut rng = seeded(4);
        let x = random_shell(&mut rng, 2, 3, 4).add(&random_shell(&mut rng, 2, 1, 2));
        assert_eq!(poisson_apply(&x, 0.0).unwrap(), x);
        let g = w("aba");
        let y = poisson_apply(&GroupPoly::word(g.clone()), 2f64.ln()).unwrap();
        assert!((y.coeff(&g) - C64::from(0.125)).norm() < 1e-15);
        let st = poisson_apply(&poisson_apply(&x, 0.2).unwrap(), 0.5).unwrap();
        let direct = poisson_apply(&x, 0.7).unwrap();
        for (g, c) in direct.terms() {
            assert!((st.coeff(g) - c).norm() < 1e-15);
        }
        for t in [0.1, 0.5, 2.0] {
            let tx = poisson_apply(&x, t).unwrap();
            assert!(group_lp_norm_even(&tx, 4).unwrap() <= group_lp_norm_even(&x, 4).unwrap() + 1e-10);
        }
        assert!(poisson_apply(&x, -1.0).is_err());
    }

    #[test]
    fn length_multipliers() {
        let mut rng = seeded(6);
        let x = random_shell(&mut rng, 2, 2, 4).add(&GroupPoly::word(Word::identity()).scale(C64::from(3.0)));
        assert_eq!(length_multiplier(&x, &|_| C64::from(1.0)), x);
        let t = 0.4;
        let m = length_multiplier(&x, &|n| C64::from((-t * n as f64).exp()));
        assert_eq!(m, poisson_apply(&x, t).unwrap());
    }

    #[test]
    fn dyadic_shells() {
        let mut rng = seeded(8);
        let one = random_shell(&mut rng, 2, 2, 4);
        assert!((dyadic_unconditionality(std::slice::from_ref(&one)).unwrap() - 1.0).abs() < 1e-15);
        assert!(dyadic_unconditionality(&[random_shell(&mut rng, 2, 3, 2)]).is_err());
        let mixed = one.add(&random_shell(&mut rng, 2, 1, 1));
        assert!(dyadic_unconditionality(&[mixed]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn algebra_laws(seed in 0u64..1000) {
            let mut rng = seeded(seed);
            let a = random_shell(&mut rng, 2, 2, 3).add(&random_shell(&mut rng, 2, 1, 2));
            let b = random_shell(&mut rng, 2, 3, 3);
            let c = random_shell(&mut rng, 2, 1, 2);
            let ab_c = word_multiply(&word_multiply(&a, &b).unwrap(), &c).unwrap();
            let a_bc = word_multiply(&a, &word_multiply(&b, &c).unwrap()).unwrap();
            for (g, v) in ab_c.terms() {
                prop_assert!((a_bc.coeff(g) - v).norm() < 1e-12);
            }
            let lhs = word_multiply(&a, &b).unwrap().star();
            let rhs = word_multiply(&b.star(), &a.star()).unwrap();
            for (g, v) in lhs.terms() {
                prop_assert!((rhs.coeff(g) - v).norm() < 1e-12);
            }
            let tr = word_multiply(&a.star(), &a).unwrap().trace().re;
            prop_assert!((tr - a.l2().powi(2)).abs() < 1e-12 * tr.max(1.0));
            prop_assert!(a.l2() <= group_lp_norm_even(&a, 4).unwrap() * (1.0 + 1e-12));
        }
    }
}
