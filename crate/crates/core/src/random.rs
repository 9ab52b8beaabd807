//! Seeded random test data. All randomness in the crate flows through an
//! explicit [`Rng`] built here from a `u64` seed.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{CMatrix, C64};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn real_gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::from(normal(rng)))
}

pub fn hermitian_matrix(rng: &mut Rng, n: usize) -> CMatrix {
    let a = gaussian_matrix(rng, n, n);
    crate::matrix::hermitian_part(&a)
}

pub fn sign(rng: &mut Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
