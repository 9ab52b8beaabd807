use nclp::convex::ConvexCfg;
use nclp::funcalc::Direction;
use nclp::matrix::{PExponent, C64};
use nclp::models::choi_min_eigenvalue;
use nclp::models::clifford::{clifford_semigroup, spin_generators};
use nclp::models::freegroup::{dyadic_unconditionality, random_shell, GroupPoly};
use nclp::models::martingale::{cesaro_square_function, stein_colbound, MartingaleTower};
use nclp::random::{gaussian_matrix, seeded};
use nclp::rbound::{col_bound_estimate, OperatorFamily, SearchCfg};

/// Upper bound recorded for the Cesàro ratio of the spin semigroup at
/// `t = 0.3`, `p = 4`, `M = 64` on Gaussian 8x8 data.
const CESARO_BASELINE: f64 = 1.0;

fn shells(seed: u64) -> Vec<GroupPoly> {
    let mut rng = seeded(seed);
    (0..3)
        .map(|k| {
            let s = random_shell(&mut rng, 2, 1 << k, 6);
            let n = s.l2();
            s.scale(C64::from(1.0 / n))
        })
        .collect()
}

#[test]
fn dyadic_constant_is_stable_across_instances() {
    let vals: Vec<f64> = (0..4).map(|s| dyadic_unconditionality(&shells(s)).unwrap()).collect();
    let (lo, hi) = (vals.iter().cloned().fold(f64::INFINITY, f64::min), vals.iter().cloned().fold(0.0, f64::max));
    assert!(lo >= 1.0 - 1e-12, "{vals:?}");
    assert!(hi <= 1.1 * lo, "{vals:?}");
}

#[test]
fn dyadic_shells_at_two_are_sign_invariant() {
    // at p = 2 distinct shells are orthogonal, so every sign pattern has the same norm
    let xs = shells(9);
    let total = xs.iter().fold(GroupPoly::zero(), |a, x| a.add(x));
    let flipped = xs[0].add(&xs[1].scale(C64::from(-1.0))).add(&xs[2]);
    assert!((total.l2() - flipped.l2()).abs() < 1e-14);
}

#[test]
fn stein_family_is_column_bounded() {
    let tower = MartingaleTower::new(3, Direction::Increasing).unwrap();
    let quick = |seed| SearchCfg { restarts: 8, lengths: vec![1, 2, 4], rounds: 3, ascent_steps: 25, seed };
    let e2 = stein_colbound(&tower, PExponent::TWO, &quick(0)).unwrap();
    assert!((e2.value - 1.0).abs() < 1e-6, "{}", e2.value);
    let a = stein_colbound(&tower, PExponent::new(4.0).unwrap(), &quick(0)).unwrap().value;
    let b = stein_colbound(&tower, PExponent::new(4.0).unwrap(), &quick(1)).unwrap().value;
    assert!(a.is_finite() && a >= 1.0 && (a - b).abs() <= 0.1 * a, "{a} {b}");
    let single = OperatorFamily::new(vec![tower.operator(0).unwrap().amplify(2).unwrap()]).unwrap();
    let s = col_bound_estimate(&single, PExponent::new(4.0).unwrap(), &quick(0)).unwrap();
    assert!((s.value - 1.0).abs() < 1e-9, "{}", s.value);
}

#[test]
fn spin_semigroup_on_five_spins_is_completely_positive() {
    let rep = spin_generators(5).unwrap();
    let op = clifford_semigroup(&rep, 0.15).unwrap().to_operator().unwrap();
    assert!(choi_min_eigenvalue(&op).unwrap() >= -1e-10);
    assert!(clifford_semigroup(&spin_generators(6).unwrap(), 0.1).unwrap().to_operator().is_err());
}

#[test]
fn cesaro_ratio_of_the_spin_semigroup_is_bounded() {
    let rep = spin_generators(3).unwrap();
    let op = clifford_semigroup(&rep, 0.3).unwrap().to_operator().unwrap();
    let p = PExponent::new(4.0).unwrap();
    for seed in 0..100 {
        let mut rng = seeded(seed);
        let x = gaussian_matrix(&mut rng, 8, 8);
        let r = cesaro_square_function(&op, &x, 64, p, &ConvexCfg::default()).unwrap();
        assert!(r.ratio > 0.0 && r.ratio <= CESARO_BASELINE, "seed {seed}: {}", r.ratio);
    }
}
