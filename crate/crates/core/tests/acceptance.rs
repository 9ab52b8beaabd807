//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use nclp::convex::ConvexCfg;
use nclp::funcalc::identities::{ad_group_average_identity, group_average_identity, subordination_identity, SUBORDINATION_NODES};
use nclp::funcalc::{contour_calculus_auto, eigen_calculus, extended_calculus, Direction, HolFn, LpOperator, TowerLevel};
use nclp::hvnorms::{khintchine_report, MatrixFamily};
use nclp::matrix::{diag, kron, real_diag, relative_distance, schatten_norm, CMatrix, PExponent, C64, ONE, ZERO};
use nclp::models::choi_min_eigenvalue;
use nclp::models::clifford::{clifford_semigroup, spin_generators};
use nclp::models::fock::{gaussian_moment, gram_min_eigenvalue};
use nclp::models::freegroup::{
    dyadic_unconditionality, group_lp_norm_even, poisson_apply, random_shell, random_word, GroupPoly, Word,
};
use nclp::models::martingale::{cesaro_projection_constant, cesaro_square_function, cond_exp, stein_colbound, MartingaleTower};
use nclp::random::{gaussian_matrix, normal, seeded, uniform};
use nclp::rbound::SearchCfg;
use nclp::sqfn::{c_f, row_col_gap, sq_col, LogGrid};
use nclp::Result;

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

fn p(v: f64) -> PExponent {
    PExponent::new(v).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn left_positive() -> LpOperator {
    LpOperator::left(real_diag(&[0.5, 1.0, 2.0, 5.0])).unwrap()
}

fn gap_operator(n: usize) -> LpOperator {
    let d: Vec<f64> = (1..=n).map(|i| 2f64.powi(i as i32)).collect();
    LpOperator::left(real_diag(&d)).unwrap()
}

/// `∫|F|² dt/t` and `max |sq_col / (c_F ‖x‖_p) - 1|` on `grid`.
fn column_identity(grid: &LogGrid) -> Result<(f64, Vec<f64>)> {
    let f = HolFn::sqrtzexp();
    let op = left_positive();
    let cf = c_f(&f, grid);
    let mut rng = seeded(11);
    let mut values = Vec::new();
    for q in [1.5, 2.0, 4.0] {
        for _ in 0..20 {
            let x = gaussian_matrix(&mut rng, 4, 4);
            values.push(sq_col(&op, &x, &f, grid, p(q))? / (cf * schatten_norm(&x, p(q))?));
        }
    }
    Ok((cf * cf, values))
}

fn c1_column_golden() -> Outcome {
    let start = Instant::now();
    let grid = LogGrid::default_for(&left_positive(), &HolFn::sqrtzexp())?;
    let (integral, ratios) = column_identity(&grid)?;
    let worst = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let ok = (integral - 0.5).abs() <= 1e-8 && worst <= 1e-10 && secs < 5.0;
    Ok((ok, format!("integral {integral:.15}, worst relative deviation {worst:.1e} over 60 cases, {secs:.2} s")))
}

const GAP_NS: [usize; 3] = [4, 8, 16];

fn c2_gap_golden() -> Outcome {
    let start = Instant::now();
    let (mut fr_err, mut fc_err, mut ratios) = (0.0f64, 0.0f64, Vec::new());
    for n in GAP_NS {
        let g = row_col_gap(n, p(4.0), None)?;
        fr_err = fr_err.max(rel(g.fr, g.fr_closed_form));
        fc_err = fc_err.max((g.fc - (n as f64 / 2.0).sqrt()).abs());
        ratios.push(g.ratio);
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = fr_err <= 1e-6 && fc_err <= 1e-10 && ratios[2] > ratios[0] && secs < 30.0;
    Ok((
        ok,
        format!("Fr rel err {fr_err:.1e}, Fc err {fc_err:.1e}, ratio(4) {:.6} < ratio(16) {:.6}, {secs:.2} s", ratios[0], ratios[2]),
    ))
}

fn similar_to(lambdas: &[C64], seed: u64) -> CMatrix {
    let n = lambdas.len();
    let mut rng = seeded(seed);
    let v = CMatrix::identity(n, n) + gaussian_matrix(&mut rng, n, n) * c(0.3, 0.0);
    &v * diag(lambdas) * v.clone().try_inverse().unwrap()
}

fn positive_hermitian(n: usize, seed: u64) -> CMatrix {
    let mut rng = seeded(seed);
    let a = gaussian_matrix(&mut rng, n, n);
    a.adjoint() * a + CMatrix::identity(n, n) * c(0.5, 0.0)
}

fn sector_symbol(n: usize, angle: f64, seed: u64) -> CMatrix {
    let mut rng = seeded(seed);
    CMatrix::from_fn(n, n, |_, _| {
        let r = uniform(&mut rng, 0.3, 4.0);
        let phi = if angle > 0.0 { uniform(&mut rng, -angle, angle) } else { 0.0 };
        C64::from_polar(r, phi)
    })
}

/// Structured operators; the flag marks non-normal ones.
fn operator_zoo() -> Vec<(&'static str, bool, LpOperator)> {
    let jordan = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, c(2.0, 0.0)]);
    vec![
        ("left diag", false, LpOperator::left(real_diag(&[1.0, 4.0])).unwrap()),
        ("left hermitian", false, LpOperator::left(positive_hermitian(4, 1)).unwrap()),
        ("right hermitian", false, LpOperator::right(positive_hermitian(3, 2)).unwrap()),
        ("schur positive", false, LpOperator::schur(sector_symbol(4, 0.0, 3)).unwrap()),
        ("schur sectorial", false, LpOperator::schur(sector_symbol(4, 0.3, 4)).unwrap()),
        ("ad diagonal", false, LpOperator::ad_pair(real_diag(&[2.0, 3.0, 5.0]), real_diag(&[0.0, 1.0, 1.5])).unwrap()),
        ("cond exp", false, LpOperator::cond_exp(TowerLevel::new(2, 1, Direction::Increasing).unwrap())),
        ("dense jordan", true, LpOperator::dense(LpOperator::left(jordan).unwrap().materialize().unwrap()).unwrap()),
        (
            "ad non-normal",
            true,
            LpOperator::ad_pair(
                CMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), ONE, ZERO, c(4.0, 0.0)]),
                CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.2, 0.0), ZERO, ONE]),
            )
            .unwrap(),
        ),
        (
            "dense similar",
            true,
            LpOperator::dense(similar_to(
                &[c(1.0, 0.2), c(0.5, -0.1), c(2.0, 0.0), c(3.0, 0.5), c(0.7, 0.0), c(1.5, -0.4), c(4.0, 0.0), c(0.3, 0.05), c(2.5, 0.0)],
                5,
            ))
            .unwrap(),
        ),
        ("left similar", true, LpOperator::left(similar_to(&[c(0.4, 0.0), c(1.0, 0.3), c(2.0, -0.3), c(6.0, 0.0)], 6)).unwrap()),
    ]
}

fn c3_calculus_oracle() -> Outcome {
    let start = Instant::now();
    let fns = vec![HolFn::g(), HolFn::gn(2.0)?, HolFn::gn(5.0)?, HolFn::zexp(), HolFn::sqrtzexp(), HolFn::zis(-0.7), HolFn::zis(1.5)];
    let (mut cases, mut non_normal, mut worst, mut max_dim) = (0usize, 0usize, 0.0f64, 0usize);
    for (_, nn, op) in operator_zoo() {
        max_dim = max_dim.max(op.dim() * op.dim());
        for f in &fns {
            let out = match contour_calculus_auto(&op, f) {
                Ok(r) => r,
                Err(_) => extended_calculus(&op, f, None)?,
            };
            let oracle = eigen_calculus(&op, &|z| f.eval(z))?;
            worst = worst.max(relative_distance(&out.op.materialize()?, &oracle.materialize()?, 1e-300));
            cases += 1;
            non_normal += nn as usize;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = cases >= 40 && non_normal >= 2 && max_dim <= 16 && worst <= 1e-6 && secs < 60.0;
    Ok((ok, format!("{cases} cases ({non_normal} non-normal), worst relative error {worst:.1e}, {secs:.2} s")))
}

fn c4_identities() -> Outcome {
    let (mut group, mut sub, mut mass) = (0.0f64, 0.0f64, 0.0f64);
    let b = real_diag(&[0.0, 1.0, 2.5]);
    for r in [group_average_identity(&b, 64)?, ad_group_average_identity(&real_diag(&[1.0, 2.0]), &real_diag(&[0.5, 3.0]), 64)?] {
        group = group.max(r.residual);
        mass = mass.max((r.mass - 1.0).abs());
    }
    let a = real_diag(&[0.0, 1.0, 3.0]);
    let id = CMatrix::identity(3, 3);
    let gen = kron(&id, &a) - kron(&a.transpose(), &id);
    for cm in [a.clone(), &gen * &gen] {
        for t in [0.0, 0.5, 1.0] {
            let r = subordination_identity(&cm, t, SUBORDINATION_NODES)?;
            sub = sub.max(r.residual);
            mass = mass.max((r.mass - 1.0).abs());
        }
    }
    let ok = group <= 1e-8 && sub <= 1e-5 && mass <= 1e-8;
    Ok((ok, format!("group residual {group:.1e}, subordination residual {sub:.1e}, mass error {mass:.1e}")))
}

fn c5_khintchine() -> Outcome {
    let cfg = ConvexCfg::default();
    let (mut lower4, mut lower1, mut c_meas) = (0usize, 0usize, 0.0f64);
    for k in 0..50u64 {
        let mut rng = seeded(1000 + k);
        let n = 2 + (k as usize % 7);
        let dim = 2 + (k as usize % 3);
        let xs = MatrixFamily::new((0..n).map(|_| gaussian_matrix(&mut rng, dim, dim)).collect())?;
        let r4 = khintchine_report(&xs, p(4.0), &cfg)?;
        lower4 += !r4.lower_ok as usize;
        c_meas = c_meas.max(r4.upper_ratio);
        let r1 = khintchine_report(&xs, p(1.0), &cfg)?;
        lower1 += !r1.lower_ok as usize;
    }
    let ok = lower4 == 0 && lower1 == 0 && c_meas.is_finite();
    Ok((ok, format!("50 families: p=4 lower violations {lower4}, measured C {c_meas:.4}; p=1 violations {lower1}")))
}

fn c6_qfock() -> Outcome {
    let mut min_eig = f64::INFINITY;
    for q in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        for d in 1..=3 {
            for n in 1..=5 {
                min_eig = min_eig.min(gram_min_eigenvalue(n, d, q)?);
            }
        }
    }
    let (mut moment_err, mut stab) = (0.0f64, 0.0f64);
    let mut rng = seeded(21);
    for q in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        for d in 1..=3 {
            let h: Vec<C64> = (0..d).map(|_| c(normal(&mut rng), normal(&mut rng))).collect();
            let h2: f64 = h.iter().map(|z| z.norm_sqr()).sum();
            let two = gaussian_moment(&vec![h.clone(); 2], q, 4)?.value;
            let four = gaussian_moment(&vec![h.clone(); 4], q, 4)?.value;
            let four_next = gaussian_moment(&vec![h.clone(); 4], q, 5)?.value;
            moment_err = moment_err.max((two - h2).norm() / h2).max((four - (2.0 + q) * h2 * h2).norm() / (h2 * h2));
            stab = stab.max((four - four_next).norm() / (h2 * h2));
        }
    }
    let ok = min_eig >= -1e-10 && moment_err <= 1e-10 && stab <= 1e-10;
    Ok((ok, format!("min Gram eigenvalue {min_eig:.3e}, moment rel err {moment_err:.1e}, N to N+1 change {stab:.1e}")))
}

fn c7_clifford() -> Outcome {
    let (mut relations, mut choi, mut eig, mut trace) = (0.0f64, f64::INFINITY, 0.0f64, 0.0f64);
    for n in 1..=5 {
        let rep = spin_generators(n)?;
        let d = rep.dim();
        let id = CMatrix::identity(d, d);
        for i in 0..n {
            let wi = rep.generator(i).to_matrix();
            relations = relations.max((&wi * &wi - &id).norm()).max((wi.adjoint() - &wi).norm());
            for j in 0..i {
                let wj = rep.generator(j).to_matrix();
                relations = relations.max((&wi * &wj + &wj * &wi).norm());
            }
        }
        let t = 0.3;
        let semi = clifford_semigroup(&rep, t)?;
        choi = choi.min(choi_min_eigenvalue(&semi.to_operator()?)?);
        for mask in 0..1usize << n {
            let v = rep.product(mask).to_matrix();
            let expected = &v * C64::from((-t * mask.count_ones() as f64).exp());
            eig = eig.max((semi.apply(&v)? - expected).camax());
            if mask != 0 {
                trace = trace.max((v.trace() / C64::from(d as f64)).norm());
            }
        }
    }
    let ok = relations == 0.0 && choi >= -1e-10 && eig <= 1e-12 && trace == 0.0;
    Ok((ok, format!("relation defect {relations:e}, min Choi eigenvalue {choi:.2e}, eigenvalue err {eig:.1e}, max trace {trace:e}")))
}

fn random_poly(rng: &mut nclp::random::Rng, rank: usize, terms: usize, max_len: usize) -> GroupPoly {
    GroupPoly::from_terms(
        (0..terms)
            .map(|k| (random_word(rng, rank, k % (max_len + 1)), c(normal(rng), normal(rng))))
            .collect::<Vec<(Word, C64)>>(),
    )
}

fn c8_freegroup() -> Outcome {
    let mut gen_err = 0.0f64;
    for k in 1..=3 {
        let g = Word::generator(k)?;
        gen_err = gen_err.max((group_lp_norm_even(&GroupPoly::word(g.clone()), 4)? - 1.0).abs());
        gen_err = gen_err.max((group_lp_norm_even(&GroupPoly::word(g.inverse()), 4)? - 1.0).abs());
    }
    let g = Word::generator(1)?;
    let sym = GroupPoly::word(g.clone()).add(&GroupPoly::word(g.inverse()));
    let sym_err = (group_lp_norm_even(&sym, 4)? - 6f64.powf(0.25)).abs();
    let mut rng = seeded(31);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let x = random_poly(&mut rng, 2, 6, 3);
        let t = 0.05 + 0.02 * i as f64;
        let ratio = group_lp_norm_even(&poisson_apply(&x, t)?, 4)? / group_lp_norm_even(&x, 4)?;
        worst = worst.max(ratio);
    }
    let dyadic: Vec<f64> = (0..10)
        .map(|seed| {
            let mut rng = seeded(seed);
            let shells: Vec<GroupPoly> = (0..3)
                .map(|k| {
                    let s = random_shell(&mut rng, 2, 1 << k, 6);
                    let n = s.l2();
                    s.scale(C64::from(1.0 / n))
                })
                .collect();
            dyadic_unconditionality(&shells)
        })
        .collect::<Result<_>>()?;
    let lo = dyadic.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = dyadic.iter().cloned().fold(0.0, f64::max);
    let ok = gen_err <= 1e-12 && sym_err <= 1e-12 && worst <= 1.0 + 1e-12 && hi.is_finite() && hi <= 1.1 * lo;
    Ok((
        ok,
        format!(
            "generator err {gen_err:.1e}, symmetric err {sym_err:.1e}, max Poisson ratio {worst:.6}, dyadic range [{lo:.4}, {hi:.4}]"
        ),
    ))
}

fn c9_martingale() -> Outcome {
    let tower = MartingaleTower::new(3, Direction::Increasing)?;
    let d = tower.dim();
    let mut rng = seeded(41);
    let x = gaussian_matrix(&mut rng, d, d);
    let y = gaussian_matrix(&mut rng, d, d);
    let mut algebra = 0.0f64;
    for j in 0..=3 {
        let ej = cond_exp(&tower, j, &x)?;
        algebra = algebra.max((cond_exp(&tower, j, &ej)? - &ej).norm());
        algebra = algebra.max((ej.trace() - x.trace()).norm());
        let a = cond_exp(&tower, j, &y)?;
        algebra = algebra.max((cond_exp(&tower, j, &(&a * &x * &a))? - &a * &ej * &a).norm());
        for k in 0..=3 {
            let lhs = cond_exp(&tower, k, &ej)?;
            algebra = algebra.max((lhs - cond_exp(&tower, tower.meet(j, k), &x)?).norm());
        }
    }
    let algebra = algebra / x.norm();
    let cfg = SearchCfg { restarts: 8, lengths: vec![1, 2, 4], rounds: 3, ascent_steps: 25, seed: 0 };
    let stein = stein_colbound(&tower, PExponent::TWO, &cfg)?.value;
    let k = 1;
    let t = tower.operator(k)?;
    let mut cesaro = 0.0f64;
    for q in [2.0, 4.0] {
        for _ in 0..3 {
            let x = gaussian_matrix(&mut rng, d, d);
            let r = cesaro_square_function(&t, &x, 20, p(q), &ConvexCfg::default())?;
            let closed = schatten_norm(&(cond_exp(&tower, k, &x)? - &x), p(q))? * cesaro_projection_constant(20);
            cesaro = cesaro.max(rel(r.value, closed));
        }
    }
    let ok = algebra <= 1e-12 && (stein - 1.0).abs() <= 1e-6 && cesaro <= 1e-8;
    Ok((ok, format!("algebra defect {algebra:.1e}, Stein estimate {stein:.9}, Cesaro rel err {cesaro:.1e}")))
}

fn c10_grid_doubling() -> Outcome {
    let f = HolFn::sqrtzexp();
    let grid = LogGrid::default_for(&left_positive(), &f)?;
    let (i1, r1) = column_identity(&grid)?;
    let (i2, r2) = column_identity(&grid.refined())?;
    let mut worst = rel(i2, i1);
    for (a, b) in r1.iter().zip(&r2) {
        worst = worst.max(rel(*b, *a));
    }
    for n in GAP_NS {
        let g = LogGrid::default_for(&gap_operator(n), &f)?;
        let (a, b) = (row_col_gap(n, p(4.0), Some(&g))?, row_col_gap(n, p(4.0), Some(&g.refined()))?);
        worst = worst.max(rel(b.fc, a.fc)).max(rel(b.fr, a.fr));
    }
    Ok((worst < 1e-4, format!("largest relative change under grid doubling {worst:.1e}")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("column square function golden values", c1_column_golden),
        ("row/column gap golden values", c2_gap_golden),
        ("functional calculus against eigen oracle", c3_calculus_oracle),
        ("integral identities", c4_identities),
        ("Khintchine sandwich", c5_khintchine),
        ("q-Fock Gram positivity and moments", c6_qfock),
        ("Clifford relations and semigroup", c7_clifford),
        ("free group exact norms", c8_freegroup),
        ("martingale suite", c9_martingale),
        ("grid robustness", c10_grid_doubling),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += !ok as usize;
        println!("{} criterion {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
