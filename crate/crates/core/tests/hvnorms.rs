use nalgebra::DMatrix;
use nclp::convex::ConvexCfg;
use nclp::hvnorms::{col_norm, row_norm, sum_norm, MatrixFamily};
use nclp::matrix::{polar_dual, trace_pair, CMatrix, PExponent, C64};
use nclp::random::{gaussian_matrix, normal, seeded, Rng};

fn p(v: f64) -> PExponent {
    PExponent::new(v).unwrap()
}

fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

fn vstack(ms: &[CMatrix]) -> CMatrix {
    let r = ms[0].nrows();
    DMatrix::from_fn(r * ms.len(), ms[0].ncols(), |i, j| ms[i / r][(i % r, j)])
}

fn hstack(ms: &[CMatrix]) -> CMatrix {
    let c = ms[0].ncols();
    DMatrix::from_fn(ms[0].nrows(), c * ms.len(), |i, j| ms[j / c][(i, j % c)])
}

/// 2-families in M_2 packed as 16 reals.
fn unpack(v: &[f64]) -> [CMatrix; 2] {
    let m = |o: usize| CMatrix::from_fn(2, 2, |i, j| C64::new(v[o + 4 * i + 2 * j], v[o + 4 * i + 2 * j + 1]));
    [m(0), m(8)]
}

fn pack(xs: &[CMatrix]) -> Vec<f64> {
    let mut v = Vec::with_capacity(16);
    for x in xs {
        for i in 0..2 {
            for j in 0..2 {
                v.push(x[(i, j)].re);
                v.push(x[(i, j)].im);
            }
        }
    }
    v
}

fn split_cost(xs: &[CMatrix], v: &[f64]) -> f64 {
    let u = unpack(v);
    let rest = [&xs[0] - &u[0], &xs[1] - &u[1]];
    trace_norm(&vstack(&u)) + trace_norm(&hstack(&rest))
}

/// Multi-start pattern search over all decompositions, with coordinate and
/// random directions and step halving down to 1e-9.
fn decomposition_oracle(xs: &[CMatrix], rng: &mut Rng) -> f64 {
    let zero = vec![0.0; 16];
    let full = pack(xs);
    let half: Vec<f64> = full.iter().map(|t| t / 2.0).collect();
    let mut starts = vec![zero, full, half];
    for _ in 0..5 {
        starts.push((0..16).map(|_| normal(rng)).collect());
    }
    let mut best = f64::INFINITY;
    for mut v in starts {
        let mut cost = split_cost(xs, &v);
        let mut step = 1.0;
        while step > 1e-9 {
            let mut dirs: Vec<Vec<f64>> = (0..16).map(|k| (0..16).map(|i| if i == k { 1.0 } else { 0.0 }).collect()).collect();
            for _ in 0..32 {
                let d: Vec<f64> = (0..16).map(|_| normal(rng)).collect();
                let n = d.iter().map(|t| t * t).sum::<f64>().sqrt();
                dirs.push(d.into_iter().map(|t| t / n).collect());
            }
            let mut moved = false;
            for d in &dirs {
                for s in [step, -step] {
                    let w: Vec<f64> = v.iter().zip(d).map(|(a, b)| a + s * b).collect();
                    let c = split_cost(xs, &w);
                    if c < cost {
                        cost = c;
                        v = w;
                        moved = true;
                    }
                }
            }
            if !moved {
                step /= 2.0;
            }
        }
        best = best.min(cost);
    }
    best
}

#[test]
fn sum_norm_matches_a_direct_search_in_m2() {
    let mut rng = seeded(2024);
    let cfg = ConvexCfg::default();
    for _ in 0..3 {
        let xs = vec![gaussian_matrix(&mut rng, 2, 2), gaussian_matrix(&mut rng, 2, 2)];
        let solved = sum_norm(&MatrixFamily::new(xs.clone()).unwrap(), p(1.0), &cfg).unwrap();
        let oracle = decomposition_oracle(&xs, &mut rng);
        assert!((solved.value - oracle).abs() <= 1e-3, "solver {} oracle {oracle}", solved.value);
        let u = &solved.column_part;
        let v = pack(u);
        assert!((split_cost(&xs, &v) - solved.value).abs() <= 1e-9 * oracle.max(1.0));
    }
}

#[test]
fn column_norm_is_attained_by_a_row_unit_family() {
    let mut rng = seeded(31);
    for &pv in &[1.0, 1.5, 2.0, 3.0, 6.0] {
        let xs: Vec<CMatrix> = (0..3).map(|_| gaussian_matrix(&mut rng, 3, 2)).collect();
        let fam = MatrixFamily::new(xs.clone()).unwrap();
        let col = col_norm(&fam, p(pv)).unwrap();
        // The dual of a stacked column is a stacked row of 2x3 blocks.
        let y = polar_dual(&vstack(&xs), p(pv)).unwrap();
        let ys: Vec<CMatrix> = (0..3).map(|k| y.view((0, 3 * k), (2, 3)).into_owned()).collect();
        let yfam = MatrixFamily::new(ys.clone()).unwrap();
        let unit = row_norm(&yfam, p(pv).conjugate()).unwrap();
        assert!((unit - 1.0).abs() < 1e-9, "p={pv}: {unit}");
        let pairing: C64 = xs.iter().zip(&ys).map(|(x, y)| trace_pair(x, y).unwrap()).sum();
        assert!(pairing.norm() >= col * (1.0 - 1e-6), "p={pv}: {} vs {col}", pairing.norm());
        // Hölder: no row-unit family does better.
        for _ in 0..20 {
            let zs: Vec<CMatrix> = (0..3).map(|_| gaussian_matrix(&mut rng, 2, 3)).collect();
            let r = row_norm(&MatrixFamily::new(zs.clone()).unwrap(), p(pv).conjugate()).unwrap();
            let s: C64 = xs.iter().zip(&zs).map(|(x, z)| trace_pair(x, z).unwrap()).sum();
            assert!(s.norm() <= col * r * (1.0 + 1e-9));
        }
    }
}
