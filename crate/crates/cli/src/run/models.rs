use nclp::convex::{ConvexCfg, SolverStatus};
use nclp::funcalc::opnorm::{superop_norm, NormCfg};
use nclp::funcalc::{Direction, HolFn};
use nclp::matrix::{max_abs, operator_norm, psd_sqrt, schatten_norm};
use nclp::models::choi_min_eigenvalue;
use nclp::models::clifford::{self, spin_generators, MAX_OPERATOR_SPINS, MAX_SPINS};
use nclp::models::fock::{gaussian_moment, gram_min_eigenvalue, second_quantization, FockBasis, MAX_GRAM_LEVEL};
use nclp::models::freegroup::{
    dyadic_unconditionality, group_lp_norm_even, parse_group_poly, poisson_apply, random_shell, GroupPoly, MAX_RANK,
    MAX_SHELLS,
};
use nclp::models::martingale::{cesaro_projection_constant, cesaro_square_function, cond_exp, stein_colbound, MartingaleTower};
use nclp::models::schur::{schur_hinf_apply, schur_semigroup, SchurSymbol};
use nclp::random::{gaussian_matrix, normal, seeded};
use nclp::rbound::SearchCfg;
use nclp::{CMatrix, PExponent, C64};

use super::norms::status_name;
use super::Outcome;
use crate::output::{Cell, Table};
use crate::params::{floats, CliError, CliResult, Params};

fn points(key: &str, s: &str) -> CliResult<Vec<Vec<f64>>> {
    s.split(';').map(|pt| floats(key, pt)).collect()
}

fn scaled(sym_pts: &(Vec<Vec<f64>>, Vec<Vec<f64>>), t: f64) -> CliResult<SchurSymbol> {
    let sc = |v: &Vec<Vec<f64>>| v.iter().map(|pt| pt.iter().map(|c| c * t).collect()).collect();
    Ok(SchurSymbol::new(sc(&sym_pts.0), sc(&sym_pts.1))?)
}

pub fn schur(p: &Params) -> CliResult<Outcome> {
    let alpha: Option<String> = p.opt("alpha")?;
    let beta: Option<String> = p.opt("beta")?;
    let pts = match (alpha, beta) {
        (Some(a), Some(b)) => (points("alpha", &a)?, points("beta", &b)?),
        (None, None) => {
            let n = p.count("points", 4, 32)?;
            let line: Vec<Vec<f64>> = (1..=n).map(|i| vec![i as f64]).collect();
            (line.clone(), line)
        }
        _ => return Err(CliError::Usage("--alpha and --beta must be given together".into())),
    };
    SchurSymbol::new(pts.0.clone(), pts.1.clone())?;
    let ts: Vec<f64> = p.list("t", &[0.1, 0.5, 1.0])?;
    let ps = p.ps(&[2.0])?;
    let id: String = p.get("fn", "g".to_string())?;
    let f = HolFn::from_id(&id)?;
    let seed = p.seed()?;
    let d = pts.0.len();
    let x = gaussian_matrix(&mut seeded(seed), d, d);
    let mut t = Table::new(&["t", "p", "choi_min_eigenvalue", "norm_estimate", "norm_exact", "fn", "calculus_ratio"]);
    for &s in &ts {
        let sym = SchurSymbol::new(pts.0.clone(), pts.1.clone())?;
        let tt = schur_semigroup(&sym, s)?;
        let choi = choi_min_eigenvalue(&tt)?;
        for &q in &ps {
            let est = superop_norm(&tt, q, &NormCfg { seed, ..NormCfg::default() })?;
            // f(tA) is the calculus of the symbol with every distance scaled by t
            let ratio = if s > 0.0 {
                Cell::Float(schatten_norm(&schur_hinf_apply(&scaled(&pts, s)?, &f, &x)?, q)? / schatten_norm(&x, q)?)
            } else {
                Cell::Empty
            };
            t.push(vec![s.into(), q.to_string().into(), choi.into(), est.value.into(), est.exact.into(), id.as_str().into(), ratio]);
        }
    }
    Ok(Outcome::rows(t))
}

fn even_p(q: PExponent) -> CliResult<u32> {
    let v = q.value();
    if v.fract() == 0.0 && (2.0..=8.0).contains(&v) && (v as u32).is_multiple_of(2) {
        Ok(v as u32)
    } else {
        Err(CliError::Usage(format!("--p: free group norms need p in {{2, 4, 6, 8}}, got {q}")))
    }
}

pub fn freegroup_norms(p: &Params) -> CliResult<Outcome> {
    let ps = p.ps(&[2.0, 4.0])?;
    let file: Option<String> = p.opt("poly")?;
    let x = match file {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("--poly: cannot read '{path}': {e}")))?;
            parse_group_poly(&text)?
        }
        None => {
            let rank = p.count("rank", 2, MAX_RANK)?;
            let len = p.count("len", 2, 32)?;
            let terms = p.count("terms", 4, 10_000)?;
            random_shell(&mut seeded(p.seed()?), rank, len, terms)
        }
    };
    let mut t = Table::new(&["p", "support", "l2", "norm"]);
    for &q in &ps {
        let k = even_p(q)?;
        t.push(vec![q.to_string().into(), x.support_len().into(), x.l2().into(), group_lp_norm_even(&x, k)?.into()]);
    }
    Ok(Outcome::rows(t))
}

pub fn freegroup_poisson(p: &Params) -> CliResult<Outcome> {
    let ps = p.ps(&[2.0, 4.0])?;
    let rank = p.count("rank", 2, MAX_RANK)?;
    let len = p.count("len", 3, 16)?;
    let terms = p.count("terms", 2, 1000)?;
    let samples = p.count("samples", 10, 100_000)?;
    let ts: Vec<f64> = p.list("t", &[0.1, 1.0])?;
    let seed = p.seed()?;
    let mut rng = seeded(seed);
    let polys: Vec<GroupPoly> = (0..samples)
        .map(|_| (0..=len).fold(GroupPoly::zero(), |acc, l| acc.add(&random_shell(&mut rng, rank, l, terms))))
        .collect();
    let mut t = Table::new(&["t", "p", "samples", "max_ratio", "contractive"]);
    for &s in &ts {
        for &q in &ps {
            let k = even_p(q)?;
            let mut worst = 0.0f64;
            for x in &polys {
                let base = group_lp_norm_even(x, k)?;
                worst = worst.max(group_lp_norm_even(&poisson_apply(x, s)?, k)? / base);
            }
            t.push(vec![s.into(), q.to_string().into(), samples.into(), worst.into(), (worst <= 1.0 + 1e-12).into()]);
        }
    }
    Ok(Outcome::rows(t))
}

pub fn freegroup_dyadic(p: &Params) -> CliResult<Outcome> {
    let rank = p.count("rank", 2, MAX_RANK)?;
    let shells = p.count("shells", 3, MAX_SHELLS)?;
    let terms = p.count("terms", 6, 1000)?;
    let samples = p.count("samples", 1, 10_000)?;
    let seed = p.seed()?;
    let mut t = Table::new(&["instance", "shells", "terms", "constant"]);
    for k in 0..samples {
        let mut rng = seeded(seed.wrapping_add(k as u64));
        let xs: Vec<GroupPoly> = (0..shells)
            .map(|j| {
                let x = random_shell(&mut rng, rank, 1 << j, terms);
                let n = x.l2();
                x.scale(C64::from(1.0 / n))
            })
            .collect();
        t.push(vec![k.into(), shells.into(), terms.into(), dyadic_unconditionality(&xs)?.into()]);
    }
    Ok(Outcome::rows(t))
}

fn q_list(p: &Params) -> CliResult<Vec<f64>> {
    let qs: Vec<f64> = p.list("q", &[-0.9, -0.5, 0.0, 0.5, 0.9])?;
    if let Some(q) = qs.iter().find(|q| !(q.abs() < 1.0)) {
        return Err(CliError::Usage(format!("--q must lie in (-1, 1), got {q}")));
    }
    Ok(qs)
}

pub fn qfock_gram(p: &Params) -> CliResult<Outcome> {
    let ns: Vec<usize> = p.list("n", &[1, 2, 3])?;
    let ds: Vec<usize> = p.list("d", &[2])?;
    let qs = q_list(p)?;
    let mut t = Table::new(&["n", "d", "q", "min_eigenvalue", "psd_ok"]);
    for &n in &ns {
        for &d in &ds {
            for &q in &qs {
                let m = gram_min_eigenvalue(n, d, q)?;
                t.push(vec![n.into(), d.into(), q.into(), m.into(), (m >= -1e-10).into()]);
            }
        }
    }
    Ok(Outcome::rows(t))
}

fn random_real_vector(seed: u64, d: usize) -> Vec<C64> {
    let mut rng = seeded(seed);
    (0..d).map(|_| C64::from(normal(&mut rng))).collect()
}

pub fn qfock_moments(p: &Params) -> CliResult<Outcome> {
    let d = p.count("d", 2, 4)?;
    let qs = q_list(p)?;
    let level = p.get("level", 4usize)?;
    if !(4..MAX_GRAM_LEVEL).contains(&level) {
        return Err(CliError::Usage(format!("--level must lie in 4..={}, got {level}", MAX_GRAM_LEVEL - 1)));
    }
    let h = random_real_vector(p.seed()?, d);
    let h2: f64 = h.iter().map(|c| c.norm_sqr()).sum();
    let mut t = Table::new(&["q", "level", "norm_h_sq", "m2", "m2_expected", "m4", "m4_expected", "m4_next_level", "truncated"]);
    for &q in &qs {
        let two = gaussian_moment(&[h.clone(), h.clone()], q, level)?;
        let four_args = vec![h.clone(); 4];
        let four = gaussian_moment(&four_args, q, level)?;
        let next = gaussian_moment(&four_args, q, level + 1)?;
        t.push(vec![
            q.into(),
            level.into(),
            h2.into(),
            two.value.re.into(),
            h2.into(),
            four.value.re.into(),
            ((2.0 + q) * h2 * h2).into(),
            next.value.re.into(),
            (two.truncated || four.truncated).into(),
        ]);
    }
    Ok(Outcome::rows(t))
}

pub fn qfock_ou(p: &Params) -> CliResult<Outcome> {
    let d = p.count("d", 2, 4)?;
    let qs = q_list(p)?;
    let level = p.count("level", 3, MAX_GRAM_LEVEL)?;
    let ts: Vec<f64> = p.list("t", &[0.1, 1.0])?;
    let h = random_real_vector(p.seed()?, d);
    let mut t = Table::new(&["q", "t", "level", "q_norm", "gaussian_decay", "expected_decay"]);
    for &q in &qs {
        let b = FockBasis::new(d, level, q)?;
        let root = psd_sqrt(&b.gram())?;
        let root_inv = root.clone().try_inverse().ok_or_else(|| nclp::Error::Numeric("singular Gram matrix".into()))?;
        let mut hv = b.vacuum() * C64::from(0.0);
        for (i, &c) in h.iter().enumerate() {
            hv[b.index(&[i])] = c;
        }
        for &s in &ts {
            let a = CMatrix::identity(d, d) * C64::from((-s).exp());
            let gamma = second_quantization(&b, &a)?;
            let q_norm = operator_norm(&(&root * &gamma.matrix * &root_inv))?;
            let decay = b.inner(&hv, &(&gamma.matrix * &hv)).re / b.inner(&hv, &hv).re;
            t.push(vec![q.into(), s.into(), level.into(), q_norm.into(), decay.into(), (-s).exp().into()]);
        }
    }
    Ok(Outcome::rows(t))
}

pub fn clifford_multiplier(p: &Params) -> CliResult<Outcome> {
    let n = p.count("n", 3, MAX_OPERATOR_SPINS)?;
    let default: Vec<String> = (0..=n).map(|k| format!("{}", (-(k as f64)).exp())).collect();
    let w: String = p.get("weights", default.join(","))?;
    let ws = floats("weights", &w)?;
    if ws.len() != n + 1 {
        return Err(CliError::Usage(format!("--weights needs {} values, got {}", n + 1, ws.len())));
    }
    let rep = spin_generators(n)?;
    let map = clifford::clifford_multiplier(&rep, &|k| C64::from(ws[k]));
    let choi = choi_min_eigenvalue(&map.to_operator()?)?;
    let mut t = Table::new(&["n", "weights", "choi_min_eigenvalue", "completely_positive"]);
    t.push(vec![n.into(), w.into(), choi.into(), (choi >= -1e-10).into()]);
    Ok(Outcome::rows(t))
}

pub fn clifford_semigroup(p: &Params) -> CliResult<Outcome> {
    let ns: Vec<usize> = p.list("n", &[3])?;
    let ts: Vec<f64> = p.list("t", &[0.5, 1.0])?;
    let mut t = Table::new(&["n", "t", "anticommutation_err", "unitarity_err", "eigenvalue_err", "trace_err", "choi_min_eigenvalue"]);
    for &n in &ns {
        if n == 0 || n > MAX_SPINS {
            return Err(CliError::Usage(format!("--n must lie in 1..={MAX_SPINS}, got {n}")));
        }
        let rep = spin_generators(n)?;
        let dim = rep.dim();
        let id = CMatrix::identity(dim, dim);
        let gens: Vec<CMatrix> = (0..n).map(|i| rep.generator(i).to_matrix()).collect();
        let (mut anti, mut unit) = (0.0f64, 0.0f64);
        for i in 0..n {
            unit = unit.max(max_abs(&(gens[i].adjoint() * &gens[i] - &id)));
            for j in 0..n {
                let target = if i == j { &id * C64::from(2.0) } else { CMatrix::zeros(dim, dim) };
                anti = anti.max(max_abs(&(&gens[i] * &gens[j] + &gens[j] * &gens[i] - target)));
            }
        }
        let trace = (1..1usize << n).map(|m| rep.product(m).trace().norm()).fold(0.0, f64::max);
        for &s in &ts {
            let sg = clifford::clifford_semigroup(&rep, s)?;
            let mut eig = 0.0f64;
            for mask in 0..1usize << n {
                let v = rep.product(mask).to_matrix();
                let expected = (-s * mask.count_ones() as f64).exp();
                eig = eig.max(max_abs(&(sg.apply(&v)? - v * C64::from(expected))));
            }
            let choi = if n <= MAX_OPERATOR_SPINS { Cell::Float(choi_min_eigenvalue(&sg.to_operator()?)?) } else { Cell::Empty };
            t.push(vec![n.into(), s.into(), anti.into(), unit.into(), eig.into(), trace.into(), choi]);
        }
    }
    Ok(Outcome::rows(t))
}

fn tower(p: &Params, default: usize) -> CliResult<MartingaleTower> {
    Ok(MartingaleTower::new(p.count("factors", default, 6)?, Direction::Increasing)?)
}

pub fn martingale_stein(p: &Params) -> CliResult<Outcome> {
    let tw = tower(p, 2)?;
    let ps = p.ps(&[2.0, 4.0])?;
    let cfg = SearchCfg { restarts: p.count("restarts", 16, 100_000)?, seed: p.seed()?, ..SearchCfg::default() };
    let mut t = Table::new(&["p", "factors", "estimate", "status", "restarts", "seed"]);
    let mut warn = false;
    for &q in &ps {
        let est = stein_colbound(&tw, q, &cfg)?;
        warn |= est.status == SolverStatus::BudgetExhausted;
        t.push(vec![
            q.to_string().into(),
            tw.factors().into(),
            est.value.into(),
            status_name(est.status).into(),
            est.restarts.into(),
            est.seed.into(),
        ]);
    }
    Ok(Outcome { table: t, budget_warning: warn, failure: None })
}

pub fn martingale_cesaro(p: &Params) -> CliResult<Outcome> {
    let tw = tower(p, 2)?;
    let k = p.get("index", 1usize)?;
    let op = tw.operator(k)?;
    let m_max = p.count("mmax", 20, 10_000)?;
    let ps = p.ps(&[2.0, 4.0])?;
    let samples = p.count("samples", 5, 10_000)?;
    let seed = p.seed()?;
    let cfg = ConvexCfg { seed, ..ConvexCfg::default() };
    let mut t = Table::new(&["sample", "p", "mmax", "value", "ratio", "closed_form", "status"]);
    let mut warn = false;
    let mut rng = seeded(seed);
    let xs: Vec<CMatrix> = (0..samples).map(|_| gaussian_matrix(&mut rng, tw.dim(), tw.dim())).collect();
    for &q in &ps {
        for (i, x) in xs.iter().enumerate() {
            let r = cesaro_square_function(&op, x, m_max, q, &cfg)?;
            warn |= r.status == SolverStatus::BudgetExhausted;
            let closed = schatten_norm(&(cond_exp(&tw, k, x)? - x), q)? * cesaro_projection_constant(m_max);
            t.push(vec![
                i.into(),
                q.to_string().into(),
                m_max.into(),
                r.value.into(),
                r.ratio.into(),
                closed.into(),
                status_name(r.status).into(),
            ]);
        }
    }
    Ok(Outcome { table: t, budget_warning: warn, failure: None })
}
