use nclp::convex::{ConvexCfg, SolverStatus};
use nclp::hvnorms::{khintchine_report, MatrixFamily};
use nclp::matrix::{operator_norm, polar_dual, schatten_norm, trace_pair};
use nclp::random::{gaussian_matrix, seeded};
use nclp::{CMatrix, PExponent, C64};

use super::Outcome;
use crate::output::{Cell, Table};
use crate::params::{CliResult, Params};

const DUALITY_TOL: f64 = 1e-8;

pub fn schatten_selftest(p: &Params) -> CliResult<Outcome> {
    let ps = p.ps(&[1.0, 1.5, 2.0, 3.0, f64::INFINITY])?;
    let dim = p.count("dim", 4, 64)?;
    let samples = p.count("samples", 20, 100_000)?;
    let seed = p.seed()?;
    let mut t = Table::new(&["p", "dim", "samples", "duality_err", "dual_unit_err", "holder_ok", "frobenius_err"]);
    let mut failure = None;
    for &q in &ps {
        let mut rng = seeded(seed);
        let (mut dual_err, mut unit_err, mut frob_err) = (0.0f64, 0.0f64, 0.0f64);
        let mut holder = true;
        for _ in 0..samples {
            let x = gaussian_matrix(&mut rng, dim, dim);
            let y = gaussian_matrix(&mut rng, dim, dim);
            let nx = schatten_norm(&x, q)?;
            let d = polar_dual(&x, q)?;
            dual_err = dual_err.max((trace_pair(&x, &d)? - C64::from(nx)).norm() / nx);
            unit_err = unit_err.max((schatten_norm(&d, q.conjugate())? - 1.0).abs());
            holder &= trace_pair(&x, &y)?.norm() <= nx * schatten_norm(&y, q.conjugate())? * (1.0 + 1e-12);
            if q == PExponent::TWO {
                frob_err = frob_err.max((nx - x.norm()).abs() / x.norm());
            }
        }
        if dual_err > DUALITY_TOL || unit_err > DUALITY_TOL || !holder {
            failure = Some(format!("Schatten self-test failed at p = {q}"));
        }
        let frob = if q == PExponent::TWO { Cell::Float(frob_err) } else { Cell::Empty };
        t.push(vec![q.to_string().into(), dim.into(), samples.into(), dual_err.into(), unit_err.into(), holder.into(), frob]);
    }
    Ok(Outcome { table: t, budget_warning: false, failure })
}

pub fn khintchine(p: &Params) -> CliResult<Outcome> {
    let ps = p.ps(&[4.0])?;
    let dim = p.count("dim", 3, 16)?;
    let n = p.count("family", 4, 16)?;
    let samples = p.count("samples", 1, 10_000)?;
    let seed = p.seed()?;
    let cfg = ConvexCfg { iterations: p.count("iterations", ConvexCfg::default().iterations, 1_000_000)?, seed, ..ConvexCfg::default() };
    let mut t = Table::new(&["family", "p", "n", "dim", "rad_average", "rad_norm", "lower_ok", "upper_ratio", "status"]);
    let mut warn = false;
    for &q in &ps {
        for k in 0..samples {
            let mut rng = seeded(seed.wrapping_add(k as u64));
            let xs = MatrixFamily::new((0..n).map(|_| gaussian_matrix(&mut rng, dim, dim)).collect())?;
            let r = khintchine_report(&xs, q, &cfg)?;
            warn |= r.status == SolverStatus::BudgetExhausted;
            t.push(vec![
                k.into(),
                q.to_string().into(),
                n.into(),
                dim.into(),
                r.rad_average.into(),
                r.rad_norm.into(),
                r.lower_ok.into(),
                r.upper_ratio.into(),
                status_name(r.status).into(),
            ]);
        }
    }
    Ok(Outcome { table: t, budget_warning: warn, failure: None })
}

pub fn tensor_extend(p: &Params) -> CliResult<Outcome> {
    let ps = p.ps(&[1.0, 2.0, 4.0])?;
    let dim = p.count("dim", 3, 32)?;
    let n = p.count("family", 4, 64)?;
    let seed = p.seed()?;
    let mut rng = seeded(seed);
    let raw = gaussian_matrix(&mut rng, n, n);
    let contraction: CMatrix = &raw / C64::from(operator_norm(&raw)?);
    let xs = MatrixFamily::new((0..n).map(|_| gaussian_matrix(&mut rng, dim, dim)).collect())?;
    let mut t = Table::new(&["p", "op_norm", "col_in", "col_out", "row_in", "row_out", "contraction_ok"]);
    for &q in &ps {
        let (_, r) = nclp::hvnorms::tensor_extend(&contraction, &xs, q)?;
        t.push(vec![
            q.to_string().into(),
            r.op_norm.into(),
            r.col_in.into(),
            r.col_out.into(),
            r.row_in.into(),
            r.row_out.into(),
            r.contraction_ok.into(),
        ]);
    }
    Ok(Outcome::rows(t))
}

pub fn status_name(s: SolverStatus) -> &'static str {
    match s {
        SolverStatus::Converged => "converged",
        SolverStatus::BudgetExhausted => "budget-exhausted",
    }
}
