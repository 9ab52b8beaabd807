use nclp::convex::SolverStatus;
use nclp::funcalc::identities::{ad_group_average_identity, group_average_identity, subordination_identity, SUBORDINATION_NODES};
use nclp::funcalc::{contour_calculus_auto, default_thetas, eigen_calculus, extended_calculus, sector_type, HolFn};
use nclp::hvnorms::{write_family, MatrixFamily};
use nclp::matrix::{kron, real_diag, relative_distance};
use nclp::rbound::{bound_estimate, resolvent_family, Notion, SearchCfg, PROFILE_POINTS_PER_RAY, RAD_MAX_LENGTH};
use nclp::{CMatrix, PExponent};

use super::norms::status_name;
use super::Outcome;
use crate::ops::parse_operator;
use crate::output::Table;
use crate::params::{floats, CliError, CliResult, Params};

pub const CALCULUS_TOL: f64 = 1e-6;

pub fn calculus_check(p: &Params) -> CliResult<Outcome> {
    let fns: Vec<String> = p.list("fn", &["g".to_string()])?;
    let spec: String = p.get("A", "leftdiag:1,4".to_string())?;
    let op = parse_operator(&spec)?;
    let mut t = Table::new(&["fn", "operator", "method", "rel_error", "error_estimate", "ok"]);
    for id in &fns {
        let f = HolFn::from_id(id)?;
        let (method, out) = match contour_calculus_auto(&op, &f) {
            Ok(r) => ("contour", r),
            Err(_) => ("extended", extended_calculus(&op, &f, None)?),
        };
        let oracle = eigen_calculus(&op, &|z| f.eval(z))?;
        let err = relative_distance(&out.op.materialize()?, &oracle.materialize()?, 1e-300);
        t.push(vec![
            id.as_str().into(),
            spec.as_str().into(),
            method.into(),
            err.into(),
            out.error_estimate.into(),
            (err <= CALCULUS_TOL).into(),
        ]);
    }
    Ok(Outcome::rows(t))
}

pub fn group_average(p: &Params) -> CliResult<Outcome> {
    let a: String = p.get("diag", "1,2".to_string())?;
    let b: Option<String> = p.opt("ad-right")?;
    let nodes = p.count("nodes", 64, 400)?;
    let a_m = real_diag(&floats("diag", &a)?);
    let (case, r) = match &b {
        Some(b) => {
            let b_m = real_diag(&floats("ad-right", b)?);
            if b_m.nrows() != a_m.nrows() {
                return Err(CliError::Usage("--diag and --ad-right must have equal length".into()));
            }
            (format!("ad({a};{b})"), ad_group_average_identity(&a_m, &b_m, nodes)?)
        }
        None => (format!("diag({a})"), group_average_identity(&a_m, nodes)?),
    };
    let mut t = Table::new(&["identity", "case", "nodes", "residual", "mass"]);
    t.push(vec!["group-average".into(), case.into(), r.nodes.into(), r.residual.into(), r.mass.into()]);
    Ok(Outcome::rows(t))
}

pub fn subordination(p: &Params) -> CliResult<Outcome> {
    let a: String = p.get("diag", "0,1,3".to_string())?;
    let ts: Vec<f64> = p.list("t", &[0.0, 0.5, 1.0])?;
    let nodes = p.count("nodes", SUBORDINATION_NODES, 1_000_000)?;
    let ad = p.flag("ad")?;
    let a_m = real_diag(&floats("diag", &a)?);
    let (case, c) = if ad {
        let d = a_m.nrows();
        let id = CMatrix::identity(d, d);
        let gen = kron(&id, &a_m) - kron(&a_m.transpose(), &id);
        (format!("ad({a})^2"), &gen * &gen)
    } else {
        (format!("diag({a})"), a_m)
    };
    let mut t = Table::new(&["identity", "case", "t", "nodes", "residual", "mass"]);
    for &s in &ts {
        let r = subordination_identity(&c, s, nodes)?;
        t.push(vec!["subordination".into(), case.as_str().into(), s.into(), r.nodes.into(), r.residual.into(), r.mass.into()]);
    }
    Ok(Outcome::rows(t))
}

fn thetas(p: &Params, op: &nclp::funcalc::LpOperator, every: usize) -> CliResult<Vec<f64>> {
    let defaults: Vec<f64> = default_thetas(op)?.into_iter().skip(every - 1).step_by(every).collect();
    p.list("theta", &defaults)
}

pub fn sector_profile(p: &Params) -> CliResult<Outcome> {
    let spec: String = p.get("A", "schur-collinear:3".to_string())?;
    let op = parse_operator(&spec)?;
    let ps = p.ps(&[2.0])?;
    let ths = thetas(p, &op, 1)?;
    let seed = p.seed()?;
    let mut t = Table::new(&["p", "theta", "omega_hat", "k_theta"]);
    for &q in &ps {
        let prof = sector_type(&op, &ths, q, seed)?;
        for (th, k) in prof.constants {
            t.push(vec![q.to_string().into(), th.into(), prof.omega_hat.into(), k.into()]);
        }
    }
    Ok(Outcome::rows(t))
}

fn notion(s: &str) -> CliResult<Notion> {
    match s {
        "rad" => Ok(Notion::Rad),
        "col" => Ok(Notion::Col),
        "row" => Ok(Notion::Row),
        _ => Err(CliError::Usage(format!("--notion: expected rad, col or row, got '{s}'"))),
    }
}

pub fn rbound(p: &Params, out: Option<&str>) -> CliResult<Outcome> {
    let spec: String = p.get("A", "schur-collinear:3".to_string())?;
    let op = parse_operator(&spec)?;
    let ps = p.ps(&[2.0])?;
    let ths = thetas(p, &op, 2)?;
    let notions: Vec<String> = p.list("notion", &["rad".to_string(), "col".to_string(), "row".to_string()])?;
    let notions = notions.iter().map(|s| notion(s)).collect::<CliResult<Vec<_>>>()?;
    let lengths: String = p.get("lengths", "1,2,4,8".to_string())?;
    let lengths: Vec<usize> = lengths
        .split(',')
        .map(|s| s.trim().parse().ok().filter(|&l| l > 0).ok_or_else(|| CliError::Usage(format!("--lengths: bad length '{s}'"))))
        .collect::<CliResult<_>>()?;
    let cfg = SearchCfg { restarts: p.count("restarts", 64, 100_000)?, lengths, seed: p.seed()?, ..SearchCfg::default() };
    let mut t = Table::new(&["notion", "p", "theta", "estimate", "status", "restarts", "seed", "witness"]);
    let mut warn = false;
    for &q in &ps {
        for (i, &th) in ths.iter().enumerate() {
            let fam = resolvent_family(&op, th, PROFILE_POINTS_PER_RAY)?;
            for &nt in &notions {
                let cfg = match nt {
                    Notion::Rad => SearchCfg { lengths: cfg.lengths.iter().map(|&l| l.min(RAD_MAX_LENGTH)).collect(), ..cfg.clone() },
                    _ => cfg.clone(),
                };
                let est = bound_estimate(nt, &fam, q, &cfg)?;
                warn |= est.status == SolverStatus::BudgetExhausted;
                let witness = match out {
                    Some(base) => {
                        let path = format!("{base}.witness-{nt}-p{q}-{i}.txt");
                        write_witness(&path, &est, q, th)?;
                        path.into()
                    }
                    None => crate::output::Cell::Empty,
                };
                t.push(vec![
                    nt.to_string().into(),
                    q.to_string().into(),
                    th.into(),
                    est.value.into(),
                    status_name(est.status).into(),
                    est.restarts.into(),
                    est.seed.into(),
                    witness,
                ]);
            }
        }
    }
    Ok(Outcome { table: t, budget_warning: warn, failure: None })
}

fn write_witness(path: &str, est: &nclp::rbound::BoundEstimate, q: PExponent, theta: f64) -> CliResult<()> {
    let sel: Vec<String> = est.witness.selection.iter().map(|k| k.to_string()).collect();
    let mut s = format!(
        "# notion {} p {q} theta {theta:e} value {:e}\n# selection {}\n",
        est.notion,
        est.value,
        sel.join(" ")
    );
    s.push_str(&write_family(&MatrixFamily::new(est.witness.family.clone())?));
    std::fs::write(path, s)?;
    Ok(())
}
