use nclp::convex::ConvexCfg;
use nclp::funcalc::{HolFn, LpOperator};
use nclp::matrix::real_diag;
use nclp::random::{gaussian_matrix, seeded};
use nclp::sqfn::{equivalence_experiment, row_col_gap, square_report, LogGrid, Variant};

use super::Outcome;
use crate::ops::parse_operator;
use crate::output::{Cell, Table};
use crate::params::{CliResult, Params};

const COLUMNS: [&str; 13] =
    ["experiment", "p", "F", "n_grid", "t_min", "t_max", "value_col", "value_row", "value_rad", "value_bracket", "K1", "K2", "seed"];

fn grid_cells(g: &LogGrid) -> [Cell; 3] {
    [g.n().into(), g.t_min().into(), g.t_max().into()]
}

pub fn equiv(p: &Params) -> CliResult<Outcome> {
    let spec: String = p.get("A", "leftdiag:1,2,4".to_string())?;
    let op = parse_operator(&spec)?;
    let fns: Vec<String> = p.list("fn", &["sqrtzexp".to_string()])?;
    let ps = p.ps(&[2.0])?;
    let variant: String = p.get("variant", "col".to_string())?;
    let variant: Variant = variant.parse()?;
    let samples = p.count("samples", 20, 100_000)?;
    let seed = p.seed()?;
    let user_grid = p.grid()?;
    let cfg = ConvexCfg { seed, ..ConvexCfg::default() };
    let mut cols = COLUMNS.to_vec();
    cols.extend(["variant", "truncated", "converged"]);
    let mut t = Table::new(&cols);
    let mut warn = false;
    for id in &fns {
        let f = HolFn::from_id(id)?;
        let grid = match &user_grid {
            Some(g) => g.clone(),
            None => LogGrid::default_for(&op, &f)?,
        };
        for &q in &ps {
            let x = gaussian_matrix(&mut seeded(seed), op.dim(), op.dim());
            let r = square_report(&op, &x, &f, &grid, q, &cfg)?;
            let e = equivalence_experiment(&op, &f, q, variant, samples, seed, &grid, &cfg)?;
            warn |= !r.converged;
            let [n, lo, hi] = grid_cells(&grid);
            t.push(vec![
                "equiv".into(),
                q.to_string().into(),
                id.as_str().into(),
                n,
                lo,
                hi,
                r.col.into(),
                r.row.into(),
                r.rad.into(),
                r.bracket.into(),
                e.k1.into(),
                e.k2.into(),
                seed.into(),
                format!("{variant:?}").to_lowercase().into(),
                r.truncated.into(),
                r.converged.into(),
            ]);
        }
    }
    Ok(Outcome { table: t, budget_warning: warn, failure: None })
}

pub fn rowcol_gap(p: &Params) -> CliResult<Outcome> {
    let ps = p.ps(&[4.0])?;
    let ns: Vec<usize> = p.list("n", &[4, 8, 16])?;
    let user_grid = p.grid()?;
    let mut cols = COLUMNS.to_vec();
    cols.extend(["n", "fr_closed_form", "ratio"]);
    let mut t = Table::new(&cols);
    let f = HolFn::sqrtzexp();
    for &q in &ps {
        for &n in &ns {
            if n == 0 || n > 24 {
                return Err(crate::params::CliError::Usage(format!("--n must lie in 1..=24, got {n}")));
            }
            let grid = match &user_grid {
                Some(g) => g.clone(),
                None => {
                    let diag: Vec<f64> = (1..=n).map(|i| 2f64.powi(i as i32)).collect();
                    LogGrid::default_for(&LpOperator::left(real_diag(&diag))?, &f)?
                }
            };
            let g = row_col_gap(n, q, Some(&grid))?;
            let [ng, lo, hi] = grid_cells(&grid);
            t.push(vec![
                "rowcol-gap".into(),
                q.to_string().into(),
                f.name().into(),
                ng,
                lo,
                hi,
                g.fc.into(),
                g.fr.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                n.into(),
                g.fr_closed_form.into(),
                g.ratio.into(),
            ]);
        }
    }
    Ok(Outcome::rows(t))
}
