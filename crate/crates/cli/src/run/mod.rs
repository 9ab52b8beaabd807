mod calculus;
mod models;
mod norms;
mod square;

use crate::output::Table;
use crate::params::{CliError, CliResult, Params};

pub struct Outcome {
    pub table: Table,
    /// Some solver or search stopped on its budget.
    pub budget_warning: bool,
    /// A built-in check failed; the rows are still written.
    pub failure: Option<String>,
}

impl Outcome {
    pub fn rows(table: Table) -> Self {
        Outcome { table, budget_warning: false, failure: None }
    }
}

pub fn dispatch(path: &[String], p: &Params, out: Option<&str>) -> CliResult<Outcome> {
    let path: Vec<&str> = path.iter().map(String::as_str).collect();
    match path.as_slice() {
        ["schatten-selftest"] => norms::schatten_selftest(p),
        ["khintchine"] => norms::khintchine(p),
        ["tensor-extend"] => norms::tensor_extend(p),
        ["calculus-check"] => calculus::calculus_check(p),
        ["identities", "group-average"] => calculus::group_average(p),
        ["identities", "subordination"] => calculus::subordination(p),
        ["sector-profile"] => calculus::sector_profile(p),
        ["rbound"] => calculus::rbound(p, out),
        ["sqfn-equiv"] | ["sqfn", "equiv"] => square::equiv(p),
        ["rowcol-gap"] | ["sqfn", "rowcol-gap"] => square::rowcol_gap(p),
        ["schur"] => models::schur(p),
        ["freegroup", "norms"] => models::freegroup_norms(p),
        ["freegroup", "poisson"] => models::freegroup_poisson(p),
        ["freegroup", "dyadic"] => models::freegroup_dyadic(p),
        ["qfock", "gram"] => models::qfock_gram(p),
        ["qfock", "moments"] => models::qfock_moments(p),
        ["qfock", "ou"] => models::qfock_ou(p),
        ["clifford", "multiplier"] => models::clifford_multiplier(p),
        ["clifford", "semigroup"] => models::clifford_semigroup(p),
        ["martingale", "stein"] => models::martingale_stein(p),
        ["martingale", "cesaro"] => models::martingale_cesaro(p),
        other => Err(CliError::Usage(format!("unknown command '{}'", other.join(" ")))),
    }
}
