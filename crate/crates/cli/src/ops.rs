use nclp::funcalc::{Direction, LpOperator, TowerLevel};
use nclp::matrix::{parse_matrix, real_diag};
use nclp::models::schur::SchurSymbol;
use nclp::{CMatrix, C64};

use crate::params::{floats, CliError, CliResult};

pub const OPERATOR_FORMS: &str = "leftdiag:a,b,..  rightdiag:a,b,..  ad:a,..;b,..  upper:a,b,c  \
schur-collinear:n  condexp:N,k  left:@file  right:@file  schur:@file  dense:@file";

fn read_matrix(path: &str) -> CliResult<CMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read '{path}': {e}")))?;
    Ok(parse_matrix(&text)?)
}

/// Parses an operator description such as `leftdiag:1,4`.
pub fn parse_operator(spec: &str) -> CliResult<LpOperator> {
    let (head, arg) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("--A: '{spec}' is not of the form kind:args ({OPERATOR_FORMS})")))?;
    let op = match (head, arg.strip_prefix('@')) {
        ("left", Some(path)) => LpOperator::left(read_matrix(path)?)?,
        ("right", Some(path)) => LpOperator::right(read_matrix(path)?)?,
        ("schur", Some(path)) => LpOperator::schur(read_matrix(path)?)?,
        ("dense", Some(path)) => LpOperator::dense(read_matrix(path)?)?,
        ("leftdiag", None) => LpOperator::left(real_diag(&floats("A", arg)?))?,
        ("rightdiag", None) => LpOperator::right(real_diag(&floats("A", arg)?))?,
        ("ad", None) => {
            let (a, b) = arg.split_once(';').ok_or_else(|| CliError::Usage(format!("--A: ad needs a;b, got '{arg}'")))?;
            LpOperator::ad_pair(real_diag(&floats("A", a)?), real_diag(&floats("A", b)?))?
        }
        ("upper", None) => {
            let v = floats("A", arg)?;
            if v.len() != 3 {
                return Err(CliError::Usage(format!("--A: upper needs three numbers, got '{arg}'")));
            }
            let m = CMatrix::from_row_slice(2, 2, &[C64::from(v[0]), C64::from(v[2]), C64::from(0.0), C64::from(v[1])]);
            LpOperator::left(m)?
        }
        ("schur-collinear", None) => {
            let n: usize = arg.trim().parse().map_err(|_| CliError::Usage(format!("--A: bad size '{arg}'")))?;
            SchurSymbol::collinear(n)?.generator()
        }
        ("condexp", None) => {
            let v: Vec<usize> = arg
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| CliError::Usage(format!("--A: bad integer '{t}'"))))
                .collect::<CliResult<_>>()?;
            if v.len() != 2 {
                return Err(CliError::Usage(format!("--A: condexp needs N,k, got '{arg}'")));
            }
            LpOperator::cond_exp(TowerLevel::new(v[0], v[1], Direction::Increasing)?)
        }
        _ => return Err(CliError::Usage(format!("--A: unknown operator '{spec}' ({OPERATOR_FORMS})"))),
    };
    Ok(op)
}
