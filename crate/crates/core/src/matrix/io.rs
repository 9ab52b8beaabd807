//! Plain-text matrix format: a header line `rows cols`, then one line per row
//! holding `re,im` pairs separated by whitespace. Values are written with 17
//! significant digits so that parsing reproduces them bit for bit.

use std::fmt::Write as _;

use super::{check_finite, CMatrix, C64};
use crate::error::{Error, Result};

pub fn write_matrix(x: &CMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", x.nrows(), x.ncols());
    for i in 0..x.nrows() {
        let row: Vec<String> = (0..x.ncols())
            .map(|j| format!("{:.16e},{:.16e}", x[(i, j)].re, x[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

fn parse_entry(tok: &str, line: usize) -> Result<C64> {
    let (re, im) = tok.split_once(',').ok_or_else(|| Error::Parse {
        line,
        msg: format!("expected 're,im' but found '{tok}'"),
    })?;
    let num = |s: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad number '{s}'") })
    };
    Ok(C64::new(num(re)?, num(im)?))
}

/// Parses one matrix block. `first_line` is the 1-based line number of the
/// header inside the enclosing file, used for error messages.
pub(crate) fn parse_block(lines: &[&str], first_line: usize) -> Result<CMatrix> {
    let header = lines.first().ok_or(Error::Parse { line: first_line, msg: "empty matrix block".into() })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse { line: first_line, msg: format!("bad header '{header}'") })?;
    if dims.len() != 2 || dims[0] == 0 || dims[1] == 0 {
        return Err(Error::Parse { line: first_line, msg: "header must be 'rows cols' with positive sizes".into() });
    }
    let (rows, cols) = (dims[0], dims[1]);
    if lines.len() != rows + 1 {
        return Err(Error::Parse {
            line: first_line,
            msg: format!("expected {rows} data rows, found {}", lines.len() - 1),
        });
    }
    let mut x = CMatrix::zeros(rows, cols);
    for (i, l) in lines[1..].iter().enumerate() {
        let line = first_line + 1 + i;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != cols {
            return Err(Error::Parse { line, msg: format!("expected {cols} entries, found {}", toks.len()) });
        }
        for (j, t) in toks.iter().enumerate() {
            x[(i, j)] = parse_entry(t, line)?;
        }
    }
    check_finite(&x)?;
    Ok(x)
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    parse_block(&lines, 1)
}
