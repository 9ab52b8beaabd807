use std::cell::RefCell;
use std::fmt::Display;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::ArgMatches;
use serde_json::{Map, Value};

use nclp::sqfn::LogGrid;
use nclp::PExponent;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys or values; exit code 2.
    Usage(String),
    /// Failure inside the library; exit code 3.
    Numeric(nclp::Error),
    Io(std::io::Error),
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<nclp::Error> for CliError {
    fn from(e: nclp::Error) -> Self {
        match e {
            nclp::Error::Invalid(m) | nclp::Error::Shape(m) | nclp::Error::TooLarge(m) => CliError::Usage(m),
            nclp::Error::Parse { line, msg } => CliError::Usage(format!("parse error at line {line}: {msg}")),
            other => CliError::Numeric(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Option lookup: command-line flags first, then the config file, then the
/// caller's default. Every resolved value is recorded for the header echo.
pub struct Params<'a> {
    matches: &'a ArgMatches,
    file: &'a Map<String, Value>,
    used: RefCell<Vec<(String, String)>>,
}

fn file_strings(v: &Value) -> Vec<String> {
    match v {
        Value::Array(items) => items.iter().flat_map(file_strings).collect(),
        Value::String(s) => s.split_whitespace().map(str::to_string).collect(),
        Value::Null => Vec::new(),
        other => vec![other.to_string()],
    }
}

impl<'a> Params<'a> {
    pub fn new(matches: &'a ArgMatches, file: &'a Map<String, Value>) -> Self {
        Params { matches, file, used: RefCell::new(Vec::new()) }
    }

    fn raw(&self, key: &str) -> Option<Vec<String>> {
        let on_command_line = matches!(self.matches.try_contains_id(key), Ok(true))
            && self.matches.value_source(key) == Some(ValueSource::CommandLine);
        if on_command_line {
            if let Ok(Some(vals)) = self.matches.try_get_many::<String>(key) {
                return Some(vals.cloned().collect());
            }
        }
        self.file.get(key).map(file_strings)
    }

    fn record(&self, key: &str, value: String) {
        let mut used = self.used.borrow_mut();
        if !used.iter().any(|(k, _)| k == key) {
            used.push((key.to_string(), value));
        }
    }

    pub fn echo(&self) -> Vec<(String, String)> {
        self.used.borrow().clone()
    }

    fn parse<T>(key: &str, s: &str) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        s.parse::<T>().map_err(|e| CliError::Usage(format!("--{key}: {e}")))
    }

    pub fn opt<T>(&self, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(vals) => {
                if vals.len() != 1 {
                    return Err(CliError::Usage(format!("--{key} takes one value, got {}", vals.len())));
                }
                self.record(key, vals[0].clone());
                Self::parse(key, &vals[0]).map(Some)
            }
        }
    }

    pub fn get<T>(&self, key: &str, default: T) -> CliResult<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn list<T>(&self, key: &str, default: &[T]) -> CliResult<Vec<T>>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        let vals = match self.raw(key) {
            Some(vals) => {
                let out = vals.iter().map(|s| Self::parse(key, s)).collect::<CliResult<Vec<T>>>()?;
                if out.is_empty() {
                    return Err(CliError::Usage(format!("--{key} needs at least one value")));
                }
                out
            }
            None => default.to_vec(),
        };
        self.record(key, vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
        Ok(vals)
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        let on = if matches!(self.matches.try_contains_id(key), Ok(true))
            && self.matches.value_source(key) == Some(ValueSource::CommandLine)
        {
            self.matches.get_flag(key)
        } else {
            match self.file.get(key) {
                None => false,
                Some(Value::Bool(b)) => *b,
                Some(Value::String(s)) => Self::parse::<bool>(key, s)?,
                Some(other) => return Err(CliError::Usage(format!("--{key}: expected a boolean, got {other}"))),
            }
        };
        self.record(key, on.to_string());
        Ok(on)
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.get("seed", 0u64)
    }

    pub fn ps(&self, default: &[f64]) -> CliResult<Vec<PExponent>> {
        let ds: Vec<String> = default.iter().map(|v| if v.is_infinite() { "inf".to_string() } else { v.to_string() }).collect();
        let raw: Vec<String> = self.list("p", &ds)?;
        raw.iter().map(|s| Self::parse::<PExponent>("p", s)).collect()
    }

    pub fn grid(&self) -> CliResult<Option<LogGrid>> {
        let Some(s) = self.opt::<String>("grid")? else { return Ok(None) };
        let parts: Vec<&str> = s.split(',').collect();
        let bad = || CliError::Usage(format!("--grid: expected tmin,tmax,n, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let t_min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let t_max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        LogGrid::new(t_min, t_max, n).map(Some).map_err(|e| CliError::Usage(format!("--grid: {e}")))
    }

    /// Positive count with a range check.
    pub fn count(&self, key: &str, default: usize, max: usize) -> CliResult<usize> {
        let v = self.get(key, default)?;
        if v == 0 || v > max {
            return Err(CliError::Usage(format!("--{key} must lie in 1..={max}, got {v}")));
        }
        Ok(v)
    }
}

/// Comma-separated reals, as in `1,2.5,4`.
pub fn floats(key: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("--{key}: bad number '{t}' in '{s}'"))))
        .collect()
}
