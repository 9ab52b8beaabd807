//! `nclp`: command-line runner for the laboratory experiments.
//!
//! Exit codes: 0 ok, 2 usage, 3 numeric failure, 4 solver budget warning
//! under `--strict`.

mod cli;
mod ops;
mod output;
mod params;
mod run;

use std::io::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::{Map, Value};

use output::{Format, Header};
use params::{CliError, Params};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_BUDGET: u8 = 4;

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = a.strip_prefix("--config=") {
            return Some(rest.to_string());
        }
    }
    None
}

fn load_config(path: &str) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("--config: cannot read '{path}': {e}")))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Usage(format!("--config: '{path}' must hold a JSON object"))),
        Err(e) => Err(CliError::Usage(format!("--config: '{path}': {e}"))),
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("NCLP_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("NCLP_THREADS must be a positive integer, got '{v}'")))?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn main_inner() -> Result<u8, CliError> {
    let mut args: Vec<String> = std::env::args().collect();
    let file = match config_path(&args) {
        Some(path) => load_config(&path)?,
        None => Map::new(),
    };
    // A config file may name the subcommand when the command line does not.
    if let Some(Value::String(sub)) = file.get("subcommand") {
        if args.get(1).is_none_or(|a| a.starts_with('-')) {
            let words: Vec<String> = sub.split_whitespace().map(str::to_string).collect();
            args.splice(1..1, words);
        }
    }
    let matches = match cli::command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let (path, leaf) = cli::leaf(&matches);
    let known = cli::known_keys(&path);
    for key in file.keys() {
        if key != "subcommand" && !known.contains(key) {
            return Err(CliError::Usage(format!("config key '{key}' is not an option of '{}'", path.join(" "))));
        }
    }
    init_threads()?;

    let params = Params::new(leaf, &file);
    let format: Format = params.get("format", Format::Csv)?;
    let out: Option<String> = params.opt("out")?;
    let strict = params.flag("strict")?;
    let start = Instant::now();
    let outcome = run::dispatch(&path, &params, out.as_deref())?;
    let wall_time = start.elapsed().as_secs_f64();

    let echo = params.echo();
    let command = path.join(" ");
    let text = output::render(&outcome.table, &Header { command: &command, config: &echo, wall_time }, format);
    match &out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let Some(msg) = outcome.failure {
        eprintln!("nclp: check failed: {msg}");
        return Ok(EXIT_NUMERIC);
    }
    if outcome.budget_warning {
        eprintln!("nclp: warning: a convex solver or search stopped on its iteration budget");
        if strict {
            return Ok(EXIT_BUDGET);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("nclp: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => EXIT_USAGE,
                CliError::Numeric(_) | CliError::Io(_) => EXIT_NUMERIC,
            })
        }
    }
}
