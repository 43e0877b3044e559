//! Command-line front end: argument parsing, scenario files and output.

pub mod catalogue;
pub mod commands;
pub mod emit;
pub mod ingest;
pub mod scenario;

use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use ecodyn_core::allen::AllenError;
use ecodyn_core::fredholm::FredholmError;
use ecodyn_core::harrod::HarrodError;
use ecodyn_core::leontief::LeontiefError;
use ecodyn_core::longwave::LongWaveError;
use ecodyn_core::odelin::OdeError;

pub use commands::{Cli, Command};
pub use emit::{format_number, write_atomic, Format, Output, Table};
pub use scenario::{parse_scenario, Scenario};

/// Steps used when a command does not set `--steps`.
pub const DEFAULT_STEPS: usize = 1000;
pub const STEPS_ENV: &str = "ECODYN_DEFAULT_STEPS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or input files.
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed.
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::ZeroOrder
            | OdeError::BadLeading
            | OdeError::Grid(_)
            | OdeError::InitLength { .. }
            | OdeError::Forced => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<HarrodError> for CliError {
    fn from(e: HarrodError) -> Self {
        match e {
            HarrodError::Ode(o) => o.into(),
            HarrodError::Pole { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AllenError> for CliError {
    fn from(e: AllenError) -> Self {
        match e {
            AllenError::Ode(o) => o.into(),
            AllenError::Harrod(h) => h.into(),
            AllenError::Invalid(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<LongWaveError> for CliError {
    fn from(e: LongWaveError) -> Self {
        match e {
            LongWaveError::Ode(o) => o.into(),
            LongWaveError::Invalid(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<LeontiefError> for CliError {
    fn from(e: LeontiefError) -> Self {
        match e {
            LeontiefError::Ode(o) => o.into(),
            LeontiefError::Invalid(_)
            | LeontiefError::NegativeEntry { .. }
            | LeontiefError::NotProductive { .. }
            | LeontiefError::UnsupportedOrder(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FredholmError> for CliError {
    fn from(e: FredholmError) -> Self {
        match e {
            FredholmError::Ode(o) => o.into(),
            FredholmError::Invalid(_) | FredholmError::SideConditions { .. } | FredholmError::Boundary(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn default_steps() -> Result<usize, CliError> {
    match std::env::var(STEPS_ENV) {
        Err(_) => Ok(DEFAULT_STEPS),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("{STEPS_ENV}: `{v}` is not a positive integer"))),
        },
    }
}

/// Expands `--scenario FILE [overrides...]` into an ordinary argument vector.
fn expand(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let program = args.first().cloned().unwrap_or_else(|| "ecodyn".into());
    let (path, rest) = match args.get(1).map(String::as_str) {
        Some("--scenario") => match args.get(2) {
            Some(p) => (p.clone(), args[3..].to_vec()),
            None => return Err(CliError::Usage("--scenario: missing file".into())),
        },
        Some(a) if a.starts_with("--scenario=") => (a["--scenario=".len()..].to_string(), args[2..].to_vec()),
        _ => return Ok(args),
    };
    let path = std::path::Path::new(&path);
    let mut scenario = parse_scenario(&emit::read_text(path)?)?;
    // input files are named relative to the scenario itself
    let base = path.parent().unwrap_or(std::path::Path::new(""));
    for (key, value) in scenario.entries.iter_mut() {
        if matches!(key.as_str(), "matrix" | "demand-file") && std::path::Path::new(value.as_str()).is_relative() {
            *value = base.join(&*value).to_string_lossy().into_owned();
        }
    }
    Ok(scenario.to_args(&program, &rest))
}

fn execute(args: Vec<String>) -> Result<i32, CliError> {
    let args = expand(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return Ok(code);
        }
    };
    let output = cli.command.execute(default_steps()?)?;
    let dest = cli.command.destination();
    let format = dest.format.unwrap_or_else(|| Format::infer(dest.out.as_deref()));
    let bytes = output.render(format)?;
    match &dest.out {
        Some(path) => {
            write_atomic(path, &bytes)?;
            print!("{}", output.summary());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
            eprint!("{}", output.summary());
        }
    }
    Ok(0)
}

/// Runs the program on `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    match execute(args.into_iter().map(Into::into).collect()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
