//! The `smva` command-line tool.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

pub use config::{
    parse_args, Analysis, Command, Format, Parsed, PlotKind, RunConfig, WeightsChoice,
};
pub use report::{Cell, Report, Table};

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad input or usage; exit status 1.
    Validation(String),
    /// The computation itself failed; exit status 2.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<smva_core::Error> for Failure {
    fn from(e: smva_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

/// Render the output of a configuration without writing it.
pub fn render(cfg: &RunConfig) -> Result<String, Failure> {
    let inputs = commands::load_inputs(cfg)?;
    let (report, plots) = commands::execute(cfg, &inputs)?;
    if let Some(kind) = cfg.plot {
        return Ok(plots.take(kind, cfg.command.name())?.to_csv());
    }
    Ok(match cfg.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    })
}

/// Execute a configuration, writing to `--out` or `stdout`; returns the
/// exit status.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = render(cfg).and_then(|text| match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Validation(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Validation(format!("cannot write output: {e}"))),
    });
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.exit_code()
        }
    }
}

/// Parse `args` and run; `env_seed` is the value of `SMVA_SEED`.
pub fn main_with<I, T>(
    args: I,
    env_seed: Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(args, env_seed) {
        Parsed::Run(cfg) => run(&cfg, stdout, stderr),
        Parsed::Info(text) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Parsed::Usage(text) => {
            let _ = stderr.write_all(text.as_bytes());
            1
        }
    }
}
