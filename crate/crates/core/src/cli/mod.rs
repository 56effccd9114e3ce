//! Command layer shared by the `symmflow` binary and the C interface.

mod commands;
mod report;

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::expr::ExprError;
use crate::intfactor::IntFactorError;
use crate::linsolve::LinsolveError;
use crate::numeric::NumericError;
use crate::perturb::{NumericGrid, PerturbError};
use crate::problem::{ProblemError, ProblemFile};
use crate::symmetry::SymmetryError;

pub use report::{sha256_hex, AuditEntry, RunReport, ENGINE_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ErrorKind {
    Parse,
    Inconsistent,
    Config,
    Verification,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Inconsistent => 3,
            ErrorKind::Config => 4,
            ErrorKind::Verification => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::new(ErrorKind::Config, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn expr_kind(e: &ExprError) -> ErrorKind {
    match e {
        ExprError::Syntax { .. } | ExprError::UnknownIdentifier { .. } => ErrorKind::Parse,
        _ => ErrorKind::Config,
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        let kind = match &e {
            ProblemError::Json(_) => ErrorKind::Parse,
            ProblemError::Expr { error, .. } => expr_kind(error),
            ProblemError::Invalid { .. } => ErrorKind::Config,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<SymmetryError> for CliError {
    fn from(e: SymmetryError) -> Self {
        let kind = match &e {
            SymmetryError::Expr(x) => expr_kind(x),
            SymmetryError::Linsolve(LinsolveError::Inconsistent { .. }) | SymmetryError::NoSolutionInAnsatz(_) => {
                ErrorKind::Inconsistent
            }
            _ => ErrorKind::Config,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<IntFactorError> for CliError {
    fn from(e: IntFactorError) -> Self {
        let kind = match &e {
            IntFactorError::Expr(x) => expr_kind(x),
            IntFactorError::NoSolutionInAnsatz(_) => ErrorKind::Inconsistent,
            IntFactorError::NotAFactor(_) => ErrorKind::Verification,
            IntFactorError::Order(_) | IntFactorError::InvalidFactor(_) => ErrorKind::Config,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<PerturbError> for CliError {
    fn from(e: PerturbError) -> Self {
        let kind = match &e {
            PerturbError::Expr(x) => expr_kind(x),
            PerturbError::Inconsistent { .. } | PerturbError::Underdetermined { .. } => ErrorKind::Inconsistent,
            PerturbError::NonFinite(_) | PerturbError::SelfCheck(_) => ErrorKind::Verification,
            _ => ErrorKind::Config,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::Expr(x) => CliError::new(expr_kind(&x), x.to_string()),
            NumericError::Perturb(p) => p.into(),
            NumericError::InvalidSpec(_) | NumericError::GridOutsideSpan(_) => CliError::config(e.to_string()),
            _ => CliError::new(ErrorKind::Verification, e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Command {
    Symmetries,
    Approx,
    /// Basis name (`X1`) or a ζ0 expression.
    Counterpart { selector: String },
    IntFactor {
        check: Option<String>,
        first_integral: bool,
        solve: bool,
    },
    Solve,
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Symmetries => "symmetries",
            Command::Approx => "approx",
            Command::Counterpart { .. } => "counterpart",
            Command::IntFactor { .. } => "intfactor",
            Command::Solve => "solve",
            Command::Validate => "validate",
        }
    }
}

/// Command-line overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Options {
    pub tol: Option<f64>,
    pub grid: Option<NumericGrid>,
    pub eps: Option<Vec<f64>>,
}

/// `start:end:step`.
pub fn parse_grid(text: &str) -> Result<NumericGrid, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    match nums.as_deref() {
        Ok([start, end, step]) if step > &0.0 && end > start && start.is_finite() && end.is_finite() => {
            Ok(NumericGrid {
                start: *start,
                end: *end,
                step: *step,
            })
        }
        _ => Err(CliError::config(format!("invalid grid `{text}` (expected start:end:step)"))),
    }
}

/// Comma-separated ε list.
pub fn parse_eps_list(text: &str) -> Result<Vec<f64>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::config(format!("invalid eps value `{t}`")))
        })
        .collect()
}

/// A report plus files to be written next to it.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<(String, String)>,
}

impl RunOutput {
    /// Writes the artifacts and `<problem>_<command>.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, content) in &self.artifacts {
            std::fs::write(dir.join(name), content)?;
        }
        let stem = if self.report.problem.is_empty() { "problem" } else { &self.report.problem };
        std::fs::write(dir.join(format!("{stem}_{}.json", self.report.command)), self.report.to_json())
    }
}

/// Runs one command on the text of a problem file.
pub fn run(command: &Command, problem_text: &str, opts: &Options) -> Result<RunOutput, CliError> {
    let problem = ProblemFile::from_json(problem_text)?;
    let mut digest_input = problem_text.as_bytes().to_vec();
    digest_input.push(0);
    digest_input.extend(serde_json::to_vec(&(command, opts)).expect("serializable"));
    let (outputs, audit, artifacts) = commands::dispatch(command, &problem, opts)?;
    Ok(RunOutput {
        report: RunReport {
            command: command.name().to_string(),
            problem: problem.name.clone(),
            inputs_digest: sha256_hex(&digest_input),
            engine_version: ENGINE_VERSION.to_string(),
            outputs,
            audit: audit.0,
        },
        artifacts,
    })
}

/// Worker count from `SYMMFLOW_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("SYMMFLOW_THREADS").ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// [`run`] on a pool capped by `SYMMFLOW_THREADS`.
pub fn run_capped(command: &Command, problem_text: &str, opts: &Options) -> Result<RunOutput, CliError> {
    match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?
            .install(|| run(command, problem_text, opts)),
        None => run(command, problem_text, opts),
    }
}
