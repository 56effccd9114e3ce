use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symmflow::cli::{parse_eps_list, parse_grid, run_capped, CliError, Command, ErrorKind, Options};

#[derive(Parser)]
#[command(name = "symmflow", version, about = "Symmetries, integrating factors and perturbation series of ODEs with a small parameter")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON).
    problem: PathBuf,
    /// Directory for the JSON report and CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integrator tolerance (validate).
    #[arg(long)]
    tol: Option<f64>,
    /// Comparison grid `start:end:step` (validate).
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated eps values (validate).
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact point symmetries of the unperturbed equation.
    Symmetries(Common),
    /// Approximate point symmetries and the stability table.
    Approx(Common),
    /// Higher-order approximate symmetry extending an exact one.
    Counterpart {
        #[command(flatten)]
        common: Common,
        /// Basis name (e.g. X1) or a zeta0 expression.
        selector: String,
    },
    /// Integrating factors and first integrals (second-order equations).
    Intfactor {
        #[command(flatten)]
        common: Common,
        /// Check the given factor, e.g. "(1+eps)*y'".
        #[arg(long)]
        check: Option<String>,
        /// Derive the first integral of the factor.
        #[arg(long)]
        first_integral: bool,
        /// Search the ansatz for factors.
        #[arg(long)]
        solve: bool,
    },
    /// First-order series solution of the initial-value problem.
    Solve(Common),
    /// Compare the series against numerical integration.
    Validate(Common),
}

fn split(cmd: Cmd) -> (Command, Common) {
    match cmd {
        Cmd::Symmetries(c) => (Command::Symmetries, c),
        Cmd::Approx(c) => (Command::Approx, c),
        Cmd::Counterpart { common, selector } => (Command::Counterpart { selector }, common),
        Cmd::Intfactor {
            common,
            check,
            first_integral,
            solve,
        } => (
            Command::IntFactor {
                check,
                first_integral,
                solve,
            },
            common,
        ),
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Validate(c) => (Command::Validate, c),
    }
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    let (command, common) = split(cli.command);
    let opts = Options {
        tol: common.tol,
        grid: common.grid.as_deref().map(parse_grid).transpose()?,
        eps: common.eps.as_deref().map(parse_eps_list).transpose()?,
    };
    let text = std::fs::read_to_string(&common.problem)
        .map_err(|e| CliError::config(format!("{}: {e}", common.problem.display())))?;
    let output = run_capped(&command, &text, &opts)?;
    print!("{}", output.report.to_json());
    if let Some(dir) = &common.out {
        output
            .write_to(dir)
            .map_err(|e| CliError::config(format!("{}: {e}", dir.display())))?;
    }
    if !output.report.verified() {
        let failed: Vec<String> = output
            .report
            .audit
            .iter()
            .filter(|a| !a.passed)
            .map(|a| format!("{} ({})", a.item, a.check))
            .collect();
        return Err(CliError::new(
            ErrorKind::Verification,
            format!("self-audit failed: {}", failed.join(", ")),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
