use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mf_cli::commands::{self, CmdOutput, OutputFormat, Sweep};
use mf_cli::fixtures;
use mf_core::oracle::OracleMode;

/// Exact frontiers between best- and worst-case payoffs when delegating a
/// treatment decision to an advisor of unknown alignment.
#[derive(Parser)]
#[command(name = "mf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Grid,
    Analytic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepArg {
    Alpha,
    Tau,
    Beta,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the efficient frontier of a problem file.
    Frontier {
        problem: PathBuf,
        /// Override every subgroup's bounds: "LOWER,UPPER".
        #[arg(long)]
        tau_override: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Write to a file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit doubles instead of exact rational strings.
        #[arg(long)]
        float: bool,
        /// Rescale weights to sum to one before validating.
        #[arg(long)]
        normalize_weights: bool,
    },
    /// The optimal frontier vertex for a preference weight on the worst case.
    OptimalDesign {
        problem: PathBuf,
        /// Weight on the worst-case payoff, in [0, 1].
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        float: bool,
        #[arg(long)]
        normalize_weights: bool,
    },
    /// Optimal informativeness bounds per subgroup.
    OptimalTau {
        problem: PathBuf,
        #[arg(long)]
        alpha: Option<String>,
        /// Force the lattice search with this resolution.
        #[arg(long)]
        grid: Option<u32>,
        #[arg(long)]
        float: bool,
    },
    /// Check the closed-form frontier against the brute-force oracle.
    Verify {
        problem: PathBuf,
        /// Random designs to draw (default 200).
        #[arg(long)]
        samples: Option<u32>,
        /// Posterior grid resolution for grid mode (default 4096).
        #[arg(long)]
        grid: Option<u32>,
        /// Seed for the design generator; defaults to MF_SEED or a constant.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "analytic")]
        mode: ModeArg,
        /// Mutate the frontier first; the run must then report violations.
        #[arg(long)]
        self_test: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected payoff of a concrete scenario (design, report, truth, rho).
    Evaluate {
        scenario: PathBuf,
        #[arg(long)]
        float: bool,
    },
    /// The frontier under mixed beliefs about Nature (single subgroup).
    Hurwicz {
        problem: PathBuf,
        /// Probability of an adversarial Nature, in (0, 1].
        #[arg(long)]
        beta: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        float: bool,
    },
    /// CSV sweeps of the optimum for external plotting.
    PlotData {
        problem: PathBuf,
        #[arg(long, value_enum)]
        sweep: SweepArg,
        /// Number of sweep intervals; 0 emits only the header.
        #[arg(long, default_value_t = 100)]
        steps: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        float: bool,
        /// Lattice resolution for tau sweeps beyond the closed form.
        #[arg(long)]
        grid: Option<u32>,
    },
    /// Evaluate the payoff primitives at a point (JSON to standard output).
    Primitives {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: Option<String>,
        /// Bounds as "LOWER,UPPER"; defaults to 0,1.
        #[arg(long)]
        tau: Option<String>,
        /// Comma-separated masses of a design to evaluate.
        #[arg(long)]
        design: Option<String>,
        #[arg(long)]
        float: bool,
    },
    /// Run the worked-example fixture corpus against this binary.
    Fixtures {
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
        /// Run a single fixture by name.
        #[arg(long)]
        name: Option<String>,
    },
}

fn dispatch(command: Command) -> Result<(CmdOutput, Option<PathBuf>), commands::CmdError> {
    match command {
        Command::Frontier { problem, tau_override, format, out, float, normalize_weights } => {
            let format = match format {
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Csv => OutputFormat::Csv,
            };
            commands::cmd_frontier(&problem, tau_override.as_deref(), format, float, normalize_weights)
                .map(|o| (o, out))
        }
        Command::OptimalDesign { problem, alpha, float, normalize_weights } => {
            commands::cmd_optimal_design(&problem, alpha.as_deref(), float, normalize_weights)
                .map(|o| (o, None))
        }
        Command::OptimalTau { problem, alpha, grid, float } => {
            commands::cmd_optimal_tau(&problem, alpha.as_deref(), grid, float).map(|o| (o, None))
        }
        Command::Verify { problem, samples, grid, seed, mode, self_test, out } => {
            let mode = match mode {
                ModeArg::Grid => OracleMode::Grid,
                ModeArg::Analytic => OracleMode::AnalyticInner,
            };
            commands::cmd_verify(&problem, samples, grid, seed, mode, self_test)
                .map(|o| (o, out))
        }
        Command::Evaluate { scenario, float } => {
            commands::cmd_evaluate(&scenario, float).map(|o| (o, None))
        }
        Command::Hurwicz { problem, beta, format, out, float } => {
            let format = match format {
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Csv => OutputFormat::Csv,
            };
            commands::cmd_hurwicz(&problem, beta.as_deref(), format, float).map(|o| (o, out))
        }
        Command::PlotData { problem, sweep, steps, out, float, grid } => {
            let sweep = match sweep {
                SweepArg::Alpha => Sweep::Alpha,
                SweepArg::Tau => Sweep::Tau,
                SweepArg::Beta => Sweep::Beta,
            };
            commands::cmd_plot_data(&problem, sweep, steps, float, grid).map(|o| (o, out))
        }
        Command::Primitives { p, q, tau, design, float } => {
            commands::cmd_primitives(&p, q.as_deref(), tau.as_deref(), design.as_deref(), float)
                .map(|o| (o, None))
        }
        Command::Fixtures { dir, name } => {
            let binary = std::env::current_exe().map_err(|e| commands::CmdError {
                exit: 2,
                message: format!("cannot locate the running binary: {e}"),
            })?;
            let summary = fixtures::run_fixtures(&binary, &dir, name.as_deref())
                .map_err(|message| commands::CmdError { exit: 2, message })?;
            let exit = if summary.passed() { 0 } else { 1 };
            Ok((CmdOutput { text: summary.render(), exit }, None))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok((output, out_path)) => {
            match out_path {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, output.text.as_bytes()) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{}", output.text),
            }
            ExitCode::from(output.exit as u8)
        }
        Err(e) => {
            eprintln!("{}", e.message);
            ExitCode::from(e.exit as u8)
        }
    }
}
