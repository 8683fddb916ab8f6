use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kmslab::commands::{self, AnalyzeArgs, StateArgs, TorusArgs, VerifyArgs};
use kmslab::report::Report;
use kmslab::{CliError, EXIT_FAILURE, EXIT_INPUT, EXIT_PASS};
use kmslab_core::spectral::{DEFAULT_N_MAX, DEFAULT_TOL};

/// KMS states of Toeplitz and Cuntz–Pimsner algebras of graph shifts.
///
/// Exit codes: 0 pass, 1 invariant failure, 2 input error, 3 domain error
/// (subcritical β, sinks).
#[derive(Parser)]
#[command(name = "kmslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here instead of standard output.
    #[arg(long, value_name = "OUT")]
    json: Option<String>,
    /// Record wall time in the report (makes reports differ between runs).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Components, spectral radius, β_c, β_l and growth constant of a graph.
    Analyze {
        #[arg(long, value_name = "FILE")]
        graph: String,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: u32,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluates the state of a measure ε on spanning elements.
    State {
        #[arg(long, value_name = "FILE")]
        graph: String,
        /// Inverse temperature: a number or ln:X.
        #[arg(long)]
        beta: String,
        /// FILE, point:VERTEX or uniform.
        #[arg(long, default_value = "uniform")]
        epsilon: String,
        /// JSON list of {"coeff", "l", "mu", "m", "nu"}.
        #[arg(long, value_name = "FILE")]
        elements: Option<String>,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Runs the invariant suite on random samples.
    Verify {
        #[arg(long, value_name = "FILE")]
        graph: String,
        #[arg(long)]
        beta: String,
        #[arg(long, default_value = "uniform")]
        epsilon: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Homogeneous pairs for the KMS condition.
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        fock_samples: usize,
        #[arg(long, default_value_t = 20)]
        positivity_samples: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Top level of the truncated Fock space; 0 skips those checks.
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Worked examples.
    Example {
        #[command(subcommand)]
        which: Example,
    },
}

#[derive(Subcommand)]
enum Example {
    /// States on u_m v^k v^{*k} u_0* for the covering of the torus by A.
    Torus {
        /// Integer matrix, e.g. 2 or [[2,1],[0,2]].
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        beta: String,
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        /// Table rows cover m in [-radius, radius]^d.
        #[arg(long, default_value_t = 4)]
        radius: i64,
        /// JSON list of {"r": [..], "re", "im"} Fourier coefficients; Haar measure if absent.
        #[arg(long, value_name = "FILE")]
        fourier: Option<String>,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
}

fn emit(report: &Report, out: &Output) -> Result<(), CliError> {
    let text = report.to_json();
    match &out.json {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            let failed: Vec<&String> = report.verdicts.iter().filter(|(_, &ok)| !ok).map(|(k, _)| k).collect();
            if failed.is_empty() {
                println!("{}: pass ({} checks), report written to {path}", report.command, report.verdicts.len());
            } else {
                println!("{}: FAIL {failed:?}, report written to {path}", report.command);
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (report, out) = match cli.command {
        Command::Analyze { graph, n_max, tol, out } => {
            (commands::analyze(&AnalyzeArgs { graph, n_max, tol, timing: out.timing })?, out)
        }
        Command::State { graph, beta, epsilon, elements, depth, tol, out } => (
            commands::state(&StateArgs { graph, beta, epsilon, elements, depth, tol, timing: out.timing })?,
            out,
        ),
        Command::Verify { graph, beta, epsilon, seed, samples, fock_samples, positivity_samples, depth, levels, tol, out } => (
            commands::verify(&VerifyArgs {
                graph,
                beta,
                epsilon,
                seed,
                samples,
                fock_samples,
                positivity_samples,
                depth,
                levels,
                tol,
                timing: out.timing,
            })?,
            out,
        ),
        Command::Example { which: Example::Torus { matrix, beta, max_k, radius, fourier, tol, out } } => (
            commands::torus(&TorusArgs { matrix, beta, max_k, radius, fourier, tol, timing: out.timing })?,
            out,
        ),
    };
    emit(&report, &out)?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAILURE })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("kmslab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
