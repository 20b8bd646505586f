use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use num_rational::BigRational;

use gmdet_cli::check::cmd_check;
use gmdet_cli::fourier::cmd_fourier;
use gmdet_cli::kloosterman::cmd_kloosterman;
use gmdet_cli::periods::{cmd_periods, parse_coeffs, table, PeriodsArgs};
use gmdet_cli::report::ScenarioReport;

#[derive(Parser)]
#[command(name = "gmdet", version, about = "Gauss–Manin determinant and period checks for connections on P^1")]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Include wall-clock timings in the report (makes output non-deterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the determinant formula for a connection given as a JSON spec.
    Check {
        /// Connection file (fiber, base_vars, params, extension, rank, matrix, divisor)
        spec: PathBuf,
    },
    /// Build the Fourier-twisted connection from a JSON description and check it.
    Fourier {
        /// Pole data g of ψ: rank, poles [{point, g}], optional infinity
        psi: PathBuf,
    },
    /// Run the rank-2 Kloosterman pipeline with the given exponents.
    Kloosterman {
        /// Rational exponent; alpha, beta and alpha - beta must be non-integers
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Rational exponent
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
    },
    /// Periods of exp(a1 z + ... + a_(m-1) z^(m-1)) along the ray chains.
    Periods {
        /// Comma-separated a1,...,a_(m-1) as complex literals re+im*i.
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Number of random perturbations for the ratio-constancy test.
        #[arg(long, default_value_t = 5)]
        draws: usize,
        /// RNG seed; required when draws > 0.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn read(path: &PathBuf) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn rational(s: &str, name: &str) -> Result<BigRational, String> {
    s.trim().parse::<BigRational>().map_err(|_| format!("--{name}: expected a rational p/q, got `{s}`"))
}

fn run(cli: &Cli) -> ScenarioReport {
    match &cli.cmd {
        Cmd::Check { spec } => match read(spec) {
            Ok(text) => cmd_check(&text),
            Err(e) => ScenarioReport::new("check", serde_json::json!({ "spec": spec })).fail_input(format!("{e:#}")),
        },
        Cmd::Fourier { psi } => match read(psi) {
            Ok(text) => cmd_fourier(&text),
            Err(e) => ScenarioReport::new("fourier", serde_json::json!({ "psi": psi })).fail_input(format!("{e:#}")),
        },
        Cmd::Kloosterman { alpha, beta } => match (rational(alpha, "alpha"), rational(beta, "beta")) {
            (Ok(a), Ok(b)) => cmd_kloosterman(&a, &b),
            (Err(e), _) | (_, Err(e)) => ScenarioReport::new("kloosterman", serde_json::json!({ "alpha": alpha, "beta": beta })).fail_input(e),
        },
        Cmd::Periods { coeffs, tol, draws, seed } => {
            let inputs = serde_json::json!({ "coeffs": coeffs, "tol": tol, "draws": draws, "seed": seed });
            let parsed = match parse_coeffs(coeffs) {
                Ok(c) => c,
                Err(e) => return ScenarioReport::new("periods", inputs).fail_input(e),
            };
            let seed = match (seed, draws) {
                (Some(s), _) => *s,
                (None, 0) => 0,
                (None, _) => return ScenarioReport::new("periods", inputs).fail_input("--seed is required when --draws > 0"),
            };
            let report = cmd_periods(&PeriodsArgs { coeffs: parsed, tol: *tol, draws: *draws, seed });
            eprint!("{}", table(&report));
            report
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let report = run(&cli);
    let json = serde_json::to_string_pretty(&report.to_json(cli.timings)).expect("serializable");
    {
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        if let Err(e) = writeln!(out, "{json}") {
            if e.kind() != std::io::ErrorKind::BrokenPipe {
                eprintln!("error: writing stdout: {e}");
                return ExitCode::from(1);
            }
        }
    }
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if let gmdet_cli::report::Outcome::InputError(msg) | gmdet_cli::report::Outcome::CannotCertify(msg) = &report.outcome {
        eprintln!("{}: {msg}", report.outcome.label());
    }
    ExitCode::from(report.outcome.exit_code() as u8)
}
