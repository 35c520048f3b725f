use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod report;

use config::ScenarioConfig;
use report::Report;

/// Exceptional-point and Bethe-ansatz diagnostics for the PT-symmetric
/// Kondo impurity.
///
/// Exit status: 0 when every invariant passes, 1 on a failed invariant or
/// numerical failure, 2 on a configuration error.
#[derive(Debug, Parser)]
#[command(name = "ptimp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario config (JSON). Unknown keys are rejected; missing keys take
    /// the built-in desk defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Random seed for the algebra suite [default: 20240601].
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Override every residual tolerance in the config.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,

    /// Output directory [default: out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// TL relations, YBE, unitarity, RLL, RTT, transfer commutators, charges.
    VerifyAlgebra,
    /// Bethe/Gaudin sweep toward the exceptional point.
    SweepEp,
    /// Solve the Bethe equations at `bethe.delta` and audit quantum numbers.
    SolveBethe,
    /// Continue the ground state around the exceptional point.
    Monodromy,
    /// Schur-complement emergence of the effective impurity.
    SchurScan,
    /// EP vs. unbroken vs. Kondo classification table.
    DiagnosticsTable,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::VerifyAlgebra => "verify-algebra",
            Command::SweepEp => "sweep-ep",
            Command::SolveBethe => "solve-bethe",
            Command::Monodromy => "monodromy",
            Command::SchurScan => "schur-scan",
            Command::DiagnosticsTable => "diagnostics-table",
        }
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, config::ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.tolerances.override_all(t);
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let name = cli.command.name();
    let start = Instant::now();
    let outcome = match cli.command {
        Command::VerifyAlgebra => commands::verify_algebra(&cfg),
        Command::SweepEp => commands::sweep_ep(&cfg),
        Command::SolveBethe => commands::solve_bethe(&cfg),
        Command::Monodromy => commands::monodromy(&cfg),
        Command::SchurScan => commands::schur_scan(&cfg),
        Command::DiagnosticsTable => commands::diagnostics_table(&cfg),
    };
    let (report, tables, extra) = match outcome {
        Ok(o) => (o.report, o.tables, o.extra),
        Err(e) => (
            Report::failed(name, &cfg, format!("numerical failure: {e}")),
            Vec::new(),
            Vec::new(),
        ),
    };
    let wall = start.elapsed().as_secs_f64();
    if let Err(e) = report::emit(&cfg.output.dir, &report, &tables, &extra, wall) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }

    if let Some(e) = &report.error {
        eprintln!("{name}: {e}");
    }
    for i in report.failures() {
        eprintln!("{name}: invariant `{}` failed: value {:e}, bound {:?}", i.name, i.value, i.bound);
    }
    println!(
        "{name}: {} ({} invariants, {} failed) -> {}",
        if report.passed { "PASS" } else { "FAIL" },
        report.invariants.len(),
        report.failures().count(),
        cfg.output.dir.join("report.json").display()
    );
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
