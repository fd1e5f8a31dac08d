use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thermocontact::config::parse_config;
use thermocontact::diagnostics::{accumulated_residual, bv_monitor, constraint_report};
use thermocontact::output::{output_dir, write_constraints, write_file, write_run, write_sweep};
use thermocontact::physics::{sample_grid, validate};
use thermocontact::scenario::{epsilon_sweep_with, RunConfig, SweepRun};
use thermocontact::solver::{Stepper, Trajectory};
use thermocontact::{selftest, Error, Result};

/// Regularized thermoviscoelastic contact with adhesion and friction.
///
/// Output goes to the configured directory, or to `$THERMOCONTACT_OUT/<scenario>`
/// when that variable is set.
#[derive(Parser)]
#[command(name = "thermocontact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one transient and write its ledger, snapshots and constraints.
    Run { config: PathBuf },
    /// Repeat the run over the configured ε list and write the Cauchy table.
    Sweep { config: PathBuf },
    /// Parse the config and check the material hypotheses without running.
    Validate { config: PathBuf },
    /// Run the built-in consistency checks.
    Selftest,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::ConfigLine { .. }
        | Error::Parameter(_)
        | Error::Validation { .. }
        | Error::Domain { .. } => 1,
        _ => 2,
    }
}

fn summarize(cfg: &RunConfig, eps: f64, st: &Stepper, traj: &Trajectory) -> SweepRun {
    let c = constraint_report(&traj.states, &st.model);
    let run = SweepRun {
        eps,
        constraints: c,
        accumulated_residual: accumulated_residual(traj),
        bv: bv_monitor(&traj.states, &st.forms),
        max_picard: traj.picard_iterations.iter().copied().max().unwrap_or(0),
    };
    println!(
        "{} [{}] eps={eps}: {} steps, max picard {}, accumulated residual {:.3e}, min theta {:.4}, min theta_s {:.4}, chi below 0 by {:.3e}",
        cfg.scenario,
        cfg.entropy_tag(),
        traj.ledgers.len(),
        run.max_picard,
        run.accumulated_residual,
        c.theta_min,
        c.theta_s_min,
        c.chi_below
    );
    run
}

fn check_model(cfg: &RunConfig) -> Result<()> {
    let report = validate(&cfg.model(), &sample_grid(-10.0, 10.0, 2001))?;
    print!("{report}");
    cfg.stepper()?;
    cfg.solver.num_steps()?;
    println!("{} [{}]: configuration is valid", cfg.scenario, cfg.entropy_tag());
    Ok(())
}

fn run(path: &Path) -> Result<()> {
    let cfg = parse_config(path)?;
    let dir = output_dir(&cfg.output, &cfg.scenario);
    let (st, traj) = cfg.run()?;
    write_run(&dir, &st, &traj, cfg.snapshot_every)?;
    let summary = summarize(&cfg, cfg.solver.eps, &st, &traj);
    write_file(&dir.join("constraints.csv"), |w| write_constraints(w, &[summary]))
}

fn sweep(path: &Path) -> Result<()> {
    let cfg = parse_config(path)?;
    if cfg.sweep.is_empty() {
        return Err(Error::Config("[sweep] eps is required for the sweep command".into()));
    }
    let dir = output_dir(&cfg.output, &cfg.scenario);
    let report = epsilon_sweep_with(&cfg, &cfg.sweep, |eps, st, traj| {
        summarize(&cfg, eps, st, traj);
        write_run(&dir.join(format!("eps_{eps}")), st, traj, cfg.snapshot_every)
    })?;
    write_file(&dir.join("sweep.csv"), |w| write_sweep(w, &report.pairs))?;
    write_file(&dir.join("constraints.csv"), |w| write_constraints(w, &report.runs))?;
    if let Some(msg) = report.failure {
        eprintln!("error: sweep stopped at {msg}");
        std::process::exit(2);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(&config),
        Command::Sweep { config } => sweep(&config),
        Command::Validate { config } => parse_config(&config).and_then(|c| check_model(&c)),
        Command::Selftest => {
            let checks = selftest::run();
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                return ExitCode::from(2);
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
