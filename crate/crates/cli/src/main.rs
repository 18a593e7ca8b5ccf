//! Command-line front end for the damped-rotor toolkit.
//!
//! Subcommands: `simulate` (one trajectory), `classify` (stability table of
//! the equilibrium families), `sweep` (seeded batch of random initial
//! conditions), and `reproduce` (the three built-in figure presets).
//!
//! Exit codes: 0 on success/convergence, 2 when a simulation reaches the
//! horizon without converging, 1 on any error.

mod config;
mod presets;
mod report;
mod run;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{resolve_out_dir, resolve_run, FileConfig, ModelFlags};
use presets::Preset;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "damped-rotor", version, about = "Simulation and stability analysis of a rigid body with an internal spherical damper")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; writes trajectory.csv, report.json, plot.gp.
    Simulate(SimulateArgs),
    /// Classify the equilibrium families; writes classification.csv.
    Classify(ClassifyArgs),
    /// Integrate a seeded batch of random initial conditions; writes sweep.csv.
    Sweep(SweepArgs),
    /// Run the three built-in presets into per-preset subdirectories.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON run configuration; command-line flags override file values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in preset supplying parameters and initial state.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[command(flatten)]
    model: ModelFlags,
    /// Output directory (default: $DAMPED_ROTOR_OUT, then ./out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON run configuration with a `sweep` section (count + box).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Master seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results are written in seed order regardless.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    }
}

fn exit_code_for(stop_reason: &str) -> Result<ExitCode> {
    match stop_reason {
        "converged" => Ok(ExitCode::SUCCESS),
        "horizon-reached" => Ok(ExitCode::from(2)),
        other => bail!("integration stopped: {other}"),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let resolved = resolve_run(args.preset, &file, &args.model)?;
    let out_dir = resolve_out_dir(args.out, &file);
    let outcome = run::simulate(&resolved, &out_dir)?;
    println!(
        "{}: t_final={:.3} axis={} |omega_bar|={:.6} (outputs in {})",
        outcome.report.stop_reason,
        outcome.report.t_final,
        outcome.report.attained_axis.unwrap_or("ambiguous"),
        outcome.record.final_state().omega.norm(),
        out_dir.display(),
    );
    exit_code_for(outcome.report.stop_reason)
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode> {
    let file = FileConfig::default();
    let moments = args
        .model
        .moments
        .as_ref()
        .context("missing field `params.A`: supply --A a1 a2 a3")?;
    let params = damped_rotor::BodyParams::new(
        moments[0],
        moments[1],
        moments[2],
        args.model.damper_inertia.unwrap_or(1.0),
        args.model.coupling.unwrap_or(1.0),
    )
    .context("invalid field `params`")?;
    let (csv, human) = run::classification_table(&params)?;
    print!("{human}");
    let out_dir = resolve_out_dir(args.out, &file);
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("classification.csv"), csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let file = FileConfig::load(&args.config)?;
    let sweep_cfg = file.sweep.as_ref().context("missing field `sweep` in config file")?;
    if sweep_cfg.count < 1 {
        bail!("invalid field `sweep.count`: must be at least 1");
    }
    for (i, [lo, hi]) in sweep_cfg.sample_box.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            bail!("invalid field `sweep.box[{i}]`: bounds must be finite with low <= high, got [{lo}, {hi}]");
        }
    }
    let params_cfg = file.params.as_ref().context("missing field `params` in config file")?;
    let params = damped_rotor::BodyParams::new(
        params_cfg.moments[0],
        params_cfg.moments[1],
        params_cfg.moments[2],
        params_cfg.damper_inertia,
        params_cfg.coupling,
    )
    .context("invalid field `params`")?;
    let integrator = file.integrator.unwrap_or_default().apply(damped_rotor::IntegratorConfig::default());
    integrator.validate().context("invalid field `integrator`")?;

    let spec = run::SweepSpec {
        params,
        integrator,
        count: sweep_cfg.count,
        sample_box: sweep_cfg.sample_box,
        seed: args.seed.or(file.seed).unwrap_or(0),
        jobs: args.jobs.max(1),
    };
    let (rows, csv) = run::sweep(&spec)?;
    let out_dir = resolve_out_dir(args.out, &file);
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("sweep.csv"), &csv)?;
    let aggregate = csv.lines().last().unwrap_or_default();
    println!("{} rows written to {}", rows.len(), out_dir.join("sweep.csv").display());
    println!("{aggregate}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<ExitCode> {
    let file = FileConfig::default();
    let out_root = resolve_out_dir(args.out, &file);
    let mut all_converged = true;
    for preset in Preset::ALL {
        let resolved = resolve_run(Some(preset), &FileConfig::default(), &ModelFlags::default())?;
        let out_dir = out_root.join(preset.name());
        let outcome = run::simulate(&resolved, &out_dir)?;
        let report = &outcome.report;
        println!(
            "{:<13} {:<15} axis={:<8} attainability_satisfied={:<5} margins={:?}",
            preset.name(),
            report.stop_reason,
            report.attained_axis.unwrap_or("ambiguous"),
            report.attainability.satisfied,
            report.attainability.margins,
        );
        all_converged &= report.stop_reason == "converged";
    }
    if all_converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}
