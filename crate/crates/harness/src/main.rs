use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use oldroyd_harness::config::parse_config;
use oldroyd_harness::{experiments, ExperimentKind, Result};

#[derive(Parser)]
#[command(
    name = "oldroyd",
    version,
    about = "pseudo-spectral experiments for coupled velocity-stress fluid models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (strict TOML; unknown keys are errors)
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Override the config's output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweep members (0 or absent: all cores)
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Override the config's initial-data seed (TOML integer range)
    #[arg(long, value_name = "SEED", value_parser = clap::value_parser!(i64).range(0..))]
    seed: Option<i64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration; writes the energy ledger and a final checkpoint
    Simulate(CommonArgs),
    /// Sweep viscosities against the zero-viscosity reference and fit the rate
    NuSweep(CommonArgs),
    /// Evolve while auditing the quadratic energy inequality
    EnergyAudit(CommonArgs),
    /// Dyadic block ledger of a stored field
    BesovNorm(CommonArgs),
    /// Commutator and product inequality ensembles, with grid refinement
    CommutatorTest(CommonArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Simulate(_) => ExperimentKind::Simulate,
            Command::NuSweep(_) => ExperimentKind::NuSweep,
            Command::EnergyAudit(_) => ExperimentKind::EnergyAudit,
            Command::BesovNorm(_) => ExperimentKind::BesovNorm,
            Command::CommutatorTest(_) => ExperimentKind::CommutatorTest,
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::NuSweep(a)
            | Command::EnergyAudit(a)
            | Command::BesovNorm(a)
            | Command::CommutatorTest(a) => a,
        }
    }
}

fn run(cli: &Cli) -> Result<String> {
    let kind = cli.command.kind();
    let args = cli.command.common();
    let mut cfg = parse_config(&args.config, kind)?;
    if let Some(seed) = args.seed {
        cfg.initial.seed = Some(seed as u64);
    }
    if let Some(out) = &args.out {
        cfg.output.dir = Some(out.clone());
    }
    let out = cfg.out_dir().display().to_string();

    match kind {
        ExperimentKind::Simulate => {
            let s = experiments::run_simulate(&cfg)?;
            Ok(format!(
                "simulate: reached t = {} in {} steps, {} energy records -> {out}",
                s.t_final,
                s.step_count.unwrap_or(0),
                s.energy_rows
            ))
        }
        ExperimentKind::NuSweep => {
            let s = experiments::run_nu_sweep(&cfg, args.workers)?;
            Ok(format!(
                "nu-sweep: slope = {:.4} from {} members, nu0 = {:.3e} -> {out}",
                s.slope, s.members_in_fit, s.nu0_empirical
            ))
        }
        ExperimentKind::EnergyAudit => {
            let s = experiments::run_energy_audit(&cfg)?;
            Ok(format!(
                "energy-audit: fitted c2 = {:.4}, growth flag = {} -> {out}",
                s.fitted_c2, s.growth_flag
            ))
        }
        ExperimentKind::BesovNorm => {
            let (s, csv) = experiments::run_besov_norm(&cfg)?;
            print!("{csv}");
            Ok(format!(
                "besov-norm: {} at s = {} has total {:.6e} over {} blocks -> {out}",
                s.field_kind, s.s, s.total, s.blocks
            ))
        }
        ExperimentKind::CommutatorTest => {
            let s = experiments::run_commutator_test(&cfg)?;
            Ok(format!(
                "commutator-test: {} samples on {}^{}, admissible = {} -> {out}",
                s.samples, s.grid, cfg.grid.dim, s.admissible
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
