use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rfwm_cli::{execute, parse_config_as, RunConfig, RunSettings, Scenario};

/// Resonant four-wave mixing simulator.
#[derive(Parser)]
#[command(name = "rfwm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for coherent ensembles (0: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Allow coherent means above 300.
    #[arg(long, global = true)]
    long_running: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Exact adiabatic eigenvalue against its lowest-order form
    Lambda0Check,
    /// Classical field equations
    Classical,
    /// Fock-state input
    Fock,
    /// Coherent-state input
    Coherent,
    /// First pump minimum against mean photon number
    Scan,
    /// Mean-field pump trajectory
    Meanfield,
    /// Mean-field conversion distance and efficiency
    MfScan,
    /// Two-photon phase gate truth table
    PhaseGate,
    /// Coherent evolution overlaid with mean field
    Compare,
    /// Scenario taken from the config file
    Run,
}

impl Command {
    fn scenario(self) -> Option<Scenario> {
        Some(match self {
            Command::Lambda0Check => Scenario::Lambda0Check,
            Command::Classical => Scenario::Classical,
            Command::Fock => Scenario::Fock,
            Command::Coherent => Scenario::Coherent,
            Command::Scan => Scenario::Scan,
            Command::Meanfield => Scenario::Meanfield,
            Command::MfScan => Scenario::MfScan,
            Command::PhaseGate => Scenario::PhaseGate,
            Command::Compare => Scenario::Compare,
            Command::Run => return None,
        })
    }
}

fn load(cli: &Cli) -> Result<RunConfig, String> {
    let scenario = cli.command.scenario();
    let text = match (&cli.config, scenario) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        (None, Some(s)) => return Ok(RunConfig::defaults(s)),
        (None, None) => return Err("`run` needs --config".into()),
    };
    parse_config_as(&text, scenario).map_err(|e| format!("configuration error:\n{e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(1);
        }
    };
    let settings = RunSettings {
        out: cli.out.clone(),
        workers: cli.workers,
        long_running: cli.long_running,
    };
    match execute(&cfg, &settings) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
