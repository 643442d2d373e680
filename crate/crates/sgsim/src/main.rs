use clap::{Parser, ValueEnum};
use sgsim::cli::{self, CommandKind, RunConfig};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Kinematics table over the accelerating-voltage range
    Table1,
    /// Two-wire field and inhomogeneity grid
    Fieldmap,
    /// Propagate one beam to the screen
    Scenario,
    /// Splitting versus field gradient
    GradientSweep,
    /// Splitting versus accelerating voltage
    VoltageSweep,
    /// Gradient needed for a target splitting
    RequiredGradient,
}

impl From<Command> for CommandKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Table1 => CommandKind::Table1,
            Command::Fieldmap => CommandKind::Fieldmap,
            Command::Scenario => CommandKind::Scenario,
            Command::GradientSweep => CommandKind::GradientSweep,
            Command::VoltageSweep => CommandKind::VoltageSweep,
            Command::RequiredGradient => CommandKind::RequiredGradient,
        }
    }
}

/// Stern-Gerlach electron beam simulator
#[derive(Debug, Parser)]
#[command(name = "sgsim", version, about)]
struct Cli {
    /// What to run
    #[arg(value_enum)]
    command: Command,

    /// Config file of `key = value` lines; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory, created if missing
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Override one parameter, e.g. --set "voltage = 20 kV" (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Random seed override
    #[arg(long)]
    seed: Option<u64>,

    /// Worker thread cap
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let args = Cli::parse();
    let mut overrides = Vec::new();
    for entry in &args.set {
        match entry.split_once('=') {
            Some((key, value)) => {
                overrides.push((key.trim().to_string(), value.trim().to_string()));
            }
            None => {
                eprintln!("error: --set expects KEY=VALUE, got '{entry}'");
                std::process::exit(2);
            }
        }
    }
    let cfg = RunConfig {
        command: args.command.into(),
        input_path: args.config,
        output_dir: args.out,
        overrides,
        seed: args.seed,
        threads: args.threads,
    };
    if let Err(e) = cli::run(&cfg) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
