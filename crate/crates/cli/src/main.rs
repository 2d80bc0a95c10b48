use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lora_place::commands::{cmd_coverage, cmd_pathgain, cmd_place, cmd_report};
use lora_place::config::{LoadedConfig, Overrides};

/// LoRaWAN gateway placement planner.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute path gain grids, one `gain_site<id>.pgg` per site
    Pathgain(Common),
    /// Coverage table, redundancy and association maps
    Coverage(Common),
    /// Greedy gateway selection and standalone ranking
    Place {
        #[command(flatten)]
        common: Common,
        /// Also compare against the exhaustive optimum
        #[arg(long)]
        oracle: bool,
    },
    /// Write summary.md from earlier outputs
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Run config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// SNR threshold in dB used for coverage
    #[arg(long, allow_negative_numbers = true)]
    threshold_db: Option<f64>,
    /// Gateway budget K
    #[arg(long)]
    budget: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> lora_place::Result<LoadedConfig> {
        LoadedConfig::load(
            &self.config,
            &Overrides {
                threshold_db: self.threshold_db,
                budget: self.budget,
                out: self.out.clone(),
            },
        )
    }
}

fn run(cli: Cli) -> lora_place::Result<()> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Pathgain(c) => cmd_pathgain(c.load()?, &mut out),
        Command::Coverage(c) => cmd_coverage(c.load()?, &mut out),
        Command::Place { common, oracle } => cmd_place(common.load()?, oracle, &mut out),
        Command::Report(c) => cmd_report(c.load()?, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
