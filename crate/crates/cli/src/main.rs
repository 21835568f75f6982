mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::Config;
use wpn_core::cost::CostInputs;

#[derive(Parser)]
#[command(
    name = "wpnann",
    version,
    about = "Hopfield and mean-field-annealing networks on a simulated wireless processor network",
    after_long_help = config::keys_help(),
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Config file of `key = value` lines in `[section]`s.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Artifact directory; overrides `run.out_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured network and write report.txt, energy.tsv,
    /// costs.tsv and, with `sim.trace`, trace.tsv.
    #[command(after_long_help = config::keys_help())]
    Solve(Common),
    /// Print the cost model for the `[costs]` inputs.
    Costs {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n", value_name = "INT")]
        n_neurons: Option<u64>,
        #[arg(long)]
        episodes: Option<u64>,
        #[arg(long)]
        bytes_per_real: Option<u64>,
        #[arg(long)]
        group_size: Option<u64>,
        #[arg(long)]
        msg_time: Option<f64>,
        #[arg(long)]
        channels: Option<u64>,
    },
    /// Cross-check energy, dynamics and simulator against brute force on a
    /// graph corpus.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Largest corpus graph; overrides `verify.max_vertices`.
        #[arg(long, value_name = "INT")]
        max_n: Option<usize>,
    },
}

fn load(common: &Common) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Config::parse(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Solve(common) => {
            let cfg = load(&common)?;
            let out = common.out.unwrap_or_else(|| cfg.run.out_dir.clone());
            commands::solve(&cfg, &out)
        }
        Command::Costs {
            common,
            n_neurons,
            episodes,
            bytes_per_real,
            group_size,
            msg_time,
            channels,
        } => {
            let c = load(&common)?.costs;
            let inputs = CostInputs {
                n_neurons: n_neurons.unwrap_or(c.n_neurons),
                episodes: episodes.unwrap_or(c.episodes),
                bytes_per_real: bytes_per_real.unwrap_or(c.bytes_per_real),
                group_size: group_size.unwrap_or(c.group_size),
                msg_time: msg_time.unwrap_or(c.msg_time),
                channels: channels.unwrap_or(c.channels),
            };
            commands::costs(inputs, common.out.as_deref())
        }
        Command::Verify { common, max_n } => {
            let mut cfg = load(&common)?;
            if let Some(n) = max_n {
                cfg.verify.max_vertices = n;
            }
            commands::verify(&cfg, common.out.as_deref().map(Path::new))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wpnann: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
