//! `gaitkit` — command-line front end for the gait toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric
//! failure.

mod commands;
mod config;
mod io;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use gaitkit_core::Error;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "gaitkit",
    version,
    about = "Gait dataset generation, network training, streaming inference, plant simulation, and reports",
    arg_required_else_help = true
)]
struct Cli {
    /// Override every seed in the configuration with one value.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Configuration file of `section.key = value` lines (defaults apply
    /// when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (layout: data/, models/, reports/, plots/).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the synthetic gait dataset into data/dataset.csv.
    GenData,
    /// Train the branched network with cross-validation; writes models/ and
    /// the loss history.
    Train {
        /// Dataset CSV (default: <out-dir>/data/dataset.csv).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Evaluate the trained fold models on their held-out splits.
    Eval {
        /// Dataset CSV (default: <out-dir>/data/dataset.csv).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Stream a trace through normalize, forward, and the rate filter.
    Infer {
        /// Trace CSV (default: <out-dir>/data/dataset.csv).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Weights file (default: <out-dir>/models/fold0.gmlp).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Record real per-tick latency instead of zeros (output is then not
        /// bit-reproducible).
        #[arg(long)]
        measure_latency: bool,
    },
    /// Run the closed-loop tracking experiment on the gait reference.
    Simulate {
        /// Walking speed in m/s (default: simulate.speed_mps).
        #[arg(long)]
        speed: Option<f64>,
    },
    /// Normality-gated correlation tests over DOE tables.
    DoeStats {
        /// DOE table CSV, repeatable; a seeded demo table is generated when
        /// omitted.
        #[arg(long)]
        table: Vec<PathBuf>,
    },
    /// Render the tracking trace into SVG panels under plots/.
    Report,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Numeric { .. } => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&io::read_text(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.override_seed(seed);
    }
    // Echo the fully-resolved effective configuration: stdout carries exactly
    // this text, so it can be captured and fed back via --config.
    print!("{}", cfg.render());
    io::write_text(&cli.out_dir.join("effective.cfg"), &cfg.render())?;

    match &cli.command {
        Command::GenData => commands::gen_data(&cfg, &cli.out_dir),
        Command::Train { data } => commands::train_cmd(&cfg, &cli.out_dir, data.as_deref()),
        Command::Eval { data } => commands::eval_cmd(&cfg, &cli.out_dir, data.as_deref()),
        Command::Infer {
            data,
            model,
            measure_latency,
        } => commands::infer_cmd(
            &cfg,
            &cli.out_dir,
            data.as_deref(),
            model.as_deref(),
            *measure_latency,
        ),
        Command::Simulate { speed } => commands::simulate_cmd(&cfg, &cli.out_dir, *speed),
        Command::DoeStats { table } => commands::doe_stats_cmd(&cfg, &cli.out_dir, table),
        Command::Report => commands::report_cmd(&cli.out_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Explicit --help/--version go to stdout with success; every
            // other parse problem is a usage error: help text on stderr,
            // exit 1.
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("gaitkit: error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
