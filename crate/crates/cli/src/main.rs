//! `specabc`: simulate reference data, ingest recordings, and run
//! spectral-density-based ABC from a configuration file.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use specabc::ingest::Rescale;
use specabc::SummaryConfig;

use commands::{IngestRequest, PlotKind, PlotRequest};
use config::{ReferenceSource, RunConfig};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "specabc", version, about = "Spectral density-based, measure-preserving ABC for Hamiltonian SDEs")]
struct Cli {
    /// TOML configuration, or a run manifest to reproduce.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); overrides the configuration.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the reference trajectories as `t,y` CSV files.
    Simulate,
    /// Summarize observed series into a reference set.
    Ingest(IngestArgs),
    /// Estimate the density weight by a pilot study.
    Pilot,
    /// Run rejection ABC and report the posterior.
    Run {
        /// Skip the run when the output directory already holds it.
        #[arg(long)]
        resume: bool,
    },
    /// Write `x,value,series` data for plots.
    PlotData {
        #[arg(value_enum)]
        kind: PlotKind,
        /// Accepted-samples file; defaults to the one in the output directory.
        #[arg(long)]
        accepted: Option<PathBuf>,
        /// Time steps compared by `schemes`.
        #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 3e-3, 4.5e-3])]
        dts: Vec<f64>,
    },
    /// Posterior summaries of an accepted-samples file.
    Stats {
        #[arg(long)]
        accepted: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Series files; the configured reference files when omitted.
    #[arg(long, num_args = 1..)]
    files: Vec<PathBuf>,
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Split each file into this many equal segments.
    #[arg(long)]
    cut: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    scale: Option<f64>,
}

impl Cli {
    fn load_config(&self) -> CliResult<Option<RunConfig>> {
        let Some(path) = &self.config else { return Ok(None) };
        let mut cfg = RunConfig::load(path, std::env::vars())?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        Ok(Some(cfg))
    }
}

fn require(cfg: Option<RunConfig>) -> CliResult<RunConfig> {
    cfg.ok_or_else(|| CliError::Config("this command needs --config".into()))
}

fn ingest_request(args: &IngestArgs, cfg: Option<&RunConfig>) -> CliResult<IngestRequest> {
    let summary = cfg.map_or_else(SummaryConfig::default, |c| c.summary);
    let from_cfg = match cfg.map(|c| &c.reference) {
        Some(ReferenceSource::Files { files, sample_rate, rescale, cut }) => Some((files, *sample_rate, *rescale, *cut)),
        _ => None,
    };
    let files = match (&args.files, &from_cfg) {
        (f, _) if !f.is_empty() => f.clone(),
        (_, Some((f, ..))) => f.to_vec(),
        _ => return Err(CliError::Config("no input: pass --files or a config with reference files".into())),
    };
    let sample_rate = args
        .sample_rate
        .or(from_cfg.map(|c| c.1))
        .ok_or_else(|| CliError::Config("--sample-rate is required".into()))?;
    let base = from_cfg.map_or_else(Rescale::default, |c| c.2);
    let rescale = Rescale { offset: args.offset.unwrap_or(base.offset), scale: args.scale.unwrap_or(base.scale) };
    Ok(IngestRequest { files, sample_rate, rescale, cut: args.cut.or(from_cfg.and_then(|c| c.3)), summary })
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let cfg = cli.load_config()?;
    let out = cli.out.clone().or_else(|| cfg.as_ref().map(|c| c.out.clone())).unwrap_or_else(|| PathBuf::from("out"));
    match &cli.command {
        Command::Simulate => commands::cmd_simulate(&require(cfg)?, &out),
        Command::Ingest(args) => commands::cmd_ingest(&ingest_request(args, cfg.as_ref())?, &out).map(drop),
        Command::Pilot => commands::cmd_pilot(&require(cfg)?, &out).map(drop),
        Command::Run { resume } => commands::cmd_run(&require(cfg)?, &out, *resume),
        Command::PlotData { kind, accepted, dts } => {
            let req = PlotRequest { kind: *kind, accepted: accepted.clone(), dts: dts.clone() };
            commands::cmd_plot_data(&require(cfg)?, &out, &req).map(drop)
        }
        Command::Stats { accepted } => {
            let path = accepted.clone().unwrap_or_else(|| out.join(commands::ACCEPTED));
            commands::cmd_stats(&path, &out).map(drop)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
