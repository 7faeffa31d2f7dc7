//! `scf-sim` command-line front end.
//!
//! Settings resolve in increasing priority: built-in defaults or `--preset`,
//! the `SCF_SIM_OUT_DIR` environment variable (output directory only),
//! `--config` file, `--set key=value`, dedicated flags.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Report;
pub use config::{RunConfig, OUT_DIR_ENV};

use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "scf-sim",
    version,
    about = "SC-flip decoding behind a threshold-controlled buffer"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Start from a named preset (`paper`).
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Output directory.
    #[arg(long, short, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Channel Eb/N0 list in dB, comma separated.
    #[arg(long, global = true, value_name = "LIST")]
    pub snr: Option<String>,

    /// Production coefficients, comma separated (`9/8`, `1.125`).
    #[arg(long, global = true, value_name = "LIST")]
    pub upsilon: Option<String>,

    /// Control mechanisms (`multi-thr`, `cw-drop`, `both`).
    #[arg(long, global = true, value_name = "LIST")]
    pub mechanism: Option<String>,

    #[arg(long, global = true, value_name = "N")]
    pub frames: Option<usize>,

    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the frozen set and write it as a frozen-set file.
    Construct,
    /// Ideal-system Monte Carlo: one trace and one `tmax,t_av,fer` table per SNR.
    Ideal,
    /// Balanced trials and controller thresholds from ideal traces.
    Thresholds {
        /// Ideal trace files; defaults to the traces of the configured SNRs in
        /// the output directory.
        #[arg(long = "trace", value_name = "FILE")]
        traces: Vec<PathBuf>,
    },
    /// Replay ideal traces through the buffered system.
    System {
        #[arg(long = "trace", value_name = "FILE")]
        traces: Vec<PathBuf>,
    },
    /// Ideal runs, threshold selection and the full system grid in one go.
    Sweep,
    /// Print the resolved configuration.
    ShowConfig,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.preset {
            Some(p) => RunConfig::preset(p)?,
            None => RunConfig::default(),
        };
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            cfg.out_dir = PathBuf::from(dir);
        }
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k, v)?;
        }
        let flags = [
            ("channel.snr_db", self.snr.clone()),
            ("system.upsilon", self.upsilon.clone()),
            ("system.mechanism", self.mechanism.clone()),
            ("campaign.frames", self.frames.map(|v| v.to_string())),
            ("campaign.seed", self.seed.map(|v| v.to_string())),
            ("campaign.workers", self.workers.map(|v| v.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let cfg = cli.common.resolve()?;
    match &cli.command {
        Command::Construct => commands::cmd_construct(&cfg),
        Command::Ideal => commands::cmd_ideal(&cfg),
        Command::Thresholds { traces } => commands::cmd_thresholds(&cfg, traces),
        Command::System { traces } => commands::cmd_system(&cfg, traces),
        Command::Sweep => commands::cmd_sweep(&cfg),
        Command::ShowConfig => {
            print!("{}", cfg.to_text());
            println!("output.dir = {}", cfg.out_dir.display());
            Ok(Report::default())
        }
    }
}

/// Process exit status: 2 for configuration and input errors, 3 for a buffer
/// overflow, 1 otherwise.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::BufferOverflow { .. } => 3,
        Error::Io(_) | Error::BufferUnderflow => 1,
        _ => 2,
    }
}

/// Exit code for a finished run.
pub fn report_code(report: &Report) -> u8 {
    if report.overflows > 0 {
        3
    } else {
        0
    }
}
