//! Command-line front end: configuration, commands and output tables.

pub mod commands;
pub mod config;
mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use error::CliError;
pub use output::OutputFormat;

#[derive(Debug, Parser)]
#[command(name = "cogtrack", version, about = "Trajectory features, rank-sum statistics and classifiers for break-room sessions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic study: tracks, manifest and floor plan.
    Simulate,
    /// Ingest tracks and write the session feature table.
    Features,
    /// Rank-sum test of every raw feature between classes.
    Stats,
    /// Leave-one-out scores per model and feature subset.
    Classify,
    /// Permutation importance per feature subset.
    Importance,
    /// Features, stats, classify and importance in one run.
    Report,
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true, env = "COGTRACK_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "COGTRACK_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "COGTRACK_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Both, env = "COGTRACK_FORMAT")]
    pub format: OutputFormat,
    /// Override any config field, e.g. `--set features.social.d_max=1.5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", env = "COGTRACK_SET", value_delimiter = ';')]
    pub overrides: Vec<String>,
    #[arg(long, global = true, env = "COGTRACK_TRACKS")]
    pub tracks: Option<PathBuf>,
    #[arg(long, global = true, env = "COGTRACK_MANIFEST")]
    pub manifest: Option<PathBuf>,
    #[arg(long, global = true, env = "COGTRACK_FLOORPLAN")]
    pub floorplan: Option<PathBuf>,
    #[arg(long = "out", global = true, env = "COGTRACK_OUT")]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub split_deg: Option<f64>,
    #[arg(long, global = true)]
    pub entropy_m: Option<usize>,
    #[arg(long, global = true)]
    pub entropy_r: Option<f64>,
    #[arg(long, global = true)]
    pub d_max: Option<f64>,
    #[arg(long, global = true)]
    pub facing_deg: Option<f64>,
    #[arg(long, global = true)]
    pub moca_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub repeats: Option<usize>,
    /// Fit the scaler on all rows instead of per fold.
    #[arg(long, global = true)]
    pub global_scaling: bool,
    /// Divide path length by n - 1 when computing speed.
    #[arg(long, global = true)]
    pub fencepost_correct: bool,
}

impl GlobalArgs {
    /// Named flags as dotted overrides, after any `--set` values.
    pub fn all_overrides(&self) -> Vec<String> {
        let mut out = self.overrides.clone();
        let path = |p: &PathBuf| toml::Value::String(p.display().to_string()).to_string();
        let mut push = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push(format!("{key}={v}"));
            }
        };
        push("seed", self.seed.map(|v| v.to_string()));
        push("paths.tracks", self.tracks.as_ref().map(path));
        push("paths.manifest", self.manifest.as_ref().map(path));
        push("paths.floorplan", self.floorplan.as_ref().map(path));
        push("paths.output_dir", self.output_dir.as_ref().map(path));
        push("features.movement.split_deg", self.split_deg.map(float));
        push("features.movement.entropy_m", self.entropy_m.map(|v| v.to_string()));
        push("features.movement.entropy_r", self.entropy_r.map(float));
        push("features.social.d_max", self.d_max.map(float));
        push("features.social.facing_deg", self.facing_deg.map(float));
        push("labels.moca_threshold", self.moca_threshold.map(float));
        push("importance.repeats", self.repeats.map(|v| v.to_string()));
        push("classify.global_scaling", self.global_scaling.then(|| "true".into()));
        push("features.movement.fencepost_correct", self.fencepost_correct.then(|| "true".into()));
        out
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        RunConfig::load(self.config.as_deref(), &self.all_overrides())
    }
}

fn float(v: f64) -> String {
    toml::Value::Float(v).to_string()
}

/// Run one command; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let config = cli.global.resolve()?;
    let format = cli.global.format;
    match cli.command {
        Command::Simulate => commands::cmd_simulate(&config),
        Command::Features => commands::cmd_features(&config, format),
        Command::Stats => commands::cmd_stats(&config, format),
        Command::Classify => commands::cmd_classify(&config, format),
        Command::Importance => commands::cmd_importance(&config, format),
        Command::Report => commands::cmd_report(&config, format),
        Command::Config => {
            print!("# config_hash: {}\n{}", config.hash(), config.to_toml());
            Ok(Vec::new())
        }
    }
}
