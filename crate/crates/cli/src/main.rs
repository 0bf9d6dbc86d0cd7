//! `h2plan`: dispatch, profitability and sizing analysis for a hydrogen
//! electrolyzer co-located with a renewable plant.
//!
//! Exit codes: 0 on success, 1 when a computation fails, 2 for bad input
//! (arguments, config, data files).

mod commands;
mod config;
mod format;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "h2plan",
    version,
    about = "Hydrogen producer dispatch and capacity planning"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Participation model: m0, m1p, m1c or m2.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Units of the LMP column when the header does not say: mwh or kwh.
    #[arg(long, global = true)]
    lmp_units: Option<String>,
    /// Output directory for files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Hydrogen price, $/kg.
    #[arg(long, global = true, allow_negative_numbers = true)]
    h_price: Option<f64>,
    /// Combined CSV with timestamp, LMP and capacity factor columns.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// LMP CSV, joined with --cf-data on timestamp.
    #[arg(long, global = true)]
    lmp_data: Option<PathBuf>,
    /// Capacity factor CSV.
    #[arg(long, global = true)]
    cf_data: Option<PathBuf>,
    /// What to do with missing intervals: error, drop or fill_previous.
    #[arg(long, global = true)]
    gap_policy: Option<String>,
    /// Renewable nameplate capacity, kW.
    #[arg(long, global = true)]
    q_r: Option<f64>,
    /// Electrolyzer nameplate capacity, kW.
    #[arg(long, global = true)]
    q_h: Option<f64>,
    /// Number of intervals the profit figures refer to (default: series length).
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Largest electrolyzer-to-renewable ratio searched.
    #[arg(long, global = true)]
    kappa_max: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Print the LMP thresholds that separate the dispatch regions.
    Thresholds,
    /// Dispatch every interval and write the log and revenue breakdown.
    Simulate,
    /// Operating profit over a capacity grid, with break-even and matching overlays.
    Heatmap {
        /// Renewable capacities: `a,b,c` or `lo:hi:n`.
        #[arg(long)]
        q_r_grid: Option<String>,
        /// Electrolyzer capacities: `a,b,c` or `lo:hi:n`.
        #[arg(long)]
        q_h_grid: Option<String>,
    },
    /// Best capacities for an amortized fixed-cost budget.
    Size {
        /// Budget over the horizon, $.
        #[arg(long, allow_negative_numbers = true)]
        budget: Option<f64>,
    },
    /// Operating profit across hydrogen prices for each participation model.
    Sweep {
        /// Hydrogen prices, $/kg, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        prices: Option<Vec<f64>>,
    },
    /// Capacity ratios at which operating profit changes sign.
    Breakeven,
    /// Forecast operating profit from a training prefix and compare with the rest.
    Forecast {
        /// Share of the series used for estimation.
        #[arg(long)]
        train_fraction: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

/// Marks an error as caused by the user's input rather than a failed
/// computation.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl std::error::Error for InputError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        self.0.source()
    }
}

/// Tags the error of `r` as an input error.
pub fn input<T, E: Into<anyhow::Error>>(r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| anyhow::Error::new(InputError(e.into())))
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let g = &cli.global;
    let file = match &g.config {
        Some(path) => input(RunConfig::load(path))?,
        None => RunConfig::default(),
    };
    let mut flags = RunConfig {
        pi_h: g.h_price,
        q_r: g.q_r,
        q_h: g.q_h,
        model: g.model.clone(),
        data: g.data.clone(),
        lmp_data: g.lmp_data.clone(),
        cf_data: g.cf_data.clone(),
        lmp_units: g.lmp_units.clone(),
        gap_policy: g.gap_policy.clone(),
        out: g.out.clone(),
        horizon: g.horizon,
        kappa_max: g.kappa_max,
        ..RunConfig::default()
    };
    match &cli.command {
        Command::Heatmap { q_r_grid, q_h_grid } => {
            flags.q_r_grid = q_r_grid.clone();
            flags.q_h_grid = q_h_grid.clone();
        }
        Command::Size { budget } => flags.budget = *budget,
        Command::Sweep { prices } => flags.prices = prices.clone(),
        Command::Forecast { train_fraction } => flags.train_fraction = *train_fraction,
        Command::Thresholds | Command::Simulate | Command::Breakeven => {}
    }
    let cfg = file.overlay(flags);
    input(cfg.validate())?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String> {
    let cfg = build_config(cli)?;
    let fmt = cli.global.format;
    match &cli.command {
        Command::Thresholds => commands::thresholds(&cfg, fmt),
        Command::Simulate => commands::simulate(&cfg, fmt),
        Command::Heatmap { .. } => commands::heatmap(&cfg, fmt),
        Command::Size { .. } => commands::size(&cfg, fmt),
        Command::Sweep { .. } => commands::sweep(&cfg, cfg.model.is_some(), fmt),
        Command::Breakeven => commands::breakeven(&cfg, fmt),
        Command::Forecast { .. } => commands::forecast(&cfg, fmt),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.chain().any(|e| e.is::<InputError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
