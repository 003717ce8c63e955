//! `epsense`: command-line front end for the EP sensing toolkit.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 fit
//! failure (the report is still written when possible).

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::OutFormat;
use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Fit(String),
}

impl CliError {
    fn io(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }

    fn config(e: epsense_core::Error) -> Self {
        use epsense_core::Error as E;
        match e {
            E::NotConverged { .. } | E::InsufficientPoints { .. } | E::DegenerateData => {
                CliError::Fit(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Fit(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Fit(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "epsense", about = "Exceptional-point sensing simulator", version)]
struct Cli {
    /// JSON config file; command-line flags take precedence over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the resolved configuration as JSON and exit
    #[arg(long, global = true)]
    print_defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Parser)]
struct CommonArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalue splitting and theoretical sensitivity over a coupling grid
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        n_omega: Option<usize>,
        #[arg(long)]
        kappa_q: Option<f64>,
        #[arg(long)]
        kappa_p: Option<f64>,
    },
    /// Lindblad and conditioned no-jump evolution from |e,0>
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        kappa_q: Option<f64>,
        #[arg(long)]
        kappa_p: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        n_points: Option<usize>,
    },
    /// Quantum-jump Monte Carlo ensemble with no-jump post-selection
    Trajectories {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        kappa_q: Option<f64>,
        #[arg(long)]
        kappa_p: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        n_points: Option<usize>,
        #[arg(long)]
        n_traj: Option<u64>,
        /// JSON summary path; derived from --out when omitted
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Synthetic sensing campaign with power-law fits (JSON report)
    Sense {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kappa_q: Option<f64>,
        #[arg(long)]
        kappa_p: Option<f64>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        n_points: Option<usize>,
        /// Comma-separated |dOmega|/Omega_0 offsets, applied on both sides
        #[arg(long, value_delimiter = ',')]
        rel_offsets: Option<Vec<f64>>,
        /// Also write the (offset, S) points as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write a log-log SVG next to --out
        #[arg(long)]
        plot: bool,
    },
    /// Render columns of a CSV file as an SVG chart
    Plot {
        /// Input CSV file
        input: PathBuf,
        /// Column used for the x axis
        #[arg(long, default_value = "t")]
        x: String,
        /// Comma-separated y columns
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        #[arg(long)]
        logx: bool,
        #[arg(long)]
        logy: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

macro_rules! override_cfg {
    ($cfg:expr, $($field:ident),*) => {
        $(if let Some(v) = $field { $cfg.$field = v; })*
    };
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;

    if cli.print_defaults {
        let text = serde_json::to_string_pretty(&cfg)
            .map_err(|e| CliError::Io(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }

    let command = cli
        .command
        .ok_or_else(|| CliError::Config("no command given (try --help)".into()))?;

    match command {
        Command::Spectrum { common, format, omega_min, omega_max, n_omega, kappa_q, kappa_p } => {
            override_cfg!(cfg, omega_min, omega_max, n_omega, kappa_q, kappa_p);
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            commands::cmd_spectrum(&cfg, common.out.as_deref(), format)
        }
        Command::Evolve { common, format, omega, kappa_q, kappa_p, t_max, n_points } => {
            override_cfg!(cfg, omega, kappa_q, kappa_p, t_max, n_points);
            commands::cmd_evolve(&cfg, common.out.as_deref(), format)
        }
        Command::Trajectories {
            common,
            omega,
            kappa_q,
            kappa_p,
            t_max,
            n_points,
            n_traj,
            summary,
        } => {
            override_cfg!(cfg, omega, kappa_q, kappa_p, t_max, n_points, n_traj);
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            commands::cmd_trajectories(&cfg, common.out.as_deref(), summary.as_deref())
        }
        Command::Sense {
            common,
            kappa_q,
            kappa_p,
            shots,
            t_max,
            n_points,
            rel_offsets,
            csv,
            plot,
        } => {
            override_cfg!(cfg, kappa_q, kappa_p, shots, t_max, n_points, rel_offsets);
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            commands::cmd_sense(&cfg, common.out.as_deref(), csv.as_deref(), plot)
        }
        Command::Plot { input, x, y, logx, logy, out } => {
            commands::cmd_plot(&input, &x, &y, logx, logy, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
