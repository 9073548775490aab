//! Command-line surface over the core crate: JSON file formats, report
//! rendering, and the bound/density/h1/scan/divide subcommands.

pub mod commands;
pub mod files;
pub mod reports;

use clap::{Parser, Subcommand, ValueEnum};
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

/// Errors carrying the exit-code contract: 2 input, 3 budget, 4 empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Input(String),
    Budget(String),
    Empty(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Empty(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Budget(m) | CliError::Empty(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<arboreal_core::Error> for CliError {
    fn from(e: arboreal_core::Error) -> CliError {
        match e {
            arboreal_core::Error::BudgetExceeded { .. }
            | arboreal_core::Error::GroupTooLarge { .. } => CliError::Budget(e.to_string()),
            arboreal_core::Error::EmptyScan => CliError::Empty(e.to_string()),
            arboreal_core::Error::TorsionPoint => {
                CliError::Input("point must be non-torsion".into())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
}

#[derive(Parser)]
#[command(
    name = "arboreal",
    version,
    about = "Index bounds, cohomology, and prime scans for arboreal images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Invariants and the index bound for a linear subgroup file.
    Bound {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        d: u32,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Fixed-vector densities by level, with the closed-form limit when full.
    Density {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// First cohomology of a linear subgroup acting on (Z/l^n)^2.
    H1 {
        #[arg(long)]
        group: PathBuf,
        #[arg(long = "module-level")]
        module_level: u32,
        /// Inclusive lift range "M1..M2" for a tower of preimages.
        #[arg(long)]
        tower: Option<String>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Scan primes up to a limit and tally the coprime-order fraction.
    Scan {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        limit: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Divide a rational point by l and report the divisibility depth.
    Divide {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        ell: u64,
        /// Cap on how many preimage levels of the division tree to expand.
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Bound { group, d, format } => commands::cmd_bound(&group, d, format, out),
        Cmd::Density {
            ell,
            level,
            image,
            threads,
            format,
        } => commands::cmd_density(ell, level, image.as_deref(), threads, format, out),
        Cmd::H1 {
            group,
            module_level,
            tower,
            format,
        } => commands::cmd_h1(&group, module_level, tower.as_deref(), format, out),
        Cmd::Scan {
            curve,
            ell,
            limit,
            threads,
            csv,
            format,
        } => commands::cmd_scan(&curve, ell, limit, threads, csv.as_deref(), format, out),
        Cmd::Divide {
            curve,
            ell,
            depth,
            format,
        } => commands::cmd_divide(&curve, ell, depth, format, out),
    }
}
