//! The `supermap` command line: build, verify, decompose and assemble operators stored
//! as matrix files.
//!
//! Exit codes are 0 for pass, 1 when the claim checked is false and 2 for usage or
//! format errors.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod layout;
pub mod report;

pub use report::{Report, Verdict};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed input: exit 2.
    Usage(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<supermap_core::Error> for CliError {
    fn from(e: supermap_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "supermap", version, about = "Pure superchannels and combs as matrix files")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyKind {
    /// Two-slot unitary against the pure-superchannel conditions
    PureSuperchannel,
    /// Unitary against the pure-comb conditions
    CombUnitary,
    /// Choi operator against the comb normalisation chain
    CombChoi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SplitKind {
    /// Two-slot unitary into A<B and B<A pure combs
    DirectSum,
    /// Pure comb unitary into a staircase of unitaries
    Staircase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuildName {
    Switch,
    D3d,
    RandomComb,
    RandomUnitary,
    RandomChoi,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a matrix file against the conditions selected by --kind
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: VerifyKind,
        /// Layout, e.g. P=4,AI=2,AO=2,BI=2,BO=2,F=4; for combs the order is the chain H0, H1, …
        #[arg(long)]
        dims: Option<String>,
        #[arg(long, default_value_t = supermap_core::tol::TEST)]
        tol: f64,
        /// Print the report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Split a unitary into blocks or staircase elements written next to --out
    Decompose {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: SplitKind,
        /// Output prefix
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Write a named operator to --out
    Build {
        #[arg(value_enum)]
        name: BuildName,
        /// Slot dimension of the switch
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Spaces of the random operators; two-slot roles or a comb chain
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild a unitary from decomposition outputs
    Assemble {
        /// Block files (direct sum) or staircase elements in order
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = SplitKind::DirectSum)]
        kind: SplitKind,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// `{prefix}{suffix}` without touching the prefix's own extension.
pub(crate) fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
