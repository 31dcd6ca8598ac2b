//! `bsfs`: tables of exact moments, approximations, distribution functions
//! and simulations for the Bolthausen–Sznitman site frequency spectrum.
//!
//! Exit status is 0 on success, 1 when `validate` finds a failing check and
//! 2 for usage or domain errors.

mod commands;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bsfs_core::QuadratureSpec;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::table::Table;

#[derive(Debug, Parser)]
#[command(
    name = "bsfs",
    version,
    about = "Site frequency spectrum of the Bolthausen-Sznitman coalescent"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Relative tolerance of every quadrature.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Absolute tolerance of every quadrature.
    #[arg(long, global = true, default_value_t = 1e-14)]
    pub abs_tol: f64,
    /// Worker threads for parallel work; defaults to the number of CPUs.
    #[arg(long, global = true, env = "BSFS_THREADS")]
    pub threads: Option<usize>,
}

impl Common {
    pub fn spec(&self) -> QuadratureSpec {
        QuadratureSpec::with_tolerances(self.rel_tol, self.abs_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Printed,
    Doubled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalization {
    Corrected,
    Printed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact expected SFS with the basic and refined approximations.
    ExpectedSfs {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// A single family size; omit together with --all-b for every size.
        #[arg(long, conflicts_with = "all_b", required_unless_present = "all_b")]
        b: Option<u64>,
        #[arg(long)]
        all_b: bool,
    },
    /// Covariance of two SFS entries.
    Cov {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long)]
        b1: u64,
        #[arg(long)]
        b2: u64,
        /// `doubled` counts both orderings of equal sizes; `printed` is the
        /// formula as originally stated.
        #[arg(long, value_enum, default_value_t = Mode::Doubled)]
        mode: Mode,
    },
    /// Survival function of a large-family branch length on a grid of times.
    Dist {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        b: u64,
        /// Grid `start:stop:step`, both ends included.
        #[arg(long, default_value = "0:2:0.25")]
        s_grid: String,
    },
    /// Joint law of a chain of large families.
    Joint {
        #[arg(long)]
        n: u64,
        /// Increasing family sizes above n/2, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        chain: Vec<u64>,
        /// One time threshold per chain entry, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        /// Also require that no smaller large family ever exists.
        #[arg(long)]
        minimal: bool,
        #[arg(long, value_enum, default_value_t = Normalization::Corrected)]
        normalization: Normalization,
    },
    /// Exact against refined approximation at several sample sizes.
    Figure1 {
        #[arg(long, value_delimiter = ',', default_value = "5,20,35")]
        n: Vec<u64>,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
    /// Exact expected SFS with the small-b, proportional and large-b asymptotics.
    Figure3 {
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
    /// Monte-Carlo branch lengths and SFS next to the exact means.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs every acceptance check and reports each comparison.
    Validate {
        /// Largest sample size compared against the exact Markov chain.
        #[arg(long, default_value_t = 7)]
        max_n: usize,
        /// Monte-Carlo replicates per sample size.
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// What a command produced: a table, and whether it represents a failure.
pub struct Outcome {
    pub table: Table,
    pub failed: bool,
}

fn emit(table: &Table, common: &Common) -> io::Result<()> {
    let sink: Box<dyn Write> = match &common.output {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match common.format {
        Format::Csv => table.write_csv(&mut sink).map_err(io::Error::other)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &table.to_json())?;
            writeln!(sink)?;
        }
    }
    sink.flush()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("bsfs: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match commands::run(&cli.command, &cli.common) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("bsfs: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&outcome.table, &cli.common) {
        eprintln!("bsfs: cannot write output: {e}");
        return ExitCode::from(2);
    }
    if outcome.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
