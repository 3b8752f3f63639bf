//! `serieslab`: batch verification of the series, congruence and certificate corpus.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "serieslab", version, about = "Verify binomial-coefficient series identities, congruences and certificates")]
pub struct Cli {
    /// Print the JSON report instead of a text table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    pub parallel: Option<u32>,
    /// Drop wall-clock fields so reports compare byte for byte.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Numeric verification of series identities.
    Verify(VerifyArgs),
    /// Symbolic and instance checks of the telescoping families.
    Telescope(TelescopeArgs),
    /// Exact congruence and integrality scans over primes.
    Congruence(CongruenceArgs),
    /// Antiderivative certificate checks.
    Certificates(CertificateArgs),
    /// Integer-relation search for a closed form (evidence only).
    Discover(DiscoverArgs),
    /// Inspect the bundled corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct Selection {
    /// `status=theorem`, `section=4`, `kind=series` or `id=thm1.*`; repeatable.
    #[arg(long = "filter", value_name = "KEY=VALUE")]
    pub filters: Vec<String>,
    /// Select a single claim id; repeatable.
    #[arg(long = "id", value_name = "ID")]
    pub ids: Vec<String>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub select: Selection,
    /// Working precision; defaults to 60 for proven claims and 40 for conjectures.
    #[arg(long, value_parser = clap::value_parser!(u32).range(10..))]
    pub digits: Option<u32>,
    /// Accept HEURISTIC tail bounds for harmonic-weighted summands.
    #[arg(long)]
    pub allow_heuristic: bool,
}

#[derive(Args, Debug)]
pub struct TelescopeArgs {
    /// Check every family (the default when no family is named).
    #[arg(long)]
    pub all: bool,
    /// Family tag such as `L21_3K2`; repeatable.
    #[arg(long = "family")]
    pub families: Vec<String>,
    /// Rational values of m; defaults to the standard set.
    #[arg(long = "m", value_name = "Q")]
    pub ms: Vec<String>,
    /// Largest partial sum index.
    #[arg(long, default_value_t = 60)]
    pub n: i64,
}

#[derive(Args, Debug)]
pub struct CongruenceArgs {
    #[command(flatten)]
    pub select: Selection,
    /// Prime range `lo..hi`, inclusive.
    #[arg(long, default_value = "5..31")]
    pub primes: String,
    /// Largest n for integer-divisibility claims.
    #[arg(long, default_value_t = 200)]
    pub n_max: u64,
    /// Largest n for p-adic integrality claims.
    #[arg(long, default_value_t = 3)]
    pub padic_n_max: u64,
    /// Resume from and append to this checkpoint file.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CertificateArgs {
    /// Check every certificate and the functional equation.
    #[arg(long)]
    pub all: bool,
    #[arg(long = "id", value_name = "ID")]
    pub ids: Vec<String>,
    /// Order for the functional-equation check.
    #[arg(long, default_value_t = 200)]
    pub order: usize,
}

#[derive(Args, Debug)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub select: Selection,
    /// Comma-separated basis monomials, e.g. `pi,log(2),pi/sqrt(3)`.
    /// Defaults to the constants of the claimed value plus pi and log(2).
    #[arg(long)]
    pub basis: Option<String>,
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u32).range(20..))]
    pub digits: u32,
}

#[derive(Subcommand, Debug)]
pub enum CorpusAction {
    List(Selection),
    Validate,
    Manifest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
