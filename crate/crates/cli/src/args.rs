use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use partex_core::{Psi, PsiSpec, Seed};

#[derive(Debug, Parser)]
#[command(name = "partex", version, about = "Inference under partition exchangeability")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a sample from the Hoppe urn and write one token per line.
    Sample(SampleArgs),
    /// Ewens sampling formula probability of a data file's abundance.
    Prob(ProbArgs),
    /// Maximum-likelihood psi, optionally with a bootstrap interval.
    Mle(MleArgs),
    /// Hypothesis tests.
    #[command(subcommand)]
    Test(TestCommand),
    /// Fit a classifier or label test data.
    #[command(subcommand)]
    Classify(ClassifyCommand),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, value_parser = parse_psi)]
    pub psi: Psi,
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    pub seed: Seed,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    pub data: PathBuf,
    /// "a" (psi = 1), "r" (psi = n) or a positive number.
    #[arg(long, default_value = "a", value_parser = parse_psi_spec)]
    pub psi: PsiSpec,
}

#[derive(Debug, Args)]
pub struct MleArgs {
    pub data: PathBuf,
    /// Bootstrap interval: [LEVEL [ROUNDS [FRAC]]], defaults 0.95 1000 0.8.
    #[arg(long, num_args = 0..=3, value_name = "LEVEL ROUNDS FRAC")]
    pub ci: Option<Vec<String>>,
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    pub seed: Seed,
}

#[derive(Debug, Subcommand)]
pub enum TestCommand {
    /// Score test of psi = psi0.
    Psi {
        data: PathBuf,
        #[arg(long, default_value = "a", value_parser = parse_psi_spec)]
        psi: PsiSpec,
    },
    /// Likelihood-ratio test that two samples share psi.
    Two { first: PathBuf, second: PathBuf },
    /// Likelihood-ratio test that several samples share psi.
    Mult {
        /// One sample per file.
        files: Vec<PathBuf>,
        /// Alternatively one sample per CSV column; blank cells are skipped.
        #[arg(long, conflicts_with = "files")]
        csv: Option<PathBuf>,
        /// The CSV's first row is a header.
        #[arg(long, requires = "csv")]
        header: bool,
    },
    /// Watterson homozygosity test of the Poisson-Dirichlet shape.
    Pd {
        data: PathBuf,
        #[arg(long, default_value = "1000", value_parser = clap::value_parser!(u64).range(10..))]
        rounds: u64,
        #[arg(long, default_value = "0", value_parser = parse_seed)]
        seed: Seed,
    },
}

#[derive(Debug, Subcommand)]
pub enum ClassifyCommand {
    /// Fit per-class, per-feature models and write the model JSON.
    Fit {
        /// Training CSV, one row per data point, one column per feature.
        #[arg(long)]
        train: PathBuf,
        /// One class label per line, aligned with the training rows.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        header: bool,
    },
    /// Label each test row independently.
    Marginal(PredictArgs),
    /// Label the test rows jointly.
    Simultaneous(PredictArgs),
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Where to write one label per test row.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub header: bool,
}

fn parse_psi(s: &str) -> Result<Psi, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    Psi::new(v).map_err(|e| e.to_string())
}

fn parse_psi_spec(s: &str) -> Result<PsiSpec, String> {
    s.parse().map_err(|e: partex_core::Error| e.to_string())
}

fn parse_seed(s: &str) -> Result<Seed, String> {
    s.parse().map_err(|e: partex_core::Error| e.to_string())
}
