//! `treeten`: build, compress, learn and analyze tree tensor networks from
//! the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Run;
use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] treeten::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Core(e) if e.is_config_error() => 2,
            CliError::Core(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "treeten", version, about = "Tree tensor networks on binary grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the exact network of a target and write it with its bond stats.
    Build(Flags),
    /// Truncate an exact network over a range of bond dimensions.
    Compress(Flags),
    /// Learn a target by tree tensor cross interpolation.
    Tci(Flags),
    /// Solve a benchmark Fredholm equation.
    Fredholm(Flags),
    /// Digit-pair mutual information matrix of a target.
    Mi(Flags),
}

#[derive(Debug, clap::Args)]
struct Flags {
    /// TOML run configuration; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in tree layout.
    #[arg(long)]
    tree: Option<String>,
    /// TOML file listing vertices and edges of a custom tree.
    #[arg(long)]
    tree_spec: Option<PathBuf>,
    /// Named benchmark target or Fredholm instance.
    #[arg(long)]
    target: Option<String>,
    /// Binary digits per variable.
    #[arg(long = "L")]
    levels: Option<usize>,
    /// Number of variables.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated bond dimensions.
    #[arg(long, value_delimiter = ',')]
    chi_list: Option<Vec<usize>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.merge(RunConfig {
            tree: self.tree,
            tree_spec: self.tree_spec,
            target: self.target,
            levels: self.levels,
            n: self.n,
            chi_list: self.chi_list,
            tol: self.tol,
            sweeps: self.sweeps,
            iters: self.iters,
            seed: self.seed,
            samples: self.samples,
            out: self.out,
            function: None,
        }))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("TREETEN_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("TREETEN_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

type Action = fn(Run) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (name, flags, action): (&'static str, Flags, Action) = match cli.command {
        Command::Build(f) => ("build", f, commands::build),
        Command::Compress(f) => ("compress", f, commands::compress),
        Command::Tci(f) => ("tci", f, commands::tci),
        Command::Fredholm(f) => ("fredholm", f, commands::fredholm),
        Command::Mi(f) => ("mi", f, commands::mi),
    };
    action(Run::new(name, flags.resolve()?)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Numerical("x".into()).exit_code(), 3);
        assert_eq!(CliError::from(treeten::Error::CycleDetected("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(treeten::Error::DegenerateInit).exit_code(), 3);
        assert_eq!(CliError::from(treeten::Error::SvdFailure).exit_code(), 3);
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from(["treeten", "tci", "--target", "cosh", "--L", "8", "--chi-list", "2,4"]).unwrap();
        let Command::Tci(flags) = cli.command else { panic!("wrong subcommand") };
        let cfg = flags.resolve().unwrap();
        assert_eq!(cfg.levels, Some(8));
        assert_eq!(cfg.chi_list, Some(vec![2, 4]));
    }
}
