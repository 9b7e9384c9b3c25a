use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ftth_core::{preprocess, Instance, RulesDocument};

mod bench;
mod design;
mod validate;

#[derive(Parser)]
#[command(name = "ftth", version, about = "Plan passive optical access networks with a genetic algorithm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the GA on a map and export the best design.
    Design(design::DesignArgs),
    /// Check an existing design and print its cost and findings.
    Validate(validate::ValidateArgs),
    /// Compare GA, greedy and (on tiny instances) the exhaustive optimum on generated maps.
    Bench(bench::BenchArgs),
}

#[derive(Args, Clone)]
pub struct RulesArg {
    /// Rules document (TOML). Built-in defaults when absent.
    #[arg(long, env = "FTTH_RULES")]
    pub rules: Option<PathBuf>,
}

impl RulesArg {
    pub fn load(&self) -> Result<RulesDocument> {
        match &self.rules {
            Some(path) => RulesDocument::load(path).with_context(|| format!("reading rules {}", path.display())),
            None => Ok(RulesDocument::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Geojson,
    Svg,
    Csv,
}

/// Loads and preprocesses a map; removed nodes are reported on stderr.
pub fn load_instance(map: &PathBuf, rules: &RulesDocument) -> Result<Instance> {
    let raw = ftth_core::load_map(map).with_context(|| format!("reading map {}", map.display()))?;
    let pre = preprocess(&raw).with_context(|| format!("preprocessing map {}", map.display()))?;
    if !pre.removed.is_empty() {
        eprintln!("note: dropped {} route nodes not connected to the OLT", pre.removed.len());
    }
    Ok(Instance::new(pre.map, rules.rules.clone())?)
}

/// Whether the command's result passes its feasibility gate.
pub enum Outcome {
    Ok,
    Infeasible,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(args) => design::run(args),
        Command::Validate(args) => validate::run(args),
        Command::Bench(args) => bench::run(args),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
