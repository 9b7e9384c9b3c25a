use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use ftth_core::bom::equipment_bill;
use ftth_core::fitness::solution_fitness;
use ftth_core::validator::validate;
use ftth_core::{Solution, SolutionDocument};
use serde_json::json;

use crate::{load_instance, Outcome, RulesArg};

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long)]
    map: PathBuf,
    #[command(flatten)]
    rules: RulesArg,
    /// Solution document (JSON) listing PDOs and client assignments.
    #[arg(long)]
    solution: PathBuf,
}

pub fn run(args: &ValidateArgs) -> Result<Outcome> {
    let doc = args.rules.load()?;
    let inst = load_instance(&args.map, &doc)?;
    let sol_doc = SolutionDocument::load(&args.solution)
        .with_context(|| format!("reading solution {}", args.solution.display()))?;
    let solution = Solution::from_document(&sol_doc, &inst.map)
        .with_context(|| format!("resolving solution {}", args.solution.display()))?;
    let cost = solution_fitness(&solution, &inst)?;
    let report = validate(&solution, &inst)?;
    let bill = equipment_bill(&solution, &inst)?;
    let feasible = report.feasible;
    let out = json!({"cost": cost, "feasibility": report, "bill": bill});
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if feasible { Outcome::Ok } else { Outcome::Infeasible })
}
