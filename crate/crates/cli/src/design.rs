use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use ftth_core::bench::{run_stats, write_records, write_traces};
use ftth_core::bom::equipment_bill;
use ftth_core::report::{to_geojson, to_svg};
use ftth_core::validator::validate;
use ftth_core::Solution;
use serde_json::json;

use crate::{load_instance, Format, Outcome, RulesArg};

#[derive(Args)]
pub struct DesignArgs {
    /// Map document (JSON).
    #[arg(long)]
    map: PathBuf,
    #[command(flatten)]
    rules: RulesArg,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed of the first run; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Exit 0 even when the best design leaves clients unserved or breaks a hard rule.
    #[arg(long)]
    allow_infeasible: bool,
    /// Extra exports to write; all of them when omitted.
    #[arg(long, value_enum)]
    format: Vec<Format>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("writing {}", path.display()))?))
}

pub fn run(args: &DesignArgs) -> Result<Outcome> {
    let doc = args.rules.load()?;
    let inst = load_instance(&args.map, &doc)?;
    let mut config = doc.ga.clone();
    if let Some(s) = args.seed {
        config.rng_seed = s;
    }
    if let Some(g) = args.generations {
        config.generations = g;
    }
    if let Some(p) = args.population {
        config.population_size = p;
    }

    let result = run_stats(&inst, &config, args.runs)?;
    let best = &result.best;
    let solution = Solution::from_genotype(&best.genotype, &inst.map)?;
    let report = validate(&solution, &inst)?;
    let bill = equipment_bill(&solution, &inst)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let out = |name: &str| args.out.join(name);
    write(&out("solution.json"), &solution.to_document(&inst.map).to_json())?;
    let report_doc = json!({"cost": best.cost, "feasibility": report, "summary": result.summary});
    write(&out("report.json"), &serde_json::to_string_pretty(&report_doc)?)?;
    write(&out("bill.json"), &serde_json::to_string_pretty(&bill)?)?;

    let formats =
        if args.format.is_empty() { vec![Format::Geojson, Format::Svg, Format::Csv] } else { args.format.clone() };
    for f in formats {
        match f {
            Format::Csv => {
                write_records(&result.records, create(&out("metrics.csv"))?)?;
                write_traces(&result, create(&out("trace.csv"))?)?;
            }
            Format::Geojson => {
                write(&out("design.geojson"), &serde_json::to_string_pretty(&to_geojson(&solution, &inst)?)?)?
            }
            Format::Svg => write(&out("design.svg"), &to_svg(&solution, &inst)?)?,
        }
    }

    let c = &best.cost;
    println!(
        "fitness {:.2}  pdos {}  drop {:.1} m  distribution {:.1} m  missing {}  {}",
        c.fitness,
        c.n_pdo,
        c.drop_m,
        c.dist_m,
        c.h_missing,
        if best.feasible { "feasible" } else { "INFEASIBLE" }
    );
    println!("wrote {}", args.out.display());
    Ok(if best.feasible || args.allow_infeasible { Outcome::Ok } else { Outcome::Infeasible })
}
