use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use ftth_core::bench::baseline::{ORACLE_MAX_CANDIDATES, ORACLE_MAX_CLIENTS};
use ftth_core::bench::{brute_force_oracle, greedy_baseline, run_stats, synth_instance, SynthSpec};
use ftth_core::{GaConfig, Instance};
use serde::{Deserialize, Serialize};

use crate::{Outcome, RulesArg};

#[derive(Args)]
pub struct BenchArgs {
    /// Benchmark spec (TOML) with one or more `[[suite]]` tables.
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    rules: RulesArg,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchSpec {
    #[serde(default)]
    suite: Vec<Suite>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Suite {
    name: String,
    instances: usize,
    /// Instance i is generated with seed + i.
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_runs")]
    runs: usize,
    #[serde(default)]
    synth: SynthSpec,
    /// Overrides the `[ga]` section of the rules document.
    ga: Option<GaConfig>,
}

fn default_runs() -> usize {
    10
}

#[derive(Debug, Serialize)]
struct Row {
    suite: String,
    instance: usize,
    seed: u64,
    candidates: usize,
    clients: usize,
    greedy: f64,
    ga_best: f64,
    ga_mean: f64,
    ga_worst: f64,
    oracle: Option<f64>,
}

pub fn run(args: &BenchArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&args.spec).with_context(|| format!("reading spec {}", args.spec.display()))?;
    let spec: BenchSpec = toml::from_str(&text).with_context(|| format!("parsing spec {}", args.spec.display()))?;
    if spec.suite.is_empty() {
        bail!("{}: no [[suite]] entries", args.spec.display());
    }
    let doc = args.rules.load()?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let csv_path = args.out.join("bench.csv");
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;

    println!(
        "{:<12} {:>5} {:>12} {:>12} {:>12} {:>8} {:>10}",
        "suite", "inst", "greedy", "ga mean", "oracle", "ga<=gr", "ga/oracle"
    );
    for suite in &spec.suite {
        if suite.instances == 0 {
            bail!("suite {}: instances must be positive", suite.name);
        }
        let config = suite.ga.clone().unwrap_or_else(|| doc.ga.clone());
        let mut wins = 0;
        let mut gaps = Vec::new();
        for i in 0..suite.instances {
            let seed = suite.seed + i as u64;
            let map = synth_instance(&SynthSpec { seed, ..suite.synth.clone() })?;
            let inst = Instance::new(map, doc.rules.clone())?;
            let greedy = greedy_baseline(&inst)?.fitness();
            let stats = run_stats(&inst, &config, suite.runs)?;
            let small =
                inst.map.candidate_count() <= ORACLE_MAX_CANDIDATES && inst.map.client_count() <= ORACLE_MAX_CLIENTS;
            let oracle = if small { Some(brute_force_oracle(&inst)?.fitness) } else { None };
            let f = &stats.summary.fitness;
            if f.mean <= greedy {
                wins += 1;
            }
            if let Some(o) = oracle.filter(|o| *o > 0.0) {
                gaps.push(f.best / o);
            }
            w.serialize(Row {
                suite: suite.name.clone(),
                instance: i,
                seed,
                candidates: inst.map.candidate_count(),
                clients: inst.map.client_count(),
                greedy,
                ga_best: f.best,
                ga_mean: f.mean,
                ga_worst: f.worst,
                oracle,
            })?;
            println!(
                "{:<12} {:>5} {:>12.1} {:>12.1} {:>12} {:>8} {:>10}",
                suite.name,
                i,
                greedy,
                f.mean,
                oracle.map_or("-".into(), |o| format!("{o:.1}")),
                if f.mean <= greedy { "yes" } else { "no" },
                oracle.filter(|o| *o > 0.0).map_or("-".into(), |o| format!("{:.4}", f.best / o)),
            );
        }
        let gap = if gaps.is_empty() {
            "-".to_string()
        } else {
            format!("{:.4}", gaps.iter().sum::<f64>() / gaps.len() as f64)
        };
        println!("{}: GA mean <= greedy on {wins}/{} instances; mean GA/oracle {gap}", suite.name, suite.instances);
    }
    w.flush()?;
    println!("wrote {}", csv_path.display());
    Ok(Outcome::Ok)
}
