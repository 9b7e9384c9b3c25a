//! Repeated seeded GA runs and their summary statistics.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{evolve, GaConfig, GenerationRecord, Individual};
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub n_pdo: usize,
    pub drop_km: f64,
    pub dist_km: f64,
    pub fitness: f64,
    pub missing: usize,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    /// Value of this metric in the run with the lowest fitness.
    pub best: f64,
    /// ...the highest fitness.
    pub worst: f64,
    /// ...the median fitness (lower middle for even counts).
    pub median: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub runs: usize,
    pub n_pdo: MetricSummary,
    pub drop_km: MetricSummary,
    pub dist_km: MetricSummary,
    pub fitness: MetricSummary,
}

impl Summary {
    pub fn from_records(records: &[RunRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Argument("no runs to summarize".into()));
        }
        let mut order: Vec<usize> = (0..records.len()).collect();
        order.sort_by(|&a, &b| records[a].fitness.total_cmp(&records[b].fitness).then(a.cmp(&b)));
        let (best, worst, median) = (order[0], order[order.len() - 1], order[(order.len() - 1) / 2]);
        let metric = |f: &dyn Fn(&RunRecord) -> f64| {
            let values: Vec<f64> = records.iter().map(f).collect();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let std = if values.len() > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            MetricSummary { best: values[best], worst: values[worst], median: values[median], mean, std }
        };
        Ok(Self {
            runs: records.len(),
            n_pdo: metric(&|r| r.n_pdo as f64),
            drop_km: metric(&|r| r.drop_km),
            dist_km: metric(&|r| r.dist_km),
            fitness: metric(&|r| r.fitness),
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub records: Vec<RunRecord>,
    /// One trace per run, in run order.
    pub traces: Vec<Vec<GenerationRecord>>,
    pub summary: Summary,
    /// Lowest-fitness individual over all runs (earliest run on ties).
    pub best: Individual,
}

impl BenchResult {
    /// Per generation, the mean over runs of best-so-far and population mean.
    pub fn mean_trace(&self) -> Vec<GenerationRecord> {
        let len = self.traces.iter().map(Vec::len).min().unwrap_or(0);
        let n = self.traces.len() as f64;
        (0..len)
            .map(|g| GenerationRecord {
                generation: g,
                best: self.traces.iter().map(|t| t[g].best).sum::<f64>() / n,
                mean: self.traces.iter().map(|t| t[g].mean).sum::<f64>() / n,
            })
            .collect()
    }
}

/// Runs the GA `n_runs` times with seeds `config.rng_seed + i`.
pub fn run_stats(inst: &Instance, config: &GaConfig, n_runs: usize) -> Result<BenchResult> {
    if n_runs == 0 {
        return Err(Error::Argument("run count must be positive".into()));
    }
    let outcomes = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let seed = config.rng_seed.wrapping_add(run as u64);
            let evo = evolve(inst, &GaConfig { rng_seed: seed, ..config.clone() })?;
            let cost = &evo.best.cost;
            let record = RunRecord {
                run,
                seed,
                n_pdo: cost.n_pdo,
                drop_km: cost.drop_m / 1000.0,
                dist_km: cost.dist_m / 1000.0,
                fitness: cost.fitness,
                missing: cost.h_missing,
                feasible: evo.best.feasible,
            };
            Ok((record, evo))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<Individual> = None;
    let mut records = Vec::with_capacity(n_runs);
    let mut traces = Vec::with_capacity(n_runs);
    for (record, evo) in outcomes {
        if best.as_ref().is_none_or(|b| evo.best.fitness() < b.fitness()) {
            best = Some(evo.best);
        }
        records.push(record);
        traces.push(evo.stats.trace);
    }
    let summary = Summary::from_records(&records)?;
    Ok(BenchResult { records, traces, summary, best: best.expect("at least one run") })
}

pub fn write_records(records: &[RunRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(input: impl Read) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<RunRecord>, _>>()?)
}

/// Columns: run, generation, best, mean. Per-run rows first, then rows
/// labelled `mean` averaging the runs.
pub fn write_traces(result: &BenchResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run", "generation", "best", "mean"])?;
    let mut row = |label: &str, g: &GenerationRecord| {
        w.write_record([label.to_string(), g.generation.to_string(), g.best.to_string(), g.mean.to_string()])
    };
    for (run, trace) in result.traces.iter().enumerate() {
        for g in trace {
            row(&run.to_string(), g)?;
        }
    }
    for g in &result.mean_trace() {
        row("mean", g)?;
    }
    w.flush()?;
    Ok(())
}
