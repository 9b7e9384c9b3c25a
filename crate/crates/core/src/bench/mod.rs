//! Synthetic instances, reference designs and multi-run statistics.

pub mod baseline;
pub mod flow;
pub mod stats;
pub mod synth;

pub use baseline::{brute_force_oracle, greedy_baseline, OracleResult};
pub use stats::{read_records, run_stats, write_records, write_traces, BenchResult, MetricSummary, RunRecord, Summary};
pub use synth::{synth_instance, SynthSpec, Topology};
