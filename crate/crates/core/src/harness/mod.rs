//! Seeded Monte Carlo estimation and the experiments built on it.
//!
//! Trial `k` of a run with master seed `s` uses seed `derive_seed(s, k)`, and
//! results are collected in trial order, so every estimate and report is
//! identical whatever the size of the rayon pool.

mod experiments;
mod stats;
mod table;

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{generate, Graph, GraphSpec, Vertex};
use crate::idla::{simulate, DispersionResult, RunConfig};
use crate::rng::derive_seed;

pub use experiments::{
    bijection_experiment, dominance_experiment, least_action_experiment, multiwalk_set_hitting_mc,
    non_concentration_experiment, ratio_experiment, star_clique_experiment, RatioOptions,
};
pub use stats::{ks_two_sample, quantile_sorted, Estimate, Quantile, DEFAULT_QUANTILES};
pub use table::{growth_function, table_reproduce, write_table_csv, TableOptions, TableRow};

/// Pass/fail outcome of one check in an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, value, threshold, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentInputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    pub origin: Vertex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub inputs: ExperimentInputs,
    pub estimates: BTreeMap<String, Estimate>,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    /// Wall-clock seconds; the only field that varies between reruns.
    pub runtime_secs: f64,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// Equality of everything except the runtime.
    pub fn same_outputs(&self, other: &ExperimentReport) -> bool {
        let mut a = self.clone();
        a.runtime_secs = other.runtime_secs;
        a == *other
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plain-text summary, one line per verdict.
    pub fn render(&self) -> String {
        let mut out = format!("{} ({:.1}s)\n", self.experiment, self.runtime_secs);
        for (name, e) in &self.estimates {
            out.push_str(&format!("  {name}: mean {:.4} +- {:.4} over {} trials\n", e.mean, e.stderr, e.trials));
        }
        for (name, v) in &self.values {
            out.push_str(&format!("  {name} = {v:.6}\n"));
        }
        for v in &self.verdicts {
            let tag = if v.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "  [{tag}] {}: value {:.6}, threshold {:.6}. {}\n",
                v.name, v.value, v.threshold, v.detail
            ));
        }
        out
    }
}

/// Runs `trials` independent simulations and returns their results in
/// trial order.
pub fn run_trials(
    graph: &Graph,
    origin: Vertex,
    config: &RunConfig,
    trials: usize,
    seed: u64,
) -> Result<Vec<DispersionResult>> {
    (0..trials)
        .into_par_iter()
        .map(|k| simulate(graph, origin, config, derive_seed(seed, k as u64)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub quantiles: Vec<f64>,
    pub keep_values: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { quantiles: DEFAULT_QUANTILES.to_vec(), keep_values: false }
    }
}

/// Dispersion-time estimate on an already built graph.
pub fn estimate_on(
    graph: &Graph,
    origin: Vertex,
    config: &RunConfig,
    trials: usize,
    seed: u64,
    opts: &EstimateOptions,
) -> Result<Estimate> {
    let values = run_trials(graph, origin, config, trials, seed)?.into_iter().map(|r| r.dispersion_time).collect();
    Estimate::from_values(values, &opts.quantiles, seed, opts.keep_values)
}

/// Mean, standard error and quantiles of the dispersion time over `trials`
/// seeded runs.
pub fn estimate_dispersion(
    spec: &GraphSpec,
    origin: Vertex,
    config: &RunConfig,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    estimate_on(&generate(spec)?, origin, config, trials, seed, &EstimateOptions::default())
}

/// One line of the stable estimate CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub family: String,
    pub n: usize,
    pub origin: Vertex,
    pub process: String,
    pub lazy: bool,
    pub trials: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    pub min: f64,
    pub max: f64,
}

impl EstimateRow {
    pub fn new(spec: &GraphSpec, n: usize, origin: Vertex, config: &RunConfig, estimate: &Estimate) -> Self {
        let q = |p: f64| estimate.quantile(p).unwrap_or(f64::NAN);
        let process = match (config.process, config.time_model) {
            (crate::idla::Process::Sequential, crate::idla::TimeModel::Discrete) => "seq",
            (crate::idla::Process::Sequential, crate::idla::TimeModel::Continuous) => "cseq",
            (crate::idla::Process::Parallel, _) => "par",
            (crate::idla::Process::Uniform, crate::idla::TimeModel::Discrete) => "unif",
            (crate::idla::Process::Uniform, crate::idla::TimeModel::Continuous) => "ctu",
        };
        Self {
            family: spec.family().to_string(),
            n,
            origin,
            process: process.into(),
            lazy: config.lazy,
            trials: estimate.trials,
            seed: estimate.master_seed,
            mean: estimate.mean,
            stderr: estimate.stderr,
            q50: q(0.5),
            q90: q(0.9),
            q99: q(0.99),
            min: estimate.min,
            max: estimate.max,
        }
    }
}

/// Writes rows with the header
/// `family,n,origin,process,lazy,trials,seed,mean,stderr,q50,q90,q99,min,max`.
pub fn write_estimate_csv<W: Write>(rows: &[EstimateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| crate::Error::Input(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
