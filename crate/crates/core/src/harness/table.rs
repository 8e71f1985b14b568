use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{estimate_on, EstimateOptions};
use crate::error::{Error, Result};
use crate::graph::{generate, GraphSpec};
use crate::idla::RunConfig;
use crate::rng::derive_seed;
use crate::walk::{hitting_times_exact, mixing_time_exact, spectral};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    pub trials: usize,
    pub seed: u64,
    /// Exact hitting, mixing and spectral columns are filled only up to this
    /// many vertices.
    pub exact_cap: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { trials: 100, seed: 0, exact_cap: 512 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub family: String,
    pub n: usize,
    pub origin: usize,
    pub trials: usize,
    pub seed: u64,
    pub t_seq: f64,
    pub t_seq_stderr: f64,
    pub t_par: f64,
    pub t_par_stderr: f64,
    pub t_hit: Option<f64>,
    pub t_mix: Option<u64>,
    pub lambda2: Option<f64>,
    /// The growth function `g(n)` of the family's dispersion time.
    pub growth: f64,
    pub seq_normalized: f64,
    pub par_normalized: f64,
}

/// Order of growth of the dispersion time for each family, in natural logs:
/// `n^2 ln n` (path, cycle), `n ln n` (2-dimensional torus or grid),
/// `n ln^2 n` (binary tree), `n` (hypercube, clique, star, expander).
pub fn growth_function(family: &str, n: usize) -> Option<f64> {
    let x = n as f64;
    let ln = x.ln();
    match family {
        "path" | "cycle" => Some(x * x * ln),
        "torus2" | "grid2" => Some(x * ln),
        "binary_tree" | "tree" => Some(x * ln * ln),
        "hypercube" | "complete" | "clique" | "star" | "expander" | "gnp" => Some(x),
        _ => None,
    }
}

/// Sequential and parallel dispersion estimates for every family and size,
/// with exact walk quantities and the estimates divided by the family's
/// growth function.
pub fn table_reproduce(families: &[String], sizes: &[usize], opts: &TableOptions) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for (fi, family) in families.iter().enumerate() {
        for (si, &n) in sizes.iter().enumerate() {
            let row_seed = derive_seed(opts.seed, ((fi as u64) << 32) | si as u64);
            let spec = GraphSpec::with_size(family, n, row_seed)?;
            let growth = growth_function(family, n)
                .ok_or_else(|| Error::Parameter(format!("no growth function for family {family:?}")))?;
            let graph = generate(&spec)?;
            let origin = spec.default_origin();
            let est = |config: RunConfig, pool: u64| {
                estimate_on(&graph, origin, &config, opts.trials, derive_seed(row_seed, pool), &EstimateOptions::default())
            };
            let seq = est(RunConfig::sequential(), 0)?;
            let par = est(RunConfig::parallel(), 1)?;
            let exact = graph.n() <= opts.exact_cap;
            rows.push(TableRow {
                family: family.clone(),
                n: graph.n(),
                origin,
                trials: opts.trials,
                seed: row_seed,
                t_seq: seq.mean,
                t_seq_stderr: seq.stderr,
                t_par: par.mean,
                t_par_stderr: par.stderr,
                t_hit: if exact { Some(hitting_times_exact(&graph, false)?.max()) } else { None },
                t_mix: if exact { Some(mixing_time_exact(&graph, 0.25, true)?) } else { None },
                lambda2: if exact { Some(spectral(&graph, true)?.lambda2) } else { None },
                growth,
                seq_normalized: seq.mean / growth,
                par_normalized: par.mean / growth,
            });
        }
    }
    Ok(rows)
}

pub fn write_table_csv<W: Write>(rows: &[TableRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Input(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
