use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{ks_two_sample, quantile_sorted, Estimate, DEFAULT_QUANTILES};
use super::{run_trials, ExperimentInputs, ExperimentReport, Verdict};
use crate::blocks::{check_validity, enumerate_blocks, pts, stp, Block, BlockDocument, BlockKind};
use crate::error::{Error, Result};
use crate::graph::{generate, Graph, GraphSpec, Vertex};
use crate::idla::{run, RunConfig, SettleRule};
use crate::rng::{derive_seed, stream};
use crate::walk::stationary;

/// Seed of the `pool`-th independent family of trials under `seed`.
fn pool_seed(seed: u64, pool: u64) -> u64 {
    derive_seed(seed, (1 << 62) + pool)
}

fn estimate(values: Vec<f64>, seed: u64) -> Result<Estimate> {
    Estimate::from_values(values, &DEFAULT_QUANTILES, seed, false)
}

fn report(
    experiment: &str,
    spec: Option<&GraphSpec>,
    origin: Vertex,
    config: Option<RunConfig>,
    trials: usize,
    seed: u64,
    started: Instant,
) -> ExperimentReport {
    ExperimentReport {
        experiment: experiment.into(),
        inputs: ExperimentInputs { graph: spec.cloned(), origin, config, trials, seed },
        estimates: BTreeMap::new(),
        values: BTreeMap::new(),
        verdicts: Vec::new(),
        runtime_secs: started.elapsed().as_secs_f64(),
    }
}

fn block_json(block: &Block) -> String {
    serde_json::to_string(&BlockDocument::new(block, None)).unwrap_or_default()
}

struct Coupled {
    seed: u64,
    seq_time: f64,
    seq_total: u64,
    par_max: u64,
    par_total: u64,
    seq_max: u64,
    par_valid: bool,
}

/// Maps sampled sequential histories through `stp` and checks that the
/// longest row never shrinks, the total length is kept and the result is a
/// valid parallel block. Also compares independent sequential and parallel
/// pools: quantiles (parallel at least sequential, up to sampling slack) and
/// the total-length distributions (two-sample KS at the 1% level).
pub fn dominance_experiment(spec: &GraphSpec, origin: Vertex, trials: usize, seed: u64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let graph = generate(spec)?;
    let config = RunConfig::sequential();
    let coupled: Vec<Coupled> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let s = derive_seed(seed, k as u64);
            let seq = run(&graph, origin, &config, s)?;
            let par = stp(&seq.block)?;
            let (a, b) = (seq.block.stats(), par.stats());
            Ok(Coupled {
                seed: s,
                seq_time: seq.result.dispersion_time,
                seq_total: a.total_length,
                seq_max: a.max_row_length,
                par_max: b.max_row_length,
                par_total: b.total_length,
                par_valid: check_validity(&par, &graph, BlockKind::Parallel).is_valid(),
            })
        })
        .collect::<Result<_>>()?;
    let parallel = run_trials(&graph, origin, &RunConfig::parallel(), trials, pool_seed(seed, 1))?;

    let mut rep = report("dominance", Some(spec), origin, Some(config), trials, seed, started);
    let checks: [(&str, fn(&Coupled) -> bool); 3] = [
        ("max_row_not_decreased", |c| c.par_max >= c.seq_max),
        ("total_length_preserved", |c| c.par_total == c.seq_total),
        ("stp_output_valid_parallel", |c| c.par_valid),
    ];
    for (name, ok) in checks {
        let bad: Vec<&Coupled> = coupled.iter().filter(|c| !ok(c)).collect();
        let detail = match bad.first() {
            Some(c) => format!("{} violations; first at run seed {}", bad.len(), c.seed),
            None => "no violations".into(),
        };
        rep.verdicts.push(Verdict::new(name, bad.is_empty(), bad.len() as f64, 0.0, detail));
    }

    let seq_times: Vec<f64> = coupled.iter().map(|c| c.seq_time).collect();
    let par_times: Vec<f64> = parallel.iter().map(|r| r.dispersion_time).collect();
    let mut seq_sorted = seq_times.clone();
    seq_sorted.sort_by(f64::total_cmp);
    let mut par_sorted = par_times.clone();
    par_sorted.sort_by(f64::total_cmp);
    for p in DEFAULT_QUANTILES {
        let slack = 3.0 * (2.0 * p * (1.0 - p) / trials as f64).sqrt();
        let seq_q = quantile_sorted(&seq_sorted, (p - slack).max(0.0));
        let par_q = quantile_sorted(&par_sorted, p);
        rep.verdicts.push(Verdict::new(
            format!("parallel_quantile_{p}_dominates"),
            par_q >= seq_q,
            par_q,
            seq_q,
            format!("parallel q{p} against sequential q{:.4}", (p - slack).max(0.0)),
        ));
    }
    let seq_lengths: Vec<f64> = coupled.iter().map(|c| c.seq_total as f64).collect();
    let par_lengths: Vec<f64> = parallel.iter().map(|r| r.total_length as f64).collect();
    let (d, p_value) = ks_two_sample(&seq_lengths, &par_lengths);
    rep.values.insert("total_length_ks_statistic".into(), d);
    rep.verdicts.push(Verdict::new(
        "total_length_same_law",
        p_value >= 0.01,
        p_value,
        0.01,
        "two-sample KS on m(L), sequential against parallel",
    ));
    rep.estimates.insert("seq".into(), estimate(seq_times, seed)?);
    rep.estimates.insert("par".into(), estimate(par_times, pool_seed(seed, 1))?);
    rep.estimates.insert("seq_total_length".into(), estimate(seq_lengths, seed)?);
    rep.estimates.insert("par_total_length".into(), estimate(par_lengths, pool_seed(seed, 1))?);
    rep.runtime_secs = started.elapsed().as_secs_f64();
    Ok(rep)
}

/// Exhaustive check that `stp` is a bijection between sequential and
/// parallel blocks of each total length `m <= m_max`, with inverse `pts`.
pub fn bijection_experiment(spec: &GraphSpec, origin: Vertex, m_max: usize) -> Result<ExperimentReport> {
    let started = Instant::now();
    let graph = generate(spec)?;
    let mut rep = report("bijection", Some(spec), origin, None, 0, 0, started);
    let mut failures: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    let names = ["counts_equal", "stp_injective_into_parallel", "pts_injective_into_sequential", "pts_after_stp_is_identity", "stp_after_pts_is_identity"];
    for name in names {
        failures.insert(name, Vec::new());
    }
    for m in 0..=m_max {
        let seq = enumerate_blocks(&graph, origin, m, BlockKind::Sequential)?;
        let par = enumerate_blocks(&graph, origin, m, BlockKind::Parallel)?;
        rep.values.insert(format!("seq_count_m{m}"), seq.len() as f64);
        rep.values.insert(format!("par_count_m{m}"), par.len() as f64);
        if seq.len() != par.len() {
            failures.get_mut("counts_equal").unwrap().push(format!("m = {m}: {} vs {}", seq.len(), par.len()));
        }
        let par_set: BTreeSet<&Block> = par.iter().collect();
        let seq_set: BTreeSet<&Block> = seq.iter().collect();
        let mut images = BTreeSet::new();
        for b in &seq {
            let image = stp(b)?;
            if !par_set.contains(&image) || !images.insert(image.clone()) {
                failures.get_mut("stp_injective_into_parallel").unwrap().push(block_json(b));
            }
            if pts(&image, None)? != *b {
                failures.get_mut("pts_after_stp_is_identity").unwrap().push(block_json(b));
            }
        }
        let mut preimages = BTreeSet::new();
        for b in &par {
            let image = pts(b, None)?;
            if !seq_set.contains(&image) || !preimages.insert(image.clone()) {
                failures.get_mut("pts_injective_into_sequential").unwrap().push(block_json(b));
            }
            if stp(&image)? != *b {
                failures.get_mut("stp_after_pts_is_identity").unwrap().push(block_json(b));
            }
        }
    }
    for name in names {
        let bad = &failures[name];
        let detail = match bad.first() {
            Some(first) => format!("{} counterexamples; first {first}", bad.len()),
            None => format!("all m <= {m_max}"),
        };
        rep.verdicts.push(Verdict::new(name, bad.is_empty(), bad.len() as f64, 0.0, detail));
    }
    rep.runtime_secs = started.elapsed().as_secs_f64();
    Ok(rep)
}

/// Tolerances for [`ratio_experiment`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioOptions {
    /// Relative tolerance for lazy-sequential over sequential against 2.
    pub lazy_tol: f64,
    /// Relative tolerance for CTU over parallel against 1.
    pub ctu_tol: f64,
    /// Expected parallel over sequential ratio, when one is known.
    pub par_seq_target: Option<f64>,
    pub par_seq_tol: f64,
}

impl Default for RatioOptions {
    fn default() -> Self {
        Self { lazy_tol: 0.1, ctu_tol: 0.1, par_seq_target: None, par_seq_tol: 0.1 }
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol * target.abs()
}

/// Mean dispersion of the sequential, lazy sequential, parallel, lazy
/// parallel and CTU processes from independent trial pools, and their ratios.
pub fn ratio_experiment(
    spec: &GraphSpec,
    origin: Vertex,
    trials: usize,
    seed: u64,
    opts: &RatioOptions,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let graph = generate(spec)?;
    let processes = [
        ("seq", RunConfig::sequential()),
        ("lazy_seq", RunConfig::sequential().lazy(true)),
        ("par", RunConfig::parallel()),
        ("lazy_par", RunConfig::parallel().lazy(true)),
        ("ctu", RunConfig::uniform().continuous()),
    ];
    let mut rep = report("ratios", Some(spec), origin, None, trials, seed, started);
    for (pool, (name, config)) in processes.iter().enumerate() {
        let s = pool_seed(seed, pool as u64);
        let values = run_trials(&graph, origin, config, trials, s)?.into_iter().map(|r| r.dispersion_time).collect();
        rep.estimates.insert((*name).into(), estimate(values, s)?);
    }
    let ratio = |a: &str, b: &str| rep.estimates[a].ratio(&rep.estimates[b]);
    let pairs = [("lazy_seq", "seq"), ("lazy_par", "par"), ("ctu", "par"), ("par", "seq")];
    let ratios: Vec<(String, (f64, f64))> = pairs.iter().map(|(a, b)| (format!("{a}_over_{b}"), ratio(a, b))).collect();
    for (name, (r, se)) in &ratios {
        rep.values.insert(name.clone(), *r);
        rep.values.insert(format!("{name}_stderr"), *se);
    }
    let (lazy, _) = ratios[0].1;
    rep.verdicts.push(Verdict::new(
        "lazy_seq_over_seq_near_2",
        within(lazy, 2.0, opts.lazy_tol),
        lazy,
        2.0,
        format!("relative tolerance {}", opts.lazy_tol),
    ));
    let (ctu, _) = ratios[2].1;
    rep.verdicts.push(Verdict::new(
        "ctu_over_par_near_1",
        within(ctu, 1.0, opts.ctu_tol),
        ctu,
        1.0,
        format!("relative tolerance {}", opts.ctu_tol),
    ));
    if let Some(target) = opts.par_seq_target {
        let (r, _) = ratios[3].1;
        rep.verdicts.push(Verdict::new(
            "par_over_seq_near_target",
            within(r, target, opts.par_seq_tol),
            r,
            target,
            format!("relative tolerance {}", opts.par_seq_tol),
        ));
    }
    rep.runtime_secs = started.elapsed().as_secs_f64();
    Ok(rep)
}

/// Time until the first of `j` independent lazy walks started from `pi`
/// enters `set`.
pub fn multiwalk_set_hitting_mc(graph: &Graph, j: usize, set: &[Vertex], trials: usize, seed: u64) -> Result<Estimate> {
    let n = graph.n();
    if j == 0 {
        return Err(Error::Parameter("need at least one walk".into()));
    }
    if set.is_empty() {
        return Err(Error::Domain("target set is empty".into()));
    }
    if let Some(&v) = set.iter().find(|&&v| v >= n) {
        return Err(Error::Domain(format!("target {v} out of range")));
    }
    if !graph.is_connected() {
        return Err(Error::Connectivity("walks cannot reach every set".into()));
    }
    let mut target = vec![false; n];
    for &v in set {
        target[v] = true;
    }
    let pi = WeightedIndex::new(stationary(graph)).map_err(|e| Error::Numerical(e.to_string()))?;
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(derive_seed(seed, k as u64), 0);
            let mut walkers: Vec<Vertex> = (0..j).map(|_| pi.sample(&mut rng)).collect();
            let mut t = 0u64;
            while !walkers.iter().any(|&v| target[v]) {
                t += 1;
                for w in &mut walkers {
                    if rng.random_bool(0.5) {
                        continue;
                    }
                    let k = rng.random_range(0..graph.degree(*w));
                    *w = graph.neighbors(*w).get(k).copied().unwrap_or(*w);
                }
            }
            t as f64
        })
        .collect();
    Estimate::from_values(values, &DEFAULT_QUANTILES, seed, false)
}

/// Sequential dispersion on the star `S_n` (centre origin) against the
/// clique `K_n`; the ratio of means should sit in `band`.
pub fn star_clique_experiment(n: usize, trials: usize, seed: u64, band: (f64, f64)) -> Result<ExperimentReport> {
    let started = Instant::now();
    let config = RunConfig::sequential();
    let mut rep = report("star_clique_ratio", Some(&GraphSpec::Star { n }), 0, Some(config.clone()), trials, seed, started);
    for (pool, (name, spec)) in [("star", GraphSpec::Star { n }), ("clique", GraphSpec::Complete { n })].iter().enumerate() {
        let s = pool_seed(seed, pool as u64);
        let graph = generate(spec)?;
        let values = run_trials(&graph, 0, &config, trials, s)?.into_iter().map(|r| r.dispersion_time).collect();
        rep.estimates.insert((*name).into(), estimate(values, s)?);
    }
    let (r, se) = rep.estimates["star"].ratio(&rep.estimates["clique"]);
    rep.values.insert("star_over_clique".into(), r);
    rep.values.insert("star_over_clique_stderr".into(), se);
    rep.verdicts.push(Verdict::new(
        "star_over_clique_in_band",
        r >= band.0 && r <= band.1,
        r,
        2.0,
        format!("band [{}, {}]", band.0, band.1),
    ));
    rep.runtime_secs = started.elapsed().as_secs_f64();
    Ok(rep)
}

/// Sequential dispersion on the clique with a hair from the hair's base,
/// under the first-vacant rule and under the least-action rule that walks
/// `ceil(3 n ln n)` steps unless it finds the hair tip vacant first. Passes
/// when the least-action mean is lower by at least `sigmas` combined
/// standard errors.
pub fn least_action_experiment(n: usize, trials: usize, seed: u64, sigmas: f64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let spec = GraphSpec::CliqueWithHair { n };
    let graph = generate(&spec)?;
    let origin = spec.default_origin();
    let tip = n - 1;
    let rules = [("first_vacant", SettleRule::FirstVacant), ("least_action", SettleRule::least_action(n, tip))];
    let mut rep = report("least_action", Some(&spec), origin, Some(RunConfig::sequential()), trials, seed, started);
    for (pool, (name, rule)) in rules.into_iter().enumerate() {
        let s = pool_seed(seed, pool as u64);
        let config = RunConfig::sequential().with_rule(rule);
        let values = run_trials(&graph, origin, &config, trials, s)?.into_iter().map(|r| r.dispersion_time).collect();
        rep.estimates.insert(name.into(), estimate(values, s)?);
    }
    let (a, b) = (&rep.estimates["first_vacant"], &rep.estimates["least_action"]);
    let gap = a.mean - b.mean;
    let combined = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    rep.values.insert("mean_gap".into(), gap);
    rep.values.insert("combined_stderr".into(), combined);
    rep.verdicts.push(Verdict::new(
        "least_action_faster",
        gap >= sigmas * combined,
        gap,
        sigmas * combined,
        format!("first-vacant mean minus least-action mean against {sigmas} combined stderr"),
    ));
    rep.runtime_secs = started.elapsed().as_secs_f64();
    Ok(rep)
}

/// Sequential dispersion on the clique with a hair from its base: the mean
/// is carried by rare slow runs, so either many runs finish far below the
/// mean or many far above the median.
pub fn non_concentration_experiment(
    n: usize,
    trials: usize,
    seed: u64,
    low_fraction: f64,
    high_fraction: f64,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let spec = GraphSpec::CliqueWithHair { n };
    let graph = generate(&spec)?;
    let config = RunConfig::sequential();
    let origin = spec.default_origin();
    let values: Vec<f64> =
        run_trials(&graph, origin, &config, trials, seed)?.into_iter().map(|r| r.dispersion_time).collect();
    let est = estimate(values.clone(), seed)?;
    let median = est.quantile(0.5).unwrap_or(f64::NAN);
    let low = values.iter().filter(|&&v| v < est.mean / 5.0).count() as f64 / trials as f64;
    let high = values.iter().filter(|&&v| v > 4.0 * median).count() as f64 / trials as f64;
    let mut rep = report("non_concentration", Some(&spec), origin, Some(config), trials, seed, started);
    rep.values.insert("fraction_below_mean_over_5".into(), low);
    rep.values.insert("fraction_above_4_median".into(), high);
    rep.estimates.insert("seq".into(), est);
    rep.verdicts.push(Verdict::new(
        "not_concentrated",
        low >= low_fraction || high >= high_fraction,
        low.max(high),
        low_fraction.min(high_fraction),
        format!("{low:.3} of runs below mean/5, {high:.3} above 4x median"),
    ));
    rep.runtime_secs = started.elapsed().as_secs_f64();
    Ok(rep)
}
