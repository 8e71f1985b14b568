//! Computable dispersion-time bounds and closed-form oracles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate, Graph};
use crate::walk::{hitting_times_exact, hitting_times_to_set, mixing_time_exact, spectral, stationary};

/// Largest graph for which set-hitting terms are maximised over every subset.
pub const EXHAUSTIVE_CAP: usize = 14;

/// Mixing threshold used throughout.
pub const MIX_EPS: f64 = 0.25;

/// `5 / (1 - e^-1)`.
pub fn set_hitting_constant() -> f64 {
    5.0 / (1.0 - (-1.0f64).exp())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMode {
    /// Maximise `t_hit(pi, S)` over all subsets by exact solves.
    #[default]
    ExactSubsets,
    /// Replace `t_hit(pi, S)` by the spectral set-hitting estimate.
    SpectralEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBounds {
    /// `2|E| / Delta`.
    pub degree: f64,
    /// `2n - 3`, trees only.
    pub tree: Option<f64>,
    /// Lazy `t_mix(1/4)`.
    pub mixing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub basic_upper: f64,
    pub refined_parallel_upper: f64,
    pub refined_sequential_upper: f64,
    pub lower_degree: f64,
    pub lower_tree: Option<f64>,
    pub lower_mixing: f64,
    pub mode: BoundsMode,
    /// Lazy `t_mix(1/4)` entering the refined bounds.
    pub t_mix: f64,
    /// `M_j`, the set-hitting term for `j = 1..=ceil(log2 n)`.
    pub set_hitting_terms: Vec<f64>,
}

fn ceil_log2(n: usize) -> u32 {
    usize::BITS - (n.max(1) - 1).leading_zeros()
}

/// `6 * t_hit(G) * log2 n` with the simple walk's worst-pair hitting time.
pub fn basic_upper(graph: &Graph) -> Result<f64> {
    let n = graph.n();
    if n < 2 {
        return Err(Error::Domain("bounds need at least two vertices".into()));
    }
    let table = hitting_times_exact(graph, false)?;
    Ok(6.0 * table.max() * (n as f64).log2())
}

/// Smallest set size entering term `j`: `ceil(2^(j-2))`, at least 1.
fn size_threshold(j: u32) -> usize {
    if j < 2 {
        1
    } else {
        1usize << (j - 2)
    }
}

/// `max_{|S| = s} t_hit(pi, S)` for the lazy walk, for each `s` in `0..=n`
/// (entry 0 unused).
pub fn max_set_hitting_by_size(graph: &Graph) -> Result<Vec<f64>> {
    let n = graph.n();
    if n > EXHAUSTIVE_CAP {
        return Err(Error::Capability(format!(
            "exhaustive subset search limited to n <= {EXHAUSTIVE_CAP}, got {n}; use the spectral mode"
        )));
    }
    let pi = stationary(graph);
    let values: Vec<(usize, f64)> = (1u32..1 << n)
        .into_par_iter()
        .map(|mask| {
            let set: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            let h = hitting_times_to_set(graph, &set, true)?;
            Ok((set.len(), pi.iter().zip(&h).map(|(p, x)| p * x).sum()))
        })
        .collect::<Result<_>>()?;
    let mut best = vec![0.0f64; n + 1];
    for (size, value) in values {
        best[size] = best[size].max(value);
    }
    Ok(best)
}

/// Spectral-branch set-hitting estimate
/// `5/(1-e^-1) * n (1 + ceil(ln s)) / ((1 - lambda2) s)`.
pub fn set_hitting_estimate(n: usize, lambda2: f64, s: usize) -> Result<f64> {
    set_hitting_estimate_with_base(n, lambda2, s, std::f64::consts::E)
}

/// As [`set_hitting_estimate`] with `ceil(log_base s)`.
pub fn set_hitting_estimate_with_base(n: usize, lambda2: f64, s: usize, base: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda2) {
        return Err(Error::Domain(format!("lambda2 must lie in [0, 1), got {lambda2}")));
    }
    if s == 0 || s > n {
        return Err(Error::Domain(format!("set size {s} must lie in 1..={n}")));
    }
    let log = ((s as f64).ln() / base.ln() - 1e-12).ceil().max(0.0);
    Ok(set_hitting_constant() * n as f64 * (1.0 + log) / ((1.0 - lambda2) * s as f64))
}

/// Polynomial-decay branch `5/(1-e^-1) * (c + 2) n / s^(eps/(1+eps))`.
pub fn set_hitting_estimate_poly(n: usize, s: usize, c: f64, eps: f64) -> Result<f64> {
    if s == 0 || s > n {
        return Err(Error::Domain(format!("set size {s} must lie in 1..={n}")));
    }
    if !(eps > 0.0 && c >= 0.0) {
        return Err(Error::Domain("need c >= 0 and eps > 0".into()));
    }
    Ok(set_hitting_constant() * (c + 2.0) * n as f64 / (s as f64).powf(eps / (1.0 + eps)))
}

fn lazy_mixing(graph: &Graph) -> Result<f64> {
    Ok(mixing_time_exact(graph, MIX_EPS, true)? as f64)
}

/// `M_j` for `j = 1..=ceil(log2 n)`: the largest lazy `t_hit(pi, S)` over
/// sets with `|S| >= ceil(2^(j-2))`, exact or estimated.
pub fn set_hitting_terms(graph: &Graph, mode: BoundsMode) -> Result<Vec<f64>> {
    let n = graph.n();
    if n < 2 {
        return Err(Error::Domain("bounds need at least two vertices".into()));
    }
    let levels = ceil_log2(n);
    let by_size: Vec<f64> = match mode {
        BoundsMode::ExactSubsets => max_set_hitting_by_size(graph)?,
        BoundsMode::SpectralEstimate => {
            if !validate(graph).is_regular {
                return Err(Error::Capability("the spectral estimate needs a regular graph".into()));
            }
            let lambda2 = spectral(graph, true)?.lambda2;
            let mut v = vec![0.0];
            for s in 1..=n {
                v.push(set_hitting_estimate(n, lambda2, s)?);
            }
            v
        }
    };
    Ok((1..=levels)
        .map(|j| by_size[size_threshold(j).min(n)..].iter().copied().fold(0.0, f64::max))
        .collect())
}

fn refined(t_mix: f64, terms: &[f64]) -> (f64, f64) {
    let parallel = 60.0 * terms.iter().map(|m| t_mix + m).sum::<f64>();
    let sequential = 30.0
        * terms
            .iter()
            .enumerate()
            .map(|(j, m)| (j + 1) as f64 * (t_mix + m))
            .fold(0.0, f64::max);
    (parallel, sequential)
}

/// `60 * sum_j (t_mix + M_j)` with lazy-walk quantities.
pub fn refined_parallel_upper(graph: &Graph, mode: BoundsMode) -> Result<f64> {
    let terms = set_hitting_terms(graph, mode)?;
    Ok(refined(lazy_mixing(graph)?, &terms).0)
}

/// `30 * max_j j (t_mix + M_j)` with lazy-walk quantities.
pub fn refined_sequential_upper(graph: &Graph, mode: BoundsMode) -> Result<f64> {
    let terms = set_hitting_terms(graph, mode)?;
    Ok(refined(lazy_mixing(graph)?, &terms).1)
}

pub fn lower_bounds(graph: &Graph) -> Result<LowerBounds> {
    let n = graph.n();
    if n < 2 {
        return Err(Error::Domain("bounds need at least two vertices".into()));
    }
    let diag = validate(graph);
    let max_degree = (0..n).map(|v| graph.degree(v)).max().unwrap_or(1) as f64;
    Ok(LowerBounds {
        degree: 2.0 * graph.edge_count() as f64 / max_degree,
        tree: diag.is_tree.then_some(2.0 * n as f64 - 3.0),
        mixing: lazy_mixing(graph)?,
    })
}

/// Every bound for `graph` in one report.
pub fn bounds_report(graph: &Graph, mode: BoundsMode) -> Result<BoundsReport> {
    let terms = set_hitting_terms(graph, mode)?;
    let lower = lower_bounds(graph)?;
    let (parallel, sequential) = refined(lower.mixing, &terms);
    Ok(BoundsReport {
        n: graph.n(),
        basic_upper: basic_upper(graph)?,
        refined_parallel_upper: parallel,
        refined_sequential_upper: sequential,
        lower_degree: lower.degree,
        lower_tree: lower.tree,
        lower_mixing: lower.mixing,
        mode,
        t_mix: lower.mixing,
        set_hitting_terms: terms,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaPartial {
    pub terms: u64,
    /// `sum_{i <= terms} (2/(i(3i-1)) - 2/(i(3i+1)))`.
    pub partial: f64,
    /// Upper bound `1/(4 terms^2)` on the remaining terms
    /// `sum_{i > terms} 4/(i(9i^2 - 1))`.
    pub tail_bound: f64,
}

/// Partial sums of the series `sum_i 2/(i(3i-1)) - 2/(i(3i+1))`.
pub fn kappa_cc_partial(terms: u64) -> Result<KappaPartial> {
    if terms == 0 {
        return Err(Error::Domain("need at least one term".into()));
    }
    // Summed smallest-first; each term is 4/(i(9i^2-1)).
    let partial = (1..=terms)
        .rev()
        .map(|i| {
            let i = i as f64;
            4.0 / (i * (9.0 * i * i - 1.0))
        })
        .sum();
    let t = terms as f64;
    Ok(KappaPartial { terms, partial, tail_bound: 1.0 / (4.0 * t * t) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliqueOracles {
    /// Mean of the maximum of independent geometrics with success
    /// probabilities `i/n`, `i = 1..=n`.
    pub seq_expectation: f64,
    /// `(n - 1) * sum_{k=1}^{n-1} k^-2`.
    pub ctu_expectation: f64,
}

pub fn clique_oracles(n: usize) -> Result<CliqueOracles> {
    if n == 0 {
        return Err(Error::Domain("need n >= 1".into()));
    }
    let nf = n as f64;
    let ctu_expectation = (nf - 1.0) * (1..n).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum::<f64>();
    // E[max] = sum_{t >= 0} P(max > t) = sum_t 1 - prod_i (1 - q_i^t), q_i = 1 - i/n.
    let log_q: Vec<f64> = (1..n).map(|i| (1.0 - i as f64 / nf).ln()).collect();
    let mut seq_expectation = 1.0;
    let mut t = 1u64;
    loop {
        let log_prod: f64 = log_q.iter().map(|lq| (-(lq * t as f64).exp()).ln_1p()).sum();
        let summand = -log_prod.exp_m1();
        if summand < 1e-9 {
            break;
        }
        seq_expectation += summand;
        t += 1;
    }
    Ok(CliqueOracles { seq_expectation, ctu_expectation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphSpec};

    fn g(spec: GraphSpec) -> Graph {
        generate(&spec).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn basic_upper_examples() {
        assert!(close(basic_upper(&g(GraphSpec::Path { n: 2 })).unwrap(), 6.0, 1e-9));
        assert!(close(basic_upper(&g(GraphSpec::Cycle { n: 4 })).unwrap(), 48.0, 1e-9));
        let k5 = basic_upper(&g(GraphSpec::Complete { n: 5 })).unwrap();
        assert!(close(k5, 24.0 * 5f64.log2(), 1e-9), "{k5}");
    }

    #[test]
    fn set_hitting_estimate_examples() {
        let c = set_hitting_constant();
        assert!(close(set_hitting_estimate(8, 0.5, 2).unwrap(), c * 16.0, 1e-12));
        assert!((set_hitting_estimate(8, 0.5, 2).unwrap() - 126.6).abs() < 0.05);
        assert!(close(set_hitting_estimate(1, 0.0, 1).unwrap(), 7.91, 1e-3));
        // ceil(ln 8) = ceil(ln 16) = 3.
        let eight = set_hitting_estimate(20, 0.3, 8).unwrap();
        assert!(close(set_hitting_estimate(20, 0.3, 16).unwrap(), eight / 2.0, 1e-12));
        assert!(set_hitting_estimate(8, 1.0, 2).is_err());
        assert!(set_hitting_estimate(8, 0.5, 9).is_err());
        assert!(close(set_hitting_estimate_with_base(8, 0.5, 4, 2.0).unwrap(), c * 8.0 * 3.0 / 2.0, 1e-12));
        assert!(close(set_hitting_estimate_poly(8, 1, 1.0, 1.0).unwrap(), c * 24.0, 1e-12));
    }

    #[test]
    fn two_vertex_instantiation() {
        let p2 = g(GraphSpec::Path { n: 2 });
        let t_mix = mixing_time_exact(&p2, MIX_EPS, true).unwrap() as f64;
        // Lazy walk on one edge: from pi, half the time one is already in {v};
        // otherwise the wait is Geometric(1/2), mean 2.
        let terms = set_hitting_terms(&p2, BoundsMode::ExactSubsets).unwrap();
        assert_eq!(terms.len(), 1);
        assert!(close(terms[0], 1.0, 1e-9));
        assert!(close(refined_parallel_upper(&p2, BoundsMode::ExactSubsets).unwrap(), 60.0 * (t_mix + 1.0), 1e-9));
        assert!(close(refined_sequential_upper(&p2, BoundsMode::ExactSubsets).unwrap(), 30.0 * (t_mix + 1.0), 1e-9));
    }

    #[test]
    fn sequential_bound_is_at_most_half_the_parallel_one() {
        for spec in [
            GraphSpec::Complete { n: 4 },
            GraphSpec::Cycle { n: 8 },
            GraphSpec::Star { n: 6 },
            GraphSpec::BinaryTree { n: 7 },
            GraphSpec::Lollipop { n: 10 },
        ] {
            let r = bounds_report(&g(spec), BoundsMode::ExactSubsets).unwrap();
            assert!(r.refined_sequential_upper <= r.refined_parallel_upper / 2.0 + 1e-9, "{r:?}");
            assert!(r.basic_upper > 0.0 && r.lower_degree > 0.0);
        }
    }

    #[test]
    fn cycle_refined_bound_within_remark() {
        let c8 = g(GraphSpec::Cycle { n: 8 });
        let v = refined_parallel_upper(&c8, BoundsMode::ExactSubsets).unwrap();
        let t_hit = hitting_times_exact(&c8, true).unwrap().max();
        assert!(v <= 120.0 * 3.0 * t_hit, "{v} vs {t_hit}");
    }

    #[test]
    fn exact_terms_agree_with_single_target_table() {
        let c6 = g(GraphSpec::Cycle { n: 6 });
        let by_size = max_set_hitting_by_size(&c6).unwrap();
        let table = hitting_times_exact(&c6, true).unwrap();
        assert!(close(by_size[1], table.from_stationary(0), 1e-9));
        assert!(by_size[1..].windows(2).all(|w| w[0] >= w[1] - 1e-12));
        assert!(close(by_size[6], 0.0, 1e-12));
    }

    #[test]
    fn spectral_mode_needs_regularity() {
        let star = g(GraphSpec::Star { n: 5 });
        assert!(matches!(refined_parallel_upper(&star, BoundsMode::SpectralEstimate), Err(Error::Capability(_))));
        let c = g(GraphSpec::Cycle { n: 16 });
        let r = bounds_report(&c, BoundsMode::SpectralEstimate).unwrap();
        assert!(r.refined_sequential_upper <= r.refined_parallel_upper / 2.0);
        assert!(matches!(max_set_hitting_by_size(&g(GraphSpec::Cycle { n: 15 })), Err(Error::Capability(_))));
    }

    #[test]
    fn lower_bound_examples() {
        let tree = lower_bounds(&g(GraphSpec::BinaryTree { n: 7 })).unwrap();
        assert_eq!(tree.tree, Some(11.0));
        let c10 = lower_bounds(&g(GraphSpec::Cycle { n: 10 })).unwrap();
        assert_eq!((c10.degree, c10.tree), (10.0, None));
        let s5 = lower_bounds(&g(GraphSpec::Star { n: 5 })).unwrap();
        assert_eq!((s5.degree, s5.tree), (2.0, Some(7.0)));
        assert!(s5.mixing > 0.0);
    }

    #[test]
    fn kappa_partial_sums() {
        assert!(close(kappa_cc_partial(1).unwrap().partial, 0.5, 1e-15));
        let two = kappa_cc_partial(2).unwrap().partial;
        assert!(close(two, 0.5 + 2.0 / 10.0 - 2.0 / 14.0, 1e-15));
        assert!((two - 0.5571).abs() < 1e-4);
        let mut last = 0.0;
        for t in [1, 2, 5, 10, 100, 1000] {
            let k = kappa_cc_partial(t).unwrap();
            assert!(k.partial > last);
            last = k.partial;
            let far = kappa_cc_partial(1_000_000).unwrap().partial;
            assert!(far <= k.partial + k.tail_bound);
        }
        // The printed series settles near 0.59.
        assert!((last - 0.5917).abs() < 1e-3, "{last}");
        assert!(kappa_cc_partial(0).is_err());
    }

    #[test]
    fn clique_oracle_examples() {
        let one = clique_oracles(1).unwrap();
        assert!(close(one.seq_expectation, 1.0, 1e-9));
        assert_eq!(one.ctu_expectation, 0.0);
        let two = clique_oracles(2).unwrap();
        assert!((two.seq_expectation - 2.0).abs() < 1e-6);
        assert!(close(two.ctu_expectation, 1.0, 1e-12));
        let big = clique_oracles(1000).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((big.ctu_expectation / 1000.0 - zeta2).abs() < 0.01);
        // Geometric(1/2) and Geometric(1) and Geometric(2/3) by inclusion-exclusion:
        // E[max(G(1/3), G(2/3))] = 3 + 3/2 - 1/(1 - 2/9) = 4.5 - 9/7.
        let three = clique_oracles(3).unwrap();
        assert!((three.seq_expectation - (4.5 - 9.0 / 7.0)).abs() < 1e-6);
    }

    #[test]
    fn clique_oracle_per_vertex_stabilises() {
        let ratios: Vec<f64> =
            [10, 50, 200, 1000].iter().map(|&n| clique_oracles(n).unwrap().seq_expectation / n as f64).collect();
        assert!(ratios.windows(2).all(|w| w[1] > w[0]));
        assert!(ratios[3] - ratios[2] < 0.05);
    }
}
