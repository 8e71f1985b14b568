//! Exact Markov-chain quantities for the simple and lazy random walk.
//!
//! The lazy walk stays put with probability exactly 1/2. Self-loops count
//! once towards the degree, so they enter both the transition matrix and the
//! stationary distribution.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate, Graph, Vertex};

/// Largest `n` for which the full hitting table is computed densely.
pub const DENSE_HITTING_CAP: usize = 4096;
/// Largest `n` for exhaustive conductance.
pub const CONDUCTANCE_CAP: usize = 20;
/// Default largest `n` for the dense eigensolve in [`spectral`].
pub const DENSE_SPECTRAL_CAP: usize = 2048;
/// Default step cap for [`mixing_time_exact`].
pub const MIXING_STEP_CAP: u64 = 1_000_000;

const RESIDUAL_TOL: f64 = 1e-10;

/// Expected hitting times for every ordered pair, with the stationary law.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HittingTable {
    n: usize,
    t_hit: Vec<f64>,
    pub pi: Vec<f64>,
    pub lazy: bool,
}

impl HittingTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `t_hit(u, v)`: expected steps for the walk from `u` to reach `v`.
    pub fn get(&self, u: Vertex, v: Vertex) -> f64 {
        self.t_hit[u * self.n + v]
    }

    /// `t_hit(G)`: the maximum over all ordered pairs.
    pub fn max(&self) -> f64 {
        self.t_hit.iter().copied().fold(0.0, f64::max)
    }

    /// `t_hit(pi, v)` for every target `v`.
    pub fn from_stationary(&self, v: Vertex) -> f64 {
        (0..self.n).map(|u| self.pi[u] * self.get(u, v)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub lambda2: f64,
    pub gap: f64,
    pub t_mix: Option<u64>,
    pub phi: Option<f64>,
}

pub fn stationary(graph: &Graph) -> Vec<f64> {
    let total = graph.total_degree() as f64;
    (0..graph.n()).map(|v| graph.degree(v) as f64 / total).collect()
}

/// Dense transition matrix of the simple (or lazy) walk.
pub fn transition_matrix(graph: &Graph, lazy: bool) -> DMatrix<f64> {
    let n = graph.n();
    let mut p = DMatrix::zeros(n, n);
    for u in 0..n {
        let d = graph.degree(u) as f64;
        for &w in graph.neighbors(u) {
            p[(u, w)] += 1.0 / d;
        }
        p[(u, u)] += graph.loops(u) as f64 / d;
    }
    if lazy {
        p = (p + DMatrix::identity(n, n)) * 0.5;
    }
    p
}

fn require_connected(graph: &Graph) -> Result<()> {
    if graph.is_connected() {
        Ok(())
    } else {
        Err(Error::Connectivity("some target is unreachable".into()))
    }
}

/// One step of the walk applied to a row vector of masses.
fn step_distribution(graph: &Graph, lazy: bool, mass: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (u, &m) in mass.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let moving = if lazy { 0.5 * m } else { m };
        if lazy {
            out[u] += 0.5 * m;
        }
        let share = moving / graph.degree(u) as f64;
        for &w in graph.neighbors(u) {
            out[w] += share;
        }
        out[u] += share * graph.loops(u) as f64;
    }
}

/// `(P h)(u)` for a column vector `h`.
fn apply_transition(graph: &Graph, lazy: bool, h: &[f64], u: Vertex) -> f64 {
    let d = graph.degree(u) as f64;
    let mut acc: f64 = graph.neighbors(u).iter().map(|&w| h[w]).sum::<f64>();
    acc += graph.loops(u) as f64 * h[u];
    let walk = acc / d;
    if lazy {
        0.5 * h[u] + 0.5 * walk
    } else {
        walk
    }
}

/// Full hitting-time table.
///
/// Uses one LU factorisation of `I - P + 1 pi^T` (the fundamental matrix
/// `Z`) and `t_hit(u, v) = (Z[v][v] - Z[u][v]) / pi(v)`. Each column is then
/// checked against `h(u) = 1 + sum_w P(u, w) h(w)`, `h(v) = 0`.
pub fn hitting_times_exact(graph: &Graph, lazy: bool) -> Result<HittingTable> {
    require_connected(graph)?;
    let n = graph.n();
    if n > DENSE_HITTING_CAP {
        return Err(Error::Capability(format!("dense hitting table limited to n <= {DENSE_HITTING_CAP}, got {n}")));
    }
    let pi = stationary(graph);
    let p = transition_matrix(graph, lazy);
    let mut a = DMatrix::identity(n, n) - p;
    for u in 0..n {
        for v in 0..n {
            a[(u, v)] += pi[v];
        }
    }
    let z = a
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("fundamental matrix is singular".into()))?;
    let mut t_hit = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            if u != v {
                t_hit[u * n + v] = (z[(v, v)] - z[(u, v)]) / pi[v];
            }
        }
    }
    let table = HittingTable { n, t_hit, pi, lazy };
    check_hitting_residuals(graph, &table)?;
    Ok(table)
}

fn check_hitting_residuals(graph: &Graph, table: &HittingTable) -> Result<()> {
    let n = table.n;
    let mut column = vec![0.0; n];
    for v in 0..n {
        for (u, slot) in column.iter_mut().enumerate() {
            *slot = table.get(u, v);
        }
        let scale = column.iter().copied().fold(1.0, f64::max);
        for u in (0..n).filter(|&u| u != v) {
            let r = column[u] - 1.0 - apply_transition(graph, table.lazy, &column, u);
            if r.abs() > RESIDUAL_TOL * scale {
                return Err(Error::Numerical(format!(
                    "hitting column {v} residual {r:e} at row {u} exceeds tolerance"
                )));
            }
        }
    }
    Ok(())
}

/// Expected hitting times of the set `targets` from every vertex, by a direct
/// solve of the absorbing system `(I - P_TT) h = 1` on `T = V \ targets`.
pub fn hitting_times_to_set(graph: &Graph, targets: &[Vertex], lazy: bool) -> Result<Vec<f64>> {
    let n = graph.n();
    if targets.is_empty() {
        return Err(Error::Domain("target set is empty".into()));
    }
    let mut in_set = vec![false; n];
    for &t in targets {
        if t >= n {
            return Err(Error::Domain(format!("target {t} out of range")));
        }
        in_set[t] = true;
    }
    let free: Vec<Vertex> = (0..n).filter(|&v| !in_set[v]).collect();
    let mut h = vec![0.0; n];
    if free.is_empty() {
        return Ok(h);
    }
    let p = transition_matrix(graph, lazy);
    let m = free.len();
    let mut a = DMatrix::identity(m, m);
    for (r, &u) in free.iter().enumerate() {
        for (c, &w) in free.iter().enumerate() {
            a[(r, c)] -= p[(u, w)];
        }
    }
    let rhs = DVector::from_element(m, 1.0);
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Connectivity("target set unreachable from some vertex".into()))?;
    if sol.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Connectivity("target set unreachable from some vertex".into()));
    }
    for (k, &v) in free.iter().enumerate() {
        h[v] = sol[k];
    }
    Ok(h)
}

/// `t_hit(start, S)`: expected time to hit `S` with the start vertex drawn
/// from `start`.
pub fn hitting_time_set_exact(graph: &Graph, start: &[f64], set: &[Vertex], lazy: bool) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Domain("target set is empty".into()));
    }
    if start.len() != graph.n() {
        return Err(Error::Domain("start distribution has the wrong length".into()));
    }
    let total: f64 = start.iter().sum();
    if start.iter().any(|&x| x < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain("start is not a probability distribution".into()));
    }
    let h = hitting_times_to_set(graph, set, lazy)?;
    Ok(start.iter().zip(&h).map(|(s, x)| s * x).sum())
}

/// Point mass at `v`.
pub fn point_mass(n: usize, v: Vertex) -> Vec<f64> {
    let mut d = vec![0.0; n];
    d[v] = 1.0;
    d
}

/// Effective resistance between `u` and `v` with unit conductance per edge,
/// from the grounded Laplacian `L_{-v} phi = e_u`. Self-loops carry no
/// current and are ignored.
pub fn effective_resistance(graph: &Graph, u: Vertex, v: Vertex) -> Result<f64> {
    if u == v {
        return Err(Error::Domain("resistance needs two distinct vertices".into()));
    }
    require_connected(graph)?;
    let n = graph.n();
    let keep: Vec<Vertex> = (0..n).filter(|&x| x != v).collect();
    let mut index = vec![usize::MAX; n];
    for (k, &x) in keep.iter().enumerate() {
        index[x] = k;
    }
    let m = keep.len();
    let mut lap = DMatrix::zeros(m, m);
    for (r, &x) in keep.iter().enumerate() {
        lap[(r, r)] = graph.neighbors(x).len() as f64;
        for &w in graph.neighbors(x) {
            if w != v {
                lap[(r, index[w])] -= 1.0;
            }
        }
    }
    let mut rhs = DVector::zeros(m);
    rhs[index[u]] = 1.0;
    let phi = lap
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("grounded Laplacian is singular".into()))?;
    Ok(phi[index[u]])
}

/// Commute time `t_hit(u,v) + t_hit(v,u)` and the resistance implied by the
/// commute-time identity `t_com = (sum of degrees) * R`.
pub fn commute_and_resistance(graph: &Graph, u: Vertex, v: Vertex) -> Result<(f64, f64)> {
    if u == v {
        return Err(Error::Domain("commute time needs two distinct vertices".into()));
    }
    require_connected(graph)?;
    let to_v = hitting_times_to_set(graph, &[v], false)?;
    let to_u = hitting_times_to_set(graph, &[u], false)?;
    let t_com = to_v[u] + to_u[v];
    Ok((t_com, t_com / graph.total_degree() as f64))
}

/// Probability that the simple walk from `r` visits `u` before returning to
/// `r`, solved from the harmonic function that is 1 at `u` and 0 at `r`.
pub fn hit_before_return(graph: &Graph, r: Vertex, u: Vertex) -> Result<f64> {
    if r == u {
        return Err(Error::Domain("root and target must differ".into()));
    }
    require_connected(graph)?;
    let n = graph.n();
    let free: Vec<Vertex> = (0..n).filter(|&x| x != r && x != u).collect();
    let mut index = vec![usize::MAX; n];
    for (k, &x) in free.iter().enumerate() {
        index[x] = k;
    }
    let p = transition_matrix(graph, false);
    let m = free.len();
    let mut harmonic = vec![0.0; n];
    harmonic[u] = 1.0;
    if m > 0 {
        let mut a = DMatrix::identity(m, m);
        let mut rhs = DVector::zeros(m);
        for (row, &x) in free.iter().enumerate() {
            for (col, &y) in free.iter().enumerate() {
                a[(row, col)] -= p[(x, y)];
            }
            rhs[row] = p[(x, u)];
        }
        let sol = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("escape system is singular".into()))?;
        for (k, &x) in free.iter().enumerate() {
            harmonic[x] = sol[k];
        }
    }
    Ok((0..n).map(|w| p[(r, w)] * harmonic[w]).sum())
}

/// Options for [`spectral_with`].
#[derive(Clone, Copy, Debug)]
pub struct SpectralOptions {
    pub dense_cap: usize,
    pub iterative_fallback: bool,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { dense_cap: DENSE_SPECTRAL_CAP, iterative_fallback: false }
    }
}

pub fn spectral(graph: &Graph, lazy: bool) -> Result<SpectralSummary> {
    spectral_with(graph, lazy, SpectralOptions::default())
}

/// Second-largest eigenvalue magnitude of the (lazy) transition matrix.
///
/// `P` is similar to the symmetric `D^{1/2} P D^{-1/2}`, which is what gets
/// diagonalised; the top eigenvector of that matrix is `sqrt(pi)`.
pub fn spectral_with(graph: &Graph, lazy: bool, opts: SpectralOptions) -> Result<SpectralSummary> {
    require_connected(graph)?;
    let n = graph.n();
    if n == 1 {
        return Ok(SpectralSummary { lambda2: 0.0, gap: 1.0, t_mix: None, phi: None });
    }
    let sym = symmetrised(graph, lazy);
    let lambda2 = if n <= opts.dense_cap {
        let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        eig[1..].iter().map(|x| x.abs()).fold(0.0, f64::max)
    } else if opts.iterative_fallback {
        deflated_power_iteration(graph, &sym)?
    } else {
        return Err(Error::Capability(format!(
            "dense eigensolve limited to n <= {}, got {n}; enable the iterative fallback",
            opts.dense_cap
        )));
    };
    let lambda2 = lambda2.min(1.0);
    Ok(SpectralSummary { lambda2, gap: 1.0 - lambda2, t_mix: None, phi: None })
}

fn symmetrised(graph: &Graph, lazy: bool) -> DMatrix<f64> {
    let n = graph.n();
    let mut s = DMatrix::zeros(n, n);
    for u in 0..n {
        let du = graph.degree(u) as f64;
        for &w in graph.neighbors(u) {
            s[(u, w)] = 1.0 / (du * graph.degree(w) as f64).sqrt();
        }
        s[(u, u)] = graph.loops(u) as f64 / du;
    }
    if lazy {
        s = (s + DMatrix::identity(n, n)) * 0.5;
    }
    s
}

fn deflated_power_iteration(graph: &Graph, sym: &DMatrix<f64>) -> Result<f64> {
    let n = graph.n();
    let top = DVector::from_iterator(n, stationary(graph).into_iter().map(f64::sqrt));
    let mut x = DVector::from_iterator(n, (0..n).map(|i| ((i * 7919 % 104_729) as f64 / 104_729.0) - 0.5));
    let mut estimate = 0.0;
    const MAX_ITERS: u64 = 200_000;
    for _ in 0..MAX_ITERS {
        x -= &top * top.dot(&x);
        let norm = x.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        x /= norm;
        let y = sym * &x;
        let next = y.norm();
        x = y;
        if (next - estimate).abs() < 1e-12 {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NonConvergence { steps: MAX_ITERS })
}

/// Smallest `t` such that the worst-case total-variation distance of the
/// `t`-step law from `pi` is at most `eps`.
pub fn mixing_time_exact(graph: &Graph, eps: f64, lazy: bool) -> Result<u64> {
    mixing_time_with_cap(graph, eps, lazy, MIXING_STEP_CAP)
}

pub fn mixing_time_with_cap(graph: &Graph, eps: f64, lazy: bool, cap: u64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    require_connected(graph)?;
    let n = graph.n();
    if n == 1 {
        return Ok(0);
    }
    // A periodic chain never gets closer than 1/2 to stationarity.
    if !lazy && eps < 0.5 && validate(graph).is_bipartite {
        return Err(Error::NonConvergence { steps: 0 });
    }
    let pi = stationary(graph);
    let mut dists: Vec<Vec<f64>> = (0..n).map(|v| point_mass(n, v)).collect();
    let mut scratch = vec![0.0; n];
    let tv = |d: &[f64]| 0.5 * d.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let mut t = 0;
    loop {
        if dists.iter().map(|d| tv(d)).fold(0.0, f64::max) <= eps {
            return Ok(t);
        }
        if t >= cap {
            return Err(Error::NonConvergence { steps: t });
        }
        for d in &mut dists {
            step_distribution(graph, lazy, d, &mut scratch);
            d.copy_from_slice(&scratch);
        }
        t += 1;
    }
}

/// Exact conductance of the lazy walk: the minimum over nonempty `S` with
/// `pi(S) <= 1/2` of `Q(S, S^c) / pi(S)`.
pub fn conductance_exact(graph: &Graph) -> Result<f64> {
    let n = graph.n();
    if n > CONDUCTANCE_CAP {
        return Err(Error::Capability(format!(
            "exhaustive conductance limited to n <= {CONDUCTANCE_CAP}, got {n}; use the spectral gap with Cheeger's inequality instead"
        )));
    }
    if n < 2 {
        return Err(Error::Domain("conductance needs at least two vertices".into()));
    }
    let total = graph.total_degree() as f64;
    let edges: Vec<(Vertex, Vertex)> = graph.edges().collect();
    let degree: Vec<f64> = (0..n).map(|v| graph.degree(v) as f64).collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << n) - 1 {
        let volume: f64 = (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| degree[v]).sum();
        if volume / total > 0.5 + 1e-12 {
            continue;
        }
        let crossing = edges.iter().filter(|&&(a, b)| (mask >> a & 1) != (mask >> b & 1)).count() as f64;
        // Each crossing edge carries pi(x) * P_lazy(x, y) = 1 / (2 * total).
        best = best.min(crossing / (2.0 * volume));
    }
    Ok(best)
}
