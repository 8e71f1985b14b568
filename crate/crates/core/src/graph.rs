//! Finite undirected graphs and the generators for every family the
//! dispersion experiments use.
//!
//! Vertices are `0..n`. Families with a distinguished vertex fix its label:
//!
//! | family                 | fixed labels                                         |
//! |------------------------|------------------------------------------------------|
//! | `star`                 | centre `0`                                           |
//! | `binary_tree`          | root `0`, children of `i` are `2i+1`, `2i+2`          |
//! | `lollipop`             | clique vertex carrying the bridge `0`, path `c..n`    |
//! | `clique_with_hair`     | hair base `0`, hair tip `n-1`                        |
//! | `clique_hair_on_pimple`| hair base `0`, hair tip `1`                          |
//! | `tree_with_path`       | tree root `0`, far end of the path `n+len-1`          |
//! | `grid`                 | centre of the box at index `(side^d - 1) / 2`         |

use std::collections::VecDeque;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub type Vertex = usize;

/// Retry budget for `gnp` before giving up on connectivity.
pub const GNP_MAX_RETRIES: u32 = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<Vertex>>,
    loops: Vec<u32>,
}

impl Graph {
    /// Builds a graph from an edge list. An entry `(u, u)` adds one self-loop
    /// at `u`; any other edge may appear at most once (in either direction).
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("graph needs at least one vertex".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut loops = vec![0u32; n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Parameter(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                loops[u] += 1;
            } else {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        for (v, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Parameter(format!("duplicate edge ({v}, {})", w[0])));
            }
        }
        Ok(Self { n, adjacency, loops })
    }

    fn from_adjacency_unchecked(adjacency: Vec<Vec<Vertex>>) -> Self {
        let n = adjacency.len();
        let mut adjacency = adjacency;
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        Self { n, adjacency, loops: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    pub fn loops(&self, v: Vertex) -> u32 {
        self.loops[v]
    }

    /// Degree counting each self-loop once.
    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len() + self.loops[v] as usize
    }

    /// Sum of degrees; equals `2|E|` plus the number of loops.
    pub fn total_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum()
    }

    /// Number of non-loop edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn loop_count(&self) -> usize {
        self.loops.iter().map(|&l| l as usize).sum()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        if u == v {
            self.loops[u] > 0
        } else {
            self.adjacency[u].binary_search(&v).is_ok()
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// The loop-augmented graph on which the simple walk is the lazy walk of
    /// `self`: every vertex gets as many self-loops as its degree.
    pub fn with_lazy_loops(&self) -> Self {
        let mut g = self.clone();
        for v in 0..self.n {
            g.loops[v] += self.degree(v) as u32;
        }
        g
    }

    /// Breadth-first distances from `source`; unreachable vertices are `None`.
    pub fn distances_from(&self, source: Vertex) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(0).iter().all(Option::is_some)
    }

    /// Writes the edge-list text format accepted by [`Graph::parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        for v in 0..self.n {
            for _ in 0..self.loops[v] {
                out.push_str(&format!("{v} {v}\n"));
            }
        }
        out
    }

    /// Parses the edge-list format: first line `n`, then one `u v` pair per
    /// line (0-based). Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing vertex count".into() })?;
        let n: usize = first
            .parse()
            .map_err(|_| Error::Parse { line, msg: format!("expected vertex count, got {first:?}") })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let mut it = l.split_whitespace();
            let mut next = || -> Result<Vertex> {
                let tok = it.next().ok_or(Error::Parse { line, msg: "expected `u v`".into() })?;
                tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad vertex {tok:?}") })
            };
            let u = next()?;
            let v = next()?;
            if it.next().is_some() {
                return Err(Error::Parse { line, msg: "trailing tokens".into() });
            }
            edges.push((u, v));
        }
        Self::from_edges(n, &edges)
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }
}

/// Structural summary of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub connected: bool,
    pub max_degree: usize,
    pub min_degree: usize,
    pub edge_count: usize,
    pub is_tree: bool,
    pub is_regular: bool,
    pub is_bipartite: bool,
}

pub fn validate(graph: &Graph) -> Diagnostics {
    let degrees: Vec<usize> = (0..graph.n()).map(|v| graph.degree(v)).collect();
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let min_degree = degrees.iter().copied().min().unwrap_or(0);
    let connected = graph.is_connected();
    let edge_count = graph.edge_count();
    Diagnostics {
        connected,
        max_degree,
        min_degree,
        edge_count,
        is_tree: connected && graph.loop_count() == 0 && edge_count + 1 == graph.n(),
        is_regular: max_degree == min_degree,
        is_bipartite: is_bipartite(graph),
    }
}

fn is_bipartite(graph: &Graph) -> bool {
    if graph.loop_count() > 0 {
        return false;
    }
    let mut colour: Vec<Option<bool>> = vec![None; graph.n()];
    for start in 0..graph.n() {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let cu = colour[u].unwrap_or(false);
            for &w in graph.neighbors(u) {
                match colour[w] {
                    None => {
                        colour[w] = Some(!cu);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == cu => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

/// A named graph family with its parameters.
///
/// Text form (used by the CLI) is `family:param:param…`, e.g. `cycle:16`,
/// `torus:2:8`, `gnp:100:0.1:7`, `custom:edges.txt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphSpec {
    Complete { n: usize },
    Path { n: usize },
    Cycle { n: usize },
    Star { n: usize },
    /// Complete binary tree, `n = 2^k - 1`.
    BinaryTree { n: usize },
    /// Hypercube on `n = 2^k` vertices.
    Hypercube { n: usize },
    Torus { dim: usize, side: usize },
    /// The box `[-r, r]^dim` of the integer lattice with `side = 2r + 1`
    /// (any `side >= 1` is accepted), nearest-neighbour edges only.
    Grid { dim: usize, side: usize },
    /// Clique on `ceil(n/2)` vertices joined by one edge to a path on the rest.
    Lollipop { n: usize },
    /// `K_{n-1}` with one pendant vertex.
    CliqueWithHair { n: usize },
    /// `K_{n-2}` plus a vertex `v` joined to `h - 1` clique vertices and a
    /// pendant `v*` hanging off `v`.
    CliqueHairOnPimple { n: usize, h: usize },
    /// Complete binary tree on `n = 2^k - 1` nodes with a path of
    /// `ceil(n^(1/2 - eps))` extra vertices hanging from the root.
    TreeWithPath { n: usize, eps: f64 },
    Gnp { n: usize, p: f64, seed: u64 },
    Custom { path: PathBuf },
}

impl GraphSpec {
    pub fn family(&self) -> &'static str {
        match self {
            GraphSpec::Complete { .. } => "complete",
            GraphSpec::Path { .. } => "path",
            GraphSpec::Cycle { .. } => "cycle",
            GraphSpec::Star { .. } => "star",
            GraphSpec::BinaryTree { .. } => "binary_tree",
            GraphSpec::Hypercube { .. } => "hypercube",
            GraphSpec::Torus { .. } => "torus",
            GraphSpec::Grid { .. } => "grid",
            GraphSpec::Lollipop { .. } => "lollipop",
            GraphSpec::CliqueWithHair { .. } => "clique_with_hair",
            GraphSpec::CliqueHairOnPimple { .. } => "clique_hair_on_pimple",
            GraphSpec::TreeWithPath { .. } => "tree_with_path",
            GraphSpec::Gnp { .. } => "gnp",
            GraphSpec::Custom { .. } => "custom",
        }
    }

    /// Builds the same family at a different size, where the family is
    /// parameterised by a single size. Used by the table sweeps.
    pub fn with_size(family: &str, n: usize, seed: u64) -> Result<Self> {
        Ok(match family {
            "complete" | "clique" => GraphSpec::Complete { n },
            "path" => GraphSpec::Path { n },
            "cycle" => GraphSpec::Cycle { n },
            "star" => GraphSpec::Star { n },
            "binary_tree" | "tree" => GraphSpec::BinaryTree { n },
            "hypercube" => GraphSpec::Hypercube { n },
            "lollipop" => GraphSpec::Lollipop { n },
            "clique_with_hair" => GraphSpec::CliqueWithHair { n },
            "torus2" | "grid2" => {
                let side = (n as f64).sqrt().round() as usize;
                if side * side != n {
                    return Err(Error::Parameter(format!("{family} size {n} is not a perfect square")));
                }
                if family == "torus2" {
                    GraphSpec::Torus { dim: 2, side }
                } else {
                    GraphSpec::Grid { dim: 2, side }
                }
            }
            "expander" | "gnp" => GraphSpec::Gnp { n, p: expander_p(n), seed },
            other => return Err(Error::Parameter(format!("family {other:?} has no single size parameter"))),
        })
    }

    /// The documented origin used when none is given: the vertex the
    /// corresponding results are stated for (tree root, hair base, star
    /// centre, clique side of the lollipop, grid centre), otherwise `0`.
    pub fn default_origin(&self) -> Vertex {
        match self {
            GraphSpec::Grid { dim, side } => (side.pow(*dim as u32) - 1) / 2,
            _ => 0,
        }
    }
}

/// Edge probability used for the `expander` family: `4 ln n / n`, capped at 1.
pub fn expander_p(n: usize) -> f64 {
    if n < 2 {
        return 1.0;
    }
    (4.0 * (n as f64).ln() / n as f64).min(1.0)
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Complete { n }
            | GraphSpec::Path { n }
            | GraphSpec::Cycle { n }
            | GraphSpec::Star { n }
            | GraphSpec::BinaryTree { n }
            | GraphSpec::Hypercube { n }
            | GraphSpec::Lollipop { n }
            | GraphSpec::CliqueWithHair { n } => write!(f, "{}:{n}", self.family()),
            GraphSpec::Torus { dim, side } | GraphSpec::Grid { dim, side } => {
                write!(f, "{}:{dim}:{side}", self.family())
            }
            GraphSpec::CliqueHairOnPimple { n, h } => write!(f, "{}:{n}:{h}", self.family()),
            GraphSpec::TreeWithPath { n, eps } => write!(f, "{}:{n}:{eps}", self.family()),
            GraphSpec::Gnp { n, p, seed } => write!(f, "gnp:{n}:{p}:{seed}"),
            GraphSpec::Custom { path } => write!(f, "custom:{}", path.display()),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        if family == "custom" {
            return Ok(GraphSpec::Custom { path: PathBuf::from(rest) });
        }
        let params: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
        let bad = |what: &str| Error::Parameter(format!("graph spec {s:?}: {what}"));
        let int = |i: usize| -> Result<usize> {
            params
                .get(i)
                .ok_or_else(|| bad("missing parameter"))?
                .parse()
                .map_err(|_| bad("expected an integer parameter"))
        };
        let float = |i: usize| -> Result<f64> {
            params
                .get(i)
                .ok_or_else(|| bad("missing parameter"))?
                .parse()
                .map_err(|_| bad("expected a numeric parameter"))
        };
        let arity = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(bad(&format!("expected {k} parameter(s), got {}", params.len())))
            }
        };
        let spec = match family {
            "torus" | "grid" => {
                arity(2)?;
                let (dim, side) = (int(0)?, int(1)?);
                if family == "torus" {
                    GraphSpec::Torus { dim, side }
                } else {
                    GraphSpec::Grid { dim, side }
                }
            }
            "clique_hair_on_pimple" => {
                arity(2)?;
                GraphSpec::CliqueHairOnPimple { n: int(0)?, h: int(1)? }
            }
            "tree_with_path" => {
                arity(2)?;
                GraphSpec::TreeWithPath { n: int(0)?, eps: float(1)? }
            }
            "gnp" => {
                if params.len() == 2 {
                    GraphSpec::Gnp { n: int(0)?, p: float(1)?, seed: 0 }
                } else {
                    arity(3)?;
                    GraphSpec::Gnp { n: int(0)?, p: float(1)?, seed: int(2)? as u64 }
                }
            }
            other => {
                arity(1)?;
                GraphSpec::with_size(other, int(0)?, 0)?
            }
        };
        Ok(spec)
    }
}

fn power_of_two_exponent(n: usize) -> Option<u32> {
    n.is_power_of_two().then(|| n.trailing_zeros())
}

fn complete_adjacency(vertices: &[Vertex], adjacency: &mut [Vec<Vertex>]) {
    for (a, &u) in vertices.iter().enumerate() {
        for &v in &vertices[a + 1..] {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
}

fn link(adjacency: &mut [Vec<Vertex>], u: Vertex, v: Vertex) {
    adjacency[u].push(v);
    adjacency[v].push(u);
}

fn binary_tree_adjacency(n: usize, total: usize) -> Vec<Vec<Vertex>> {
    let mut adjacency = vec![Vec::new(); total];
    for child in 1..n {
        link(&mut adjacency, child, (child - 1) / 2);
    }
    adjacency
}

/// Builds the graph a spec names. Only `gnp` is random, and it is fully
/// determined by its seed.
pub fn generate(spec: &GraphSpec) -> Result<Graph> {
    let param = |msg: String| Err(Error::Parameter(msg));
    let g = match *spec {
        GraphSpec::Complete { n } => {
            if n == 0 {
                return param("complete graph needs n >= 1".into());
            }
            let mut adj = vec![Vec::new(); n];
            complete_adjacency(&(0..n).collect::<Vec<_>>(), &mut adj);
            Graph::from_adjacency_unchecked(adj)
        }
        GraphSpec::Path { n } => {
            if n == 0 {
                return param("path needs n >= 1".into());
            }
            let mut adj = vec![Vec::new(); n];
            for v in 1..n {
                link(&mut adj, v - 1, v);
            }
            Graph::from_adjacency_unchecked(adj)
        }
        GraphSpec::Cycle { n } => {
            if n < 3 {
                return param(format!("cycle needs n >= 3, got {n}"));
            }
            let mut adj = vec![Vec::new(); n];
            for v in 0..n {
                link(&mut adj, v, (v + 1) % n);
            }
            Graph::from_adjacency_unchecked(adj)
        }
        GraphSpec::Star { n } => {
            if n == 0 {
                return param("star needs n >= 1".into());
            }
            let mut adj = vec![Vec::new(); n];
            for leaf in 1..n {
                link(&mut adj, 0, leaf);
            }
            Graph::from_adjacency_unchecked(adj)
        }
        GraphSpec::BinaryTree { n } => {
            if power_of_two_exponent(n + 1).is_none() || n == 0 {
                return param(format!("binary tree size must be 2^k - 1, got {n}"));
            }
            Graph::from_adjacency_unchecked(binary_tree_adjacency(n, n))
        }
        GraphSpec::Hypercube { n } => {
            let Some(k) = power_of_two_exponent(n) else {
                return param(format!("hypercube size must be a power of two, got {n}"));
            };
            let adj = (0..n).map(|v| (0..k).map(|b| v ^ (1 << b)).collect()).collect();
            Graph::from_adjacency_unchecked(adj)
        }
        GraphSpec::Torus { dim, side } => {
            if dim == 0 || side < 3 {
                return param(format!("torus needs dim >= 1 and side >= 3, got dim {dim}, side {side}"));
            }
            lattice(dim, side, true)?
        }
        GraphSpec::Grid { dim, side } => {
            if dim == 0 || side == 0 {
                return param(format!("grid needs dim >= 1 and side >= 1, got dim {dim}, side {side}"));
            }
            lattice(dim, side, false)?
        }
        GraphSpec::Lollipop { n } => {
            if n < 2 {
                return param(format!("lollipop needs n >= 2, got {n}"));
            }
            let clique = n.div_ceil(2);
            let mut adj = vec![Vec::new(); n];
            complete_adjacency(&(0..clique).collect::<Vec<_>>(), &mut adj);
            if clique < n {
                link(&mut adj, 0, clique);
                for v in clique + 1..n {
                    link(&mut adj, v - 1, v);
                }
            }
            Graph::from_adjacency_unchecked(adj)
        }
        GraphSpec::CliqueWithHair { n } => {
            if n < 3 {
                return param(format!("clique with hair needs n >= 3, got {n}"));
            }
            let mut adj = vec![Vec::new(); n];
            complete_adjacency(&(0..n - 1).collect::<Vec<_>>(), &mut adj);
            link(&mut adj, 0, n - 1);
            Graph::from_adjacency_unchecked(adj)
        }
        GraphSpec::CliqueHairOnPimple { n, h } => {
            if n < 4 || h < 2 || h > n - 1 {
                return param(format!("clique hair on pimple needs n >= 4 and 2 <= h <= n-1, got n {n}, h {h}"));
            }
            let mut adj = vec![Vec::new(); n];
            complete_adjacency(&(2..n).collect::<Vec<_>>(), &mut adj);
            link(&mut adj, 0, 1);
            for v in 2..h + 1 {
                link(&mut adj, 0, v);
            }
            Graph::from_adjacency_unchecked(adj)
        }
        GraphSpec::TreeWithPath { n, eps } => {
            if power_of_two_exponent(n + 1).is_none() || n == 0 {
                return param(format!("tree size must be 2^k - 1, got {n}"));
            }
            if !(eps > 0.0 && eps < 0.5) {
                return param(format!("tree_with_path needs 0 < eps < 1/2, got {eps}"));
            }
            let len = tree_path_length(n, eps);
            let mut adj = binary_tree_adjacency(n, n + len);
            let mut prev = 0;
            for v in n..n + len {
                link(&mut adj, prev, v);
                prev = v;
            }
            Graph::from_adjacency_unchecked(adj)
        }
        GraphSpec::Gnp { n, p, seed } => gnp(n, p, seed)?.0,
        GraphSpec::Custom { ref path } => Graph::read_edge_list(path)?,
    };
    Ok(g)
}

/// Number of path vertices attached by `tree_with_path`: `ceil(n^(1/2 - eps))`.
pub fn tree_path_length(n: usize, eps: f64) -> usize {
    ((n as f64).powf(0.5 - eps).ceil() as usize).max(1)
}

fn lattice(dim: usize, side: usize, wrap: bool) -> Result<Graph> {
    let n = side
        .checked_pow(dim as u32)
        .filter(|&n| n <= 1 << 26)
        .ok_or_else(|| Error::Parameter(format!("lattice {side}^{dim} too large")))?;
    let mut adj = vec![Vec::new(); n];
    for v in 0..n {
        let mut stride = 1;
        for _ in 0..dim {
            let coord = (v / stride) % side;
            if coord + 1 < side {
                link(&mut adj, v, v + stride);
            } else if wrap {
                link(&mut adj, v, v + stride - side * stride);
            }
            stride *= side;
        }
    }
    Ok(Graph::from_adjacency_unchecked(adj))
}

/// Erdős–Rényi `G(n, p)` conditioned on connectivity by resampling with
/// sub-seeds `derive_seed(seed, 0), derive_seed(seed, 1), …`. Returns the
/// graph and the number of rejected samples.
pub fn gnp(n: usize, p: f64, seed: u64) -> Result<(Graph, u32)> {
    if n == 0 || !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter(format!("gnp needs n >= 1 and 0 < p <= 1, got n {n}, p {p}")));
    }
    for retry in 0..GNP_MAX_RETRIES {
        let mut rng = rng::stream(rng::derive_seed(seed, retry as u64), 0);
        let mut adj = vec![Vec::new(); n];
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    link(&mut adj, u, v);
                }
            }
        }
        let g = Graph::from_adjacency_unchecked(adj);
        if g.is_connected() {
            return Ok((g, retry));
        }
    }
    Err(Error::Connectivity(format!("gnp({n}, {p}) not connected after {GNP_MAX_RETRIES} samples")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(s: &str) -> Graph {
        generate(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn closed_form_edge_counts() {
        assert_eq!(gen("complete:5").edge_count(), 10);
        assert_eq!(gen("cycle:7").edge_count(), 7);
        assert_eq!(gen("path:9").edge_count(), 8);
        assert_eq!(gen("hypercube:16").edge_count(), 16 / 2 * 4);
        assert_eq!(gen("binary_tree:31").edge_count(), 30);
        let d = validate(&gen("complete:5"));
        assert!(d.is_regular);
        assert_eq!(d.max_degree, 4);
    }

    #[test]
    fn hypercube_k3() {
        let g = generate(&GraphSpec::Hypercube { n: 8 }).unwrap();
        let d = validate(&g);
        assert_eq!((g.n(), d.edge_count, d.max_degree, d.min_degree), (8, 12, 3, 3));
        assert!(d.is_bipartite);
    }

    #[test]
    fn lollipop_shape() {
        let g = gen("lollipop:10");
        assert_eq!(g.edge_count(), 10 + 1 + 4);
        for u in 0..5 {
            for v in 0..5 {
                assert_eq!(g.has_edge(u, v), u != v);
            }
        }
        assert!(g.has_edge(0, 5));
        assert_eq!(g.degree(0), 5);
        assert_eq!(g.degree(9), 1);
        assert_eq!(g.distances_from(0)[9], Some(5));
    }

    #[test]
    fn diagnostics_examples() {
        let p4 = validate(&gen("path:4"));
        assert_eq!(
            p4,
            Diagnostics {
                connected: true,
                max_degree: 2,
                min_degree: 1,
                edge_count: 3,
                is_tree: true,
                is_regular: false,
                is_bipartite: true
            }
        );
        let c5 = validate(&gen("cycle:5"));
        assert_eq!((c5.max_degree, c5.min_degree, c5.edge_count), (2, 2, 5));
        assert!(!c5.is_tree && !c5.is_bipartite);
        let s5 = validate(&gen("star:5"));
        assert_eq!((s5.max_degree, s5.min_degree, s5.edge_count), (4, 1, 4));
        assert!(s5.is_tree);
    }

    #[test]
    fn invalid_parameters_are_named() {
        let err = generate(&GraphSpec::Hypercube { n: 12 }).unwrap_err();
        assert!(err.to_string().contains("power of two"), "{err}");
        assert!(generate(&GraphSpec::BinaryTree { n: 8 }).is_err());
        assert!(generate(&GraphSpec::Cycle { n: 2 }).is_err());
        assert!(generate(&GraphSpec::Torus { dim: 2, side: 2 }).is_err());
        assert!(generate(&GraphSpec::CliqueHairOnPimple { n: 10, h: 10 }).is_err());
        assert!(generate(&GraphSpec::TreeWithPath { n: 15, eps: 0.5 }).is_err());
    }

    #[test]
    fn every_family_is_connected() {
        for s in [
            "complete:6",
            "path:6",
            "cycle:6",
            "star:6",
            "binary_tree:15",
            "hypercube:32",
            "torus:2:5",
            "torus:3:3",
            "grid:2:5",
            "grid:3:3",
            "lollipop:11",
            "clique_with_hair:9",
            "clique_hair_on_pimple:12:4",
            "tree_with_path:63:0.25",
            "gnp:40:0.15:3",
        ] {
            assert!(validate(&gen(s)).connected, "{s}");
        }
    }

    #[test]
    fn hair_and_pimple_labels() {
        let g = gen("clique_with_hair:6");
        assert_eq!(g.neighbors(5), &[0]);
        assert_eq!(g.degree(0), 5);
        let p = gen("clique_hair_on_pimple:10:4");
        assert_eq!(p.neighbors(1), &[0]);
        assert_eq!(p.neighbors(0), &[1, 2, 3, 4]);
        assert_eq!(p.degree(9), 7);
    }

    #[test]
    fn tree_with_path_rounds_up() {
        let g = gen("tree_with_path:63:0.25");
        let len = tree_path_length(63, 0.25);
        assert_eq!(len, 3); // 63^0.25 = 2.82
        assert_eq!(g.n(), 66);
        assert_eq!(g.distances_from(65)[0], Some(3));
    }

    #[test]
    fn grid_and_torus_degrees() {
        let g = gen("grid:2:5");
        assert_eq!(g.degree(GraphSpec::Grid { dim: 2, side: 5 }.default_origin()), 4);
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.edge_count(), 2 * 5 * 4);
        let t = validate(&gen("torus:3:4"));
        assert!(t.is_regular);
        assert_eq!(t.max_degree, 6);
    }

    #[test]
    fn gnp_is_seed_deterministic() {
        let a = gnp(60, 0.08, 11).unwrap();
        let b = gnp(60, 0.08, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, gnp(60, 0.08, 12).unwrap().0);
    }

    #[test]
    fn edge_list_round_trip_with_loops() {
        let g = Graph::parse_edge_list("4\n0 1\n1 2\n# comment\n2 3\n3 3\n3 3\n").unwrap();
        assert_eq!(g.loops(3), 2);
        assert_eq!(g.degree(3), 3);
        assert_eq!(g.total_degree(), 8);
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        assert!(Graph::parse_edge_list("3\n0 1\n1 0\n").is_err());
        assert!(matches!(Graph::parse_edge_list("3\n0 x\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn spec_text_round_trip() {
        for s in ["cycle:16", "torus:2:8", "clique_hair_on_pimple:20:5", "gnp:30:0.2:9", "tree_with_path:15:0.1"] {
            let spec: GraphSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("cycle".parse::<GraphSpec>().is_err());
        assert!("moebius:5".parse::<GraphSpec>().is_err());
    }
}
