use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Block, TimingArray};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Sequential,
    Parallel,
    Any,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Rows must be nonempty and start at the origin.
    Shape,
    /// Row endpoints are pairwise distinct.
    DistinctEndpoints,
    /// Consecutive cells are adjacent in the host graph.
    Path,
    /// First occurrences in sequential order end their row.
    Sequential,
    /// First occurrences in parallel order end their row.
    Parallel,
    /// First occurrences in timing order end their row.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub row: usize,
    pub cell: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub shape: bool,
    pub distinct_endpoints: bool,
    pub path_valid: bool,
    pub sequential: Option<bool>,
    pub parallel: Option<bool>,
    /// First failing cell, checked in the order shape, endpoints, paths,
    /// sequential, parallel.
    pub violation: Option<Violation>,
}

impl ValidityReport {
    /// All requested predicates hold.
    pub fn is_valid(&self) -> bool {
        self.shape
            && self.distinct_endpoints
            && self.path_valid
            && self.sequential.unwrap_or(true)
            && self.parallel.unwrap_or(true)
    }
}

pub(crate) fn shape_violation(block: &Block) -> Option<Violation> {
    block.rows.iter().enumerate().find_map(|(i, r)| match r.first() {
        Some(&v) if v == block.origin => None,
        _ => Some(Violation { rule: Rule::Shape, row: i, cell: 0 }),
    })
}

pub(crate) fn endpoint_violation(block: &Block) -> Option<Violation> {
    let mut seen = HashSet::new();
    for (i, row) in block.rows.iter().enumerate() {
        let end = *row.last()?;
        if !seen.insert(end) {
            return Some(Violation { rule: Rule::DistinctEndpoints, row: i, cell: row.len() - 1 });
        }
    }
    None
}

fn path_violation(block: &Block, graph: &Graph, allow_stay: bool) -> Option<Violation> {
    for (i, row) in block.rows.iter().enumerate() {
        if row.iter().any(|&v| v >= graph.n()) {
            let t = row.iter().position(|&v| v >= graph.n()).unwrap_or(0);
            return Some(Violation { rule: Rule::Path, row: i, cell: t });
        }
        for (t, w) in row.windows(2).enumerate() {
            let ok = graph.has_edge(w[0], w[1]) || (allow_stay && w[0] == w[1]);
            if !ok {
                return Some(Violation { rule: Rule::Path, row: i, cell: t + 1 });
            }
        }
    }
    None
}

/// Reads `cells` in the given order and reports the first cell holding a
/// first occurrence that is not the end of its row.
pub(crate) fn first_occurrence_violation(
    block: &Block,
    cells: impl IntoIterator<Item = (usize, usize)>,
    rule: Rule,
) -> Option<Violation> {
    let mut seen = HashSet::new();
    for (i, t) in cells {
        if seen.insert(block.rows[i][t]) && t + 1 != block.rows[i].len() {
            return Some(Violation { rule, row: i, cell: t });
        }
    }
    None
}

pub(crate) fn sequential_violation(block: &Block) -> Option<Violation> {
    first_occurrence_violation(block, block.sequential_order(), Rule::Sequential)
}

pub(crate) fn parallel_violation(block: &Block, order: &[usize]) -> Option<Violation> {
    first_occurrence_violation(block, block.parallel_order_by(order), Rule::Parallel)
}

fn check(block: &Block, graph: &Graph, kind: BlockKind, allow_stay: bool) -> ValidityReport {
    let shape = shape_violation(block);
    if shape.is_some() {
        return ValidityReport {
            shape: false,
            distinct_endpoints: false,
            path_valid: false,
            sequential: None,
            parallel: None,
            violation: shape,
        };
    }
    let endpoints = endpoint_violation(block);
    let path = path_violation(block, graph, allow_stay);
    let identity: Vec<usize> = (0..block.rows()).collect();
    let seq = matches!(kind, BlockKind::Sequential | BlockKind::Any).then(|| sequential_violation(block));
    let par = matches!(kind, BlockKind::Parallel | BlockKind::Any).then(|| parallel_violation(block, &identity));
    let violation = endpoints.or(path).or(seq.flatten()).or(par.flatten());
    ValidityReport {
        shape: true,
        distinct_endpoints: endpoints.is_none(),
        path_valid: path.is_none(),
        sequential: seq.map(|v| v.is_none()),
        parallel: par.map(|v| v.is_none()),
        violation,
    }
}

/// Checks the distinct-endpoint property, that every row is a walk in
/// `graph`, and the first-occurrence rule(s) selected by `kind`. `Any`
/// checks both orders. A repeated cell counts as a move only along a
/// self-loop.
pub fn check_validity(block: &Block, graph: &Graph, kind: BlockKind) -> ValidityReport {
    check(block, graph, kind, false)
}

/// As [`check_validity`], but a repeated cell (a lazy stay) is always a
/// legal move.
pub fn check_validity_lazy(block: &Block, graph: &Graph, kind: BlockKind) -> ValidityReport {
    check(block, graph, kind, true)
}

/// First-occurrence rule for uniform histories: cells are read in increasing
/// timing order (ties, which only occur at time 0, by row index). Returns the
/// first violation, or `None` when the block is a valid uniform history for
/// its timing array.
pub fn check_uniform(block: &Block, timing: &TimingArray) -> Option<Violation> {
    if !timing.is_consistent_with(block) {
        return Some(Violation { rule: Rule::Shape, row: 0, cell: 0 });
    }
    if let Some(v) = shape_violation(block).or_else(|| endpoint_violation(block)) {
        return Some(v);
    }
    let mut cells: Vec<(usize, usize)> = block.sequential_order().collect();
    cells.sort_by(|&(i, s), &(j, t)| timing.times[i][s].total_cmp(&timing.times[j][t]).then(i.cmp(&j)));
    first_occurrence_violation(block, cells, Rule::Uniform)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn worked_host() -> Graph {
        // Labels 1..=4 from the worked example live on vertices 1..=4; vertex 0
        // is an isolated spare so labels can be used verbatim.
        Graph::from_edges(5, &[(1, 2), (2, 3), (3, 4), (0, 1)]).unwrap()
    }

    fn worked_host_with_loops() -> Graph {
        Graph::from_edges(5, &[(1, 2), (2, 3), (3, 4), (0, 1), (2, 2)]).unwrap()
    }

    #[test]
    fn worked_example_is_valid_both_ways() {
        let b = Block::new(1, vec![vec![1], vec![1, 2], vec![1, 2, 2, 3], vec![1, 2, 1, 2, 3, 4]]);
        let report = check_validity(&b, &worked_host_with_loops(), BlockKind::Any);
        assert!(report.is_valid(), "{report:?}");
        assert_eq!(report.sequential, Some(true));
        assert_eq!(report.parallel, Some(true));
        // Without a loop at 2 the stay (2, 2) is not a step of the simple walk.
        let strict = check_validity(&b, &worked_host(), BlockKind::Any);
        assert!(!strict.path_valid);
        assert_eq!(strict.violation, Some(Violation { rule: Rule::Path, row: 2, cell: 2 }));
        assert!(check_validity_lazy(&b, &worked_host(), BlockKind::Any).is_valid());
    }

    #[test]
    fn mid_row_first_occurrence_is_rejected() {
        let path = Graph::from_edges(4, &[(1, 2), (2, 3), (0, 1)]).unwrap();
        let b = Block::new(2, vec![vec![2], vec![2, 3, 2, 1], vec![2, 3]]);
        let report = check_validity(&b, &path, BlockKind::Any);
        assert_eq!(report.sequential, Some(false));
        assert_eq!(report.parallel, Some(false));
        assert_eq!(report.violation, Some(Violation { rule: Rule::Sequential, row: 1, cell: 1 }));
    }

    #[test]
    fn singleton_is_valid() {
        let g = Graph::from_edges(1, &[]).unwrap();
        assert!(check_validity(&Block::singleton(0), &g, BlockKind::Any).is_valid());
    }

    #[test]
    fn repeated_endpoints_are_reported() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let b = Block::new(0, vec![vec![0], vec![0, 1], vec![0, 1]]);
        let report = check_validity(&b, &g, BlockKind::Any);
        assert!(!report.distinct_endpoints);
        assert_eq!(report.violation.unwrap().rule, Rule::DistinctEndpoints);
    }

    #[test]
    fn uniform_order_follows_timing() {
        let b = Block::new(0, vec![vec![0], vec![0, 1, 0, 2], vec![0, 1]]);
        // Particle 2 reaches 1 first, then particle 1 goes 1 -> 0 -> 2.
        let ok = TimingArray { times: vec![vec![0.0], vec![0.0, 2.0, 3.0, 4.0], vec![0.0, 1.0]] };
        assert_eq!(check_uniform(&b, &ok), None);
        let bad = TimingArray { times: vec![vec![0.0], vec![0.0, 1.0, 3.0, 4.0], vec![0.0, 2.0]] };
        assert_eq!(check_uniform(&b, &bad), Some(Violation { rule: Rule::Uniform, row: 1, cell: 1 }));
    }
}
