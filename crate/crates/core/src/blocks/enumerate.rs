use super::validity::{check_validity, BlockKind};
use super::Block;
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// Largest instance `enumerate_blocks` will search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationCap {
    pub max_n: usize,
    pub max_m: usize,
}

impl Default for EnumerationCap {
    fn default() -> Self {
        Self { max_n: 4, max_m: 8 }
    }
}

fn moves(graph: &Graph, v: Vertex) -> Vec<Vertex> {
    let mut out = graph.neighbors(v).to_vec();
    if graph.loops(v) > 0 {
        out.push(v);
    }
    out
}

/// Every walk of exactly `len` steps from `origin`.
fn walks(graph: &Graph, origin: Vertex, len: usize) -> Vec<Vec<Vertex>> {
    let mut out = vec![vec![origin]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                let last = *w.last().unwrap_or(&origin);
                moves(graph, last).into_iter().map(move |u| {
                    let mut next = w.clone();
                    next.push(u);
                    next
                })
            })
            .collect();
    }
    out
}

/// Ways to write `m` as an ordered sum of `parts` positive integers.
fn compositions(m: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if m == 0 { vec![vec![]] } else { vec![] };
    }
    (1..=m.saturating_sub(parts - 1))
        .flat_map(|first| {
            compositions(m - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// All blocks of the requested kind on `graph` with `n` rows, row 0 the
/// singleton `[origin]`, and total length `m`, sorted. Brute force over row
/// lengths and walks, filtered by [`check_validity`].
pub fn enumerate_blocks(graph: &Graph, origin: Vertex, m: usize, kind: BlockKind) -> Result<Vec<Block>> {
    enumerate_blocks_capped(graph, origin, m, kind, EnumerationCap::default())
}

pub fn enumerate_blocks_capped(
    graph: &Graph,
    origin: Vertex,
    m: usize,
    kind: BlockKind,
    cap: EnumerationCap,
) -> Result<Vec<Block>> {
    let n = graph.n();
    if origin >= n {
        return Err(Error::Domain(format!("origin {origin} out of range for n = {n}")));
    }
    if n > cap.max_n || m > cap.max_m {
        return Err(Error::Capability(format!(
            "enumeration limited to n <= {} and m <= {} (got n = {n}, m = {m})",
            cap.max_n, cap.max_m
        )));
    }
    let mut found = Vec::new();
    for lengths in compositions(m, n - 1) {
        let choices: Vec<Vec<Vec<Vertex>>> = lengths.iter().map(|&l| walks(graph, origin, l)).collect();
        let mut pick = vec![0usize; choices.len()];
        'outer: loop {
            let mut rows = vec![vec![origin]];
            rows.extend(pick.iter().zip(&choices).map(|(&k, c)| c[k].clone()));
            let block = Block::new(origin, rows);
            if check_validity(&block, graph, kind).is_valid() {
                found.push(block);
            }
            for (slot, c) in pick.iter_mut().zip(&choices) {
                *slot += 1;
                if *slot < c.len() {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
    }
    found.sort();
    Ok(found)
}
