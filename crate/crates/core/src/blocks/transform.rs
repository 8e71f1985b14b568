use std::collections::{HashMap, HashSet};

use super::validity::{endpoint_violation, parallel_violation, sequential_violation, shape_violation};
use super::{Block, TimingArray};
use crate::error::{Error, Result};
use crate::graph::Vertex;

/// A block being rewritten by successive cut & paste moves. Keeps an index
/// from each endpoint vertex to the row it ends.
#[derive(Debug)]
pub struct CutPaste {
    block: Block,
    ends: HashMap<Vertex, usize>,
}

impl CutPaste {
    /// Requires shape validity and distinct endpoints.
    pub fn new(block: Block) -> Result<Self> {
        if let Some(v) = shape_violation(&block) {
            return Err(Error::Input(format!("row {} does not start at the origin", v.row)));
        }
        if let Some(v) = endpoint_violation(&block) {
            return Err(Error::Integrity(format!("row {} repeats another row's endpoint", v.row)));
        }
        let ends = block.rows.iter().enumerate().map(|(i, r)| (*r.last().unwrap_or(&0), i)).collect();
        Ok(Self { block, ends })
    }

    pub fn block(&self) -> &Block {
        &self.block
    }

    pub fn into_block(self) -> Block {
        self.block
    }

    /// Cuts cells `(i, t+1) ..= (i, rho_i)` and appends them to the row that
    /// ends at `L(i, t)`. Returns the receiving row, or `None` when `t` is
    /// already the end of row `i` (nothing moves).
    pub fn apply(&mut self, i: usize, t: usize) -> Result<Option<usize>> {
        let row_len = self
            .block
            .rows
            .get(i)
            .map(Vec::len)
            .ok_or_else(|| Error::Input(format!("row {i} does not exist")))?;
        if t >= row_len {
            return Err(Error::Input(format!("cell ({i}, {t}) does not exist")));
        }
        if t + 1 == row_len {
            return Ok(None);
        }
        let cut_vertex = self.block.rows[i][t];
        let k = *self
            .ends
            .get(&cut_vertex)
            .ok_or_else(|| Error::Integrity(format!("no row ends at vertex {cut_vertex}")))?;
        if k == i {
            return Err(Error::Integrity(format!(
                "row {i} ends at {cut_vertex}, the vertex it is cut at"
            )));
        }
        let tail = self.block.rows[i].split_off(t + 1);
        let moved_end = *tail.last().unwrap_or(&cut_vertex);
        self.block.rows[k].extend(tail);
        self.ends.insert(cut_vertex, i);
        self.ends.insert(moved_end, k);
        Ok(Some(k))
    }
}

/// `CP_(i,t)`: the block with row `i`'s tail after cell `t` pasted onto the
/// unique row ending at `L(i, t)`. Identity when `t = rho_i`.
pub fn cut_paste(block: &Block, i: usize, t: usize) -> Result<Block> {
    let mut cp = CutPaste::new(block.clone())?;
    cp.apply(i, t)?;
    Ok(cp.into_block())
}

fn require(ok: Option<super::Violation>, what: &str) -> Result<()> {
    match ok {
        None => Ok(()),
        Some(v) => Err(Error::Validity(format!(
            "input is not a valid {what} block: {:?} fails at cell ({}, {})",
            v.rule, v.row, v.cell
        ))),
    }
}

/// Sequential to parallel: reads the block in parallel order and applies a
/// cut & paste at every first occurrence.
pub fn stp(block: &Block) -> Result<Block> {
    require(shape_violation(block).or_else(|| endpoint_violation(block)), "sequential")?;
    require(sequential_violation(block), "sequential")?;
    to_parallel(block)
}

/// The parallel-order reading behind [`stp`], without requiring a
/// sequential input. Applied to a uniform history it recovers the parallel
/// block that [`ptu`] maps back onto that history.
pub fn to_parallel(block: &Block) -> Result<Block> {
    let n = block.rows();
    let mut cp = CutPaste::new(block.clone())?;
    let mut seen = HashSet::new();
    let mut t = 0;
    while seen.len() < n {
        let mut any = false;
        for i in 0..n {
            let Some(v) = cp.block().cell(i, t) else { continue };
            any = true;
            if seen.insert(v) {
                cp.apply(i, t)?;
            }
        }
        if !any {
            return Err(Error::Integrity("ran off the block before seeing every endpoint".into()));
        }
        t += 1;
    }
    Ok(cp.into_block())
}

/// Parallel to sequential: reads rows one at a time and, at the first unseen
/// vertex of each row, cuts the rest of the row away.
///
/// With `row_order`, the input is a parallel block whose conflicts were
/// resolved in that priority order (`row_order[0]` must be `0`); it is read in
/// that order and the output's row `r` is the processed row `row_order[r]`.
pub fn pts(block: &Block, row_order: Option<&[usize]>) -> Result<Block> {
    let permuted = match row_order {
        Some(order) => {
            check_order(order, block.rows())?;
            block.permuted(order)
        }
        None => block.clone(),
    };
    let identity: Vec<usize> = (0..permuted.rows()).collect();
    require(shape_violation(&permuted).or_else(|| endpoint_violation(&permuted)), "parallel")?;
    require(parallel_violation(&permuted, &identity), "parallel")?;
    let mut cp = CutPaste::new(permuted)?;
    let mut seen = HashSet::new();
    for i in 0..cp.block().rows() {
        let mut t = 0;
        while let Some(v) = cp.block().cell(i, t) {
            if seen.insert(v) {
                cp.apply(i, t)?;
                break;
            }
            t += 1;
        }
    }
    Ok(cp.into_block())
}

pub(crate) fn check_order(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Input(format!("row order has {} entries for {n} rows", order.len())));
    }
    if n > 0 && order[0] != 0 {
        return Err(Error::Input("row order must keep the first row first".into()));
    }
    let mut hit = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut hit[i], true) {
            return Err(Error::Input("row order is not a permutation".into()));
        }
    }
    Ok(())
}

/// Parallel to uniform for the move-order sequence `order` (0-based particle
/// indices in `1..n`; entry `t-1` is the particle chosen at tick `t`).
///
/// Cells are read in the order the uniform process would perform them:
/// at tick `t` the next unread cell of row `order[t-1]`, if any, gets time
/// `t`. Every first occurrence triggers a cut & paste. Unread cells moved by
/// a cut & paste carry no time yet, so the timing array stays
/// increasing along every row.
pub fn ptu(block: &Block, order: &[usize]) -> Result<(Block, TimingArray)> {
    let n = block.rows();
    let identity: Vec<usize> = (0..n).collect();
    require(shape_violation(block).or_else(|| endpoint_violation(block)), "parallel")?;
    require(parallel_violation(block, &identity), "parallel")?;
    let mut cp = CutPaste::new(block.clone())?;
    let mut seen = HashSet::from([block.origin]);
    let mut times: Vec<Vec<f64>> = vec![vec![0.0]; n];
    let mut read = vec![1usize; n];
    let mut used = 0;
    for (tick, &i) in order.iter().enumerate() {
        if seen.len() == n {
            break;
        }
        used = tick + 1;
        if i == 0 || i >= n {
            return Err(Error::Input(format!("order entry {i} at tick {} is not a movable particle", tick + 1)));
        }
        let t = read[i];
        let Some(v) = cp.block().cell(i, t) else { continue };
        times[i].push((tick + 1) as f64);
        read[i] += 1;
        if seen.insert(v) {
            cp.apply(i, t)?;
        }
    }
    if seen.len() < n {
        let unread: usize = (0..n).map(|i| cp.block().rows[i].len() - read[i].min(cp.block().rows[i].len())).sum();
        return Err(Error::Input(format!(
            "order exhausted after {used} entries with {unread} cells unread; supply a longer sequence"
        )));
    }
    Ok((cp.into_block(), TimingArray { times }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::validity::check_uniform;

    fn worked() -> Block {
        Block::new(1, vec![vec![1], vec![1, 2], vec![1, 2, 2, 3], vec![1, 2, 1, 2, 3, 4]])
    }

    fn star_sequential() -> Block {
        // centre c = 0, leaves a = 1, b = 2, d = 3
        Block::new(0, vec![vec![0], vec![0, 1], vec![0, 1, 0, 2], vec![0, 2, 0, 3]])
    }

    fn star_parallel() -> Block {
        Block::new(0, vec![vec![0], vec![0, 1], vec![0, 1, 0, 2, 0, 3], vec![0, 2]])
    }

    #[test]
    fn worked_cut_paste() {
        // Paper rows are 1-based; (4,1) is row 3, cell 1 here.
        let out = cut_paste(&worked(), 3, 1).unwrap();
        assert_eq!(out.rows, vec![vec![1], vec![1, 2, 1, 2, 3, 4], vec![1, 2, 2, 3], vec![1, 2]]);
        for (i, t) in [(0, 0), (1, 1), (2, 3), (3, 5)] {
            assert_eq!(cut_paste(&worked(), i, t).unwrap(), worked());
        }
    }

    #[test]
    fn cut_paste_errors() {
        let broken = Block::new(0, vec![vec![0], vec![0, 1, 2], vec![0, 1, 2]]);
        assert!(matches!(cut_paste(&broken, 1, 1), Err(Error::Integrity(_))));
        assert!(matches!(cut_paste(&worked(), 1, 5), Err(Error::Input(_))));
        let no_receiver = Block::new(0, vec![vec![0], vec![0, 5, 1]]);
        assert!(matches!(cut_paste(&no_receiver, 1, 1), Err(Error::Integrity(_))));
    }

    #[test]
    fn star_round_trip() {
        assert_eq!(stp(&star_sequential()).unwrap(), star_parallel());
        assert_eq!(pts(&star_parallel(), None).unwrap(), star_sequential());
        assert_eq!(pts(&star_parallel(), Some(&[0, 1, 2, 3])).unwrap(), star_sequential());
    }

    #[test]
    fn fixed_points() {
        assert_eq!(stp(&worked()).unwrap(), worked());
        assert_eq!(pts(&worked(), None).unwrap(), worked());
        assert_eq!(stp(&Block::singleton(4)).unwrap(), Block::singleton(4));
        assert_eq!(pts(&Block::singleton(4), None).unwrap(), Block::singleton(4));
    }

    #[test]
    fn wrong_kind_is_rejected() {
        assert!(matches!(stp(&star_parallel()), Err(Error::Validity(_))));
        assert!(matches!(pts(&star_sequential(), None), Err(Error::Validity(_))));
        assert!(pts(&star_parallel(), Some(&[1, 0, 2, 3])).is_err());
    }

    #[test]
    fn ptu_single_mover() {
        let b = Block::new(0, vec![vec![0], vec![0, 1]]);
        let (out, timing) = ptu(&b, &[1, 1, 1]).unwrap();
        assert_eq!(out, b);
        assert_eq!(timing.times, vec![vec![0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn ptu_parallel_reading_order_keeps_cells() {
        // Round-robin order reads the block column by column.
        let (out, timing) = ptu(&star_parallel(), &[1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3, 2, 2]).unwrap();
        assert_eq!(out, star_parallel());
        assert_eq!(timing.times[3], vec![0.0, 3.0]);
        assert_eq!(check_uniform(&out, &timing), None);
    }

    #[test]
    fn ptu_hand_trace() {
        // Particle 4 (row 3) is picked twice before particle 3 (row 2) moves.
        // tick 1: row 3 reads b, a first occurrence at its end, so nothing moves.
        // tick 2: row 3 has settled; the pick is wasted.
        // tick 3: row 1 reads a and settles.
        // ticks 4..=8: row 2 reads a, c, b, c, d and settles at d.
        let (out, timing) = ptu(&star_parallel(), &[3, 3, 1, 2, 2, 2, 2, 2]).unwrap();
        assert_eq!(out, star_parallel());
        assert_eq!(timing.times[3], vec![0.0, 1.0]);
        assert_eq!(timing.times[2], vec![0.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(check_uniform(&out, &timing), None);

        // Row 2 moving first settles it at a; row 1 inherits c -> b -> c -> d,
        // then reading b first hands c -> d on to row 3.
        let (out, timing) = ptu(&star_parallel(), &[2, 1, 1, 1, 3, 3, 3]).unwrap();
        assert_eq!(out.rows, vec![vec![0], vec![0, 1, 0, 2], vec![0, 1], vec![0, 2, 0, 3]]);
        assert_eq!(timing.times[1], vec![0.0, 2.0, 3.0, 4.0]);
        assert_eq!(timing.times[3], vec![0.0, 5.0, 6.0, 7.0]);
        assert_eq!(check_uniform(&out, &timing), None);
    }

    #[test]
    fn ptu_reports_short_order() {
        let err = ptu(&star_parallel(), &[1, 2]).unwrap_err();
        assert!(err.to_string().contains("exhausted after 2"), "{err}");
    }
}
