//! Trajectory arrays ("blocks") and the cut & paste transforms between
//! sequential, parallel and uniform histories.
//!
//! A block has one row per particle. Row `i` lists the vertices particle `i`
//! occupied after `0, 1, …, rho_i` moves, so `row[0]` is always the origin and
//! `row[rho_i]` is where the particle settled. Rows are labelled: two blocks
//! are equal only if every row matches position by position.

mod enumerate;
mod transform;
mod validity;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Vertex;

pub use enumerate::{enumerate_blocks, enumerate_blocks_capped, EnumerationCap};
pub(crate) use transform::check_order;
pub use transform::{cut_paste, pts, ptu, stp, to_parallel, CutPaste};
pub use validity::{check_uniform, check_validity, check_validity_lazy, BlockKind, Rule, ValidityReport, Violation};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Block {
    pub origin: Vertex,
    pub rows: Vec<Vec<Vertex>>,
}

/// Per-cell move times: `times[i][j]` is the global tick (discrete) or clock
/// time (continuous) of particle `i`'s `j`-th move, with `times[i][0] = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingArray {
    pub times: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStats {
    pub total_length: u64,
    pub max_row_length: u64,
    pub row_lengths: Vec<u64>,
}

impl Block {
    pub fn new(origin: Vertex, rows: Vec<Vec<Vertex>>) -> Self {
        Self { origin, rows }
    }

    /// The one-particle history `[origin]`.
    pub fn singleton(origin: Vertex) -> Self {
        Self { origin, rows: vec![vec![origin]] }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// `rho_i`, the index of row `i`'s last cell.
    pub fn row_end(&self, i: usize) -> usize {
        self.rows[i].len() - 1
    }

    pub fn cell(&self, i: usize, t: usize) -> Option<Vertex> {
        self.rows.get(i).and_then(|r| r.get(t)).copied()
    }

    pub fn endpoint(&self, i: usize) -> Vertex {
        *self.rows[i].last().expect("rows are never empty")
    }

    /// Cells in sequential order: row by row, left to right.
    pub fn sequential_order(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| (0..r.len()).map(move |t| (i, t)))
    }

    /// Cells in parallel order: column by column, rows in index order,
    /// skipping rows that have already ended.
    pub fn parallel_order(&self) -> Vec<(usize, usize)> {
        let identity: Vec<usize> = (0..self.rows()).collect();
        self.parallel_order_by(&identity)
    }

    /// Parallel order reading each column in the row order `order`.
    pub fn parallel_order_by(&self, order: &[usize]) -> Vec<(usize, usize)> {
        let width = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut cells = Vec::new();
        for t in 0..width {
            for &i in order {
                if t < self.rows[i].len() {
                    cells.push((i, t));
                }
            }
        }
        cells
    }

    /// Block whose row `r` is row `order[r]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self { origin: self.origin, rows: order.iter().map(|&i| self.rows[i].clone()).collect() }
    }

    pub fn stats(&self) -> BlockStats {
        block_stats(self)
    }

    pub(crate) fn check_shape(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            match row.first() {
                None => return Err(Error::Input(format!("row {i} is empty"))),
                Some(&v) if v != self.origin => {
                    return Err(Error::Input(format!("row {i} starts at {v}, not the origin {}", self.origin)))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Total length `m(L) = sum rho_i`, the longest row, and every row length.
pub fn block_stats(block: &Block) -> BlockStats {
    let row_lengths: Vec<u64> = block.rows.iter().map(|r| r.len().saturating_sub(1) as u64).collect();
    BlockStats {
        total_length: row_lengths.iter().sum(),
        max_row_length: row_lengths.iter().copied().max().unwrap_or(0),
        row_lengths,
    }
}

impl TimingArray {
    /// Strictly increasing along every row, starting at 0.
    pub fn is_consistent_with(&self, block: &Block) -> bool {
        self.times.len() == block.rows()
            && self.times.iter().zip(&block.rows).all(|(t, r)| {
                t.len() == r.len() && t.first() == Some(&0.0) && t.windows(2).all(|w| w[0] < w[1])
            })
    }

    /// Time of the last move in the array.
    pub fn last_time(&self) -> f64 {
        self.times.iter().filter_map(|r| r.last()).copied().fold(0.0, f64::max)
    }
}

/// On-disk form of a block: `{origin, rows, timing?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDocument {
    pub origin: Vertex,
    pub rows: Vec<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Vec<Vec<f64>>>,
}

impl BlockDocument {
    pub fn new(block: &Block, timing: Option<&TimingArray>) -> Self {
        Self { origin: block.origin, rows: block.rows.clone(), timing: timing.map(|t| t.times.clone()) }
    }

    pub fn into_parts(self) -> Result<(Block, Option<TimingArray>)> {
        let block = Block::new(self.origin, self.rows);
        block.check_shape()?;
        let timing = self.timing.map(|times| TimingArray { times });
        if let Some(t) = &timing {
            if !t.is_consistent_with(&block) {
                return Err(Error::Input("timing array does not match the block's rows".into()));
            }
        }
        Ok((block, timing))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
