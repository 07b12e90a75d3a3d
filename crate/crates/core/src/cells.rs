//! Cell indexing over a product of axes, optionally masking structural zeros.
//!
//! Cells are ranked row-major (last axis fastest) among the cells that are not
//! structural zeros. Every table, move and configuration column uses this rank.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSpace {
    dims: Vec<usize>,
    structural_zeros: BTreeSet<Vec<usize>>,
    /// full row-major position -> rank among live cells
    rank_of_full: Vec<Option<usize>>,
    /// rank -> full row-major position
    full_of_rank: Vec<usize>,
}

impl CellSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_structural_zeros(dims, BTreeSet::new())
    }

    pub fn with_structural_zeros(
        dims: Vec<usize>,
        structural_zeros: BTreeSet<Vec<usize>>,
    ) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidDims(format!("{dims:?}")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(Error::Overflow("cell count"))?;
        for z in &structural_zeros {
            check_box(&dims, z)?;
        }
        let mut rank_of_full = vec![None; total];
        let mut full_of_rank = Vec::with_capacity(total - structural_zeros.len());
        let mut idx = vec![0usize; dims.len()];
        for (full, slot) in rank_of_full.iter_mut().enumerate() {
            if !structural_zeros.contains(&idx) {
                *slot = Some(full_of_rank.len());
                full_of_rank.push(full);
            }
            advance(&dims, &mut idx);
        }
        Ok(CellSpace {
            dims,
            structural_zeros,
            rank_of_full,
            full_of_rank,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn structural_zeros(&self) -> &BTreeSet<Vec<usize>> {
        &self.structural_zeros
    }

    /// Number of cells that are not structural zeros.
    pub fn cell_count(&self) -> usize {
        self.full_of_rank.len()
    }

    pub fn is_structural_zero(&self, idx: &[usize]) -> bool {
        self.structural_zeros.contains(idx)
    }

    pub fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        check_box(&self.dims, idx)?;
        let full = idx
            .iter()
            .zip(&self.dims)
            .fold(0usize, |acc, (&i, &d)| acc * d + i);
        self.rank_of_full[full].ok_or_else(|| Error::StructuralZero(idx.to_vec()))
    }

    pub fn multi_index(&self, linear: usize) -> Result<Vec<usize>> {
        let &full = self
            .full_of_rank
            .get(linear)
            .ok_or(Error::IndexOutOfRange {
                axis: 0,
                value: linear,
                bound: self.cell_count(),
            })?;
        Ok(self.unrank_full(full))
    }

    fn unrank_full(&self, mut full: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for (slot, &d) in idx.iter_mut().zip(&self.dims).rev() {
            *slot = full % d;
            full /= d;
        }
        idx
    }

    /// Multi-indices of all live cells in rank order.
    pub fn cells(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.full_of_rank.iter().map(|&f| self.unrank_full(f))
    }
}

fn check_box(dims: &[usize], idx: &[usize]) -> Result<()> {
    if idx.len() != dims.len() {
        return Err(Error::IndexArity {
            expected: dims.len(),
            got: idx.len(),
        });
    }
    for (axis, (&value, &bound)) in idx.iter().zip(dims).enumerate() {
        if value >= bound {
            return Err(Error::IndexOutOfRange { axis, value, bound });
        }
    }
    Ok(())
}

fn advance(dims: &[usize], idx: &mut [usize]) {
    for (slot, &d) in idx.iter_mut().zip(dims).rev() {
        *slot += 1;
        if *slot < d {
            return;
        }
        *slot = 0;
    }
}

/// Structural-zero set of the main diagonal of an `n x n` table.
pub fn diagonal_zeros(n: usize) -> BTreeSet<Vec<usize>> {
    (0..n).map(|i| vec![i, i]).collect()
}
