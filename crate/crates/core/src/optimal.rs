//! Exact minimum-cost BST by dynamic programming.
//!
//! `cost(i, j) = min_r [cost(i, r-1) + cost(r+1, j)] + weight(i..=j)`, with the
//! search for `r` confined to `root(i, j-1) ..= root(i+1, j)` (Knuth), which
//! makes the fill O(n²) overall. Rows are filled from the last key backwards so
//! the root window only needs the previous row.

use alloc::vec;
use alloc::vec::Vec;

use crate::builders::prefix_sums;
use crate::error::Error;
use crate::tree::{NodeId, WeightedTree};
use crate::weights::WeightProfile;
use crate::Result;

/// Largest instance solved unless a different cap is passed.
pub const DEFAULT_OPTIMAL_CAP: usize = 20_000;

/// Column-major upper triangle: column `j` holds rows `0..=j`.
#[inline]
fn tri(i: usize, j: usize) -> usize {
    j * (j + 1) / 2 + i
}

/// Filled cost and root tables for every key range.
#[derive(Debug, Clone)]
pub struct DpTables {
    n: usize,
    cost: Vec<f64>,
    root: Vec<u32>,
    prefix: Vec<f64>,
}

impl DpTables {
    pub fn solve(profile: &WeightProfile, cap: usize) -> Result<Self> {
        let n = check_size(profile, cap)?;
        let prefix = prefix_sums(profile.probs());
        let mut root = vec![0u32; n * (n + 1) / 2];
        let cost = fill(profile.probs(), &prefix, Some(&mut root))?;
        Ok(DpTables { n, cost, root, prefix })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Minimal cost of a subtree over keys `i..=j`, rooted at depth 1.
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        assert!(i <= j && j < self.n);
        self.cost[tri(i, j)]
    }

    /// Chosen root of keys `i..=j`.
    pub fn root(&self, i: usize, j: usize) -> usize {
        assert!(i <= j && j < self.n);
        self.root[tri(i, j)] as usize
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn total_cost(&self) -> f64 {
        self.cost(0, self.n - 1)
    }

    /// Verifies `root(i, j-1) <= root(i, j) <= root(i+1, j)` for every range.
    pub fn check_monotone(&self) -> Result<()> {
        for j in 1..self.n {
            for i in 0..j {
                let r = self.root(i, j);
                if self.root(i, j - 1) > r || r > self.root(i + 1, j) {
                    return Err(Error::NonMonotoneRoots { i, j });
                }
            }
        }
        Ok(())
    }

    pub fn to_tree(&self, profile: &WeightProfile) -> WeightedTree {
        let mut left = vec![NodeId::NIL; self.n];
        let mut right = vec![NodeId::NIL; self.n];
        let top = NodeId::new(self.root(0, self.n - 1));
        let mut work = vec![(0usize, self.n - 1)];
        while let Some((i, j)) = work.pop() {
            let r = self.root(i, j);
            if r > i {
                left[r] = NodeId::new(self.root(i, r - 1));
                work.push((i, r - 1));
            }
            if r < j {
                right[r] = NodeId::new(self.root(r + 1, j));
                work.push((r + 1, j));
            }
        }
        let tree = WeightedTree::assemble(profile.probs(), top, &left, &right);
        debug_assert!(tree.validate().is_ok());
        tree
    }
}

fn check_size(profile: &WeightProfile, cap: usize) -> Result<usize> {
    let n = profile.len();
    if n == 0 {
        return Err(Error::InvalidArgument("profile needs at least one key"));
    }
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    Ok(n)
}

/// Fills the cost table, optionally recording every root.
fn fill(probs: &[f64], prefix: &[f64], mut roots: Option<&mut [u32]>) -> Result<Vec<f64>> {
    let n = probs.len();
    let mut cost = vec![0.0f64; n * (n + 1) / 2];
    let mut row = vec![0.0f64; n];
    let mut row_root = vec![0u32; n];
    let mut below_root = vec![0u32; n];

    for i in (0..n).rev() {
        row[i] = probs[i];
        row_root[i] = i as u32;
        cost[tri(i, i)] = probs[i];
        if let Some(roots) = roots.as_deref_mut() {
            roots[tri(i, i)] = i as u32;
        }
        for j in i + 1..n {
            let lo = row_root[j - 1] as usize;
            let hi = below_root[j] as usize;
            if lo > hi {
                return Err(Error::NonMonotoneRoots { i, j });
            }
            let column = &cost[tri(0, j)..=tri(j, j)];
            let mut best = f64::INFINITY;
            let mut best_r = lo;
            for r in lo..=hi {
                let left = if r > i { row[r - 1] } else { 0.0 };
                let right = if r < j { column[r + 1] } else { 0.0 };
                let c = left + right;
                if c < best {
                    best = c;
                    best_r = r;
                }
            }
            let c = best + (prefix[j + 1] - prefix[i]);
            row[j] = c;
            row_root[j] = best_r as u32;
            cost[tri(i, j)] = c;
            if let Some(roots) = roots.as_deref_mut() {
                roots[tri(i, j)] = best_r as u32;
            }
        }
        core::mem::swap(&mut row_root, &mut below_root);
    }
    Ok(cost)
}

/// A minimum-cost tree for `profile` and its cost.
pub fn optimal_tree(profile: &WeightProfile, cap: usize) -> Result<(WeightedTree, f64)> {
    let tables = DpTables::solve(profile, cap)?;
    Ok((tables.to_tree(profile), tables.total_cost()))
}

/// Minimum cost only; skips the root table.
pub fn optimal_cost_only(profile: &WeightProfile, cap: usize) -> Result<f64> {
    let n = check_size(profile, cap)?;
    let prefix = prefix_sums(profile.probs());
    let cost = fill(profile.probs(), &prefix, None)?;
    Ok(cost[tri(0, n - 1)])
}
