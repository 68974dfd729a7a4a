//! Brute-force ground truth for small instances.
//!
//! Nothing here reads cached subtree weights or calls the optimizer, the DP or
//! the builders, so the checks built on it stay independent of the code they
//! verify.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::tree::WeightedTree;
use crate::weights::WeightProfile;
use crate::Result;

/// Largest key count [`exhaustive_optimal`] accepts.
pub const MAX_EXHAUSTIVE: usize = 12;

/// Largest tree [`recompute_merits`] accepts.
pub const MAX_RECOMPUTE: usize = 256;

/// Walks every BST shape on keys `0..n`, exactly once each.
///
/// Shapes are reported as the depth of every key (root at depth 1).
#[derive(Debug, Clone, Copy)]
pub struct ShapeEnumerator {
    n: usize,
}

impl ShapeEnumerator {
    pub fn new(n: usize) -> Self {
        ShapeEnumerator { n }
    }

    /// Calls `visit` with the depth vector of each shape; returns how many.
    pub fn for_each(&self, mut visit: impl FnMut(&[u32])) -> u64 {
        let mut depths = vec![0u32; self.n];
        let mut count = 0u64;
        let mut done = |d: &mut [u32]| {
            count += 1;
            visit(d);
        };
        place(0, self.n, 1, &mut depths, &mut done);
        count
    }
}

/// Places keys `lo..hi` below depth `depth - 1` in every possible way, calling
/// `then` once per completed placement.
fn place(lo: usize, hi: usize, depth: u32, depths: &mut [u32], then: &mut dyn FnMut(&mut [u32])) {
    if lo >= hi {
        then(depths);
        return;
    }
    for r in lo..hi {
        depths[r] = depth;
        place(lo, r, depth + 1, depths, &mut |d: &mut [u32]| {
            place(r + 1, hi, depth + 1, d, then)
        });
    }
}

/// Catalan number `C(n)`: how many BST shapes exist on `n` keys.
pub fn catalan(n: usize) -> u64 {
    let mut c = 1u64;
    for k in 0..n as u64 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveOptimum {
    pub cost: f64,
    /// Number of shapes examined.
    pub count: u64,
    /// Depth of each key in the first minimum-cost shape found.
    pub depths: Vec<u32>,
}

/// Minimum cost over every BST shape, by enumeration.
pub fn exhaustive_optimal(profile: &WeightProfile) -> Result<ExhaustiveOptimum> {
    let n = profile.len();
    if n > MAX_EXHAUSTIVE {
        return Err(Error::TooLarge {
            n,
            cap: MAX_EXHAUSTIVE,
        });
    }
    let probs = profile.probs();
    let mut best = ExhaustiveOptimum {
        cost: f64::INFINITY,
        count: 0,
        depths: Vec::new(),
    };
    let count = ShapeEnumerator::new(n).for_each(|depths| {
        let c: f64 = depths.iter().zip(probs).map(|(&d, &p)| f64::from(d) * p).sum();
        if c < best.cost {
            best.cost = c;
            best.depths = depths.to_vec();
        }
    });
    best.count = count;
    Ok(best)
}

/// Cost from depths found by a level-order walk over child links only.
pub fn recompute_cost(tree: &WeightedTree) -> f64 {
    let mut total = 0.0;
    let mut level = vec![tree.root()];
    let mut depth = 1.0;
    while !level.is_empty() {
        let mut next = Vec::with_capacity(level.len() * 2);
        for &x in &level {
            let node = tree.node(x);
            total += depth * node.weight;
            next.extend(node.children.iter().copied().filter(|c| !c.is_nil()));
        }
        level = next;
        depth += 1.0;
    }
    total
}

/// `cost(T) - cost(T^x)` for every node, by literally bumping a copy.
pub fn recompute_merits(tree: &WeightedTree) -> Result<Vec<f64>> {
    if tree.len() > MAX_RECOMPUTE {
        return Err(Error::TooLarge {
            n: tree.len(),
            cap: MAX_RECOMPUTE,
        });
    }
    let base = recompute_cost(tree);
    Ok(tree
        .in_order()
        .into_iter()
        .map(|x| {
            if x == tree.root() {
                return 0.0;
            }
            let mut bumped = tree.clone();
            bumped.bump(x);
            base - recompute_cost(&bumped)
        })
        .collect())
}
