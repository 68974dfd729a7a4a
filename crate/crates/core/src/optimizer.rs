//! Hill climbing by bumps.
//!
//! The merit of bumping a non-root node `x` is the exact drop in cost,
//!
//! ```text
//! merit(x) = p(x) + P(like_minded_child(x)) - p(parent(x)) - P(sibling(x))
//! ```
//!
//! where `p` is a node's own weight and `P` its subtree weight. The optimizer
//! repeatedly bumps a node of maximal positive merit. A bump changes the
//! subtree weight of two nodes and the merit of at most five (the rotated
//! pair and the three subtrees that move), so each step costs O(log n) for
//! the queue update.

use alloc::vec;
use alloc::vec::Vec;

use dary_heap::QuaternaryHeap;

use crate::error::Error;
use crate::tree::{NodeId, WeightedTree};
use crate::Result;

/// Smallest merit treated as an improvement.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Merit of bumping `x`; zero for the root.
pub fn merit(tree: &WeightedTree, x: NodeId) -> f64 {
    let Some(side) = tree.side_of(x) else {
        return 0.0;
    };
    let parent = tree.parent(x);
    let like_minded = tree.child(x, side);
    let sibling = tree.child(parent, side.opposite());
    tree.weight(x) + tree.subtree_weight(like_minded) - tree.weight(parent) - tree.subtree_weight(sibling)
}

/// Merits of every node in one pass.
pub fn merit_all(tree: &WeightedTree) -> Vec<f64> {
    (0..tree.len()).map(|x| merit(tree, NodeId::new(x))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Only merits strictly above this are bumped.
    pub epsilon: f64,
    /// Stop after this many bumps.
    pub max_bumps: Option<u64>,
    /// Record the bumped node of every step.
    pub record_trace: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            epsilon: DEFAULT_EPSILON,
            max_bumps: None,
            record_trace: false,
        }
    }
}

impl OptimizerConfig {
    pub fn with_max_bumps(max_bumps: u64) -> Self {
        OptimizerConfig {
            max_bumps: Some(max_bumps),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::InvalidArgument("epsilon must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// No node has merit above epsilon.
    Quiescent,
    /// The bump budget ran out while improving bumps remained.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub bumps_performed: u64,
    pub cost_before: f64,
    pub cost_after: f64,
    pub terminated: Termination,
    pub bumped_nodes: Option<Vec<NodeId>>,
}

/// Maps a float to an integer with the same ordering (NaN excluded).
fn ordered_bits(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | 1 << 63
    }
}

fn from_ordered_bits(b: u64) -> f64 {
    f64::from_bits(if b >> 63 == 1 { b & !(1 << 63) } else { !b })
}

/// Heap entry packed into one integer so comparisons are a single compare.
///
/// High to low: merit, complemented node id (so lower ids win ties), stamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Entry(u128);

impl Entry {
    fn new(merit: f64, node: NodeId, stamp: u32) -> Self {
        let id = !(node.index() as u32);
        Entry(u128::from(ordered_bits(merit)) << 64 | u128::from(id) << 32 | u128::from(stamp))
    }

    fn merit(self) -> f64 {
        from_ordered_bits((self.0 >> 64) as u64)
    }

    fn node(self) -> NodeId {
        NodeId::new(!((self.0 >> 32) as u32) as usize)
    }

    fn stamp(self) -> u32 {
        self.0 as u32
    }
}

/// Lazy max-merit priority queue.
///
/// Recomputing a node's merit bumps its stamp; heap entries carrying an older
/// stamp are stale and skipped when popped. Only merits above `epsilon` are
/// queued, so the heap never holds more than one valid entry per node.
#[derive(Debug, Clone)]
pub struct MeritQueue {
    heap: QuaternaryHeap<Entry>,
    stamps: Vec<u32>,
    epsilon: f64,
}

impl MeritQueue {
    pub fn new(tree: &WeightedTree, epsilon: f64) -> Self {
        let entries: Vec<Entry> = merit_all(tree)
            .into_iter()
            .enumerate()
            .filter(|&(_, m)| m > epsilon)
            .map(|(x, m)| Entry::new(m, NodeId::new(x), 0))
            .collect();
        MeritQueue {
            heap: QuaternaryHeap::from(entries),
            stamps: vec![0; tree.len()],
            epsilon,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Heap size including stale entries.
    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn is_valid(&self, e: Entry) -> bool {
        self.stamps[e.node().index()] == e.stamp()
    }

    /// The queued merit of every node that has a live entry, indexed by node.
    pub fn live_merits(&self) -> Vec<Option<f64>> {
        let mut live = vec![None; self.stamps.len()];
        for &e in self.heap.iter().filter(|&&e| self.is_valid(e)) {
            live[e.node().index()] = Some(e.merit());
        }
        live
    }

    /// Drops stale entries from the top and returns the best live one.
    pub fn peek(&mut self) -> Option<(NodeId, f64)> {
        while let Some(&top) = self.heap.peek() {
            if self.is_valid(top) {
                return Some((top.node(), top.merit()));
            }
            self.heap.pop();
        }
        None
    }

    /// Removes and returns the node with the highest merit.
    pub fn pop(&mut self) -> Option<(NodeId, f64)> {
        let best = self.peek()?;
        self.heap.pop();
        // Its merit is about to change; nothing valid remains for it.
        let stamp = &mut self.stamps[best.0.index()];
        *stamp = stamp.wrapping_add(1);
        Some(best)
    }

    /// Recomputes the merit of `x` and queues it if positive.
    pub fn refresh(&mut self, tree: &WeightedTree, x: NodeId) {
        let m = merit(tree, x);
        let stamp = &mut self.stamps[x.index()];
        *stamp = stamp.wrapping_add(1);
        if m > self.epsilon {
            let e = Entry::new(m, x, *stamp);
            self.heap.push(e);
        }
    }
}

/// Performs one bump of a maximal-merit node, if any merit exceeds `epsilon`.
pub fn optimize_step(tree: &mut WeightedTree, queue: &mut MeritQueue, epsilon: f64) -> Option<NodeId> {
    let (x, m) = queue.peek()?;
    if m <= epsilon {
        return None;
    }
    queue.pop();

    let parent = tree.parent(x);
    let side = tree.side_of(x).expect("the root never has positive merit");
    let outer = tree.child(x, side);
    let inner = tree.child(x, side.opposite());
    let sibling = tree.child(parent, side.opposite());
    tree.bump(x);

    for y in [x, parent, outer, inner, sibling] {
        if !y.is_nil() {
            queue.refresh(tree, y);
        }
    }
    Some(x)
}

/// Bumps maximal-merit nodes until quiescence or until the budget is spent.
pub fn optimize(tree: &mut WeightedTree, config: &OptimizerConfig) -> Result<OptimizeReport> {
    config.validate()?;
    let cost_before = tree.cost();
    let mut queue = MeritQueue::new(tree, config.epsilon);
    let mut trace = config.record_trace.then(Vec::new);
    let mut bumps = 0u64;

    let terminated = loop {
        if config.max_bumps.is_some_and(|k| bumps >= k) {
            break match queue.peek() {
                Some((_, m)) if m > config.epsilon => Termination::BudgetExhausted,
                _ => Termination::Quiescent,
            };
        }
        match optimize_step(tree, &mut queue, config.epsilon) {
            Some(x) => {
                bumps += 1;
                if let Some(trace) = trace.as_mut() {
                    trace.push(x);
                }
            }
            None => break Termination::Quiescent,
        }
    };

    Ok(OptimizeReport {
        bumps_performed: bumps,
        cost_before,
        cost_after: tree.cost(),
        terminated,
        bumped_nodes: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_simple_random, build_treap, build_weight_balanced_with, BalanceRule};
    use crate::oracle::recompute_cost;
    use crate::tree::fixtures::*;
    use crate::weights::WeightProfile;
    use proptest::prelude::*;

    #[test]
    fn entry_order_is_merit_then_lowest_node() {
        let vals = [-1.5, -0.0, 0.0, 1e-300, 0.25, 1.0, f64::INFINITY];
        for w in vals.windows(2) {
            assert!(ordered_bits(w[0]) <= ordered_bits(w[1]));
        }
        for v in vals {
            assert_eq!(from_ordered_bits(ordered_bits(v)).to_bits(), v.to_bits());
        }
        let a = Entry::new(0.5, NodeId::new(3), 0);
        assert!(Entry::new(0.6, NodeId::new(9), 0) > a);
        assert!(Entry::new(0.5, NodeId::new(2), 0) > a);
        assert_eq!((a.merit(), a.node(), a.stamp()), (0.5, NodeId::new(3), 0));
    }

    #[test]
    fn merit_on_stuck_tree() {
        let t = stuck();
        assert!((merit(&t, id(0)) + 0.02).abs() < 1e-15);
        assert!((merit(&t, id(2)) + 0.02).abs() < 1e-15);
        assert_eq!(merit(&t, id(1)), 0.0);
    }

    #[test]
    fn merit_on_weight_balanced_three() {
        let t = build_weight_balanced_with(&WeightProfile::zipf_ranked(3, 1.0).unwrap(), BalanceRule::MinImbalance);
        assert!((merit(&t, id(0)) - 1.0 / 11.0).abs() < 1e-15);
        assert_eq!(merit(&t, t.root()), 0.0);
    }

    #[test]
    fn merit_all_single_node() {
        let t = build_treap(&WeightProfile::uniform(1).unwrap());
        assert_eq!(merit_all(&t), [0.0]);
    }

    #[test]
    fn optimize_weight_balanced_three() {
        let mut t = build_weight_balanced_with(&WeightProfile::zipf_ranked(3, 1.0).unwrap(), BalanceRule::MinImbalance);
        let cfg = OptimizerConfig {
            record_trace: true,
            ..OptimizerConfig::default()
        };
        let r = optimize(&mut t, &cfg).unwrap();
        assert_eq!(r.bumps_performed, 1);
        assert_eq!(r.bumped_nodes.as_deref(), Some(&[id(0)][..]));
        assert!((r.cost_before - 19.0 / 11.0).abs() < 1e-12);
        assert!((r.cost_after - 18.0 / 11.0).abs() < 1e-12);
        assert_eq!(r.terminated, Termination::Quiescent);
    }

    #[test]
    fn optimize_stuck_tree_does_nothing() {
        let mut t = stuck();
        let r = optimize(&mut t, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.bumps_performed, 0);
        assert!((r.cost_after - 1.98).abs() < 1e-12);
        assert_eq!(r.terminated, Termination::Quiescent);
        assert_eq!(t, stuck());
    }

    #[test]
    fn zero_budget() {
        let mut t = build_weight_balanced_with(&WeightProfile::zipf_ranked(3, 1.0).unwrap(), BalanceRule::MinImbalance);
        let before = t.clone();
        let r = optimize(&mut t, &OptimizerConfig::with_max_bumps(0)).unwrap();
        assert_eq!(r.bumps_performed, 0);
        assert_eq!(r.cost_before, r.cost_after);
        assert_eq!(r.terminated, Termination::BudgetExhausted);
        assert_eq!(t, before);

        let mut t = stuck();
        let r = optimize(&mut t, &OptimizerConfig::with_max_bumps(0)).unwrap();
        assert_eq!(r.terminated, Termination::Quiescent);
    }

    #[test]
    fn bad_epsilon_rejected() {
        let mut t = stuck();
        for epsilon in [-1.0, f64::NAN, f64::INFINITY] {
            let cfg = OptimizerConfig {
                epsilon,
                ..OptimizerConfig::default()
            };
            assert!(matches!(optimize(&mut t, &cfg), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn step_on_quiescent_tree() {
        let mut t = stuck();
        let mut q = MeritQueue::new(&t, DEFAULT_EPSILON);
        assert_eq!(optimize_step(&mut t, &mut q, DEFAULT_EPSILON), None);
        assert_eq!(t, stuck());
    }

    #[test]
    fn equal_merits_pick_lowest_id() {
        // Outer grandchildren 0 and 4 both have merit 0.3 - 0.1 = 0.2.
        let mut t = tree(
            &[0.3, 0.1, 0.2, 0.1, 0.3],
            2,
            &[(None, None), (Some(0), None), (Some(1), Some(3)), (None, Some(4)), (None, None)],
        );
        assert_eq!(merit(&t, id(0)), merit(&t, id(4)));
        let mut q = MeritQueue::new(&t, DEFAULT_EPSILON);
        assert_eq!(optimize_step(&mut t, &mut q, DEFAULT_EPSILON), Some(id(0)));
    }

    fn random_tree(n: usize, seed: u64) -> WeightedTree {
        build_simple_random(&WeightProfile::zipf(n, 1.0, seed).unwrap(), seed)
    }

    proptest! {
        #[test]
        fn steps_decrease_cost_by_merit(n in 2usize..128, seed: u64) {
            let mut t = random_tree(n, seed);
            let mut q = MeritQueue::new(&t, DEFAULT_EPSILON);
            for _ in 0..50 {
                let before = recompute_cost(&t);
                let expected = q.clone().peek().map(|(_, m)| m);
                let Some(x) = optimize_step(&mut t, &mut q, DEFAULT_EPSILON) else { break };
                let m = expected.unwrap();
                prop_assert!(m > DEFAULT_EPSILON);
                prop_assert!((before - recompute_cost(&t) - m).abs() <= 1e-12);
                // exactly the nodes with positive merit are queued
                let fresh = merit_all(&t);
                for (y, live) in q.live_merits().into_iter().enumerate() {
                    let queued = fresh[y] > DEFAULT_EPSILON;
                    prop_assert_eq!(live.is_some(), queued, "node {} after bumping {:?}", y, x);
                }
            }
        }

        #[test]
        fn incremental_merits_match_full_recompute(n in 2usize..256, seed: u64) {
            let mut t = random_tree(n, seed);
            let mut q = MeritQueue::new(&t, DEFAULT_EPSILON);
            while optimize_step(&mut t, &mut q, DEFAULT_EPSILON).is_some() {
                let fresh = merit_all(&t);
                for (live, m) in q.live_merits().into_iter().zip(fresh) {
                    if let Some(live) = live {
                        prop_assert_eq!(live.to_bits(), m.to_bits());
                    }
                }
            }
        }

        #[test]
        fn quiescence_is_certified(n in 1usize..300, seed: u64) {
            let mut t = random_tree(n, seed);
            let r = optimize(&mut t, &OptimizerConfig::default()).unwrap();
            prop_assert_eq!(r.terminated, Termination::Quiescent);
            prop_assert!(r.cost_after <= r.cost_before);
            prop_assert!(merit_all(&t).iter().all(|&m| m <= DEFAULT_EPSILON));
            prop_assert!((r.bumps_performed as f64) <= r.cost_before / DEFAULT_EPSILON);
            prop_assert!(t.validate().is_ok());
        }

        #[test]
        fn budget_is_respected(n in 2usize..300, seed: u64, k in 0u64..20) {
            let mut t = random_tree(n, seed);
            let r = optimize(&mut t, &OptimizerConfig::with_max_bumps(k)).unwrap();
            prop_assert!(r.bumps_performed <= k);
            if r.terminated == Termination::BudgetExhausted {
                prop_assert_eq!(r.bumps_performed, k);
                prop_assert!(merit_all(&t).iter().any(|&m| m > DEFAULT_EPSILON));
            }
        }
    }
}
