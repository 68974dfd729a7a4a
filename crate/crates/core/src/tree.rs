//! Arena-backed weighted binary search tree.
//!
//! Node slots are indexed by key rank: an in-order walk always visits
//! `0, 1, ..., n - 1`. Each node stores its own probability and the aggregate
//! probability of its subtree, which rotations keep up to date in O(1).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Violation};
use crate::Result;

/// Absolute tolerance for subtree and total weight checks.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Index of a node in the arena, equal to the rank of its key.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    /// The absent node.
    pub const NIL: NodeId = NodeId(u32::MAX);

    /// Largest number of nodes an arena may hold.
    pub const MAX_NODES: usize = u32::MAX as usize;

    #[inline]
    pub fn new(index: usize) -> Self {
        debug_assert!(index < Self::MAX_NODES);
        NodeId(index as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_nil(self) -> bool {
        self == Self::NIL
    }

    /// `None` for [`NodeId::NIL`].
    #[inline]
    pub fn get(self) -> Option<NodeId> {
        if self.is_nil() {
            None
        } else {
            Some(self)
        }
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            f.write_str("NIL")
        } else {
            write!(f, "#{}", self.0)
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            f.write_str("NIL")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Which child slot of a parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left = 0,
    Right = 1,
}

impl Side {
    #[inline]
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub parent: NodeId,
    /// Indexed by [`Side`].
    pub children: [NodeId; 2],
    pub weight: f64,
    pub subtree_weight: f64,
}

impl Node {
    pub(crate) fn detached(weight: f64) -> Self {
        Node {
            parent: NodeId::NIL,
            children: [NodeId::NIL; 2],
            weight,
            subtree_weight: weight,
        }
    }

    #[inline]
    pub fn child(&self, side: Side) -> NodeId {
        self.children[side as usize]
    }
}

/// A binary search tree over keys `0..n` with a probability at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    nodes: Vec<Node>,
    root: NodeId,
    total_weight: f64,
}

impl WeightedTree {
    /// Builds a tree from per-node child links.
    ///
    /// Parent links and subtree weights are derived from the children. The
    /// result is validated, so malformed input (cycles, unreachable nodes,
    /// keys out of order, weights not summing to 1) is rejected.
    pub fn from_children(
        weights: &[f64],
        root: NodeId,
        left: &[NodeId],
        right: &[NodeId],
    ) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Invalid {
                node: NodeId::NIL,
                violation: Violation::Empty,
            });
        }
        if left.len() != n || right.len() != n {
            return Err(Error::InvalidArgument("child arrays must match weight count"));
        }
        if n > NodeId::MAX_NODES {
            return Err(Error::TooLarge {
                n,
                cap: NodeId::MAX_NODES,
            });
        }
        for (x, (&l, &r)) in left.iter().zip(right).enumerate() {
            for c in [l, r] {
                if !c.is_nil() && c.index() >= n {
                    return Err(Error::Invalid {
                        node: NodeId::new(x),
                        violation: Violation::DanglingChild,
                    });
                }
            }
        }
        if root.is_nil() || root.index() >= n {
            return Err(Error::InvalidNode(root));
        }
        let tree = Self::assemble(weights, root, left, right);
        tree.validate()?;
        Ok(tree)
    }

    /// Unchecked assembly for builders that establish the invariants themselves.
    pub(crate) fn assemble(weights: &[f64], root: NodeId, left: &[NodeId], right: &[NodeId]) -> Self {
        let mut nodes: Vec<Node> = weights.iter().map(|&w| Node::detached(w)).collect();
        for x in 0..nodes.len() {
            let id = NodeId::new(x);
            nodes[x].children = [left[x], right[x]];
            for c in [left[x], right[x]] {
                if let Some(c) = c.get() {
                    // Malformed input is caught by validate() afterwards.
                    if nodes[c.index()].parent.is_nil() {
                        nodes[c.index()].parent = id;
                    }
                }
            }
        }
        nodes[root.index()].parent = NodeId::NIL;
        let mut tree = WeightedTree {
            nodes,
            root,
            total_weight: weights.iter().sum(),
        };
        tree.recompute_subtree_weights();
        tree
    }

    /// Wraps fully linked nodes; the caller guarantees they form a valid tree.
    pub(crate) fn from_linked_nodes(nodes: Vec<Node>, root: NodeId, total_weight: f64) -> Self {
        WeightedTree {
            nodes,
            root,
            total_weight,
        }
    }

    /// Recomputes every cached subtree weight bottom-up.
    pub fn recompute_subtree_weights(&mut self) {
        let order = self.preorder();
        for &x in order.iter().rev() {
            self.refresh(x);
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        self.root
    }

    #[inline]
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    #[inline]
    pub fn node(&self, x: NodeId) -> &Node {
        &self.nodes[x.index()]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Direct access for tests that need to corrupt a tree.
    #[doc(hidden)]
    pub fn nodes_mut(&mut self) -> &mut [Node] {
        &mut self.nodes
    }

    #[inline]
    pub fn contains(&self, x: NodeId) -> bool {
        !x.is_nil() && x.index() < self.nodes.len()
    }

    #[inline]
    pub fn parent(&self, x: NodeId) -> NodeId {
        self.nodes[x.index()].parent
    }

    #[inline]
    pub fn child(&self, x: NodeId, side: Side) -> NodeId {
        self.nodes[x.index()].children[side as usize]
    }

    #[inline]
    pub fn left(&self, x: NodeId) -> NodeId {
        self.child(x, Side::Left)
    }

    #[inline]
    pub fn right(&self, x: NodeId) -> NodeId {
        self.child(x, Side::Right)
    }

    #[inline]
    pub fn weight(&self, x: NodeId) -> f64 {
        if x.is_nil() {
            0.0
        } else {
            self.nodes[x.index()].weight
        }
    }

    /// Aggregate weight of the subtree rooted at `x`; zero for NIL.
    #[inline]
    pub fn subtree_weight(&self, x: NodeId) -> f64 {
        if x.is_nil() {
            0.0
        } else {
            self.nodes[x.index()].subtree_weight
        }
    }

    /// Which child of its parent `x` is, or `None` for the root.
    #[inline]
    pub fn side_of(&self, x: NodeId) -> Option<Side> {
        let p = self.parent(x).get()?;
        Some(if self.left(p) == x { Side::Left } else { Side::Right })
    }

    fn check_non_root(&self, x: NodeId) -> Result<Side> {
        if !self.contains(x) {
            return Err(Error::InvalidNode(x));
        }
        self.side_of(x).ok_or(Error::RootNode(x))
    }

    /// The other child of `x`'s parent, possibly NIL.
    pub fn sibling(&self, x: NodeId) -> Result<NodeId> {
        let side = self.check_non_root(x)?;
        Ok(self.child(self.parent(x), side.opposite()))
    }

    /// The child of `x` on the same side as `x` hangs off its parent.
    pub fn like_minded_child(&self, x: NodeId) -> Result<NodeId> {
        let side = self.check_non_root(x)?;
        Ok(self.child(x, side))
    }

    /// Depth by pointer chasing: NIL is 0, the root is 1.
    pub fn depth(&self, x: NodeId) -> usize {
        let mut d = 0;
        let mut cur = x;
        while !cur.is_nil() {
            d += 1;
            cur = self.parent(cur);
        }
        d
    }

    /// Depth of every node, from a single walk down from the root.
    pub fn depths(&self) -> Vec<u32> {
        let mut depths = vec![0u32; self.nodes.len()];
        let mut stack = vec![(self.root, 1u32)];
        while let Some((x, d)) = stack.pop() {
            depths[x.index()] = d;
            for c in self.nodes[x.index()].children {
                if !c.is_nil() {
                    stack.push((c, d + 1));
                }
            }
        }
        depths
    }

    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0) as usize
    }

    /// Expected number of comparisons for a successful lookup.
    pub fn cost(&self) -> f64 {
        // Each node's weight is counted once per ancestor-or-self, so summing
        // subtree weights gives sum(depth * weight) in one sequential pass.
        self.nodes.iter().map(|node| node.subtree_weight).sum()
    }

    /// Rotates at `x`, lifting its child on the side opposite `direction`.
    ///
    /// A right rotation lifts the left child; a left rotation lifts the right
    /// child. Only the two rotated nodes have their subtree weights changed.
    pub fn rotate(&mut self, x: NodeId, direction: Side) -> Result<()> {
        if !self.contains(x) {
            return Err(Error::InvalidNode(x));
        }
        let up = direction.opposite();
        let y = self.child(x, up);
        if y.is_nil() {
            return Err(Error::MissingChild { node: x, side: up });
        }
        let inner = self.child(y, direction);
        let grand = self.parent(x);
        let total = self.nodes[x.index()].subtree_weight;

        self.nodes[x.index()].children[up as usize] = inner;
        if !inner.is_nil() {
            self.nodes[inner.index()].parent = x;
        }
        self.nodes[y.index()].children[direction as usize] = x;
        self.nodes[x.index()].parent = y;
        self.nodes[y.index()].parent = grand;
        if grand.is_nil() {
            self.root = y;
        } else {
            let g = &mut self.nodes[grand.index()];
            let slot = if g.children[0] == x { 0 } else { 1 };
            g.children[slot] = y;
        }

        // y now spans exactly the keys x spanned, so it inherits the total
        // unchanged and ancestors' cached sums stay bit-identical.
        self.refresh(x);
        self.nodes[y.index()].subtree_weight = total;
        Ok(())
    }

    /// Moves `x` up one level by rotating at its parent. No-op on the root.
    pub fn bump(&mut self, x: NodeId) {
        let Some(side) = self.side_of(x) else {
            return;
        };
        let parent = self.parent(x);
        // x is on `side`, so rotate towards the opposite side.
        self.rotate(parent, side.opposite())
            .expect("parent of a child always has that child");
    }

    #[inline]
    fn refresh(&mut self, x: NodeId) {
        let [l, r] = self.nodes[x.index()].children;
        let sw = self.nodes[x.index()].weight + self.subtree_weight(l) + self.subtree_weight(r);
        self.nodes[x.index()].subtree_weight = sw;
    }

    /// Nodes in preorder (parents before children).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            out.push(x);
            let [l, r] = self.nodes[x.index()].children;
            if !r.is_nil() {
                stack.push(r);
            }
            if !l.is_nil() {
                stack.push(l);
            }
        }
        out
    }

    pub fn in_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = Vec::new();
        let mut cur = self.root;
        while !cur.is_nil() || !stack.is_empty() {
            while !cur.is_nil() {
                stack.push(cur);
                cur = self.left(cur);
            }
            let x = stack.pop().expect("stack is non-empty");
            out.push(x);
            cur = self.right(x);
        }
        out
    }

    /// Checks every structural invariant, reporting the first violation found.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        let fail = |node: NodeId, violation| Err(Error::Invalid { node, violation });
        if n == 0 {
            return fail(NodeId::NIL, Violation::Empty);
        }
        if !self.contains(self.root) {
            return Err(Error::InvalidNode(self.root));
        }
        if !self.parent(self.root).is_nil() {
            return fail(self.root, Violation::RootHasParent);
        }

        for (i, node) in self.nodes.iter().enumerate() {
            let x = NodeId::new(i);
            if !node.weight.is_finite() || node.weight < 0.0 {
                return fail(x, Violation::BadWeight);
            }
            for c in node.children {
                if c.is_nil() {
                    continue;
                }
                if c.index() >= n {
                    return fail(x, Violation::DanglingChild);
                }
                if self.parent(c) != x {
                    return fail(c, Violation::ParentLink);
                }
            }
            if let Some(p) = node.parent.get() {
                if p.index() >= n {
                    return fail(x, Violation::ParentLink);
                }
                if self.left(p) != x && self.right(p) != x {
                    return fail(x, Violation::ParentLink);
                }
            } else if x != self.root {
                return fail(x, Violation::Unreachable);
            }
        }

        // In-order walk; `seen` stops a cycle from looping forever.
        let mut seen = vec![false; n];
        let mut next_key = 0usize;
        let mut stack = Vec::new();
        let mut cur = self.root;
        while !cur.is_nil() || !stack.is_empty() {
            while !cur.is_nil() {
                if seen[cur.index()] {
                    return fail(cur, Violation::Cycle);
                }
                seen[cur.index()] = true;
                stack.push(cur);
                cur = self.left(cur);
            }
            let x = stack.pop().expect("stack is non-empty");
            if x.index() != next_key {
                return fail(x, Violation::KeyOrder);
            }
            next_key += 1;
            cur = self.right(x);
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return fail(NodeId::new(i), Violation::Unreachable);
        }

        for &x in self.preorder().iter().rev() {
            let node = &self.nodes[x.index()];
            let actual = node.weight
                + self.subtree_weight(node.children[0])
                + self.subtree_weight(node.children[1]);
            if (actual - node.subtree_weight).abs() > WEIGHT_TOLERANCE {
                return fail(
                    x,
                    Violation::SubtreeWeight {
                        stored: node.subtree_weight,
                        actual,
                    },
                );
            }
        }

        let total: f64 = self.nodes.iter().map(|n| n.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE || (self.total_weight - total).abs() > WEIGHT_TOLERANCE {
            return fail(self.root, Violation::TotalWeight(total));
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn sibling_in_rotation_figure() {
        let t = before_rotation();
        assert_eq!(t.sibling(id(B)).unwrap(), id(E));
        assert_eq!(t.sibling(id(C)).unwrap(), id(D));
        assert_eq!(t.sibling(id(A)), Err(Error::RootNode(id(A))));
        assert_eq!(t.sibling(NIL), Err(Error::InvalidNode(NIL)));
    }

    #[test]
    fn sibling_of_only_child_is_nil() {
        let t = tree(&[0.5, 0.5], 1, &[(None, None), (Some(0), None)]);
        assert_eq!(t.sibling(id(0)).unwrap(), NIL);
    }

    #[test]
    fn like_minded_children() {
        let t = before_rotation();
        assert_eq!(t.like_minded_child(id(B)).unwrap(), id(C));
        assert_eq!(t.like_minded_child(id(C)).unwrap(), NIL);
        let t = after_rotation();
        assert_eq!(t.like_minded_child(id(A)).unwrap(), id(E));
        assert_eq!(t.like_minded_child(id(B)), Err(Error::RootNode(id(B))));
    }

    #[test]
    fn depth_recurrence() {
        let t = before_rotation();
        assert_eq!(t.depth(NIL), 0);
        assert_eq!(t.depth(id(A)), 1);
        assert_eq!(t.depth(id(C)), 3);
        for (x, &d) in t.depths().iter().enumerate() {
            assert_eq!(d as usize, t.depth(id(x)));
        }
    }

    #[test]
    fn cost_examples() {
        assert!((stuck().cost() - 1.98).abs() < 1e-12);
        let single = tree(&[1.0], 0, &[(None, None)]);
        assert_eq!(single.cost(), 1.0);
        // left chain 2 -> 1 -> 0
        let chain = tree(
            &[6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0],
            2,
            &[(None, None), (Some(0), None), (Some(1), None)],
        );
        assert!((chain.cost() - 26.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn rotations_match_figures() {
        let mut t = before_rotation();
        t.rotate(id(A), Side::Right).unwrap();
        assert_eq!(t, after_rotation());
        t.rotate(id(B), Side::Left).unwrap();
        assert_eq!(t, before_rotation());
    }

    #[test]
    fn rotate_without_child_fails() {
        let mut t = before_rotation();
        assert_eq!(
            t.rotate(id(C), Side::Right),
            Err(Error::MissingChild {
                node: id(C),
                side: Side::Left
            })
        );
        assert_eq!(t, before_rotation());
    }

    #[test]
    fn bump_examples() {
        let mut t = before_rotation();
        t.bump(id(B));
        assert_eq!(t, after_rotation());
        t.bump(id(A));
        assert_eq!(t, before_rotation());
        let root = t.root();
        t.bump(root);
        assert_eq!(t, before_rotation());
    }

    #[test]
    fn validate_reports_corrupt_parent() {
        let mut t = before_rotation();
        t.validate().unwrap();
        t.nodes_mut()[D].parent = id(E);
        match t.validate() {
            Err(Error::Invalid { node, violation: Violation::ParentLink }) => assert_eq!(node, id(D)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_reports_subtree_weight() {
        let mut t = before_rotation();
        t.nodes_mut()[B].subtree_weight += 0.01;
        assert!(matches!(
            t.validate(),
            Err(Error::Invalid {
                violation: Violation::SubtreeWeight { .. },
                ..
            })
        ));
    }

    #[test]
    fn from_children_rejects_key_disorder() {
        // root 0 with left child 1 breaks the search order
        let err = WeightedTree::from_children(&[0.5, 0.5], id(0), &[id(1), NIL], &[NIL, NIL]).unwrap_err();
        assert!(matches!(
            err,
            Error::Invalid {
                violation: Violation::KeyOrder,
                ..
            }
        ));
    }

    #[test]
    fn from_children_rejects_unreachable_and_bad_total() {
        let err = WeightedTree::from_children(&[0.5, 0.5], id(0), &[NIL, NIL], &[NIL, NIL]).unwrap_err();
        assert!(matches!(err, Error::Invalid { violation: Violation::Unreachable, .. }));
        let err = WeightedTree::from_children(&[0.5, 0.4], id(0), &[NIL, NIL], &[id(1), NIL]).unwrap_err();
        assert!(matches!(err, Error::Invalid { violation: Violation::TotalWeight(_), .. }));
    }

    #[test]
    fn in_order_is_key_order() {
        let t = after_rotation();
        let keys: Vec<usize> = t.in_order().into_iter().map(NodeId::index).collect();
        assert_eq!(keys, [0, 1, 2, 3, 4]);
    }
}
