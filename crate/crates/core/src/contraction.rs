//! Prune-and-bypass tree contraction on full binary trees.
//!
//! The internal leaves (all leaves except the leftmost and the rightmost) are
//! numbered 1..n from left to right. Round `2i+1` prunes the internal leaves
//! whose number has exactly `i` trailing zero bits and that are left
//! children; round `2i+2` prunes the remaining ones of that kind. Pruning a
//! leaf removes it together with its parent and reattaches its sibling to the
//! grandparent. The part of the original tree hidden in the new edge becomes a
//! context pattern.

use std::sync::Arc;

use thiserror::Error;

use crate::pattern::{HierarchicalDefinition, Pattern};
use crate::tree::{NodeId, OrderedTree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractionError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("round {round} out of range 0..={rounds}")]
    RoundOutOfRange { round: usize, rounds: usize },
}

/// Internal leaves in dfs order; position `k` carries number `k + 1`.
pub fn internal_leaves(tree: &OrderedTree) -> Result<Vec<NodeId>, TreeError> {
    tree.check_full_binary()?;
    let leaves: Vec<NodeId> = tree.leaves().collect();
    if leaves.len() <= 2 {
        return Ok(Vec::new());
    }
    Ok(leaves[1..leaves.len() - 1].to_vec())
}

/// Number of rounds until only the two outermost leaves remain.
pub fn round_count(internal: usize) -> usize {
    if internal == 0 {
        0
    } else {
        2 * (internal.ilog2() as usize + 1)
    }
}

/// One prune-and-bypass step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prune {
    pub leaf: NodeId,
    pub parent: NodeId,
    pub grandparent: NodeId,
    pub sibling: NodeId,
    /// The part of the original tree hidden in the new edge.
    pub pattern: Pattern,
}

/// The tree after some number of rounds, as a node subset of the original.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionState {
    pub round: usize,
    /// Surviving nodes in dfs order.
    pub nodes: Vec<NodeId>,
    /// Numbers of the surviving internal leaves.
    pub internal_numbers: Vec<usize>,
}

impl ContractionState {
    pub fn tree(&self, original: &OrderedTree) -> OrderedTree {
        let mut keep = vec![false; original.len()];
        for &v in &self.nodes {
            keep[v] = true;
        }
        original.restrict(&keep).0
    }
}

fn closure_of_leaves(tree: &OrderedTree, leaves: &[NodeId]) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = leaves.to_vec();
    nodes.extend(leaves.windows(2).map(|w| tree.lca(w[0], w[1])));
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

/// Leaves of the even-round tree `T_{2i}`: the outermost leaves plus the
/// internal leaves whose number is divisible by `2^i`.
fn even_round_leaves(all: &[NodeId], i: usize) -> Vec<(usize, NodeId)> {
    let n = all.len();
    let step = 1usize << i;
    let mut out = vec![(0usize, all[0])];
    out.extend((step..n - 1).step_by(step).map(|k| (k, all[k])));
    out.push((n - 1, all[n - 1]));
    out
}

/// `T_i`, computed directly from the numbering rule.
pub fn tree_at_round(tree: &OrderedTree, round: usize) -> Result<ContractionState, ContractionError> {
    let internal = internal_leaves(tree)?;
    let rounds = round_count(internal.len());
    if round > rounds {
        return Err(ContractionError::RoundOutOfRange { round, rounds });
    }
    let all: Vec<NodeId> = tree.leaves().collect();
    if internal.is_empty() {
        return Ok(ContractionState {
            round,
            nodes: closure_of_leaves(tree, &all),
            internal_numbers: Vec::new(),
        });
    }
    let i = round / 2;
    let leaves: Vec<(usize, NodeId)> = if round.is_multiple_of(2) {
        even_round_leaves(&all, i)
    } else {
        // Leaves of T_{2i+2} plus the right children of T_{2i} among the
        // leaves removed between T_{2i} and T_{2i+2}.
        let even = even_round_leaves(&all, i);
        let mut out = Vec::with_capacity(even.len());
        for (j, &(k, y)) in even.iter().enumerate() {
            let outer = j == 0 || j + 1 == even.len();
            if outer || k.trailing_zeros() as usize > i {
                out.push((k, y));
                continue;
            }
            let prev = even[j - 1].1;
            let next = even[j + 1].1;
            let is_right = tree.depth(tree.lca(prev, y)) > tree.depth(tree.lca(y, next));
            if is_right {
                out.push((k, y));
            }
        }
        out
    };
    let leaf_ids: Vec<NodeId> = leaves.iter().map(|&(_, y)| y).collect();
    Ok(ContractionState {
        round,
        nodes: closure_of_leaves(tree, &leaf_ids),
        internal_numbers: leaves[1..leaves.len() - 1].iter().map(|&(k, _)| k).collect(),
    })
}

/// A full contraction run.
#[derive(Debug, Clone)]
pub struct Contraction {
    /// `rounds[r]` holds the prunes turning `T_r` into `T_{r+1}`, in dfs order.
    pub rounds: Vec<Vec<Prune>>,
    /// Whether every round touched pairwise disjoint edge triples.
    pub edges_disjoint: bool,
}

impl Contraction {
    pub fn patterns(&self) -> impl Iterator<Item = Pattern> + '_ {
        self.rounds.iter().flatten().map(|p| p.pattern)
    }
}

const NONE: u32 = u32::MAX;

/// Runs all rounds on a mutable copy of the tree structure.
pub fn contract(tree: &OrderedTree) -> Result<Contraction, TreeError> {
    let internal = internal_leaves(tree)?;
    let rounds = round_count(internal.len());
    let n = tree.len();
    let mut parent: Vec<u32> = (0..n).map(|v| tree.parent(v).map_or(NONE, |p| p as u32)).collect();
    let mut kids: Vec<[u32; 2]> = (0..n)
        .map(|v| {
            if tree.is_leaf(v) {
                [NONE; 2]
            } else {
                [tree.child(v, 0) as u32, tree.child(v, 1) as u32]
            }
        })
        .collect();
    // edge id = child endpoint; last round in which an edge was touched
    let mut touched = vec![usize::MAX; n];
    let mut edges_disjoint = true;
    let mut out = Vec::with_capacity(rounds);

    for r in 0..rounds {
        let i = r / 2;
        let left_phase = r % 2 == 0;
        let mut prunes = Vec::new();
        for (pos, &w) in internal.iter().enumerate() {
            let number = pos + 1;
            if number.trailing_zeros() as usize != i {
                continue;
            }
            let v = parent[w] as usize;
            if left_phase != (kids[v][0] as usize == w) {
                continue;
            }
            let side = if kids[v][0] as usize == w { 1 } else { 0 };
            let sibling = kids[v][side] as usize;
            let u = parent[v] as usize;
            for e in [w, sibling, v] {
                if touched[e] == r {
                    edges_disjoint = false;
                }
                touched[e] = r;
            }
            let slot = if kids[u][0] as usize == v { 0 } else { 1 };
            kids[u][slot] = sibling as u32;
            parent[sibling] = u as u32;
            let top = tree.child_toward(u, sibling);
            prunes.push(Prune {
                leaf: w,
                parent: v,
                grandparent: u,
                sibling,
                pattern: Pattern::context(top, sibling),
            });
        }
        out.push(prunes);
    }
    Ok(Contraction {
        rounds: out,
        edges_disjoint,
    })
}

/// All contraction patterns plus the root pattern.
pub fn contraction_patterns(
    tree: Arc<OrderedTree>,
) -> Result<HierarchicalDefinition, ContractionError> {
    let run = contract(&tree)?;
    let patterns: Vec<Pattern> = std::iter::once(Pattern::subtree(0))
        .chain(run.patterns())
        .collect();
    Ok(HierarchicalDefinition::new(tree, patterns).expect("contraction patterns are well-nested"))
}
