//! Patterns, hierarchical definitions and pattern trees.
//!
//! A subtree pattern `Subtree(v)` covers every node below `v`. A context
//! pattern `Context(v, w)` covers the nodes below `v` that are not below `w`;
//! `w` itself is the hole and lies outside the pattern.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::tree::{NodeId, OrderedTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Pattern {
    Subtree { v: NodeId },
    Context { v: NodeId, w: NodeId },
}

impl Pattern {
    pub fn subtree(v: NodeId) -> Self {
        Pattern::Subtree { v }
    }

    pub fn context(v: NodeId, w: NodeId) -> Self {
        Pattern::Context { v, w }
    }

    pub fn root(self) -> NodeId {
        match self {
            Pattern::Subtree { v } | Pattern::Context { v, .. } => v,
        }
    }

    pub fn hole(self) -> Option<NodeId> {
        match self {
            Pattern::Subtree { .. } => None,
            Pattern::Context { w, .. } => Some(w),
        }
    }

    pub fn is_context(self) -> bool {
        matches!(self, Pattern::Context { .. })
    }

    /// Number of covered nodes.
    pub fn size(self, tree: &OrderedTree) -> usize {
        match self {
            Pattern::Subtree { v } => tree.size(v),
            Pattern::Context { v, w } => tree.size(v) - tree.size(w),
        }
    }

    pub fn contains(self, tree: &OrderedTree, x: NodeId) -> bool {
        match self {
            Pattern::Subtree { v } => tree.is_ancestor(v, x),
            Pattern::Context { v, w } => tree.is_ancestor(v, x) && !tree.is_ancestor(w, x),
        }
    }

    /// `V[self] ⊆ V[other]`.
    pub fn is_within(self, tree: &OrderedTree, other: Pattern) -> bool {
        other.contains(tree, self.root())
            && other.hole().is_none_or(|h| !self.contains(tree, h))
    }

    pub fn is_disjoint(self, tree: &OrderedTree, other: Pattern) -> bool {
        !other.contains(tree, self.root()) && !self.contains(tree, other.root())
    }

    pub fn nodes(self, tree: &OrderedTree) -> impl Iterator<Item = NodeId> + '_ {
        let v = self.root();
        (v..=tree.dfs_out(v)).filter(move |&x| self.contains(tree, x))
    }

    fn validate(self, tree: &OrderedTree) -> Result<(), PatternError> {
        let n = tree.len();
        match self {
            Pattern::Subtree { v } if v < n => Ok(()),
            Pattern::Context { v, w } if v < n && w < n && v != w && tree.is_ancestor(v, w) => {
                Ok(())
            }
            p => Err(PatternError::Invalid(p)),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Subtree { v } => write!(f, "{v}"),
            Pattern::Context { v, w } => write!(f, "({v},{w})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern {0} is not valid in this tree")]
    Invalid(Pattern),
    #[error("the root subtree pattern is missing")]
    MissingRoot,
    #[error("patterns {0} and {1} overlap without being nested")]
    NotWellNested(Pattern, Pattern),
}

/// Pairwise check that any two patterns are disjoint or nested.
pub fn check_well_nested(tree: &OrderedTree, patterns: &[Pattern]) -> bool {
    first_overlap(tree, patterns).is_none()
}

fn first_overlap(tree: &OrderedTree, patterns: &[Pattern]) -> Option<(Pattern, Pattern)> {
    for (i, &p) in patterns.iter().enumerate() {
        for &q in &patterns[i + 1..] {
            if !(p.is_disjoint(tree, q) || p.is_within(tree, q) || q.is_within(tree, p)) {
                return Some((p, q));
            }
        }
    }
    None
}

/// Containment order of a well-nested pattern set.
#[derive(Debug, Clone)]
pub struct PatternTree {
    parent: Vec<Option<usize>>,
    // children of `p` are `child_list[child_start[p]..child_start[p + 1]]`
    child_start: Vec<usize>,
    child_list: Vec<usize>,
    owner: Vec<u32>,
    boundary_start: Vec<usize>,
    boundary_list: Vec<NodeId>,
    depth: Vec<usize>,
}

/// Groups `0..keys.len()` by key into offset and item arrays, keeping order.
fn group_by_key(keys: impl Iterator<Item = usize> + Clone, groups: usize) -> (Vec<usize>, Vec<usize>) {
    let mut start = vec![0usize; groups + 1];
    for k in keys.clone() {
        start[k + 1] += 1;
    }
    for i in 0..groups {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut list = vec![0usize; start[groups]];
    for (i, k) in keys.enumerate() {
        list[fill[k]] = i;
        fill[k] += 1;
    }
    (start, list)
}

impl PatternTree {
    /// `patterns` must be sorted by root, larger patterns first among equal
    /// roots, without duplicates, with `Subtree(0)` first.
    fn build(tree: &OrderedTree, patterns: &[Pattern]) -> Result<Self, PatternError> {
        let n = tree.len();
        let np = patterns.len();
        let mut parent = vec![None; np];
        let mut owner = vec![0u32; n];
        let mut active: Vec<usize> = Vec::new();
        // dfs path: (node, patterns pushed there, start of its entries in `suspended`)
        let mut path: Vec<(NodeId, usize, usize)> = Vec::new();
        let mut suspended: Vec<usize> = Vec::new();
        let mut next = 0usize;
        // open_holes[h]: active patterns with hole `h` not yet suspended
        let mut open_holes = vec![0u32; n];

        for x in 0..n {
            while let Some(&(y, pushed, start)) = path.last() {
                if tree.is_ancestor(y, x) {
                    break;
                }
                path.pop();
                active.truncate(active.len() - pushed);
                active.extend(suspended.drain(start..).rev());
            }
            let start = suspended.len();
            while let Some(&top) = active.last() {
                if patterns[top].hole() != Some(x) {
                    break;
                }
                suspended.push(active.pop().unwrap());
                open_holes[x] -= 1;
            }
            if open_holes[x] > 0 {
                let q = active.iter().find(|&&q| patterns[q].hole() == Some(x)).unwrap();
                let top = *active.last().unwrap();
                return Err(PatternError::NotWellNested(patterns[*q], patterns[top]));
            }
            let mut pushed = 0;
            while next < np && patterns[next].root() == x {
                parent[next] = active.last().copied();
                if let Some(h) = patterns[next].hole() {
                    open_holes[h] += 1;
                }
                active.push(next);
                next += 1;
                pushed += 1;
            }
            match active.last() {
                Some(&top) => owner[x] = top as u32,
                None => return Err(PatternError::MissingRoot),
            }
            path.push((x, pushed, start));
        }

        // The root pattern has no parent; park it in an extra group.
        let (mut child_start, child_list) =
            group_by_key(parent.iter().map(|q| q.map_or(np, |q| q)), np + 1);
        child_start.truncate(np + 1);
        let child_list = child_list[..child_start[np]].to_vec();
        let (boundary_start, boundary_list) =
            group_by_key(owner.iter().map(|&o| o as usize), np);
        let mut depth = vec![0usize; np];
        for p in 0..np {
            if let Some(q) = parent[p] {
                depth[p] = depth[q] + 1;
            }
        }
        Ok(Self {
            parent,
            child_start,
            child_list,
            owner,
            boundary_start,
            boundary_list,
            depth,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, p: usize) -> Option<usize> {
        self.parent[p]
    }

    /// Direct subpatterns in dfs order of their roots.
    pub fn children(&self, p: usize) -> &[usize] {
        &self.child_list[self.child_start[p]..self.child_start[p + 1]]
    }

    /// Smallest pattern containing node `x`.
    pub fn owner(&self, x: NodeId) -> usize {
        self.owner[x] as usize
    }

    /// Nodes of `p` not covered by any direct subpattern, in dfs order.
    pub fn boundary(&self, p: usize) -> &[NodeId] {
        &self.boundary_list[self.boundary_start[p]..self.boundary_start[p + 1]]
    }

    pub fn branching_size(&self, p: usize) -> usize {
        self.boundary(p).len() + self.children(p).len()
    }

    pub fn depth_of(&self, p: usize) -> usize {
        self.depth[p]
    }

    /// Height of the pattern tree in edges.
    pub fn depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Largest branching tree size.
    pub fn width(&self) -> usize {
        (0..self.len()).map(|p| self.branching_size(p)).max().unwrap_or(0)
    }
}

/// A well-nested pattern set containing the root pattern, with its pattern
/// tree. Patterns are kept sorted by root (dfs order), larger first.
#[derive(Debug, Clone)]
pub struct HierarchicalDefinition {
    tree: Arc<OrderedTree>,
    patterns: Vec<Pattern>,
    pattern_tree: PatternTree,
}

fn sort_key(tree: &OrderedTree, p: Pattern) -> (NodeId, std::cmp::Reverse<usize>) {
    (p.root(), std::cmp::Reverse(p.size(tree)))
}

fn sort_patterns(tree: &OrderedTree, patterns: &mut Vec<Pattern>) {
    let sorted = patterns
        .windows(2)
        .all(|w| (sort_key(tree, w[0]), w[0]) < (sort_key(tree, w[1]), w[1]));
    if sorted {
        return;
    }
    // bucket by root, then order each (small) bucket
    let (start, order) = group_by_key(patterns.iter().map(|p| p.root()), tree.len());
    let mut out: Vec<Pattern> = order.iter().map(|&i| patterns[i]).collect();
    for r in 0..tree.len() {
        let bucket = &mut out[start[r]..start[r + 1]];
        if bucket.len() > 1 {
            bucket.sort_unstable_by_key(|&p| (sort_key(tree, p), p));
        }
    }
    out.dedup();
    *patterns = out;
}

impl HierarchicalDefinition {
    pub fn new(
        tree: Arc<OrderedTree>,
        patterns: impl IntoIterator<Item = Pattern>,
    ) -> Result<Self, PatternError> {
        let mut patterns: Vec<Pattern> = patterns.into_iter().collect();
        for &p in &patterns {
            p.validate(&tree)?;
        }
        sort_patterns(&tree, &mut patterns);
        if patterns.first() != Some(&Pattern::subtree(0)) {
            return Err(PatternError::MissingRoot);
        }
        let pattern_tree = PatternTree::build(&tree, &patterns)?;
        Ok(Self {
            tree,
            patterns,
            pattern_tree,
        })
    }

    /// The definition consisting of the root pattern only.
    pub fn trivial(tree: Arc<OrderedTree>) -> Self {
        Self::new(tree, [Pattern::subtree(0)]).expect("root pattern alone is well-nested")
    }

    pub fn tree(&self) -> &Arc<OrderedTree> {
        &self.tree
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn pattern(&self, p: usize) -> Pattern {
        self.patterns[p]
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, p: Pattern) -> Option<usize> {
        let key = (sort_key(&self.tree, p), p);
        self.patterns
            .binary_search_by_key(&key, |&q| (sort_key(&self.tree, q), q))
            .ok()
    }

    pub fn pattern_tree(&self) -> &PatternTree {
        &self.pattern_tree
    }

    pub fn width(&self) -> usize {
        self.pattern_tree.width()
    }

    pub fn depth(&self) -> usize {
        self.pattern_tree.depth()
    }
}

/// Builds the pattern tree of `patterns`, failing if they are not
/// well-nested or lack the root pattern.
pub fn pattern_tree(
    tree: Arc<OrderedTree>,
    patterns: impl IntoIterator<Item = Pattern>,
) -> Result<HierarchicalDefinition, PatternError> {
    HierarchicalDefinition::new(tree, patterns)
}
