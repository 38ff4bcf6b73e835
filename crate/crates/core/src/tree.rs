//! Ordered labelled trees with preorder node ids.
//!
//! Node ids are preorder (dfs) numbers, so `dfs_in(v) = v`,
//! `dfs_out(v) = v + size(v) - 1`, the root is 0, and every subtree is a
//! contiguous id range.

use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::term::{RankedAlphabet, Symbol, Term};

pub type NodeId = usize;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node id {id} out of range for a tree with {len} nodes")]
    NodeOutOfRange { id: usize, len: usize },
    #[error("arity sequence does not describe a tree")]
    Malformed,
    #[error("tree is not full binary: node {0} has {1} children")]
    NotFullBinary(NodeId, usize),
    #[error("tree has more than {0} children at a node")]
    RankTooLarge(usize),
}

#[derive(Debug)]
struct SparseTable {
    // levels[k][i] = node of minimum depth among ids i .. i + 2^k - 1
    levels: Vec<Vec<u32>>,
}

#[derive(Debug)]
pub struct OrderedTree {
    labels: Vec<Symbol>,
    parent: Vec<u32>,
    child_start: Vec<u32>,
    children: Vec<u32>,
    size: Vec<u32>,
    depth: Vec<u32>,
    lca_index: OnceLock<SparseTable>,
}

impl Clone for OrderedTree {
    fn clone(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            parent: self.parent.clone(),
            child_start: self.child_start.clone(),
            children: self.children.clone(),
            size: self.size.clone(),
            depth: self.depth.clone(),
            lca_index: OnceLock::new(),
        }
    }
}

impl PartialEq for OrderedTree {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.child_start == other.child_start
    }
}

impl Eq for OrderedTree {}

impl OrderedTree {
    /// Builds a tree from its preorder labels and child counts.
    pub fn from_preorder(labels: Vec<Symbol>, arities: &[usize]) -> Result<Self, TreeError> {
        let n = labels.len();
        if n == 0 || arities.len() != n {
            return Err(TreeError::Malformed);
        }
        let mut child_start = Vec::with_capacity(n + 1);
        let mut total = 0u32;
        for &a in arities {
            child_start.push(total);
            total += a as u32;
        }
        child_start.push(total);
        if total as usize != n - 1 {
            return Err(TreeError::Malformed);
        }
        let mut children = vec![0u32; n - 1];
        let mut parent = vec![NONE; n];
        let mut depth = vec![0u32; n];
        // (node, next child slot)
        let mut stack: Vec<(u32, u32)> = Vec::new();
        for v in 0..n {
            if v > 0 {
                let Some(top) = stack.last_mut() else {
                    return Err(TreeError::Malformed);
                };
                let (p, slot) = *top;
                children[slot as usize] = v as u32;
                parent[v] = p;
                depth[v] = depth[p as usize] + 1;
                top.1 += 1;
                if top.1 == child_start[p as usize + 1] {
                    stack.pop();
                }
            }
            if arities[v] > 0 {
                stack.push((v as u32, child_start[v]));
            }
        }
        if !stack.is_empty() {
            return Err(TreeError::Malformed);
        }
        let mut size = vec![1u32; n];
        for v in (1..n).rev() {
            size[parent[v] as usize] += size[v];
        }
        Ok(Self {
            labels,
            parent,
            child_start,
            children,
            size,
            depth,
            lca_index: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn label(&self, v: NodeId) -> Symbol {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Symbol] {
        &self.labels
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        match self.parent[v] {
            NONE => None,
            p => Some(p as usize),
        }
    }

    pub fn children(&self, v: NodeId) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        let s = self.child_start[v] as usize;
        let e = self.child_start[v + 1] as usize;
        self.children[s..e].iter().map(|&c| c as usize)
    }

    /// The `i`-th child, 0-based.
    pub fn child(&self, v: NodeId, i: usize) -> NodeId {
        let s = self.child_start[v] as usize;
        debug_assert!(i < self.arity(v));
        self.children[s + i] as usize
    }

    pub fn arity(&self, v: NodeId) -> usize {
        (self.child_start[v + 1] - self.child_start[v]) as usize
    }

    pub fn max_arity(&self) -> usize {
        (0..self.len()).map(|v| self.arity(v)).max().unwrap_or(0)
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.child_start[v] == self.child_start[v + 1]
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).filter(|&v| self.is_leaf(v))
    }

    pub fn size(&self, v: NodeId) -> usize {
        self.size[v] as usize
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v] as usize
    }

    /// Largest node depth.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn dfs_in(&self, v: NodeId) -> usize {
        v
    }

    pub fn dfs_out(&self, v: NodeId) -> usize {
        v + self.size(v) - 1
    }

    /// Reflexive ancestor test.
    pub fn is_ancestor(&self, u: NodeId, v: NodeId) -> bool {
        u <= v && v <= self.dfs_out(u)
    }

    /// Child of `u` on the path to its proper descendant `v`.
    pub fn child_toward(&self, u: NodeId, v: NodeId) -> NodeId {
        debug_assert!(u < v && self.is_ancestor(u, v));
        let kids = &self.children[self.child_start[u] as usize..self.child_start[u + 1] as usize];
        // children are sorted by id; pick the last one not after v
        let i = kids.partition_point(|&c| c as usize <= v);
        kids[i - 1] as usize
    }

    fn sparse_table(&self) -> &SparseTable {
        self.lca_index.get_or_init(|| {
            let n = self.len();
            let mut levels: Vec<Vec<u32>> = vec![(0..n as u32).collect()];
            let mut width = 1;
            while 2 * width <= n {
                let prev = levels.last().unwrap();
                let next: Vec<u32> = (0..=n - 2 * width)
                    .map(|i| {
                        let (a, b) = (prev[i], prev[i + width]);
                        if self.depth[b as usize] < self.depth[a as usize] {
                            b
                        } else {
                            a
                        }
                    })
                    .collect();
                levels.push(next);
                width *= 2;
            }
            SparseTable { levels }
        })
    }

    pub fn lca(&self, u: NodeId, v: NodeId) -> NodeId {
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        if self.is_ancestor(u, v) {
            return u;
        }
        // The shallowest node in (u, v] is a child of the lca.
        let table = self.sparse_table();
        let (lo, hi) = (u + 1, v);
        let k = usize::BITS as usize - 1 - (hi - lo + 1).leading_zeros() as usize;
        let a = table.levels[k][lo];
        let b = table.levels[k][hi + 1 - (1 << k)];
        let m = if self.depth[b as usize] < self.depth[a as usize] {
            b
        } else {
            a
        };
        self.parent[m as usize] as usize
    }

    pub fn is_full_binary(&self) -> bool {
        (0..self.len()).all(|v| matches!(self.arity(v), 0 | 2))
    }

    pub fn check_full_binary(&self) -> Result<(), TreeError> {
        match (0..self.len()).find(|&v| !matches!(self.arity(v), 0 | 2)) {
            Some(v) => Err(TreeError::NotFullBinary(v, self.arity(v))),
            None => Ok(()),
        }
    }

    /// Builds the tree on a subset of nodes closed under lca and containing
    /// the root; parents are the nearest kept ancestors. Returns the tree and
    /// the kept node ids in preorder (new id → old id).
    pub fn restrict(&self, keep: &[bool]) -> (OrderedTree, Vec<NodeId>) {
        debug_assert!(keep[0]);
        let ids: Vec<NodeId> = (0..self.len()).filter(|&v| keep[v]).collect();
        let mut arities = vec![0usize; ids.len()];
        let mut stack: Vec<usize> = Vec::new(); // indices into ids
        for (i, &v) in ids.iter().enumerate() {
            while let Some(&top) = stack.last() {
                if self.is_ancestor(ids[top], v) {
                    break;
                }
                stack.pop();
            }
            if let Some(&top) = stack.last() {
                arities[top] += 1;
            }
            stack.push(i);
        }
        let labels = ids.iter().map(|&v| self.labels[v]).collect();
        let tree = OrderedTree::from_preorder(labels, &arities).expect("restriction is a tree");
        (tree, ids)
    }

    /// Reads the tree back as a term. Panics on padding labels.
    pub fn to_term(&self, alphabet: &Arc<RankedAlphabet>) -> Term {
        Term::from_preorder(alphabet.clone(), self.labels.clone()).expect("labels match alphabet")
    }

    /// Checked query interface.
    pub fn queries(&self) -> TreeQueries<'_> {
        TreeQueries { tree: self }
    }
}

/// Builds the tree of a term; node ids are the term's preorder positions.
pub fn tree_of(t: &Term) -> OrderedTree {
    let alphabet = t.alphabet();
    let arities: Vec<usize> = t.symbols().iter().map(|&s| alphabet.rank(s)).collect();
    OrderedTree::from_preorder(t.symbols().to_vec(), &arities).expect("terms are trees")
}

/// Node queries that validate their arguments.
#[derive(Clone, Copy)]
pub struct TreeQueries<'a> {
    tree: &'a OrderedTree,
}

impl TreeQueries<'_> {
    fn check(&self, v: NodeId) -> Result<(), TreeError> {
        if v < self.tree.len() {
            Ok(())
        } else {
            Err(TreeError::NodeOutOfRange {
                id: v,
                len: self.tree.len(),
            })
        }
    }

    pub fn is_ancestor(&self, u: NodeId, v: NodeId) -> Result<bool, TreeError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.tree.is_ancestor(u, v))
    }

    pub fn lca(&self, u: NodeId, v: NodeId) -> Result<NodeId, TreeError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.tree.lca(u, v))
    }

    pub fn dfs_less(&self, u: NodeId, v: NodeId) -> Result<bool, TreeError> {
        self.check(u)?;
        self.check(v)?;
        Ok(u < v)
    }

    pub fn subtree_size(&self, u: NodeId) -> Result<usize, TreeError> {
        self.check(u)?;
        Ok(self.tree.size(u))
    }
}
