//! From an arbitrary ordered tree to a normal-form hierarchical definition
//! of logarithmic depth with few inequivalent patterns.
//!
//! Pipeline: [`binarize`] → [`compress`] → [`lift`] → [`normalize`].

use std::sync::Arc;

use rustc_hash::FxHashMap as HashMap;
use thiserror::Error;

use crate::contraction::contract;
use crate::pattern::{HierarchicalDefinition, Pattern, PatternError};
use crate::term::Symbol;
use crate::tree::{NodeId, OrderedTree, TreeError};

/// Default cap on the number of children per node.
pub const DEFAULT_MAX_RANK: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

fn floor_log(base: usize, mut n: usize) -> usize {
    let mut k = 0;
    while n >= base {
        n /= base;
        k += 1;
    }
    k
}

/// Bridge size bound from the counting argument over labelled binary trees:
/// `max(2, ⌊log_{4ℓ+4}(n) / 2⌋ − 2)`, kept within `2..=max(n, 2)`.
pub fn choose_m(n: usize, labels: usize) -> usize {
    let base = 4 * labels.max(1) + 4;
    let m = (floor_log(base, n.max(1)) / 2).saturating_sub(2).max(2);
    m.min(n.max(2))
}

/// How [`compress`] picks the bridge size bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BridgeSize {
    /// [`choose_m`]: sound asymptotically but equal to 2 below n ≈ 16^12.
    #[default]
    Counting,
    /// `max(choose_m, ⌊log₂ n⌋ / 2)`. Deeper and slower on caterpillars.
    Logarithmic,
    Fixed(usize),
}

impl BridgeSize {
    pub fn resolve(self, n: usize, labels: usize) -> usize {
        let m = match self {
            BridgeSize::Counting => choose_m(n, labels),
            BridgeSize::Logarithmic => choose_m(n, labels).max(floor_log(2, n.max(1)) / 2),
            BridgeSize::Fixed(m) => m,
        };
        m.clamp(2, n.max(2))
    }
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Inner nodes whose subtree size jumps over a multiple of `m` relative to
/// every child.
pub fn critical_nodes(tree: &OrderedTree, m: usize) -> Vec<NodeId> {
    (0..tree.len())
        .filter(|&v| {
            !tree.is_leaf(v) && {
                let up = ceil_div(tree.size(v), m);
                tree.children(v).all(|w| ceil_div(tree.size(w), m) != up)
            }
        })
        .collect()
}

/// The contracted skeleton of a full binary tree.
#[derive(Debug, Clone)]
pub struct Bridges {
    /// Critical nodes, the root and auxiliary leaves, in dfs order.
    pub kept: Vec<NodeId>,
    /// The patterns partitioning the remaining nodes.
    pub bridges: Vec<Pattern>,
    /// `kept` as a binary tree; node `i` of `skeleton` is `kept[i]`.
    pub skeleton: OrderedTree,
}

pub fn bridges_and_contraction(tree: &OrderedTree, m: usize) -> Result<Bridges, TreeError> {
    tree.check_full_binary()?;
    let n = tree.len();
    let mut keep = vec![false; n];
    keep[0] = true;
    for v in critical_nodes(tree, m) {
        keep[v] = true;
    }
    // has_kept[v]: some node of T[v] is kept
    let mut has_kept = keep.clone();
    for v in (1..n).rev() {
        if has_kept[v] {
            has_kept[tree.parent(v).unwrap()] = true;
        }
    }
    for v in 0..n {
        if !keep[v] || tree.is_leaf(v) {
            continue;
        }
        for w in tree.children(v) {
            if !has_kept[w] {
                // dfs-least leaf of T[w]
                let mut x = w;
                while !tree.is_leaf(x) {
                    x = tree.child(x, 0);
                }
                keep[x] = true;
            }
        }
    }
    let (skeleton, kept) = tree.restrict(&keep);
    let mut bridges = Vec::new();
    for i in 1..kept.len() {
        let y = kept[i];
        let x = kept[skeleton.parent(i).unwrap()];
        let top = tree.child_toward(x, y);
        if top != y {
            bridges.push(Pattern::context(top, y));
        }
    }
    Ok(Bridges {
        kept,
        bridges,
        skeleton,
    })
}

/// Maximal subpattern of `p` rooted at `y ∈ V[p]`.
fn maximal_subpattern(tree: &OrderedTree, p: Pattern, y: NodeId) -> Pattern {
    match p.hole() {
        Some(h) if tree.is_ancestor(y, h) => Pattern::context(y, h),
        _ => Pattern::subtree(y),
    }
}

/// Hierarchical definition of a full binary tree: the contraction patterns
/// of the skeleton, lifted back, plus for every bridge the maximal
/// subpatterns rooted at each of its nodes.
pub fn compress_with(tree: Arc<OrderedTree>, m: usize) -> Result<HierarchicalDefinition, DecompositionError> {
    let patterns = compressed_patterns(&tree, m)?;
    Ok(HierarchicalDefinition::new(tree, patterns)?)
}

/// The patterns of [`compress_with`], unsorted.
fn compressed_patterns(tree: &OrderedTree, m: usize) -> Result<Vec<Pattern>, DecompositionError> {
    let b = bridges_and_contraction(tree, m)?;
    let run = contract(&b.skeleton)?;
    let mut patterns: Vec<Pattern> = std::iter::once(Pattern::subtree(0))
        .chain(run.patterns())
        .map(|p| match p {
            Pattern::Subtree { v } => Pattern::subtree(b.kept[v]),
            Pattern::Context { v, w } => Pattern::context(b.kept[v], b.kept[w]),
        })
        .collect();
    for &p in &b.bridges {
        patterns.extend(p.nodes(tree).map(|y| maximal_subpattern(tree, p, y)));
    }
    Ok(patterns)
}

pub fn compress(tree: Arc<OrderedTree>, labels: usize) -> Result<HierarchicalDefinition, DecompositionError> {
    let m = BridgeSize::default().resolve(tree.len(), labels);
    compress_with(tree, m)
}

/// An embedding of an ordered tree into a full binary tree.
#[derive(Debug, Clone)]
pub struct BinaryEmbedding {
    /// The binary tree; nodes outside the image are labelled [`Symbol::PAD`].
    pub tree: Arc<OrderedTree>,
    /// `image[v]`: binary-tree node of original node `v`.
    pub image: Vec<NodeId>,
    /// `zone_of[x]`: original node whose zone contains binary-tree node `x`.
    pub zone_of: Vec<NodeId>,
}

impl BinaryEmbedding {
    /// The image node, its padding chain, and for unary nodes the padding
    /// leaf that closes the image subtree.
    pub fn zone(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let start = self.image[v];
        let chain = (start..self.zone_of.len()).take_while(move |&x| x == start || self.zone_of[x] == v);
        let last = self.tree.dfs_out(start);
        let closing = (last != start && self.zone_of[last] == v && self.tree.is_leaf(last) && self.tree.label(last) == Symbol::PAD)
            .then_some(last);
        chain.chain(closing)
    }
}

/// Binary nodes get no padding; a unary node gets a padding right leaf; a
/// node with `r > 2` children sits on a left spine of `r - 2` padding nodes
/// whose right children are its children `r, r-1, ..., 3` and whose deepest
/// node holds children 1 and 2.
pub fn binarize(tree: &OrderedTree) -> BinaryEmbedding {
    let n = tree.len();
    let mut labels = Vec::with_capacity(2 * n);
    let mut arities = Vec::with_capacity(2 * n);
    let mut zone_of = Vec::with_capacity(2 * n);
    let mut image = vec![0; n];
    for v in 0..n {
        let r = tree.arity(v);
        image[v] = labels.len();
        labels.push(tree.label(v));
        arities.push(if r == 0 { 0 } else { 2 });
        zone_of.push(v);
        for _ in 2..r {
            labels.push(Symbol::PAD);
            arities.push(2);
            zone_of.push(v);
        }
        // Close unary parents whose only subtree ends here.
        let mut y = v;
        while let Some(p) = tree.parent(y) {
            if tree.dfs_out(y) != v {
                break;
            }
            if tree.arity(p) == 1 {
                labels.push(Symbol::PAD);
                arities.push(0);
                zone_of.push(p);
            }
            y = p;
        }
    }
    let binary = OrderedTree::from_preorder(labels, &arities).expect("embedding is a tree");
    BinaryEmbedding {
        tree: Arc::new(binary),
        image,
        zone_of,
    }
}

/// Pulls a hierarchical definition of the binary tree back to the original
/// tree: every pattern is shrunk to the zones it fully contains, which form
/// a constant number of maximal patterns.
pub fn lift(
    original: Arc<OrderedTree>,
    binary: &HierarchicalDefinition,
    emb: &BinaryEmbedding,
) -> Result<HierarchicalDefinition, PatternError> {
    let patterns = lifted_patterns(&original, binary.patterns(), emb);
    HierarchicalDefinition::new(original, patterns)
}

/// The patterns of [`lift`], unsorted.
fn lifted_patterns(original: &OrderedTree, binary: &[Pattern], emb: &BinaryEmbedding) -> Vec<Pattern> {
    let bt = &*emb.tree;
    // A zone is a chain of consecutive nodes, each the first child of the
    // previous, plus maybe one closing leaf; a pattern contains the chain iff
    // it contains both ends.
    let ends: Vec<(NodeId, NodeId, Option<NodeId>)> = (0..original.len())
        .map(|v| {
            let mut zone = emb.zone(v);
            let first = zone.next().expect("zones are nonempty");
            let (mut last, mut closing) = (first, None);
            for x in zone {
                if x == last + 1 {
                    last = x;
                } else {
                    closing = Some(x);
                }
            }
            (first, last, closing)
        })
        .collect();
    let zone_inside = |v: NodeId, p: Pattern| {
        let (first, last, closing) = ends[v];
        p.contains(bt, first) && p.contains(bt, last) && closing.is_none_or(|x| p.contains(bt, x))
    };
    let mut out = Vec::with_capacity(2 * binary.len());
    let mut candidates = Vec::new();
    for &p in binary {
        let top = emb.zone_of[p.root()];
        let hole = p.hole().map(|b| emb.zone_of[b]);
        candidates.clear();
        candidates.push(top);
        candidates.extend(original.children(top));
        if let Some(h) = hole {
            candidates.extend(original.children(h));
        }
        for &c in &candidates {
            if !zone_inside(c, p) {
                continue;
            }
            if let Some(par) = original.parent(c) {
                if zone_inside(par, p) {
                    continue;
                }
            }
            out.push(match hole {
                Some(h) if h != c && original.is_ancestor(c, h) => Pattern::context(c, h),
                _ => Pattern::subtree(c),
            });
        }
    }
    out
}

/// Normal-form role of a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalShape {
    /// Subtree pattern `f(t1,..,tr)` whose direct subpatterns are the
    /// subtrees of all children.
    Node,
    /// Context pattern `f(t1,..,x,..,tr)` with the hole at child `hole_child`
    /// (0-based).
    HoleNode { hole_child: usize },
    /// Subtree pattern split into a context and the subtree at its hole.
    Substitution { context: usize, argument: usize },
    /// Context pattern split into an upper and a lower context.
    Composition { upper: usize, lower: usize },
}

/// Classifies pattern `p` of `hd`, or `None` if it is not in normal form.
pub fn normal_shape(hd: &HierarchicalDefinition, p: usize) -> Option<NormalShape> {
    let tree = hd.tree();
    let pt = hd.pattern_tree();
    let pat = hd.pattern(p);
    let u = pat.root();
    let kids = pt.children(p);
    if pt.boundary(p) == [u] {
        if kids.iter().any(|&q| hd.pattern(q).is_context()) {
            return None;
        }
        let mut next = kids.iter().copied().peekable();
        let mut hole_child = None;
        for (i, c) in tree.children(u).enumerate() {
            if Some(c) == pat.hole() {
                hole_child = Some(i);
            } else if next.next_if(|&q| hd.pattern(q).root() == c).is_none() {
                return None;
            }
        }
        if next.next().is_some() {
            return None;
        }
        return match (pat.hole(), hole_child) {
            (None, None) => Some(NormalShape::Node),
            (Some(_), Some(i)) => Some(NormalShape::HoleNode { hole_child: i }),
            _ => None,
        };
    }
    if !pt.boundary(p).is_empty() || kids.len() != 2 {
        return None;
    }
    let (a, b) = (hd.pattern(kids[0]), hd.pattern(kids[1]));
    let Pattern::Context { v, w } = a else {
        return None;
    };
    if v != u {
        return None;
    }
    match (pat, b) {
        (Pattern::Subtree { .. }, Pattern::Subtree { v: bv }) if bv == w => {
            Some(NormalShape::Substitution {
                context: kids[0],
                argument: kids[1],
            })
        }
        (Pattern::Context { w: pw, .. }, Pattern::Context { v: bv, w: bw })
            if bv == w && bw == pw =>
        {
            Some(NormalShape::Composition {
                upper: kids[0],
                lower: kids[1],
            })
        }
        _ => None,
    }
}

pub fn is_normal_form(hd: &HierarchicalDefinition) -> bool {
    (0..hd.len()).all(|p| normal_shape(hd, p).is_some())
}

/// Adds, for every pattern, the maximal subpatterns rooted at its boundary
/// nodes and at the roots of its direct subpatterns; then splits off `(v,v')`
/// from every context `(v,w)` with a direct subpattern `(v',w)` where `v'` is
/// a child of `v`.
pub fn normalize(hd: &HierarchicalDefinition) -> Result<HierarchicalDefinition, PatternError> {
    let tree = hd.tree();
    let pt = hd.pattern_tree();
    let mut patterns = Vec::with_capacity(3 * hd.len());
    patterns.extend_from_slice(hd.patterns());
    for (i, &p) in hd.patterns().iter().enumerate() {
        for &w in pt.boundary(i) {
            patterns.push(maximal_subpattern(tree, p, w));
        }
        for &q in pt.children(i) {
            patterns.push(maximal_subpattern(tree, p, hd.pattern(q).root()));
        }
    }
    let step1 = HierarchicalDefinition::new(tree.clone(), patterns)?;
    let pt = step1.pattern_tree();
    let mut splits = Vec::new();
    for (i, &p) in step1.patterns().iter().enumerate() {
        let Pattern::Context { v, w } = p else {
            continue;
        };
        for &q in pt.children(i) {
            if let Pattern::Context { v: v2, w: w2 } = step1.pattern(q) {
                if w2 == w && tree.parent(v2) == Some(v) && step1.index_of(Pattern::context(v, v2)).is_none() {
                    splits.push(Pattern::context(v, v2));
                }
            }
        }
    }
    if splits.is_empty() {
        return Ok(step1);
    }
    let mut patterns = Vec::with_capacity(step1.len() + splits.len());
    patterns.extend_from_slice(step1.patterns());
    patterns.extend(splits);
    HierarchicalDefinition::new(tree.clone(), patterns)
}

/// Binarize, compress, lift and normalize.
pub fn hierarchical_definition(
    tree: Arc<OrderedTree>,
) -> Result<HierarchicalDefinition, DecompositionError> {
    hierarchical_definition_with(tree, BridgeSize::default(), DEFAULT_MAX_RANK)
}

pub fn hierarchical_definition_with(
    tree: Arc<OrderedTree>,
    bridge_size: BridgeSize,
    max_rank: usize,
) -> Result<HierarchicalDefinition, DecompositionError> {
    if tree.max_arity() > max_rank {
        return Err(TreeError::RankTooLarge(max_rank).into());
    }
    if tree.len() == 1 {
        return Ok(HierarchicalDefinition::trivial(tree));
    }
    let emb = binarize(&tree);
    let mut labels: Vec<Symbol> = emb.tree.labels().to_vec();
    labels.sort_unstable();
    labels.dedup();
    let m = bridge_size.resolve(emb.tree.len(), labels.len());
    let binary = compressed_patterns(&emb.tree, m)?;
    let lifted = HierarchicalDefinition::new(tree.clone(), lifted_patterns(&tree, &binary, &emb))?;
    Ok(normalize(&lifted)?)
}

pub type ClassId = u32;

/// Equivalence classes of patterns up to isomorphism of the labelled
/// subtree together with the patterns inside it.
#[derive(Debug, Clone)]
pub struct PatternClassTable {
    /// Class of each pattern, indexed like [`HierarchicalDefinition::patterns`].
    pub class_of: Vec<ClassId>,
    pub class_count: usize,
}

const TOKEN_HOLE: u32 = 0;
const TOKEN_CHILD: u32 = 1;
const TOKEN_NODE: u32 = 2;

/// Canonical codes built bottom-up over the pattern tree: a pattern's code
/// lists its branching tree in preorder, with labels and arities for
/// boundary nodes, a hole marker, and the class id of each direct
/// subpattern. Codes are interned exactly.
pub fn pattern_classes(hd: &HierarchicalDefinition) -> PatternClassTable {
    let tree = hd.tree();
    let pt = hd.pattern_tree();
    let np = hd.len();
    let mut class_of = vec![0 as ClassId; np];
    let mut intern: HashMap<Vec<u32>, ClassId> = HashMap::default();
    let mut code = Vec::new();
    let mut stack = Vec::new();
    // Children have larger indices than their parents, so a reverse sweep
    // sees every direct subpattern before its parent.
    for p in (0..np).rev() {
        let pat = hd.pattern(p);
        code.clear();
        stack.clear();
        stack.push(pat.root());
        while let Some(x) = stack.pop() {
            if Some(x) == pat.hole() {
                code.push(TOKEN_HOLE);
                continue;
            }
            let owner = pt.owner(x);
            if owner == p {
                code.extend([TOKEN_NODE, tree.label(x).0, tree.arity(x) as u32]);
                let kids: Vec<NodeId> = tree.children(x).collect();
                stack.extend(kids.into_iter().rev());
                continue;
            }
            // x is inside a direct subpattern rooted at x
            let mut q = owner;
            while pt.parent(q) != Some(p) {
                q = pt.parent(q).expect("x lies in p");
            }
            debug_assert_eq!(hd.pattern(q).root(), x);
            code.extend([TOKEN_CHILD, class_of[q]]);
            if let Some(h) = hd.pattern(q).hole() {
                stack.push(h);
            }
        }
        let next = intern.len() as ClassId;
        class_of[p] = *intern.entry(code.clone()).or_insert(next);
    }
    PatternClassTable {
        class_count: intern.len(),
        class_of,
    }
}
