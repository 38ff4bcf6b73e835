//! Independent oracles shared by the integration tests and the acceptance
//! runner.
#![allow(dead_code)]

pub mod words;

use std::collections::BTreeSet;
use std::sync::Arc;

use treebal::contraction::{contract, tree_at_round};
use treebal::pattern::Pattern;
use treebal::term::{RankedAlphabet, Term};
use treebal::tree::{tree_of, NodeId, OrderedTree};

/// Preorder arity sequences of every full binary tree with `n` nodes.
pub fn full_binary_shapes(n: usize) -> Vec<Vec<usize>> {
    if n.is_multiple_of(2) {
        return Vec::new();
    }
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for left in (1..n - 1).step_by(2) {
        let lefts = full_binary_shapes(left);
        let rights = full_binary_shapes(n - 1 - left);
        for l in &lefts {
            for r in &rights {
                let mut v = Vec::with_capacity(n);
                v.push(2);
                v.extend(l);
                v.extend(r);
                out.push(v);
            }
        }
    }
    out
}

/// A term over `f/2`, `a/0` with the given preorder arities.
pub fn binary_term(arities: &[usize]) -> Term {
    let alphabet = Arc::new(RankedAlphabet::from_symbols([("f", 2), ("a", 0)]).unwrap());
    let f = alphabet.get("f").unwrap();
    let a = alphabet.get("a").unwrap();
    let syms = arities.iter().map(|&k| if k == 2 { f } else { a }).collect();
    Term::from_preorder(alphabet, syms).unwrap()
}

pub fn binary_tree(arities: &[usize]) -> OrderedTree {
    tree_of(&binary_term(arities))
}

/// Node set of a pattern, computed from parent pointers alone.
pub fn pattern_nodes(tree: &OrderedTree, p: Pattern) -> BTreeSet<NodeId> {
    let below = |x: NodeId, top: NodeId| {
        let mut y = x;
        loop {
            if y == top {
                return true;
            }
            match tree.parent(y) {
                Some(q) => y = q,
                None => return false,
            }
        }
    };
    (0..tree.len())
        .filter(|&x| below(x, p.root()) && p.hole().is_none_or(|h| !below(x, h)))
        .collect()
}

/// Well-nestedness by explicit set intersection.
pub fn well_nested_by_sets(tree: &OrderedTree, patterns: &[Pattern]) -> bool {
    let sets: Vec<BTreeSet<NodeId>> = patterns.iter().map(|&p| pattern_nodes(tree, p)).collect();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let (a, b) = (&sets[i], &sets[j]);
            if !(a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a)) {
                return false;
            }
        }
    }
    true
}

/// A sequential prune-and-bypass run.
pub struct SequentialRun {
    /// Per round, the node sets hidden in each new edge, in leaf order.
    pub hidden: Vec<Vec<BTreeSet<NodeId>>>,
    /// Node set of the tree before round `r` (and after the last round).
    pub alive: Vec<BTreeSet<NodeId>>,
}

/// One leaf at a time. A round's leaves are fixed from the tree at the start
/// of the round: internal leaves numbered `k` with `k = 2^i · odd`, left
/// children in round `2i`, right children in round `2i+1` (0-based).
pub fn sequential_contraction(tree: &OrderedTree) -> SequentialRun {
    let n = tree.len();
    let mut parent: Vec<Option<NodeId>> = (0..n).map(|v| tree.parent(v)).collect();
    let mut kids: Vec<Vec<NodeId>> = (0..n).map(|v| tree.children(v).collect()).collect();
    let mut hidden: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    let mut alive: BTreeSet<NodeId> = (0..n).collect();

    let leaves: Vec<NodeId> = (0..n).filter(|&v| kids[v].is_empty()).collect();
    let internal: Vec<NodeId> = if leaves.len() > 2 {
        leaves[1..leaves.len() - 1].to_vec()
    } else {
        Vec::new()
    };
    let mut levels = 0;
    while internal.len() >> levels > 0 {
        levels += 1;
    }
    let rounds = 2 * levels;

    let mut run = SequentialRun {
        hidden: Vec::new(),
        alive: vec![alive.clone()],
    };
    for r in 0..rounds {
        let i = r / 2;
        let want_left = r % 2 == 0;
        let chosen: Vec<NodeId> = internal
            .iter()
            .enumerate()
            .filter(|&(pos, _)| {
                let k = pos + 1;
                k % (1 << i) == 0 && (k >> i) % 2 == 1
            })
            .map(|(_, &w)| w)
            .filter(|&w| {
                let v = parent[w].unwrap();
                (kids[v][0] == w) == want_left
            })
            .collect();
        let mut this_round = Vec::new();
        for w in chosen {
            let v = parent[w].unwrap();
            let u = parent[v].expect("internal leaves sit below depth 1");
            let s = if kids[v][0] == w { kids[v][1] } else { kids[v][0] };
            let mut set = std::mem::take(&mut hidden[v]);
            set.insert(v);
            set.insert(w);
            set.extend(std::mem::take(&mut hidden[w]));
            set.extend(std::mem::take(&mut hidden[s]));
            let slot = kids[u].iter().position(|&c| c == v).unwrap();
            kids[u][slot] = s;
            parent[s] = Some(u);
            alive.remove(&v);
            alive.remove(&w);
            hidden[s] = set.clone();
            this_round.push(set);
        }
        run.hidden.push(this_round);
        run.alive.push(alive.clone());
    }
    run
}

/// Subtree sizes from the preorder arity sequence alone.
pub fn subtree_sizes(tree: &OrderedTree) -> Vec<usize> {
    let n = tree.len();
    let mut size = vec![1usize; n];
    let mut stack: Vec<usize> = Vec::new();
    for v in (0..n).rev() {
        for _ in 0..tree.arity(v) {
            size[v] += stack.pop().unwrap();
        }
        stack.push(size[v]);
    }
    size
}

/// Inner nodes whose size class `⌈size/m⌉` differs from every child's.
pub fn critical_by_brute_force(tree: &OrderedTree, m: usize) -> Vec<NodeId> {
    let size = subtree_sizes(tree);
    let class = |v: NodeId| size[v].div_ceil(m);
    (0..tree.len())
        .filter(|&v| tree.arity(v) > 0 && tree.children(v).all(|w| class(w) != class(v)))
        .collect()
}

/// Connected components of the nodes outside `kept`, via parent edges.
pub fn components_outside(tree: &OrderedTree, kept: &[NodeId]) -> BTreeSet<BTreeSet<NodeId>> {
    let n = tree.len();
    let mut is_kept = vec![false; n];
    for &v in kept {
        is_kept[v] = true;
    }
    let mut leader: Vec<usize> = (0..n).collect();
    fn find(leader: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while leader[r] != r {
            r = leader[r];
        }
        leader[x] = r;
        r
    }
    for v in 0..n {
        if let Some(p) = tree.parent(v) {
            if !is_kept[v] && !is_kept[p] {
                let (a, b) = (find(&mut leader, v), find(&mut leader, p));
                leader[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, BTreeSet<NodeId>> = Default::default();
    for v in (0..n).filter(|&v| !is_kept[v]) {
        let r = find(&mut leader, v);
        groups.entry(r).or_default().insert(v);
    }
    groups.into_values().collect()
}

/// Whether `(T[p], P[p])` and `(T[q], P[q])` are isomorphic, by matching
/// nodes of equal preorder rank. `sets[i]` is the node set of pattern `i`.
pub fn patterns_isomorphic(
    tree: &OrderedTree,
    patterns: &[Pattern],
    sets: &[BTreeSet<NodeId>],
    p: usize,
    q: usize,
) -> bool {
    let (sp, sq) = (&sets[p], &sets[q]);
    if sp.len() != sq.len() || patterns[p].is_context() != patterns[q].is_context() {
        return false;
    }
    let np: Vec<NodeId> = sp.iter().copied().collect();
    let nq: Vec<NodeId> = sq.iter().copied().collect();
    let rank = |nodes: &[NodeId], hole: Option<NodeId>, x: NodeId| -> Option<usize> {
        if Some(x) == hole {
            Some(usize::MAX)
        } else {
            nodes.binary_search(&x).ok()
        }
    };
    let (hp, hq) = (patterns[p].hole(), patterns[q].hole());
    for (&x, &y) in np.iter().zip(&nq) {
        if tree.label(x) != tree.label(y) || tree.arity(x) != tree.arity(y) {
            return false;
        }
        for (cx, cy) in tree.children(x).zip(tree.children(y)) {
            if rank(&np, hp, cx) != rank(&nq, hq, cy) {
                return false;
            }
        }
    }
    let inside = |outer: usize, nodes: &[NodeId], hole: Option<NodeId>| -> BTreeSet<(usize, Option<usize>)> {
        (0..patterns.len())
            .filter(|&r| sets[r].is_subset(&sets[outer]))
            .map(|r| {
                let pat = patterns[r];
                (
                    rank(nodes, hole, pat.root()).unwrap(),
                    pat.hole().map(|h| rank(nodes, hole, h).unwrap()),
                )
            })
            .collect()
    };
    inside(p, &np, hp) == inside(q, &nq, hq)
}

/// Compares the parallel contraction of `tree` round by round with
/// [`sequential_contraction`].
pub fn compare_with_sequential(tree: &OrderedTree) -> Result<(), String> {
    let run = contract(tree).map_err(|e| e.to_string())?;
    let oracle = sequential_contraction(tree);
    if run.rounds.len() != oracle.hidden.len() {
        return Err(format!("{} rounds, oracle has {}", run.rounds.len(), oracle.hidden.len()));
    }
    if !run.edges_disjoint {
        return Err("new edges of a round overlap".into());
    }
    for (r, (ours, theirs)) in run.rounds.iter().zip(&oracle.hidden).enumerate() {
        let ours: Vec<BTreeSet<NodeId>> = ours.iter().map(|p| pattern_nodes(tree, p.pattern)).collect();
        if &ours != theirs {
            return Err(format!("round {r}: {ours:?} vs {theirs:?}"));
        }
    }
    for (r, alive) in oracle.alive.iter().enumerate() {
        let state = tree_at_round(tree, r).map_err(|e| e.to_string())?;
        let ours: BTreeSet<NodeId> = state.nodes.iter().copied().collect();
        if &ours != alive {
            return Err(format!("tree after {r} rounds: {ours:?} vs {alive:?}"));
        }
    }
    let leaves = oracle.alive.last().unwrap().iter().filter(|&&v| tree.is_leaf(v)).count();
    if leaves != 2.min(tree.len()) {
        return Err(format!("{leaves} leaves remain"));
    }
    Ok(())
}
