//! Language equivalence by partial derivatives.
//!
//! Expressions are hash-consed into an arena whose constructors normalize
//! unions up to associativity, commutativity and idempotence, concatenations
//! up to associativity, and the unit and zero laws. A set of partial
//! derivatives is a state of a deterministic automaton; an expression has
//! finitely many partial derivatives, so the lockstep walk of two such
//! automata terminates. Shared subexpressions of a circuit stay shared in
//! the arena.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::rc::Rc;

use thiserror::Error;

use super::forms::KleeneOps;
use super::syntax::{classify, RegexSym};
use crate::term::Term;

/// Product states explored before giving up.
pub const DEFAULT_STATE_BUDGET: usize = 100_000;

pub type ReId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Empty,
    Epsilon,
    Letter(String),
    /// At least two members, sorted, no unions among them.
    Union(Vec<ReId>),
    /// The left part is never a concatenation.
    Concat(ReId, ReId),
    Star(ReId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("more than {0} derivative pairs explored")]
    BudgetExceeded(usize),
    #[error("symbol `{0}` is not part of the regex signature")]
    NotRegex(String),
}

#[derive(Debug, Default)]
pub struct Arena {
    nodes: Vec<Node>,
    nullable: Vec<bool>,
    index: HashMap<Node, ReId>,
    partials: HashMap<(ReId, u32), Rc<[ReId]>>,
    letters: HashMap<String, u32>,
}

impl Arena {
    pub fn new() -> Self {
        let mut a = Self::default();
        a.intern(Node::Empty);
        a.intern(Node::Epsilon);
        a
    }

    pub const EMPTY: ReId = 0;
    pub const EPSILON: ReId = 1;

    pub fn node(&self, id: ReId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nullable(&self, id: ReId) -> bool {
        self.nullable[id as usize]
    }

    fn intern(&mut self, node: Node) -> ReId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let nullable = match &node {
            Node::Empty | Node::Letter(_) => false,
            Node::Epsilon | Node::Star(_) => true,
            Node::Union(items) => items.iter().any(|&i| self.nullable(i)),
            Node::Concat(l, r) => self.nullable(*l) && self.nullable(*r),
        };
        let id = self.nodes.len() as ReId;
        self.nodes.push(node.clone());
        self.nullable.push(nullable);
        self.index.insert(node, id);
        id
    }

    pub fn letter(&mut self, name: &str) -> ReId {
        let n = self.letters.len() as u32;
        self.letters.entry(name.to_string()).or_insert(n);
        self.intern(Node::Letter(name.to_string()))
    }

    pub fn union(&mut self, x: ReId, y: ReId) -> ReId {
        let mut items = BTreeSet::new();
        for id in [x, y] {
            match self.node(id) {
                Node::Empty => {}
                Node::Union(members) => items.extend(members.iter().copied()),
                _ => {
                    items.insert(id);
                }
            }
        }
        match items.len() {
            0 => Self::EMPTY,
            1 => *items.iter().next().expect("one member"),
            _ => self.intern(Node::Union(items.into_iter().collect())),
        }
    }

    pub fn concat(&mut self, x: ReId, y: ReId) -> ReId {
        if x == Self::EMPTY || y == Self::EMPTY {
            return Self::EMPTY;
        }
        if x == Self::EPSILON {
            return y;
        }
        if y == Self::EPSILON {
            return x;
        }
        // reassociate to the right along the left spine
        let mut spine = Vec::new();
        let mut head = x;
        while let Node::Concat(l, r) = *self.node(head) {
            spine.push(l);
            head = r;
        }
        let mut acc = self.intern(Node::Concat(head, y));
        while let Some(l) = spine.pop() {
            acc = self.intern(Node::Concat(l, acc));
        }
        acc
    }

    pub fn star(&mut self, x: ReId) -> ReId {
        match self.node(x) {
            Node::Empty | Node::Epsilon => Self::EPSILON,
            Node::Star(_) => x,
            _ => self.intern(Node::Star(x)),
        }
    }

    /// Imports a regex term.
    pub fn from_term(&mut self, t: &Term) -> Result<ReId, EquivError> {
        let alphabet = t.alphabet();
        let mut stack: Vec<ReId> = Vec::new();
        for &s in t.symbols().iter().rev() {
            let name = alphabet.name(s);
            let role = classify(name, alphabet.rank(s))
                .ok_or_else(|| EquivError::NotRegex(name.to_string()))?;
            let id = match role {
                RegexSym::Empty => Self::EMPTY,
                RegexSym::Epsilon => Self::EPSILON,
                RegexSym::Letter => self.letter(name),
                RegexSym::Star => {
                    let x = stack.pop().expect("operand");
                    self.star(x)
                }
                RegexSym::Union | RegexSym::Concat => {
                    let l = stack.pop().expect("left");
                    let r = stack.pop().expect("right");
                    if role == RegexSym::Union {
                        self.union(l, r)
                    } else {
                        self.concat(l, r)
                    }
                }
            };
            stack.push(id);
        }
        Ok(stack.pop().expect("nonempty"))
    }

    /// Partial derivatives of `id` with respect to `letter`, as a sorted set.
    pub fn partial_derivatives(&mut self, id: ReId, letter: &str) -> Rc<[ReId]> {
        let code = {
            let n = self.letters.len() as u32;
            *self.letters.entry(letter.to_string()).or_insert(n)
        };
        // explicit post-order so deep expressions do not exhaust the stack
        let mut todo: Vec<(ReId, bool)> = vec![(id, false)];
        while let Some((cur, expanded)) = todo.pop() {
            if self.partials.contains_key(&(cur, code)) {
                continue;
            }
            let node = self.node(cur).clone();
            let kids: Vec<ReId> = match &node {
                Node::Union(items) => items.clone(),
                Node::Concat(l, r) if self.nullable(*l) => vec![*l, *r],
                Node::Concat(l, _) => vec![*l],
                Node::Star(x) => vec![*x],
                _ => Vec::new(),
            };
            if !expanded {
                let missing: Vec<ReId> = kids
                    .into_iter()
                    .filter(|k| !self.partials.contains_key(&(*k, code)))
                    .collect();
                if !missing.is_empty() {
                    todo.push((cur, true));
                    todo.extend(missing.into_iter().map(|k| (k, false)));
                    continue;
                }
            }
            let pd = |a: &Self, k: ReId| a.partials[&(k, code)].clone();
            let mut out: BTreeSet<ReId> = BTreeSet::new();
            match node {
                Node::Empty | Node::Epsilon => {}
                Node::Letter(l) => {
                    if l == letter {
                        out.insert(Self::EPSILON);
                    }
                }
                Node::Union(items) => {
                    for k in items {
                        out.extend(pd(self, k).iter().copied());
                    }
                }
                Node::Concat(l, r) => {
                    for &t in pd(self, l).iter() {
                        out.insert(self.concat(t, r));
                    }
                    if self.nullable(l) {
                        out.extend(pd(self, r).iter().copied());
                    }
                }
                Node::Star(x) => {
                    for &t in pd(self, x).iter() {
                        out.insert(self.concat(t, cur));
                    }
                }
            }
            out.remove(&Self::EMPTY);
            self.partials.insert((cur, code), out.into_iter().collect());
        }
        self.partials[&(id, code)].clone()
    }

    /// Letters occurring below `id`.
    pub fn letters_of(&self, id: ReId) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut seen = HashSet::new();
        let mut todo = vec![id];
        while let Some(cur) = todo.pop() {
            if !seen.insert(cur) {
                continue;
            }
            match self.node(cur) {
                Node::Letter(l) => {
                    out.insert(l.clone());
                }
                Node::Union(items) => todo.extend(items.iter().copied()),
                Node::Concat(l, r) => todo.extend([*l, *r]),
                Node::Star(x) => todo.push(*x),
                Node::Empty | Node::Epsilon => {}
            }
        }
        out
    }

    /// Decides `L(x) = L(y)` by walking the subset automata of partial
    /// derivatives of both expressions in lockstep.
    pub fn equivalent(&mut self, x: ReId, y: ReId, budget: usize) -> Result<bool, EquivError> {
        let mut letters = self.letters_of(x);
        letters.extend(self.letters_of(y));
        let letters: Vec<String> = letters.into_iter().collect();
        let mut states = SubsetStates::default();
        let start = (states.intern(self, Rc::from([x])), states.intern(self, Rc::from([y])));
        let mut seen: HashSet<(u32, u32)> = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        let mut step: BTreeSet<ReId> = BTreeSet::new();
        while let Some((p, q)) = queue.pop_front() {
            if states.accepting[p as usize] != states.accepting[q as usize] {
                return Ok(false);
            }
            if p == q {
                continue;
            }
            for l in &letters {
                let mut next = [0u32; 2];
                for (slot, state) in [p, q].into_iter().enumerate() {
                    step.clear();
                    let terms = states.members[state as usize].clone();
                    for &t in terms.iter() {
                        step.extend(self.partial_derivatives(t, l).iter().copied());
                    }
                    let set: Rc<[ReId]> = step.iter().copied().collect();
                    next[slot] = states.intern(self, set);
                }
                let pair = (next[0], next[1]);
                if seen.insert(pair) {
                    if seen.len() > budget {
                        return Err(EquivError::BudgetExceeded(budget));
                    }
                    queue.push_back(pair);
                }
            }
        }
        Ok(true)
    }
}

/// Interned sets of partial derivatives.
#[derive(Default)]
struct SubsetStates {
    ids: HashMap<Rc<[ReId]>, u32>,
    members: Vec<Rc<[ReId]>>,
    accepting: Vec<bool>,
}

impl SubsetStates {
    fn intern(&mut self, arena: &Arena, set: Rc<[ReId]>) -> u32 {
        if let Some(&id) = self.ids.get(&set) {
            return id;
        }
        let id = self.members.len() as u32;
        self.accepting.push(set.iter().any(|&t| arena.nullable(t)));
        self.members.push(set.clone());
        self.ids.insert(set, id);
        id
    }
}

impl KleeneOps for Arena {
    type E = ReId;

    fn empty(&mut self) -> ReId {
        Arena::EMPTY
    }

    fn epsilon(&mut self) -> ReId {
        Arena::EPSILON
    }

    fn union(&mut self, x: &ReId, y: &ReId) -> ReId {
        Arena::union(self, *x, *y)
    }

    fn concat(&mut self, x: &ReId, y: &ReId) -> ReId {
        Arena::concat(self, *x, *y)
    }

    fn star(&mut self, x: &ReId) -> ReId {
        Arena::star(self, *x)
    }
}

/// Decides whether two regex terms denote the same language.
pub fn regex_equiv(x: &Term, y: &Term) -> Result<bool, EquivError> {
    regex_equiv_with_budget(x, y, DEFAULT_STATE_BUDGET)
}

pub fn regex_equiv_with_budget(x: &Term, y: &Term, budget: usize) -> Result<bool, EquivError> {
    let mut arena = Arena::new();
    let a = arena.from_term(x)?;
    let b = arena.from_term(y)?;
    arena.equivalent(a, b, budget)
}
