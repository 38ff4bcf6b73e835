//! Evaluating terms and programs over user-supplied algebras.
//!
//! A program gate of context sort evaluates to a unary linear term function
//! of the algebra. [`LinearAlgebra`] lets an algebra choose a finite
//! representation for those functions; [`Chained`] gives any algebra the
//! fallback representation as an unevaluated chain of compositions.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::semiring::{MatModP64, MinPlusI64, ModP64, SemiringAlgebra};
use crate::term::{AlphabetError, Context, RankedAlphabet, Symbol, Term};
use crate::tslp::{build_tslp, Tslp, TslpError, TslpOp};
use crate::decomposition::hierarchical_definition;
use crate::tree::tree_of;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("symbol `{name}` of rank {rank} has no interpretation")]
    Uninterpreted { name: String, rank: usize },
    #[error("unknown algebra `{0}` (modp:<p>, matmodp:<p>, minplus, free)")]
    UnknownAlgebra(String),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error(transparent)]
    Tslp(#[from] TslpError),
}

/// An algebra over a ranked signature.
pub trait Algebra {
    type Value: Clone + fmt::Debug;
    /// A resolved symbol interpretation.
    type Op: Clone;

    fn operation(&self, name: &str, rank: usize) -> Result<Self::Op, AlgebraError>;
    fn apply(&self, op: &Self::Op, args: &[Self::Value]) -> Self::Value;
    fn equal(&self, x: &Self::Value, y: &Self::Value) -> bool;
}

/// An algebra together with a representation of its linear term functions.
pub trait LinearAlgebra: Algebra {
    type Linear: Clone;

    /// `x ↦ op(args[..hole], x, args[hole..])`; `hole` counts from 0.
    fn hat(&self, op: &Self::Op, args: &[Self::Value], hole: usize) -> Self::Linear;
    /// `x ↦ outer(inner(x))`.
    fn compose(&self, outer: &Self::Linear, inner: &Self::Linear) -> Self::Linear;
    fn apply_linear(&self, f: &Self::Linear, x: &Self::Value) -> Self::Value;
}

/// Per-alphabet cache of resolved operations.
struct Resolver<'a, A: Algebra> {
    algebra: &'a A,
    alphabet: &'a RankedAlphabet,
    ops: Vec<Option<A::Op>>,
}

impl<'a, A: Algebra> Resolver<'a, A> {
    fn new(algebra: &'a A, alphabet: &'a RankedAlphabet) -> Self {
        Self {
            algebra,
            alphabet,
            ops: vec![None; alphabet.len()],
        }
    }

    fn get(&mut self, sym: Symbol) -> Result<&A::Op, AlgebraError> {
        let slot = &mut self.ops[sym.index()];
        if slot.is_none() {
            let name = self.alphabet.name(sym);
            *slot = Some(self.algebra.operation(name, self.alphabet.rank(sym))?);
        }
        Ok(slot.as_ref().expect("just filled"))
    }
}

fn eval_preorder<A: Algebra>(
    algebra: &A,
    alphabet: &RankedAlphabet,
    symbols: &[Symbol],
    hole: Option<&A::Value>,
) -> Result<A::Value, AlgebraError> {
    let mut ops = Resolver::new(algebra, alphabet);
    let mut stack: Vec<A::Value> = Vec::new();
    let mut args: Vec<A::Value> = Vec::new();
    for &s in symbols.iter().rev() {
        if s == Symbol::HOLE {
            stack.push(hole.expect("context evaluated without argument").clone());
            continue;
        }
        let r = alphabet.rank(s);
        args.clear();
        for _ in 0..r {
            args.push(stack.pop().expect("well-formed preorder"));
        }
        let op = ops.get(s)?;
        stack.push(algebra.apply(op, &args));
    }
    Ok(stack.pop().expect("nonempty term"))
}

/// `t^A`.
pub fn eval_term<A: Algebra>(t: &Term, algebra: &A) -> Result<A::Value, AlgebraError> {
    eval_preorder(algebra, t.alphabet(), t.symbols(), None)
}

/// `s^A(a)`.
pub fn eval_context<A: Algebra>(
    s: &Context,
    algebra: &A,
    a: &A::Value,
) -> Result<A::Value, AlgebraError> {
    eval_preorder(algebra, s.alphabet(), s.symbols(), Some(a))
}

/// Value of a gate of the derived two-sorted algebra.
#[derive(Clone)]
pub enum Derived<V, L> {
    Value(V),
    Linear(L),
}

impl<V, L> Derived<V, L> {
    fn value(&self) -> &V {
        match self {
            Derived::Value(v) => v,
            Derived::Linear(_) => panic!("sort-checked program"),
        }
    }

    fn linear(&self) -> &L {
        match self {
            Derived::Linear(l) => l,
            Derived::Value(_) => panic!("sort-checked program"),
        }
    }
}

/// Gate-by-gate evaluation without unfolding.
pub fn eval_tslp<A: LinearAlgebra>(program: &Tslp, algebra: &A) -> Result<A::Value, AlgebraError> {
    let alphabet = program.alphabet();
    let mut ops = Resolver::new(algebra, alphabet);
    let circuit = program.circuit();
    let live = circuit.reachable();
    let mut vals: Vec<Option<Derived<A::Value, A::Linear>>> = Vec::with_capacity(circuit.len());
    let mut args: Vec<A::Value> = Vec::new();
    for (id, g) in circuit.gates().iter().enumerate() {
        if !live[id] {
            vals.push(None);
            continue;
        }
        let kid = |i: usize| vals[g.children[i]].as_ref().expect("live child");
        args.clear();
        let v = match g.op {
            TslpOp::Con(f) => {
                args.extend(g.children.iter().map(|&c| vals[c].as_ref().expect("live child").value().clone()));
                Derived::Value(algebra.apply(ops.get(f)?, &args))
            }
            TslpOp::Hat(f, i) => {
                args.extend(g.children.iter().map(|&c| vals[c].as_ref().expect("live child").value().clone()));
                Derived::Linear(algebra.hat(ops.get(f)?, &args, i - 1))
            }
            TslpOp::Sub => Derived::Value(algebra.apply_linear(kid(0).linear(), kid(1).value())),
            TslpOp::Comp => Derived::Linear(algebra.compose(kid(0).linear(), kid(1).linear())),
            TslpOp::Copy => kid(0).clone(),
        };
        vals.push(Some(v));
    }
    Ok(vals[circuit.output()].take().expect("output is live").value().clone())
}

/// Linear term functions as unevaluated composition chains.
#[derive(Debug, Clone)]
pub struct Chained<A>(pub A);

pub enum Chain<V, Op> {
    Hat { op: Op, args: Vec<V>, hole: usize },
    Compose(Rc<Chain<V, Op>>, Rc<Chain<V, Op>>),
}

impl<A: Algebra> Algebra for Chained<A> {
    type Value = A::Value;
    type Op = A::Op;

    fn operation(&self, name: &str, rank: usize) -> Result<A::Op, AlgebraError> {
        self.0.operation(name, rank)
    }

    fn apply(&self, op: &A::Op, args: &[A::Value]) -> A::Value {
        self.0.apply(op, args)
    }

    fn equal(&self, x: &A::Value, y: &A::Value) -> bool {
        self.0.equal(x, y)
    }
}

impl<A: Algebra> LinearAlgebra for Chained<A> {
    type Linear = Rc<Chain<A::Value, A::Op>>;

    fn hat(&self, op: &A::Op, args: &[A::Value], hole: usize) -> Self::Linear {
        Rc::new(Chain::Hat {
            op: op.clone(),
            args: args.to_vec(),
            hole,
        })
    }

    fn compose(&self, outer: &Self::Linear, inner: &Self::Linear) -> Self::Linear {
        Rc::new(Chain::Compose(outer.clone(), inner.clone()))
    }

    fn apply_linear(&self, f: &Self::Linear, x: &A::Value) -> A::Value {
        // innermost first: walk down the inner spine, then apply outward
        let mut pending: Vec<&Chain<A::Value, A::Op>> = Vec::new();
        let mut todo: Vec<&Chain<A::Value, A::Op>> = vec![f];
        while let Some(c) = todo.pop() {
            match c {
                Chain::Compose(outer, inner) => {
                    todo.push(outer);
                    todo.push(inner);
                }
                hat => pending.push(hat),
            }
        }
        let mut acc = x.clone();
        let mut args = Vec::new();
        for c in pending {
            if let Chain::Hat { op, args: fixed, hole } = c {
                args.clear();
                args.extend_from_slice(&fixed[..*hole]);
                args.push(acc);
                args.extend_from_slice(&fixed[*hole..]);
                acc = self.0.apply(op, &args);
            }
        }
        acc
    }
}

/// The term algebra itself: every symbol is its own constructor.
#[derive(Debug, Clone)]
pub struct FreeAlgebra {
    alphabet: Arc<RankedAlphabet>,
}

impl FreeAlgebra {
    pub fn new(alphabet: Arc<RankedAlphabet>) -> Self {
        Self { alphabet }
    }
}

impl Algebra for FreeAlgebra {
    type Value = Term;
    type Op = Symbol;

    fn operation(&self, name: &str, rank: usize) -> Result<Symbol, AlgebraError> {
        self.alphabet
            .get(name)
            .filter(|&s| self.alphabet.rank(s) == rank)
            .ok_or_else(|| AlgebraError::Uninterpreted {
                name: name.to_string(),
                rank,
            })
    }

    fn apply(&self, op: &Symbol, args: &[Term]) -> Term {
        if args.is_empty() {
            Term::leaf(self.alphabet.clone(), *op)
        } else {
            Term::node(*op, args)
        }
    }

    fn equal(&self, x: &Term, y: &Term) -> bool {
        x == y
    }
}

impl LinearAlgebra for FreeAlgebra {
    type Linear = Context;

    fn hat(&self, op: &Symbol, args: &[Term], hole: usize) -> Context {
        let mut symbols = vec![*op];
        for a in &args[..hole] {
            symbols.extend_from_slice(a.symbols());
        }
        symbols.push(Symbol::HOLE);
        for a in &args[hole..] {
            symbols.extend_from_slice(a.symbols());
        }
        Context::from_preorder(self.alphabet.clone(), symbols).expect("one hole")
    }

    fn compose(&self, outer: &Context, inner: &Context) -> Context {
        outer.compose(inner)
    }

    fn apply_linear(&self, f: &Context, x: &Term) -> Term {
        f.apply(x)
    }
}

/// Meaning of a symbol of the derived signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivedSymbol {
    Con(Symbol),
    Hat(Symbol, usize),
    Sub,
    Comp,
}

/// A term over the derived signature: constructors `f`, hole constructors
/// `f^i`, substitution `@sub` and composition `@comp`.
#[derive(Debug, Clone)]
pub struct DerivedTerm {
    pub term: Term,
    /// Indexed by the symbols of `term`'s alphabet.
    pub meaning: Vec<DerivedSymbol>,
    /// Alphabet of the original term.
    pub base: Arc<RankedAlphabet>,
}

/// The balanced program for `t`, before sharing, read as a term.
pub fn balanced_fa_term(t: &Term) -> Result<DerivedTerm, AlgebraError> {
    let tree = Arc::new(tree_of(t));
    let hd = hierarchical_definition(tree).map_err(TslpError::from)?;
    let program = build_tslp(t.alphabet().clone(), &hd)?;
    let base = t.alphabet().clone();
    let mut alphabet = RankedAlphabet::new();
    let mut meaning = Vec::new();
    let mut symbol_of: HashMap<TslpOp, Symbol> = HashMap::new();
    let circuit = program.circuit();
    for g in circuit.gates() {
        if symbol_of.contains_key(&g.op) {
            continue;
        }
        let (name, rank, m) = match g.op {
            TslpOp::Con(f) => (base.name(f).to_string(), base.rank(f), DerivedSymbol::Con(f)),
            TslpOp::Hat(f, i) => (format!("{}^{i}", base.name(f)), base.rank(f) - 1, DerivedSymbol::Hat(f, i)),
            TslpOp::Sub => ("@sub".to_string(), 2, DerivedSymbol::Sub),
            TslpOp::Comp => ("@comp".to_string(), 2, DerivedSymbol::Comp),
            TslpOp::Copy => unreachable!("built programs have no copy gates"),
        };
        let s = alphabet.add(&name, rank)?;
        meaning.push(m);
        symbol_of.insert(g.op, s);
    }
    // the built program is a tree with the output last: emit it in preorder
    let mut symbols = Vec::with_capacity(circuit.len());
    let mut stack = vec![circuit.output()];
    while let Some(id) = stack.pop() {
        let g = circuit.gate(id);
        symbols.push(symbol_of[&g.op]);
        stack.extend(g.children.iter().rev());
    }
    let term = Term::from_preorder(Arc::new(alphabet), symbols).expect("program tree is a term");
    Ok(DerivedTerm { term, meaning, base })
}

/// Evaluates a derived-signature term under `algebra`.
pub fn eval_derived_term<A: LinearAlgebra>(
    dt: &DerivedTerm,
    algebra: &A,
) -> Result<A::Value, AlgebraError> {
    let mut ops = Resolver::new(algebra, &dt.base);
    let alphabet = dt.term.alphabet();
    let mut stack: Vec<Derived<A::Value, A::Linear>> = Vec::new();
    let mut kids: Vec<Derived<A::Value, A::Linear>> = Vec::new();
    let mut args: Vec<A::Value> = Vec::new();
    for &s in dt.term.symbols().iter().rev() {
        kids.clear();
        for _ in 0..alphabet.rank(s) {
            kids.push(stack.pop().expect("well-formed preorder"));
        }
        let v = match dt.meaning[s.index()] {
            DerivedSymbol::Con(f) => {
                args.clear();
                args.extend(kids.iter().map(|k| k.value().clone()));
                Derived::Value(algebra.apply(ops.get(f)?, &args))
            }
            DerivedSymbol::Hat(f, i) => {
                args.clear();
                args.extend(kids.iter().map(|k| k.value().clone()));
                Derived::Linear(algebra.hat(ops.get(f)?, &args, i - 1))
            }
            DerivedSymbol::Sub => Derived::Value(algebra.apply_linear(kids[0].linear(), kids[1].value())),
            DerivedSymbol::Comp => Derived::Linear(algebra.compose(kids[0].linear(), kids[1].linear())),
        };
        stack.push(v);
    }
    match stack.pop() {
        Some(Derived::Value(v)) => Ok(v),
        _ => Err(AlgebraError::Shape("derived term does not denote a value".into())),
    }
}

/// Algebras selectable by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuiltinAlgebra {
    ModP(u64),
    MatModP(u64),
    MinPlus,
    Free,
}

impl FromStr for BuiltinAlgebra {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, AlgebraError> {
        let bad = || AlgebraError::UnknownAlgebra(s.to_string());
        let modulus = |p: &str| -> Result<u64, AlgebraError> {
            let p: u64 = p.parse().map_err(|_| bad())?;
            // products of two residues must fit in u64
            if (2..=u32::MAX as u64).contains(&p) {
                Ok(p)
            } else {
                Err(bad())
            }
        };
        match s.split_once(':') {
            Some(("modp", p)) => Ok(BuiltinAlgebra::ModP(modulus(p)?)),
            Some(("matmodp", p)) => Ok(BuiltinAlgebra::MatModP(modulus(p)?)),
            None if s == "minplus" => Ok(BuiltinAlgebra::MinPlus),
            None if s == "free" => Ok(BuiltinAlgebra::Free),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for BuiltinAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinAlgebra::ModP(p) => write!(f, "modp:{p}"),
            BuiltinAlgebra::MatModP(p) => write!(f, "matmodp:{p}"),
            BuiltinAlgebra::MinPlus => f.write_str("minplus"),
            BuiltinAlgebra::Free => f.write_str("free"),
        }
    }
}

impl BuiltinAlgebra {
    /// Direct evaluation, rendered as text.
    pub fn eval_term(&self, t: &Term) -> Result<String, AlgebraError> {
        Ok(match self {
            BuiltinAlgebra::ModP(p) => eval_term(t, &SemiringAlgebra(ModP64::new(*p)))?.to_string(),
            BuiltinAlgebra::MatModP(p) => {
                eval_term(t, &SemiringAlgebra(MatModP64::new(*p)))?.to_string()
            }
            BuiltinAlgebra::MinPlus => eval_term(t, &SemiringAlgebra(MinPlusI64::new()))?.to_string(),
            BuiltinAlgebra::Free => eval_term(t, &FreeAlgebra::new(t.alphabet().clone()))?.to_string(),
        })
    }

    /// Gate-wise evaluation of a program, rendered as text.
    pub fn eval_tslp(&self, program: &Tslp) -> Result<String, AlgebraError> {
        Ok(match self {
            BuiltinAlgebra::ModP(p) => eval_tslp(program, &SemiringAlgebra(ModP64::new(*p)))?.to_string(),
            BuiltinAlgebra::MatModP(p) => {
                eval_tslp(program, &SemiringAlgebra(MatModP64::new(*p)))?.to_string()
            }
            BuiltinAlgebra::MinPlus => {
                eval_tslp(program, &SemiringAlgebra(MinPlusI64::new()))?.to_string()
            }
            BuiltinAlgebra::Free => {
                eval_tslp(program, &FreeAlgebra::new(program.alphabet().clone()))?.to_string()
            }
        })
    }
}
