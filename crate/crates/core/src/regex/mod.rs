//! Balancing regular expressions into circuits of logarithmic depth.

pub mod equiv;
pub mod forms;
pub mod syntax;

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitBuilder, CircuitStats, GateId, GateOp};
use crate::term::{RankedAlphabet, Symbol, Term};
use crate::tslp::{balance, Tslp, TslpError, TslpOp, DEFAULT_UNFOLD_CAP};
pub use equiv::{regex_equiv, regex_equiv_with_budget, Arena, EquivError, DEFAULT_STATE_BUDGET};
pub use forms::{KleeneForm, KleeneOps};
pub use syntax::{parse_regex, regex_alphabet, render_regex, star_height, RegexParseError, RegexSym};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegexOp {
    Empty,
    Epsilon,
    Letter(Symbol),
    Union,
    Concat,
    Star,
    Copy,
}

impl GateOp for RegexOp {
    fn is_copy(&self) -> bool {
        matches!(self, RegexOp::Copy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegexError {
    #[error("symbol `{0}` is not part of the regex signature")]
    NotRegex(String),
    #[error(transparent)]
    Tslp(#[from] TslpError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
}

/// A circuit over union, concatenation, star and the constants.
#[derive(Debug, Clone)]
pub struct RegexCircuit {
    alphabet: Arc<RankedAlphabet>,
    circuit: Circuit<RegexOp>,
}

impl RegexCircuit {
    pub fn alphabet(&self) -> &Arc<RankedAlphabet> {
        &self.alphabet
    }

    pub fn circuit(&self) -> &Circuit<RegexOp> {
        &self.circuit
    }

    pub fn stats(&self) -> CircuitStats {
        self.circuit.stats()
    }

    /// Most stars on any path from the output.
    pub fn star_height(&self) -> usize {
        let mut h = vec![0usize; self.circuit.len()];
        for (id, g) in self.circuit.gates().iter().enumerate() {
            let below = g.children.iter().map(|&c| h[c]).max().unwrap_or(0);
            h[id] = below + usize::from(g.op == RegexOp::Star);
        }
        h[self.circuit.output()]
    }

    /// Imports the circuit into `arena`, keeping shared gates shared.
    pub fn to_arena(&self, arena: &mut Arena) -> equiv::ReId {
        let mut ids: Vec<equiv::ReId> = Vec::with_capacity(self.circuit.len());
        for g in self.circuit.gates() {
            let kid = |i: usize| ids[g.children[i]];
            let id = match g.op {
                RegexOp::Empty => Arena::EMPTY,
                RegexOp::Epsilon => Arena::EPSILON,
                RegexOp::Letter(s) => arena.letter(self.alphabet.name(s)),
                RegexOp::Union => arena.union(kid(0), kid(1)),
                RegexOp::Concat => arena.concat(kid(0), kid(1)),
                RegexOp::Star => arena.star(kid(0)),
                RegexOp::Copy => kid(0),
            };
            ids.push(id);
        }
        ids[self.circuit.output()]
    }

    /// Number of nodes of the expression tree the circuit denotes.
    pub fn unfolded_size(&self) -> u64 {
        let mut size = vec![0u64; self.circuit.len()];
        for (id, g) in self.circuit.gates().iter().enumerate() {
            let below = g.children.iter().fold(0u64, |acc, &c| acc.saturating_add(size[c]));
            size[id] = if g.op == RegexOp::Copy { below } else { below.saturating_add(1) };
        }
        size[self.circuit.output()]
    }

    /// The expression tree, if it has at most `cap` nodes.
    pub fn unfold_with_cap(&self, cap: u64) -> Result<Term, TslpError> {
        let size = self.unfolded_size();
        if size > cap {
            return Err(TslpError::CapExceeded { size, cap });
        }
        let sym = |name: &str| self.alphabet.get(name).expect("regex alphabet");
        let mut symbols = Vec::with_capacity(size as usize);
        let mut stack = vec![self.circuit.output()];
        while let Some(id) = stack.pop() {
            let g = self.circuit.gate(id);
            match g.op {
                RegexOp::Copy => {
                    stack.push(g.children[0]);
                    continue;
                }
                RegexOp::Empty => symbols.push(sym(syntax::EMPTY)),
                RegexOp::Epsilon => symbols.push(sym(syntax::EPSILON)),
                RegexOp::Letter(s) => symbols.push(s),
                RegexOp::Union => symbols.push(sym(syntax::UNION)),
                RegexOp::Concat => symbols.push(sym(syntax::CONCAT)),
                RegexOp::Star => symbols.push(sym(syntax::STAR)),
            }
            stack.extend(g.children.iter().rev());
        }
        Ok(Term::from_preorder(self.alphabet.clone(), symbols).expect("circuit denotes a term"))
    }

    pub fn unfold(&self) -> Result<Term, TslpError> {
        self.unfold_with_cap(DEFAULT_UNFOLD_CAP)
    }

    /// One line per gate: `g4 = g2 + g3`, `g5 = g4*`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, g) in self.circuit.gates().iter().enumerate() {
            let k = &g.children;
            let _ = match g.op {
                RegexOp::Empty => writeln!(out, "g{id} = 0"),
                RegexOp::Epsilon => writeln!(out, "g{id} = 1"),
                RegexOp::Letter(s) => writeln!(out, "g{id} = {}", self.alphabet.name(s)),
                RegexOp::Union => writeln!(out, "g{id} = g{} + g{}", k[0], k[1]),
                RegexOp::Concat => writeln!(out, "g{id} = g{} . g{}", k[0], k[1]),
                RegexOp::Star => writeln!(out, "g{id} = g{}*", k[0]),
                RegexOp::Copy => writeln!(out, "g{id} = g{}", k[0]),
            };
        }
        let _ = writeln!(out, "output g{}", self.circuit.output());
        out
    }

    pub fn to_dot(&self) -> String {
        self.circuit.to_dot(|op| match *op {
            RegexOp::Empty => ("0".into(), "#c6dbef"),
            RegexOp::Epsilon => ("1".into(), "#c6dbef"),
            RegexOp::Letter(s) => (self.alphabet.name(s).to_string(), "#c6dbef"),
            RegexOp::Union => ("+".into(), "#e5f5e0"),
            RegexOp::Concat => (".".into(), "#fee6ce"),
            RegexOp::Star => ("*".into(), "#fdd0a2"),
            RegexOp::Copy => ("copy".into(), "#f0f0f0"),
        })
    }
}

/// Emits gates, folding `x+0`, `0+x`, `x.1`, `1.x`, `0.x`, `x.0`, `0*`,
/// `1*` and `x**` on the fly.
struct GateEmitter {
    b: CircuitBuilder<RegexOp>,
    empty: Option<GateId>,
    epsilon: Option<GateId>,
}

impl GateEmitter {
    fn new() -> Self {
        Self {
            b: CircuitBuilder::new(),
            empty: None,
            epsilon: None,
        }
    }

    /// Looks through copy gates.
    fn op_of(&self, mut g: GateId) -> RegexOp {
        loop {
            let gate = &self.b.gates()[g];
            if gate.op != RegexOp::Copy {
                return gate.op;
            }
            g = gate.children[0];
        }
    }

    fn push(&mut self, op: RegexOp, children: Vec<GateId>) -> GateId {
        self.b.push(op, children)
    }
}

impl KleeneOps for GateEmitter {
    type E = GateId;

    fn empty(&mut self) -> GateId {
        match self.empty {
            Some(g) => g,
            None => {
                let g = self.push(RegexOp::Empty, vec![]);
                self.empty = Some(g);
                g
            }
        }
    }

    fn epsilon(&mut self) -> GateId {
        match self.epsilon {
            Some(g) => g,
            None => {
                let g = self.push(RegexOp::Epsilon, vec![]);
                self.epsilon = Some(g);
                g
            }
        }
    }

    fn union(&mut self, x: &GateId, y: &GateId) -> GateId {
        match (self.op_of(*x), self.op_of(*y)) {
            (RegexOp::Empty, _) => *y,
            (_, RegexOp::Empty) => *x,
            _ => self.push(RegexOp::Union, vec![*x, *y]),
        }
    }

    fn concat(&mut self, x: &GateId, y: &GateId) -> GateId {
        match (self.op_of(*x), self.op_of(*y)) {
            (RegexOp::Empty, _) => *x,
            (_, RegexOp::Empty) => *y,
            (RegexOp::Epsilon, _) => *y,
            (_, RegexOp::Epsilon) => *x,
            _ => self.push(RegexOp::Concat, vec![*x, *y]),
        }
    }

    fn star(&mut self, x: &GateId) -> GateId {
        match self.op_of(*x) {
            RegexOp::Empty | RegexOp::Epsilon => self.epsilon(),
            RegexOp::Star => *x,
            _ => self.push(RegexOp::Star, vec![*x]),
        }
    }

    fn copy(&mut self, x: &GateId) -> GateId {
        self.push(RegexOp::Copy, vec![*x])
    }
}

/// Which gates denote languages, and which functions of which form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RegexGateClass {
    Value,
    /// `x ↦ a x b + c`.
    Linear,
    /// `x ↦ α (a x b + c)* γ + δ`.
    Starred,
}

fn check_regex_signature(alphabet: &RankedAlphabet) -> Result<Vec<RegexSym>, RegexError> {
    syntax::roles(alphabet).map_err(RegexError::NotRegex)
}

/// A context gate is starred when a star hole constructor is reachable from
/// it through composition gates only.
pub fn classify_context_gates(program: &Tslp) -> Result<Vec<RegexGateClass>, RegexError> {
    let roles = check_regex_signature(program.alphabet())?;
    let mut out: Vec<RegexGateClass> = Vec::with_capacity(program.circuit().len());
    for g in program.circuit().gates() {
        let class = match g.op {
            TslpOp::Con(_) | TslpOp::Sub => RegexGateClass::Value,
            TslpOp::Hat(f, _) if roles[f.index()] == RegexSym::Star => RegexGateClass::Starred,
            TslpOp::Hat(..) => RegexGateClass::Linear,
            TslpOp::Comp => {
                if g.children.iter().any(|&c| out[c] == RegexGateClass::Starred) {
                    RegexGateClass::Starred
                } else {
                    RegexGateClass::Linear
                }
            }
            TslpOp::Copy => out[g.children[0]],
        };
        out.push(class);
    }
    Ok(out)
}

enum Slot {
    Value(GateId),
    Function(KleeneForm<GateId>),
}

/// Replaces context gates by their three or six coefficient gates.
pub fn regex_circuit(program: &Tslp) -> Result<RegexCircuit, RegexError> {
    let roles = check_regex_signature(program.alphabet())?;
    let mut alphabet = (**program.alphabet()).clone();
    for name in [syntax::EMPTY, syntax::EPSILON, syntax::UNION, syntax::CONCAT, syntax::STAR] {
        let rank = match name {
            syntax::UNION | syntax::CONCAT => 2,
            syntax::STAR => 1,
            _ => 0,
        };
        alphabet.intern(name, rank).expect("regex operator");
    }
    let mut k = GateEmitter::new();
    let mut slots: Vec<Slot> = Vec::with_capacity(program.circuit().len());
    let value = |s: &Slot| match s {
        Slot::Value(v) => *v,
        Slot::Function(_) => unreachable!("sort-checked program"),
    };
    let function = |s: &Slot| match s {
        Slot::Function(f) => *f,
        Slot::Value(_) => unreachable!("sort-checked program"),
    };
    for g in program.circuit().gates() {
        let slot = match g.op {
            TslpOp::Con(f) => {
                let kids: Vec<GateId> = g.children.iter().map(|&c| value(&slots[c])).collect();
                let op = match roles[f.index()] {
                    RegexSym::Empty => RegexOp::Empty,
                    RegexSym::Epsilon => RegexOp::Epsilon,
                    RegexSym::Letter => RegexOp::Letter(f),
                    RegexSym::Union => RegexOp::Union,
                    RegexSym::Concat => RegexOp::Concat,
                    RegexSym::Star => RegexOp::Star,
                };
                Slot::Value(k.push(op, kids))
            }
            TslpOp::Hat(f, i) => Slot::Function(match roles[f.index()] {
                RegexSym::Union => forms::union_with(&mut k, &value(&slots[g.children[0]])),
                RegexSym::Concat if i == 1 => forms::concat_right(&mut k, &value(&slots[g.children[0]])),
                RegexSym::Concat => forms::concat_left(&mut k, &value(&slots[g.children[0]])),
                RegexSym::Star => {
                    let id = forms::identity(&mut k);
                    forms::star_form(&mut k, &id)
                }
                _ => unreachable!("constants have no hole"),
            }),
            TslpOp::Comp => {
                let (o, i) = (function(&slots[g.children[0]]), function(&slots[g.children[1]]));
                Slot::Function(forms::compose_forms(&mut k, &o, &i))
            }
            TslpOp::Sub => {
                let f = function(&slots[g.children[0]]);
                let v = value(&slots[g.children[1]]);
                Slot::Value(forms::apply_form(&mut k, &f, &v))
            }
            TslpOp::Copy => match &slots[g.children[0]] {
                Slot::Value(v) => Slot::Value(k.copy(v)),
                Slot::Function(f) => Slot::Function(*f),
            },
        };
        slots.push(slot);
    }
    let output = value(&slots[program.circuit().output()]);
    let raw = k.b.finish(output).map_err(TslpError::from)?;
    Ok(RegexCircuit {
        alphabet: Arc::new(alphabet),
        circuit: raw.eliminate_copies().minimal_dag(),
    })
}

/// Balanced circuit for a regular expression.
pub fn balance_regex(r: &Term) -> Result<RegexCircuit, RegexError> {
    check_regex_signature(r.alphabet())?;
    regex_circuit(&balance(r)?)
}

/// Whether `circuit` denotes the same language as `r`.
pub fn circuit_equiv(r: &Term, circuit: &RegexCircuit, budget: usize) -> Result<bool, RegexError> {
    let mut arena = Arena::new();
    let x = arena.from_term(r)?;
    let y = circuit.to_arena(&mut arena);
    Ok(arena.equivalent(x, y, budget)?)
}
