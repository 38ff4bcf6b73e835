//! Tree straight-line programs as circuits over terms and contexts.
//!
//! Gates of sort term evaluate to terms, gates of sort context to contexts
//! with one hole. `Con(f)` builds `f(t1,..,tr)`, `Hat(f,i)` builds the
//! context with the hole at argument `i` (1-based), `Sub` plugs a term into a
//! context and `Comp` plugs a context into a context.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitBuilder, CircuitError, CircuitStats, GateId, GateOp};
use crate::decomposition::{
    hierarchical_definition_with, normal_shape, BridgeSize, DecompositionError, NormalShape,
    DEFAULT_MAX_RANK,
};
use crate::pattern::{HierarchicalDefinition, Pattern};
use crate::term::{RankedAlphabet, Symbol, Term};
use crate::tree::tree_of;

/// Unfolding stops beyond this many nodes unless configured otherwise.
pub const DEFAULT_UNFOLD_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TslpOp {
    Con(Symbol),
    /// Hole at argument `.1`, counted from 1.
    Hat(Symbol, usize),
    Sub,
    Comp,
    Copy,
}

impl GateOp for TslpOp {
    fn is_copy(&self) -> bool {
        matches!(self, TslpOp::Copy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Term,
    Context,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TslpError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("gate {0} violates the sort or arity discipline")]
    Sort(GateId),
    #[error("output gate has context sort")]
    OutputSort,
    #[error("pattern {0} is not in normal form")]
    NotNormal(Pattern),
    #[error("gate {0} is a copy gate, which has no normal-form production")]
    CopyGate(GateId),
    #[error("unfolded term would have {size} nodes, above the cap of {cap}")]
    CapExceeded { size: u64, cap: u64 },
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

/// A sort-checked circuit over the term/context algebra.
#[derive(Debug, Clone)]
pub struct Tslp {
    alphabet: Arc<RankedAlphabet>,
    circuit: Circuit<TslpOp>,
}

impl Tslp {
    pub fn new(alphabet: Arc<RankedAlphabet>, circuit: Circuit<TslpOp>) -> Result<Self, TslpError> {
        let t = Self { alphabet, circuit };
        let sorts = t.sorts()?;
        if sorts[t.circuit.output()] != Sort::Term {
            return Err(TslpError::OutputSort);
        }
        Ok(t)
    }

    pub fn alphabet(&self) -> &Arc<RankedAlphabet> {
        &self.alphabet
    }

    pub fn circuit(&self) -> &Circuit<TslpOp> {
        &self.circuit
    }

    /// Sort of every gate, checking arities and child sorts.
    pub fn sorts(&self) -> Result<Vec<Sort>, TslpError> {
        let mut sorts: Vec<Sort> = Vec::with_capacity(self.circuit.len());
        for (id, g) in self.circuit.gates().iter().enumerate() {
            let kid = |i: usize| sorts[g.children[i]];
            let all_terms = || g.children.iter().all(|&c| sorts[c] == Sort::Term);
            let n = g.children.len();
            let sort = match g.op {
                TslpOp::Con(f) if !f.is_reserved() && f.index() < self.alphabet.len() => {
                    (n == self.alphabet.rank(f) && all_terms()).then_some(Sort::Term)
                }
                TslpOp::Hat(f, i) if !f.is_reserved() && f.index() < self.alphabet.len() => {
                    let r = self.alphabet.rank(f);
                    (r >= 1 && (1..=r).contains(&i) && n == r - 1 && all_terms())
                        .then_some(Sort::Context)
                }
                TslpOp::Sub => {
                    (n == 2 && kid(0) == Sort::Context && kid(1) == Sort::Term).then_some(Sort::Term)
                }
                TslpOp::Comp => (n == 2 && kid(0) == Sort::Context && kid(1) == Sort::Context)
                    .then_some(Sort::Context),
                TslpOp::Copy => (n == 1).then(|| kid(0)),
                _ => None,
            };
            sorts.push(sort.ok_or(TslpError::Sort(id))?);
        }
        Ok(sorts)
    }

    pub fn stats(&self) -> CircuitStats {
        self.circuit.stats()
    }

    pub fn minimal_dag(&self) -> Self {
        Self {
            alphabet: self.alphabet.clone(),
            circuit: self.circuit.minimal_dag(),
        }
    }

    pub fn eliminate_copies(&self) -> Self {
        Self {
            alphabet: self.alphabet.clone(),
            circuit: self.circuit.eliminate_copies(),
        }
    }

    pub fn resolve_address(&self, gate: GateId, address: &[usize]) -> Option<GateId> {
        self.circuit.resolve_address(gate, address)
    }

    /// Size of the value of every gate: nodes of the term, or non-hole nodes
    /// of the context. Saturates at `u64::MAX`.
    pub fn value_sizes(&self) -> Vec<u64> {
        let mut size = vec![0u64; self.circuit.len()];
        for (id, g) in self.circuit.gates().iter().enumerate() {
            let below = g
                .children
                .iter()
                .fold(0u64, |acc, &c| acc.saturating_add(size[c]));
            size[id] = match g.op {
                TslpOp::Con(_) | TslpOp::Hat(..) => below.saturating_add(1),
                _ => below,
            };
        }
        size
    }

    /// The term derived by the program.
    pub fn unfold(&self) -> Result<Term, TslpError> {
        self.unfold_with_cap(DEFAULT_UNFOLD_CAP)
    }

    pub fn unfold_with_cap(&self, cap: u64) -> Result<Term, TslpError> {
        let size = self.value_sizes()[self.circuit.output()];
        if size > cap {
            return Err(TslpError::CapExceeded { size, cap });
        }
        let symbols = self.unfold_gate(self.circuit.output(), size as usize);
        Ok(Term::from_preorder_unchecked(self.alphabet.clone(), symbols))
    }

    fn unfold_gate(&self, root: GateId, size_hint: usize) -> Vec<Symbol> {
        const END: u32 = u32::MAX;
        let gates = self.circuit.gates();
        let mut out = Vec::with_capacity(size_hint);
        // What fills the hole of a context: a gate, and if that gate is a
        // context, what fills its hole in turn. Shared, never mutated.
        let mut fillers: Vec<(GateId, u32)> = Vec::new();
        let mut stack: Vec<(GateId, u32)> = vec![(root, END)];
        while let Some((id, filler)) = stack.pop() {
            let g = &gates[id];
            match g.op {
                TslpOp::Con(f) => {
                    out.push(f);
                    stack.extend(g.children.iter().rev().map(|&c| (c, END)));
                }
                TslpOp::Hat(f, i) => {
                    out.push(f);
                    let hole = fillers[filler as usize];
                    let r = g.children.len() + 1;
                    for pos in (1..=r).rev() {
                        if pos == i {
                            stack.push(hole);
                        } else {
                            let k = if pos < i { pos - 1 } else { pos - 2 };
                            stack.push((g.children[k], END));
                        }
                    }
                }
                TslpOp::Sub => {
                    fillers.push((g.children[1], END));
                    stack.push((g.children[0], (fillers.len() - 1) as u32));
                }
                TslpOp::Comp => {
                    fillers.push((g.children[1], filler));
                    stack.push((g.children[0], (fillers.len() - 1) as u32));
                }
                TslpOp::Copy => stack.push((g.children[0], filler)),
            }
        }
        out
    }

    /// One production per gate, nonterminal `N<id>`.
    pub fn productions(&self) -> Result<String, TslpError> {
        let mut out = String::new();
        for (id, g) in self.circuit.gates().iter().enumerate() {
            self.write_production(&mut out, id, g.op, &g.children)
                .map_err(|_| TslpError::CopyGate(id))?;
        }
        Ok(out)
    }

    fn write_production(
        &self,
        out: &mut String,
        id: GateId,
        op: TslpOp,
        kids: &[GateId],
    ) -> fmt::Result {
        let args = |list: &mut Vec<String>| list.join(",");
        match op {
            TslpOp::Con(f) => {
                let name = self.alphabet.name(f);
                if kids.is_empty() {
                    writeln!(out, "N{id} → {name}")
                } else {
                    let mut list: Vec<String> = kids.iter().map(|c| format!("N{c}")).collect();
                    writeln!(out, "N{id} → {name}({})", args(&mut list))
                }
            }
            TslpOp::Hat(f, i) => {
                let mut list: Vec<String> = kids.iter().map(|c| format!("N{c}")).collect();
                list.insert(i - 1, "x".into());
                writeln!(out, "N{id}(x) → {}({})", self.alphabet.name(f), args(&mut list))
            }
            TslpOp::Sub => writeln!(out, "N{id} → N{}(N{})", kids[0], kids[1]),
            TslpOp::Comp => writeln!(out, "N{id}(x) → N{}(N{}(x))", kids[0], kids[1]),
            TslpOp::Copy => Err(fmt::Error),
        }
    }

    pub fn to_dot(&self) -> String {
        let sorts = self.sorts().unwrap_or_default();
        let alphabet = self.alphabet.clone();
        let dot = self.circuit.to_dot(|op| {
            let label = match *op {
                TslpOp::Con(f) => alphabet.name(f).to_string(),
                TslpOp::Hat(f, i) => format!("{}^{i}", alphabet.name(f)),
                TslpOp::Sub => "sub".into(),
                TslpOp::Comp => "comp".into(),
                TslpOp::Copy => "copy".into(),
            };
            (label, "")
        });
        // color by sort: terms blue, contexts orange
        let mut out = String::with_capacity(dot.len());
        for line in dot.lines() {
            let colored = line
                .strip_prefix("  g")
                .and_then(|rest| rest.split_once(' '))
                .and_then(|(id, _)| id.parse::<usize>().ok())
                .filter(|_| line.contains("fillcolor"))
                .map(|id| match sorts.get(id) {
                    Some(Sort::Context) => line.replace("fillcolor=\"\"", "fillcolor=\"#fdd0a2\""),
                    _ => line.replace("fillcolor=\"\"", "fillcolor=\"#c6dbef\""),
                });
            out.push_str(colored.as_deref().unwrap_or(line));
            out.push('\n');
        }
        out
    }
}

/// One gate per pattern; children are the direct subpatterns. The result is
/// tree-shaped; the output is the last gate.
pub fn build_tslp(
    alphabet: Arc<RankedAlphabet>,
    hd: &HierarchicalDefinition,
) -> Result<Tslp, TslpError> {
    let tree = hd.tree();
    let pt = hd.pattern_tree();
    let np = hd.len();
    let gate_of = |p: usize| np - 1 - p;
    let mut builder = CircuitBuilder::with_capacity(np);
    for p in (0..np).rev() {
        let shape = normal_shape(hd, p).ok_or(TslpError::NotNormal(hd.pattern(p)))?;
        let root = hd.pattern(p).root();
        let f = tree.label(root);
        let kids = || pt.children(p).iter().map(|&q| gate_of(q)).collect::<Vec<_>>();
        let id = match shape {
            NormalShape::Node => builder.push(TslpOp::Con(f), kids()),
            NormalShape::HoleNode { hole_child } => builder.push(TslpOp::Hat(f, hole_child + 1), kids()),
            NormalShape::Substitution { context, argument } => {
                builder.push(TslpOp::Sub, vec![gate_of(context), gate_of(argument)])
            }
            NormalShape::Composition { upper, lower } => {
                builder.push(TslpOp::Comp, vec![gate_of(upper), gate_of(lower)])
            }
        };
        debug_assert_eq!(id, gate_of(p));
    }
    Tslp::new(alphabet, builder.finish(gate_of(0))?)
}

/// Balanced, shared program for `t`.
pub fn balance(t: &Term) -> Result<Tslp, TslpError> {
    balance_with(t, BridgeSize::default(), DEFAULT_MAX_RANK)
}

pub fn balance_with(t: &Term, bridge_size: BridgeSize, max_rank: usize) -> Result<Tslp, TslpError> {
    let tree = Arc::new(tree_of(t));
    let hd = hierarchical_definition_with(tree, bridge_size, max_rank)?;
    Ok(build_tslp(t.alphabet().clone(), &hd)?.minimal_dag())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::term::parse_term_infer;

    const FIG3: &str = "a(b(c(d,e(f,g)),h(i,j)),k(l(m(n,o),p),q(r,s(t,u))))";

    fn tslp(alphabet: &Arc<RankedAlphabet>, gates: Vec<(TslpOp, Vec<GateId>)>) -> Tslp {
        let out = gates.len() - 1;
        let gates = gates
            .into_iter()
            .map(|(op, children)| Gate { op, children })
            .collect();
        Tslp::new(alphabet.clone(), Circuit::new(gates, out).unwrap()).unwrap()
    }

    #[test]
    fn single_constant() {
        let t = parse_term_infer("a").unwrap();
        let g = balance(&t).unwrap();
        assert_eq!(g.stats(), CircuitStats { size: 1, depth: 0 });
        assert_eq!(g.unfold().unwrap(), t);
        assert_eq!(g.productions().unwrap(), "N0 → a\n");
    }

    #[test]
    fn substitution_into_hat() {
        let t = parse_term_infer("f(a,b)").unwrap();
        let a = t.alphabet();
        let (f, sa, sb) = (a.get("f").unwrap(), a.get("a").unwrap(), a.get("b").unwrap());
        let g = tslp(
            a,
            vec![
                (TslpOp::Con(sb), vec![]),
                (TslpOp::Hat(f, 1), vec![0]),
                (TslpOp::Con(sa), vec![]),
                (TslpOp::Sub, vec![1, 2]),
            ],
        );
        assert_eq!(g.unfold().unwrap().render(), "f(a,b)");
        assert_eq!(
            g.productions().unwrap(),
            "N0 → b\nN1(x) → f(x,N0)\nN2 → a\nN3 → N1(N2)\n"
        );
    }

    #[test]
    fn composition_and_copies() {
        let t = parse_term_infer("g(h(a))").unwrap();
        let a = t.alphabet();
        let (g1, h, sa) = (a.get("g").unwrap(), a.get("h").unwrap(), a.get("a").unwrap());
        let p = tslp(
            a,
            vec![
                (TslpOp::Hat(g1, 1), vec![]),
                (TslpOp::Hat(h, 1), vec![]),
                (TslpOp::Comp, vec![0, 1]),
                (TslpOp::Copy, vec![2]),
                (TslpOp::Con(sa), vec![]),
                (TslpOp::Sub, vec![3, 4]),
            ],
        );
        assert_eq!(p.unfold().unwrap(), t);
        assert!(p.productions().is_err());
        let e = p.eliminate_copies();
        assert_eq!(e.circuit().len(), 5);
        assert_eq!(e.unfold().unwrap(), t);
        assert!(e.productions().unwrap().contains("N2(x) → N0(N1(x))"));
    }

    #[test]
    fn sort_errors() {
        let t = parse_term_infer("f(a,b)").unwrap();
        let a = t.alphabet();
        let f = a.get("f").unwrap();
        let bad = Circuit::new(vec![Gate { op: TslpOp::Con(f), children: vec![] }], 0).unwrap();
        assert!(Tslp::new(a.clone(), bad).is_err());
        let ctx = Circuit::new(
            vec![
                Gate { op: TslpOp::Con(a.get("a").unwrap()), children: vec![] },
                Gate { op: TslpOp::Hat(f, 2), children: vec![0] },
            ],
            1,
        )
        .unwrap();
        assert_eq!(Tslp::new(a.clone(), ctx).unwrap_err(), TslpError::OutputSort);
    }

    #[test]
    fn figure_term_round_trip() {
        let t = parse_term_infer(FIG3).unwrap();
        let g = balance(&t).unwrap();
        assert_eq!(g.unfold().unwrap(), t);
        for line in g.productions().unwrap().lines() {
            let rhs = line.split(" → ").nth(1).unwrap();
            let ok = rhs.chars().next().unwrap().is_ascii_lowercase()
                || (rhs.starts_with('N') && rhs.contains('('));
            assert!(ok, "{line}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let t = parse_term_infer(FIG3).unwrap();
        let g = balance(&t).unwrap();
        assert!(matches!(
            g.unfold_with_cap(20),
            Err(TslpError::CapExceeded { size: 21, cap: 20 })
        ));
    }

    #[test]
    fn sharing_for_complete_trees() {
        // complete binary term of height h over one binary symbol
        let mut text = String::from("a");
        for _ in 0..10 {
            text = format!("f({text},{text})");
        }
        let t = parse_term_infer(&text).unwrap();
        let g = balance(&t).unwrap();
        assert_eq!(g.unfold().unwrap(), t);
        assert!(g.stats().size <= 60, "{:?}", g.stats());
    }
}
