//! Circuits: dags of gates stored in topological order.

use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};

use rustc_hash::{FxHashMap as HashMap, FxHasher};
use serde::Serialize;
use thiserror::Error;

pub type GateId = usize;

/// Operations that may label a gate.
pub trait GateOp: Clone + Eq + Hash + fmt::Debug {
    /// Copy gates forward their only child unchanged.
    fn is_copy(&self) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate<Op> {
    pub op: Op,
    pub children: Vec<GateId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("gate {gate} refers to gate {child}, which is not defined before it")]
    ForwardReference { gate: GateId, child: GateId },
    #[error("output gate {0} does not exist")]
    NoOutput(GateId),
    #[error("copy gate {0} must have exactly one child")]
    CopyArity(GateId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CircuitStats {
    /// Number of gates.
    pub size: usize,
    /// Longest path from the output, in edges.
    pub depth: usize,
}

/// Gates are numbered so that every child id is smaller than its parent's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit<Op> {
    gates: Vec<Gate<Op>>,
    output: GateId,
}

impl<Op: GateOp> Circuit<Op> {
    pub fn new(gates: Vec<Gate<Op>>, output: GateId) -> Result<Self, CircuitError> {
        for (id, g) in gates.iter().enumerate() {
            if let Some(&child) = g.children.iter().find(|&&c| c >= id) {
                return Err(CircuitError::ForwardReference { gate: id, child });
            }
            if g.op.is_copy() && g.children.len() != 1 {
                return Err(CircuitError::CopyArity(id));
            }
        }
        if output >= gates.len() {
            return Err(CircuitError::NoOutput(output));
        }
        Ok(Self { gates, output })
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Gate<Op>] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate<Op> {
        &self.gates[id]
    }

    pub fn output(&self) -> GateId {
        self.output
    }

    /// Longest path below each gate, in edges.
    pub fn heights(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.gates.len()];
        for (id, g) in self.gates.iter().enumerate() {
            h[id] = g.children.iter().map(|&c| h[c] + 1).max().unwrap_or(0);
        }
        h
    }

    pub fn depth(&self) -> usize {
        self.heights()[self.output]
    }

    /// Gate count and depth of the part reachable from the output.
    pub fn stats(&self) -> CircuitStats {
        CircuitStats {
            size: self.reachable().iter().filter(|&&r| r).count(),
            depth: self.depth(),
        }
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.gates.len()];
        seen[self.output] = true;
        for id in (0..self.gates.len()).rev() {
            if seen[id] {
                for &c in &self.gates[id].children {
                    seen[c] = true;
                }
            }
        }
        seen
    }

    /// Merges gates with equal operation and equal children and drops gates
    /// the output does not depend on.
    pub fn minimal_dag(&self) -> Self {
        let live = self.reachable();
        let mut new_id = vec![usize::MAX; self.gates.len()];
        // first gate seen per hash; gates whose hash is taken by a different
        // gate go to `overflow`
        let mut by_hash: HashMap<u64, GateId> = HashMap::default();
        let mut overflow: HashMap<Gate<Op>, GateId> = HashMap::default();
        let mut gates: Vec<Gate<Op>> = Vec::with_capacity(live.iter().filter(|&&l| l).count());
        let mut children = Vec::new();
        for (id, g) in self.gates.iter().enumerate() {
            if !live[id] {
                continue;
            }
            children.clear();
            children.extend(g.children.iter().map(|&c| new_id[c]));
            let mut h = FxHasher::default();
            g.op.hash(&mut h);
            children.hash(&mut h);
            let same = |k: &GateId| gates[*k].op == g.op && gates[*k].children == children;
            new_id[id] = match by_hash.get(&h.finish()) {
                Some(k) if same(k) => *k,
                Some(_) => {
                    let key = Gate { op: g.op.clone(), children: children.clone() };
                    *overflow.entry(key).or_insert_with_key(|key| {
                        gates.push(key.clone());
                        gates.len() - 1
                    })
                }
                None => {
                    by_hash.insert(h.finish(), gates.len());
                    gates.push(Gate { op: g.op.clone(), children: children.clone() });
                    gates.len() - 1
                }
            };
        }
        Self {
            gates,
            output: new_id[self.output],
        }
    }

    /// Routes every edge past copy gates to the first non-copy gate and drops
    /// the copy gates.
    pub fn eliminate_copies(&self) -> Self {
        let mut target = vec![0usize; self.gates.len()];
        let mut new_id = vec![usize::MAX; self.gates.len()];
        let mut gates = Vec::new();
        for (id, g) in self.gates.iter().enumerate() {
            if g.op.is_copy() {
                target[id] = target[g.children[0]];
                continue;
            }
            target[id] = id;
            new_id[id] = gates.len();
            gates.push(Gate {
                op: g.op.clone(),
                children: g.children.iter().map(|&c| new_id[target[c]]).collect(),
            });
        }
        Self {
            gates,
            output: new_id[target[self.output]],
        }
    }

    /// Follows 1-based child indices from `gate`.
    pub fn resolve_address(&self, gate: GateId, address: &[usize]) -> Option<GateId> {
        let mut g = gate;
        for &step in address {
            g = *self.gates.get(g)?.children.get(step.checked_sub(1)?)?;
        }
        (g < self.gates.len()).then_some(g)
    }

    /// Graphviz rendering; `describe` gives each gate's label and fill color.
    pub fn to_dot(&self, describe: impl Fn(&Op) -> (String, &'static str)) -> String {
        let mut out = String::from("digraph circuit {\n  node [shape=record, style=filled];\n");
        for (id, g) in self.gates.iter().enumerate() {
            let (label, color) = describe(&g.op);
            let label = label.replace('"', "\\\"").replace('|', "\\|");
            let _ = writeln!(
                out,
                "  g{id} [label=\"{{N{id}|{label}}}\", fillcolor=\"{color}\"{}];",
                if id == self.output { ", penwidth=3" } else { "" }
            );
            for (i, &c) in g.children.iter().enumerate() {
                let _ = writeln!(out, "  g{id} -> g{c} [label=\"{}\"];", i + 1);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Incremental construction in topological order.
#[derive(Debug, Clone)]
pub struct CircuitBuilder<Op> {
    gates: Vec<Gate<Op>>,
}

impl<Op: GateOp> Default for CircuitBuilder<Op> {
    fn default() -> Self {
        Self { gates: Vec::new() }
    }
}

impl<Op: GateOp> CircuitBuilder<Op> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(gates: usize) -> Self {
        Self { gates: Vec::with_capacity(gates) }
    }

    pub fn push(&mut self, op: Op, children: Vec<GateId>) -> GateId {
        debug_assert!(children.iter().all(|&c| c < self.gates.len()));
        self.gates.push(Gate { op, children });
        self.gates.len() - 1
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Gate<Op>] {
        &self.gates
    }

    pub fn finish(self, output: GateId) -> Result<Circuit<Op>, CircuitError> {
        Circuit::new(self.gates, output)
    }
}
