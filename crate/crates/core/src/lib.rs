pub mod term;
pub mod tree;
pub mod pattern;
pub mod contraction;
pub mod decomposition;
pub mod gen;
pub mod circuit;
pub mod tslp;
pub mod algebra;
pub mod semiring;
pub mod regex;

pub use term::{
    parse_context, parse_term, parse_term_infer, render_term, Context, ParseError, RankedAlphabet,
    Symbol, Term,
};
pub use tree::{tree_of, NodeId, OrderedTree, TreeError};
pub use pattern::{HierarchicalDefinition, Pattern, PatternTree};
pub use contraction::{contract, contraction_patterns, tree_at_round};
pub use decomposition::{hierarchical_definition, pattern_classes, BridgeSize};
pub use circuit::{Circuit, CircuitStats, GateId};
pub use tslp::{balance, balance_with, Tslp, TslpError};
pub use algebra::{eval_term, eval_tslp, Algebra, BuiltinAlgebra, LinearAlgebra};
pub use semiring::{
    balance_semiring, MatModP, MatModP64, MinPlus, MinPlusI64, ModP, ModP64, Semiring,
    SemiringCircuit,
};
pub use regex::{balance_regex, parse_regex, regex_equiv, RegexCircuit};
