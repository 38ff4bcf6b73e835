//! Semirings, their affine linear term functions, and balanced `+`/`·`
//! circuits.
//!
//! Over a semiring every linear term function is `x ↦ a·x·b + c` where any of
//! `a`, `b`, `c` may be missing. Missing coefficients are tracked as `None`
//! and never replaced by a zero or a one, since the semiring need not have
//! either.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_traits::{PrimInt, Signed};
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, LinearAlgebra};
use crate::circuit::{Circuit, CircuitBuilder, CircuitStats, GateId, GateOp};
use crate::term::{RankedAlphabet, Symbol, Term};
use crate::tslp::{balance, Tslp, TslpError, TslpOp};

/// Two associative operations, `·` distributing over `+`.
pub trait Semiring {
    type Elem: Clone + PartialEq + fmt::Debug + fmt::Display;

    fn add(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    /// Interpretation of a constant symbol, if it names one.
    fn constant(&self, name: &str) -> Option<Self::Elem>;
}

/// Integers modulo `p`. `p * p` must fit in `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModP<T> {
    p: T,
}

pub type ModP64 = ModP<u64>;

impl<T: PrimInt> ModP<T> {
    pub fn new(p: T) -> Self {
        assert!(p > T::one(), "modulus must exceed 1");
        Self { p }
    }

    pub fn modulus(&self) -> T {
        self.p
    }
}

impl<T: PrimInt + fmt::Debug + fmt::Display> Semiring for ModP<T> {
    type Elem = T;

    fn add(&self, x: &T, y: &T) -> T {
        (*x + *y) % self.p
    }

    fn mul(&self, x: &T, y: &T) -> T {
        (*x * *y) % self.p
    }

    fn constant(&self, name: &str) -> Option<T> {
        parse_digits::<T>(name, self.p)
    }
}

/// Reads a decimal numeral, reducing modulo `p` digit by digit.
fn parse_digits<T: PrimInt>(name: &str, p: T) -> Option<T> {
    if name.is_empty() || !name.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let ten = T::from(10)?;
    name.bytes().try_fold(T::zero(), |acc, b| {
        Some((acc * ten % p + T::from(b - b'0')? % p) % p)
    })
}

/// 2×2 matrices over the integers modulo `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatModP<T> {
    field: ModP<T>,
}

pub type MatModP64 = MatModP<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: fmt::Display> fmt::Display for Mat2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(f, "[[{},{}],[{},{}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl<T: PrimInt> MatModP<T> {
    pub fn new(p: T) -> Self {
        Self { field: ModP::new(p) }
    }
}

impl<T: PrimInt + fmt::Debug + fmt::Display> Semiring for MatModP<T> {
    type Elem = Mat2<T>;

    fn add(&self, x: &Mat2<T>, y: &Mat2<T>) -> Mat2<T> {
        let mut out = x.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.field.add(v, &y.0[i][j]);
            }
        }
        Mat2(out)
    }

    fn mul(&self, x: &Mat2<T>, y: &Mat2<T>) -> Mat2<T> {
        let f = &self.field;
        let mut out = [[T::zero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f.add(&f.mul(&x.0[i][0], &y.0[0][j]), &f.mul(&x.0[i][1], &y.0[1][j]));
            }
        }
        Mat2(out)
    }

    /// Numeral `k` denotes `[[k,1],[1,0]]`; two of these commute only when
    /// they are equal.
    fn constant(&self, name: &str) -> Option<Mat2<T>> {
        let k = parse_digits(name, self.field.modulus())?;
        Some(Mat2([[k, T::one()], [T::one(), T::zero()]]))
    }
}

/// `(min, +)` over the integers; `+` saturates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinPlus<T>(std::marker::PhantomData<T>);

pub type MinPlusI64 = MinPlus<i64>;

impl<T> MinPlus<T> {
    pub fn new() -> Self {
        Self(std::marker::PhantomData)
    }
}

impl<T: PrimInt + Signed + fmt::Debug + fmt::Display> Semiring for MinPlus<T> {
    type Elem = T;

    fn add(&self, x: &T, y: &T) -> T {
        *x.min(y)
    }

    fn mul(&self, x: &T, y: &T) -> T {
        x.saturating_add(*y)
    }

    fn constant(&self, name: &str) -> Option<T> {
        let (neg, digits) = match name.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, name),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let v = T::from_str_radix(digits, 10).ok()?;
        Some(if neg { -v } else { v })
    }
}

/// `x ↦ a·x·b + c`; a missing coefficient is simply left out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Affine<E> {
    pub a: Option<E>,
    pub b: Option<E>,
    pub c: Option<E>,
}

impl<E> Affine<E> {
    pub fn identity() -> Self {
        Self { a: None, b: None, c: None }
    }

    pub fn shape(&self) -> AffineShape {
        AffineShape {
            a: self.a.is_some(),
            b: self.b.is_some(),
            c: self.c.is_some(),
        }
    }
}

/// A binary operation requested by the affine calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bin {
    Add,
    Mul,
}

/// Combines present factors; `None` when every factor is missing.
fn product<E: Clone>(factors: &[Option<&E>], op: &mut impl FnMut(Bin, &E, &E) -> E) -> Option<E> {
    let mut acc: Option<E> = None;
    for f in factors.iter().flatten() {
        acc = Some(match acc {
            None => (*f).clone(),
            Some(x) => op(Bin::Mul, &x, f),
        });
    }
    acc
}

/// `outer ∘ inner`: `a = a_o·a_i`, `b = b_i·b_o`, `c = a_o·c_i·b_o + c_o`.
/// Operations are requested in that order.
pub fn affine_compose<E: Clone>(
    outer: &Affine<E>,
    inner: &Affine<E>,
    mut op: impl FnMut(Bin, &E, &E) -> E,
) -> Affine<E> {
    let a = product(&[outer.a.as_ref(), inner.a.as_ref()], &mut op);
    let b = product(&[inner.b.as_ref(), outer.b.as_ref()], &mut op);
    let moved = inner.c.as_ref().map(|ci| {
        product(&[outer.a.as_ref(), Some(ci), outer.b.as_ref()], &mut op).expect("c present")
    });
    let c = match (moved, outer.c.as_ref()) {
        (Some(m), Some(co)) => Some(op(Bin::Add, &m, co)),
        (Some(m), None) => Some(m),
        (None, co) => co.cloned(),
    };
    Affine { a, b, c }
}

/// `a·v·b + c`.
pub fn affine_apply<E: Clone>(f: &Affine<E>, v: &E, mut op: impl FnMut(Bin, &E, &E) -> E) -> E {
    let prod = product(&[f.a.as_ref(), Some(v), f.b.as_ref()], &mut op).expect("v present");
    match &f.c {
        Some(c) => op(Bin::Add, &prod, c),
        None => prod,
    }
}

/// Which of the three coefficients are present: one of eight forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
pub struct AffineShape {
    pub a: bool,
    pub b: bool,
    pub c: bool,
}

impl fmt::Display for AffineShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.a {
            f.write_str("a·")?;
        }
        f.write_str("x")?;
        if self.b {
            f.write_str("·b")?;
        }
        if self.c {
            f.write_str("+c")?;
        }
        Ok(())
    }
}

/// Symbol interpretation in a semiring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemiringSym<E> {
    Add,
    Mul,
    Const(E),
}

/// Kind of a semiring symbol from its name and rank.
fn semiring_symbol(name: &str, rank: usize) -> Option<SemiringSym<()>> {
    match (name, rank) {
        ("+", 2) => Some(SemiringSym::Add),
        ("·" | "*", 2) => Some(SemiringSym::Mul),
        (_, 0) => Some(SemiringSym::Const(())),
        _ => None,
    }
}

/// A semiring seen as an algebra over `+`, `·` (or `*`) and constants.
#[derive(Debug, Clone)]
pub struct SemiringAlgebra<S>(pub S);

impl<S: Semiring> Algebra for SemiringAlgebra<S> {
    type Value = S::Elem;
    type Op = SemiringSym<S::Elem>;

    fn operation(&self, name: &str, rank: usize) -> Result<Self::Op, AlgebraError> {
        let missing = || AlgebraError::Uninterpreted {
            name: name.to_string(),
            rank,
        };
        match semiring_symbol(name, rank).ok_or_else(missing)? {
            SemiringSym::Add => Ok(SemiringSym::Add),
            SemiringSym::Mul => Ok(SemiringSym::Mul),
            SemiringSym::Const(()) => self.0.constant(name).map(SemiringSym::Const).ok_or_else(missing),
        }
    }

    fn apply(&self, op: &Self::Op, args: &[S::Elem]) -> S::Elem {
        match op {
            SemiringSym::Add => self.0.add(&args[0], &args[1]),
            SemiringSym::Mul => self.0.mul(&args[0], &args[1]),
            SemiringSym::Const(c) => c.clone(),
        }
    }

    fn equal(&self, x: &S::Elem, y: &S::Elem) -> bool {
        x == y
    }
}

impl<S: Semiring> SemiringAlgebra<S> {
    fn bin(&self, op: Bin, x: &S::Elem, y: &S::Elem) -> S::Elem {
        match op {
            Bin::Add => self.0.add(x, y),
            Bin::Mul => self.0.mul(x, y),
        }
    }
}

impl<S: Semiring> LinearAlgebra for SemiringAlgebra<S> {
    type Linear = Affine<S::Elem>;

    fn hat(&self, op: &Self::Op, args: &[S::Elem], hole: usize) -> Affine<S::Elem> {
        let other = args[0].clone();
        match (op, hole) {
            // `+` is treated as commutative: `c + x` is stored as `x + c`
            (SemiringSym::Add, _) => Affine { a: None, b: None, c: Some(other) },
            (SemiringSym::Mul, 0) => Affine { a: None, b: Some(other), c: None },
            (SemiringSym::Mul, _) => Affine { a: Some(other), b: None, c: None },
            (SemiringSym::Const(_), _) => unreachable!("constants have no argument"),
        }
    }

    fn compose(&self, outer: &Affine<S::Elem>, inner: &Affine<S::Elem>) -> Affine<S::Elem> {
        affine_compose(outer, inner, |op, x, y| self.bin(op, x, y))
    }

    fn apply_linear(&self, f: &Affine<S::Elem>, x: &S::Elem) -> S::Elem {
        affine_apply(f, x, |op, p, q| self.bin(op, p, q))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemiringError {
    #[error("symbol `{name}` of rank {rank} is not a semiring operation")]
    NotSemiring { name: String, rank: usize },
    #[error(transparent)]
    Tslp(#[from] TslpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemiringOp {
    Const(Symbol),
    Add,
    Mul,
    Copy,
}

impl GateOp for SemiringOp {
    fn is_copy(&self) -> bool {
        matches!(self, SemiringOp::Copy)
    }
}

/// A circuit of binary `+` and `·` gates over constant inputs.
#[derive(Debug, Clone)]
pub struct SemiringCircuit {
    alphabet: Arc<RankedAlphabet>,
    circuit: Circuit<SemiringOp>,
}

impl SemiringCircuit {
    pub fn new(alphabet: Arc<RankedAlphabet>, circuit: Circuit<SemiringOp>) -> Self {
        Self { alphabet, circuit }
    }

    pub fn alphabet(&self) -> &Arc<RankedAlphabet> {
        &self.alphabet
    }

    pub fn circuit(&self) -> &Circuit<SemiringOp> {
        &self.circuit
    }

    pub fn stats(&self) -> CircuitStats {
        self.circuit.stats()
    }

    /// Bottom-up evaluation.
    pub fn eval<S: Semiring>(&self, semiring: &S) -> Result<S::Elem, AlgebraError> {
        let mut vals: Vec<S::Elem> = Vec::with_capacity(self.circuit.len());
        for g in self.circuit.gates() {
            let v = match g.op {
                SemiringOp::Const(s) => {
                    let name = self.alphabet.name(s);
                    semiring.constant(name).ok_or_else(|| AlgebraError::Uninterpreted {
                        name: name.to_string(),
                        rank: 0,
                    })?
                }
                SemiringOp::Add => semiring.add(&vals[g.children[0]], &vals[g.children[1]]),
                SemiringOp::Mul => semiring.mul(&vals[g.children[0]], &vals[g.children[1]]),
                SemiringOp::Copy => vals[g.children[0]].clone(),
            };
            vals.push(v);
        }
        Ok(vals.swap_remove(self.circuit.output()))
    }

    /// One line per gate: `g3 = g1 + g2`, `g0 = 7`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, g) in self.circuit.gates().iter().enumerate() {
            let _ = match g.op {
                SemiringOp::Const(s) => writeln!(out, "g{id} = {}", self.alphabet.name(s)),
                SemiringOp::Add => writeln!(out, "g{id} = g{} + g{}", g.children[0], g.children[1]),
                SemiringOp::Mul => writeln!(out, "g{id} = g{} · g{}", g.children[0], g.children[1]),
                SemiringOp::Copy => writeln!(out, "g{id} = g{}", g.children[0]),
            };
        }
        let _ = writeln!(out, "output g{}", self.circuit.output());
        out
    }

    pub fn to_dot(&self) -> String {
        self.circuit.to_dot(|op| match *op {
            SemiringOp::Const(s) => (self.alphabet.name(s).to_string(), "#c6dbef"),
            SemiringOp::Add => ("+".into(), "#e5f5e0"),
            SemiringOp::Mul => ("·".into(), "#fee6ce"),
            SemiringOp::Copy => ("copy".into(), "#f0f0f0"),
        })
    }
}

/// Gate classes: value gates, and context gates with their affine form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GateClass {
    Value,
    Linear(AffineShape),
}

fn check_semiring_signature(alphabet: &RankedAlphabet) -> Result<(), SemiringError> {
    for (_, name, rank) in alphabet.symbols() {
        if semiring_symbol(name, rank).is_none() {
            return Err(SemiringError::NotSemiring {
                name: name.to_string(),
                rank,
            });
        }
    }
    Ok(())
}

fn is_add(alphabet: &RankedAlphabet, f: Symbol) -> bool {
    matches!(
        semiring_symbol(alphabet.name(f), alphabet.rank(f)),
        Some(SemiringSym::Add)
    )
}

/// The form of every gate, bottom-up.
pub fn classify_gates(program: &Tslp) -> Result<Vec<GateClass>, SemiringError> {
    let alphabet = program.alphabet();
    check_semiring_signature(alphabet)?;
    let circuit = program.circuit();
    let mut out: Vec<GateClass> = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        let class = match g.op {
            TslpOp::Con(_) | TslpOp::Sub => GateClass::Value,
            TslpOp::Hat(f, i) => GateClass::Linear(if is_add(alphabet, f) {
                AffineShape { c: true, ..Default::default() }
            } else if i == 1 {
                AffineShape { b: true, ..Default::default() }
            } else {
                AffineShape { a: true, ..Default::default() }
            }),
            TslpOp::Comp => {
                let shape = |k: usize| match out[g.children[k]] {
                    GateClass::Linear(s) => s,
                    GateClass::Value => unreachable!("sort-checked program"),
                };
                let (o, i) = (shape(0), shape(1));
                GateClass::Linear(AffineShape {
                    a: o.a || i.a,
                    b: o.b || i.b,
                    c: o.c || i.c,
                })
            }
            TslpOp::Copy => out[g.children[0]],
        };
        out.push(class);
    }
    Ok(out)
}

enum Slot {
    Value(GateId),
    Linear(Affine<GateId>),
}

/// Replaces every context gate by gates for its coefficients.
pub fn semiring_circuit(program: &Tslp) -> Result<SemiringCircuit, SemiringError> {
    let alphabet = program.alphabet();
    check_semiring_signature(alphabet)?;
    let circuit = program.circuit();
    let mut b = CircuitBuilder::new();
    let mut slots: Vec<Slot> = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        let slot = match g.op {
            TslpOp::Con(f) => {
                let kids: Vec<GateId> = g.children.iter().map(|&c| value_of(&slots[c])).collect();
                let op = match semiring_symbol(alphabet.name(f), alphabet.rank(f)) {
                    Some(SemiringSym::Add) => SemiringOp::Add,
                    Some(SemiringSym::Mul) => SemiringOp::Mul,
                    _ => SemiringOp::Const(f),
                };
                Slot::Value(b.push(op, kids))
            }
            TslpOp::Hat(f, i) => {
                let other = value_of(&slots[g.children[0]]);
                // the coefficient is the argument gate, passed on by a copy
                let coeff = Some(b.push(SemiringOp::Copy, vec![other]));
                Slot::Linear(if is_add(alphabet, f) {
                    Affine { a: None, b: None, c: coeff }
                } else if i == 1 {
                    Affine { a: None, b: coeff, c: None }
                } else {
                    Affine { a: coeff, b: None, c: None }
                })
            }
            TslpOp::Comp => {
                let (o, i) = (linear_of(&slots[g.children[0]]), linear_of(&slots[g.children[1]]));
                let mut f = affine_compose(&o, &i, |op, x, y| b.push(gate_op(op), vec![*x, *y]));
                // coefficients taken over unchanged become copy gates
                for (new, old) in [(&mut f.a, [o.a, i.a]), (&mut f.b, [o.b, i.b]), (&mut f.c, [o.c, i.c])] {
                    if let Some(id) = *new {
                        if old.contains(&Some(id)) {
                            *new = Some(b.push(SemiringOp::Copy, vec![id]));
                        }
                    }
                }
                Slot::Linear(f)
            }
            TslpOp::Sub => {
                let f = linear_of(&slots[g.children[0]]);
                let v = value_of(&slots[g.children[1]]);
                Slot::Value(affine_apply(&f, &v, |op, x, y| b.push(gate_op(op), vec![*x, *y])))
            }
            TslpOp::Copy => match &slots[g.children[0]] {
                Slot::Value(v) => Slot::Value(b.push(SemiringOp::Copy, vec![*v])),
                Slot::Linear(f) => Slot::Linear(*f),
            },
        };
        slots.push(slot);
    }
    let output = value_of(&slots[circuit.output()]);
    let raw = b.finish(output).map_err(TslpError::from)?;
    Ok(SemiringCircuit::new(
        alphabet.clone(),
        raw.eliminate_copies().minimal_dag(),
    ))
}

fn gate_op(op: Bin) -> SemiringOp {
    match op {
        Bin::Add => SemiringOp::Add,
        Bin::Mul => SemiringOp::Mul,
    }
}

fn value_of(s: &Slot) -> GateId {
    match s {
        Slot::Value(v) => *v,
        Slot::Linear(_) => unreachable!("sort-checked program"),
    }
}

fn linear_of(s: &Slot) -> Affine<GateId> {
    match s {
        Slot::Linear(f) => *f,
        Slot::Value(_) => unreachable!("sort-checked program"),
    }
}

/// Balanced `+`/`·` circuit for a semiring expression.
pub fn balance_semiring(t: &Term) -> Result<SemiringCircuit, SemiringError> {
    check_semiring_signature(t.alphabet())?;
    semiring_circuit(&balance(t)?)
}
