//! Seeded term generators.

use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::term::{RankedAlphabet, Symbol, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Every inner node has a leaf child: depth n/2.
    Caterpillar,
    /// Heap-shaped, depth log n.
    Complete,
    /// Random split sizes at every node.
    Random,
}

impl FromStr for Shape {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "caterpillar" => Ok(Shape::Caterpillar),
            "complete" => Ok(Shape::Complete),
            "random" => Ok(Shape::Random),
            _ => Err(format!("unknown shape `{s}` (caterpillar, complete, random)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    /// `f`/`g` binary, `a`/`b` constants.
    Tree,
    /// One binary symbol `f` and one constant `a`.
    Binary,
    /// `+`, `·` and integer constants 1..=9.
    Semiring,
    /// `+`, `.`, `*` and the letters `a`, `b`.
    Regex,
}

impl FromStr for Signature {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tree" => Ok(Signature::Tree),
            "binary" => Ok(Signature::Binary),
            "semiring" => Ok(Signature::Semiring),
            "regex" => Ok(Signature::Regex),
            _ => Err(format!("unknown signature `{s}` (tree, binary, semiring, regex)")),
        }
    }
}

struct Palette {
    alphabet: Arc<RankedAlphabet>,
    leaves: Vec<Symbol>,
    binary: Vec<Symbol>,
    unary: Vec<Symbol>,
}

fn palette(sig: Signature) -> Palette {
    let spec: Vec<(&str, usize)> = match sig {
        Signature::Tree => vec![("f", 2), ("g", 2), ("a", 0), ("b", 0)],
        Signature::Binary => vec![("f", 2), ("a", 0)],
        Signature::Semiring => {
            let mut v = vec![("+", 2), ("·", 2)];
            v.extend(["1", "2", "3", "4", "5", "6", "7", "8", "9"].map(|d| (d, 0)));
            v
        }
        Signature::Regex => vec![("+", 2), (".", 2), ("*", 1), ("a", 0), ("b", 0)],
    };
    let alphabet = Arc::new(RankedAlphabet::from_symbols(spec).expect("static alphabet"));
    let by_rank = |r: usize| -> Vec<Symbol> {
        alphabet
            .symbols()
            .filter(|&(_, _, k)| k == r)
            .map(|(s, _, _)| s)
            .collect()
    };
    Palette {
        leaves: by_rank(0),
        binary: by_rank(2),
        unary: by_rank(1),
        alphabet,
    }
}

fn pick<R: Rng>(rng: &mut R, from: &[Symbol]) -> Symbol {
    from[rng.gen_range(0..from.len())]
}

/// Preorder of a full binary tree with `n` nodes (`n` odd) of the given shape.
fn binary_shape<R: Rng>(shape: Shape, n: usize, rng: &mut R) -> Vec<bool> {
    // true = inner node
    let mut out = Vec::with_capacity(n);
    match shape {
        Shape::Caterpillar => {
            // the spine turns left or right at random; the other child is a leaf
            let mut pending_leaves = 0;
            let inner = n / 2;
            for _ in 0..inner {
                out.push(true);
                if rng.gen_bool(0.5) {
                    out.push(false);
                } else {
                    pending_leaves += 1;
                }
            }
            out.push(false);
            out.extend(std::iter::repeat_n(false, pending_leaves));
        }
        Shape::Complete => {
            // heap numbering 1..=n visited in preorder
            let mut stack = vec![1usize];
            while let Some(k) = stack.pop() {
                let inner = 2 * k < n;
                out.push(inner);
                if inner {
                    stack.push(2 * k + 1);
                    stack.push(2 * k);
                }
            }
        }
        Shape::Random => {
            let mut stack = vec![n];
            while let Some(size) = stack.pop() {
                if size == 1 {
                    out.push(false);
                    continue;
                }
                out.push(true);
                let left = 2 * rng.gen_range(0..(size - 1) / 2) + 1;
                stack.push(size - 1 - left);
                stack.push(left);
            }
        }
    }
    out
}

/// A term with `n` nodes (rounded down to odd for binary signatures).
pub fn generate(shape: Shape, signature: Signature, n: usize, seed: u64) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pal = palette(signature);
    let n = n.max(1);
    let n = if n.is_multiple_of(2) { n - 1 } else { n };
    let symbols: Vec<Symbol> = if signature == Signature::Regex && shape == Shape::Random {
        random_with_unary(n, &pal, &mut rng)
    } else {
        binary_shape(shape, n, &mut rng)
            .into_iter()
            .map(|inner| {
                if inner {
                    pick(&mut rng, &pal.binary)
                } else {
                    pick(&mut rng, &pal.leaves)
                }
            })
            .collect()
    };
    Term::from_preorder(pal.alphabet, symbols).expect("generated preorder is a term")
}

fn random_with_unary<R: Rng>(n: usize, pal: &Palette, rng: &mut R) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(n);
    let mut stack = vec![n];
    while let Some(size) = stack.pop() {
        if size == 1 {
            out.push(pick(rng, &pal.leaves));
        } else if size == 2 || (rng.gen_bool(0.15) && !pal.unary.is_empty()) {
            out.push(pick(rng, &pal.unary));
            stack.push(size - 1);
        } else {
            out.push(pick(rng, &pal.binary));
            let left = rng.gen_range(1..size - 1);
            stack.push(size - 1 - left);
            stack.push(left);
        }
    }
    out
}

/// Alphabet with `labels` symbols spread over ranks `0..=max_rank`; rank 0
/// always present.
pub fn ranked_alphabet(max_rank: usize, labels: usize) -> Arc<RankedAlphabet> {
    let labels = labels.max(max_rank + 1);
    let mut alphabet = RankedAlphabet::new();
    for i in 0..labels {
        let rank = i % (max_rank + 1);
        alphabet
            .add(&format!("s{i}"), rank)
            .expect("fresh names");
    }
    Arc::new(alphabet)
}

/// A random term with exactly `n` nodes over `alphabet`, which must contain
/// a constant and, for `n > 1`, some symbol of positive rank.
pub fn random_term(alphabet: &Arc<RankedAlphabet>, n: usize, seed: u64) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let syms: Vec<(Symbol, usize)> = alphabet.symbols().map(|(s, _, r)| (s, r)).collect();
    let mut out = Vec::with_capacity(n);
    let mut pending = 1usize;
    let mut choices = Vec::new();
    for emitted in 0..n {
        let remaining = n - emitted - 1; // nodes left after this one
        choices.clear();
        choices.extend(syms.iter().filter(|&&(_, r)| {
            let after = pending - 1 + r;
            after <= remaining && (after == 0) == (remaining == 0)
        }));
        let &(s, r) = choices[rng.gen_range(0..choices.len())];
        out.push(s);
        pending = pending - 1 + r;
    }
    Term::from_preorder(alphabet.clone(), out).expect("exact-size generation")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_determinism() {
        for shape in [Shape::Caterpillar, Shape::Complete, Shape::Random] {
            for sig in [Signature::Tree, Signature::Semiring, Signature::Regex] {
                let t = generate(shape, sig, 101, 7);
                assert_eq!(t.len(), 101);
                assert_eq!(t, generate(shape, sig, 101, 7));
            }
        }
        assert_eq!(generate(Shape::Complete, Signature::Binary, 16, 1).len(), 15);
    }

    #[test]
    fn caterpillar_is_deep() {
        let t = generate(Shape::Caterpillar, Signature::Binary, 201, 3);
        assert_eq!(t.depth(), 100);
        let c = generate(Shape::Complete, Signature::Binary, 255, 3);
        assert_eq!(c.depth(), 7);
    }

    #[test]
    fn exact_random_terms() {
        let a = ranked_alphabet(4, 8);
        for n in [1, 2, 3, 10, 500] {
            let t = random_term(&a, n, n as u64);
            assert_eq!(t.len(), n);
        }
    }
}
