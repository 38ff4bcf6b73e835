use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;
use treebal::algebra::eval_term;
use treebal::gen::{generate, Shape, Signature};
use treebal::semiring::{
    affine_apply, affine_compose, balance_semiring, Affine, Bin, Mat2, MatModP64, MinPlusI64,
    ModP64, Semiring, SemiringAlgebra, SemiringOp,
};
use treebal::term::{parse_term_infer, RankedAlphabet, Term};

fn mat(entries: [u64; 4]) -> Mat2<u64> {
    Mat2([[entries[0] % 97, entries[1] % 97], [entries[2] % 97, entries[3] % 97]])
}

/// `x1 · x2 · ... · xn`, nested to the left.
fn left_comb_product(n: usize) -> Term {
    let alphabet = Arc::new(RankedAlphabet::from_symbols([("·", 2), ("1", 0), ("2", 0), ("3", 0), ("4", 0), ("5", 0), ("6", 0), ("7", 0)]).unwrap());
    let mul = alphabet.get("·").unwrap();
    let digit = |i: usize| alphabet.get(&((i % 7) + 1).to_string()).unwrap();
    let mut symbols = vec![mul; n - 1];
    symbols.push(digit(0));
    for i in 1..n {
        symbols.push(digit(i));
    }
    // preorder of ·(·(·(x1,x2),x3),x4) is ·,·,·,x1,x2,x3,x4
    Term::from_preorder(alphabet, symbols).unwrap()
}

#[test]
fn left_comb_over_matrices() {
    let t = left_comb_product(1024);
    let s = MatModP64::new(97);
    let mut fold = s.constant("1").unwrap();
    for i in 1..1024 {
        fold = s.mul(&fold, &s.constant(&((i % 7) + 1).to_string()).unwrap());
    }
    let c = balance_semiring(&t).unwrap();
    assert_eq!(c.eval(&s).unwrap(), fold);
    assert_eq!(eval_term(&t, &SemiringAlgebra(s)).unwrap(), fold);
    let lg = (1026f64).log2();
    assert!((c.stats().depth as f64) <= 8.0 * lg, "{:?}", c.stats());
}

#[test]
fn small_values() {
    let t = parse_term_infer("+(1,2)").unwrap();
    assert_eq!(balance_semiring(&t).unwrap().eval(&ModP64::new(1_000_003)).unwrap(), 3);
    let t = parse_term_infer("+(1,·(2,3))").unwrap();
    assert_eq!(balance_semiring(&t).unwrap().eval(&ModP64::new(1_000_003)).unwrap(), 7);
    let t = parse_term_infer("5").unwrap();
    let c = balance_semiring(&t).unwrap();
    assert_eq!(c.circuit().len(), 1);
    assert_eq!(c.eval(&MinPlusI64::new()).unwrap(), 5);
}

fn affine_strategy() -> impl Strategy<Value = Affine<[u64; 4]>> {
    let coef = || prop::option::of(any::<[u64; 4]>());
    (coef(), coef(), coef()).prop_map(|(a, b, c)| Affine { a, b, c })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn affine_composition_is_extensional(f in affine_strategy(), g in affine_strategy(), xs in prop::collection::vec(any::<[u64; 4]>(), 8)) {
        let s = MatModP64::new(97);
        let lift = |f: &Affine<[u64; 4]>| Affine { a: f.a.map(mat), b: f.b.map(mat), c: f.c.map(mat) };
        let (f, g) = (lift(&f), lift(&g));
        let op = |o: Bin, x: &Mat2<u64>, y: &Mat2<u64>| match o {
            Bin::Add => s.add(x, y),
            Bin::Mul => s.mul(x, y),
        };
        let fg = affine_compose(&f, &g, op);
        for x in xs {
            let x = mat(x);
            let inner = affine_apply(&g, &x, op);
            prop_assert_eq!(affine_apply(&fg, &x, op), affine_apply(&f, &inner, op));
        }
        prop_assert_eq!(fg.a.is_some(), f.a.is_some() || g.a.is_some());
        prop_assert_eq!(fg.b.is_some(), f.b.is_some() || g.b.is_some());
        prop_assert_eq!(fg.c.is_some(), f.c.is_some() || g.c.is_some());
    }

    #[test]
    fn balanced_circuits_compute_the_same_value(n in 1usize..4000, seed in any::<u64>(), shape in 0u8..3) {
        let shape = [Shape::Caterpillar, Shape::Complete, Shape::Random][shape as usize];
        let t = generate(shape, Signature::Semiring, n, seed);
        let c = balance_semiring(&t).unwrap();
        let p = (1u64 << 31) - 1;
        prop_assert_eq!(c.eval(&ModP64::new(p)).unwrap(), eval_term(&t, &SemiringAlgebra(ModP64::new(p))).unwrap());
        prop_assert_eq!(c.eval(&MatModP64::new(97)).unwrap(), eval_term(&t, &SemiringAlgebra(MatModP64::new(97))).unwrap());
        prop_assert_eq!(c.eval(&MinPlusI64::new()).unwrap(), eval_term(&t, &SemiringAlgebra(MinPlusI64::new())).unwrap());
        // no constant that the input does not contain, in particular no 0 or 1
        let used: HashSet<&str> = t.symbols().iter().map(|&s| t.alphabet().name(s)).collect();
        for g in c.circuit().gates() {
            prop_assert!(g.op != SemiringOp::Copy);
            if let SemiringOp::Const(s) = g.op {
                prop_assert!(used.contains(c.alphabet().name(s)));
            }
            prop_assert!(g.children.is_empty() || g.children.len() == 2);
        }
    }
}
