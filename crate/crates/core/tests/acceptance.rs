//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Thresholds are pinned below.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::rc::Rc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::words::{render, Plain, Re};
use common::{binary_tree, compare_with_sequential, full_binary_shapes};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treebal::algebra::eval_term;
use treebal::contraction::{contraction_patterns, internal_leaves, round_count};
use treebal::decomposition::{
    bridges_and_contraction, critical_nodes, hierarchical_definition, is_normal_form, BridgeSize,
};
use treebal::gen::{generate, random_term, ranked_alphabet, Shape, Signature};
use treebal::pattern::Pattern;
use treebal::regex::forms::KleeneOps;
use treebal::regex::{
    balance_regex, circuit_equiv, parse_regex, regex_equiv, star_height, DEFAULT_STATE_BUDGET,
};
use treebal::semiring::{balance_semiring, MatModP64, MinPlusI64, ModP64, Semiring, SemiringAlgebra};
use treebal::term::{parse_term_infer, Term};
use treebal::tree::tree_of;
use treebal::tslp::balance;

/// Multiplier on the largest depth ratio seen at the calibration size.
const DEPTH_HEADROOM: f64 = 1.25;
/// Multiplier on the largest size ratio seen at the calibration size.
const SIZE_HEADROOM: f64 = 1.0;
const DEPTH_CALIBRATION_LOG: u32 = 8;
const SIZE_CALIBRATION_LOG: u32 = 10;
const LARGEST_LOG: u32 = 18;
const CALIBRATION_SEEDS: u64 = 10;
const SWEEP_SEEDS: u64 = 3;
const SHAPES: [Shape; 3] = [Shape::Caterpillar, Shape::Complete, Shape::Random];

const FIGURE: &str = "a(b(c(d,e(f,g)),h(i,j)),k(l(m(n,o),p),q(r,s(t,u))))";
const FIGURE_PATTERNS: [&str; 10] =
    ["a", "(e,g)", "(h,j)", "(m,o)", "(s,u)", "(l,o)", "(k,q)", "(c,d)", "(b,d)", "(k,u)"];

type Verdict = Result<String, String>;

fn log_n(n: usize) -> f64 {
    ((n + 2) as f64).log2()
}

fn depth_ratio(t: &Term) -> Result<f64, String> {
    let program = balance(t).map_err(|e| e.to_string())?;
    Ok(program.stats().depth as f64 / log_n(t.len()))
}

fn size_ratio(t: &Term) -> Result<f64, String> {
    let program = balance(t).map_err(|e| e.to_string())?;
    Ok(program.stats().size as f64 / (t.len() as f64 / log_n(t.len())))
}

/// Largest ratio over every shape and seed at size `2^log`.
fn calibrate(
    log: u32,
    signature: Signature,
    ratio: impl Fn(&Term) -> Result<f64, String>,
) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for shape in SHAPES {
        for seed in 0..CALIBRATION_SEEDS {
            worst = worst.max(ratio(&generate(shape, signature, 1 << log, seed))?);
        }
    }
    Ok(worst)
}

fn depth_constant() -> Result<(f64, f64), String> {
    let raw = calibrate(DEPTH_CALIBRATION_LOG, Signature::Tree, depth_ratio)?;
    Ok((raw, raw * DEPTH_HEADROOM))
}

fn round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut nodes = 0usize;
    let mut count = 0usize;
    let mut check = |t: &Term| -> Result<(), String> {
        let program = balance(t).map_err(|e| e.to_string())?;
        let back = program.unfold().map_err(|e| e.to_string())?;
        if back.render() != t.render() {
            return Err(format!("term of size {} does not round-trip", t.len()));
        }
        nodes += t.len();
        count += 1;
        Ok(())
    };
    for seed in 0..10_000u64 {
        let n = rng.gen_range(1..=10_000);
        let max_rank = rng.gen_range(1..=4);
        let labels = rng.gen_range(max_rank + 1..=8);
        check(&random_term(&ranked_alphabet(max_rank, labels), n, seed))?;
    }
    for shape in SHAPES {
        check(&generate(shape, Signature::Tree, 10_000, 0))?;
    }
    Ok(format!("{count} terms, {nodes} nodes"))
}

fn depth_envelope() -> Verdict {
    let (raw, c1) = depth_constant()?;
    let mut worst: f64 = 0.0;
    for log in DEPTH_CALIBRATION_LOG..=LARGEST_LOG {
        for shape in SHAPES {
            for seed in 0..SWEEP_SEEDS {
                let t = generate(shape, Signature::Tree, 1 << log, seed);
                let r = depth_ratio(&t)?;
                worst = worst.max(r);
                if r > c1 {
                    return Err(format!("{shape:?} n = {}: depth/log = {r:.3} > C1 = {c1:.3}", t.len()));
                }
            }
        }
    }
    Ok(format!("C1 = {c1:.3} (raw {raw:.3} x {DEPTH_HEADROOM}); largest ratio up to 2^{LARGEST_LOG}: {worst:.3}"))
}

fn size_envelope() -> Verdict {
    let raw = calibrate(SIZE_CALIBRATION_LOG, Signature::Binary, size_ratio)?;
    let c2 = raw * SIZE_HEADROOM;
    let mut worst: f64 = 0.0;
    for log in SIZE_CALIBRATION_LOG..=LARGEST_LOG {
        for shape in SHAPES {
            for seed in 0..SWEEP_SEEDS {
                let t = generate(shape, Signature::Binary, 1 << log, seed);
                let r = size_ratio(&t)?;
                worst = worst.max(r);
                if r > c2 {
                    return Err(format!("{shape:?} n = {}: size/(n/log) = {r:.3} > C2 = {c2:.3}", t.len()));
                }
            }
        }
    }
    Ok(format!("C2 = {c2:.3} (raw {raw:.3} x {SIZE_HEADROOM}); largest ratio up to 2^{LARGEST_LOG}: {worst:.3}"))
}

fn figure_contraction() -> Verdict {
    let t = parse_term_infer(FIGURE).map_err(|e| e.to_string())?;
    let tree = Arc::new(tree_of(&t));
    let hd = contraction_patterns(tree.clone()).map_err(|e| e.to_string())?;
    let name = |v| t.alphabet().name(tree.label(v)).to_string();
    let got: BTreeSet<String> = hd
        .patterns()
        .iter()
        .map(|&p| match p {
            Pattern::Subtree { v } => name(v),
            Pattern::Context { v, w } => format!("({},{})", name(v), name(w)),
        })
        .collect();
    let want: BTreeSet<String> = FIGURE_PATTERNS.iter().map(|s| s.to_string()).collect();
    let rounds = round_count(internal_leaves(&tree).map_err(|e| e.to_string())?.len());
    if got != want {
        return Err(format!("patterns {got:?}"));
    }
    if hd.width() != 5 || rounds != 8 {
        return Err(format!("width {}, rounds {rounds}", hd.width()));
    }
    Ok(format!("{} patterns, width 5, 8 rounds", got.len()))
}

fn structural_bounds() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut nodes = 0usize;
    let mut worst_width = 0usize;
    for seed in 0..1000u64 {
        let n = rng.gen_range(1..=10_000);
        let t = generate(Shape::Random, Signature::Binary, n, seed);
        let tree = Arc::new(tree_of(&t));
        let n = tree.len();
        nodes += n;
        let cp = contraction_patterns(tree.clone()).map_err(|e| e.to_string())?;
        worst_width = worst_width.max(cp.width());
        if cp.width() > 5 {
            return Err(format!("seed {seed}: width {}", cp.width()));
        }
        let default_m = BridgeSize::default().resolve(n, 2);
        let log_m = BridgeSize::Logarithmic.resolve(n, 2);
        for m in [default_m, log_m, 7, 64] {
            if m > n {
                continue;
            }
            let crit = critical_nodes(&tree, m);
            if crit.len() as f64 > 2.0 * n as f64 / m as f64 - 1.0 && !crit.is_empty() {
                return Err(format!("seed {seed}, m = {m}: {} critical nodes", crit.len()));
            }
            let b = bridges_and_contraction(&tree, m).map_err(|e| e.to_string())?;
            if let Some(p) = b.bridges.iter().find(|p| p.size(&tree) > m) {
                return Err(format!("seed {seed}, m = {m}: bridge {p} has {} nodes", p.size(&tree)));
            }
        }
        let hd = hierarchical_definition(tree).map_err(|e| e.to_string())?;
        if !is_normal_form(&hd) {
            return Err(format!("seed {seed}: normalized definition has a pattern of neither type"));
        }
    }
    Ok(format!("1000 trees, {nodes} nodes, largest width {worst_width}"))
}

fn semiring_agrees<S: Semiring + Clone>(t: &Term, s: &S) -> Result<bool, String> {
    let c = balance_semiring(t).map_err(|e| e.to_string())?;
    let balanced = c.eval(s).map_err(|e| e.to_string())?;
    let direct = eval_term(t, &SemiringAlgebra(s.clone())).map_err(|e| e.to_string())?;
    Ok(balanced == direct)
}

fn semiring_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let modp = ModP64::new(2_147_483_647);
    let matp = MatModP64::new(97);
    let minplus = MinPlusI64::new();
    let mut nodes = 0usize;
    for seed in 0..1000u64 {
        let n = rng.gen_range(1..=10_000);
        let shape = SHAPES[seed as usize % 3];
        let t = generate(shape, Signature::Semiring, n, seed);
        nodes += t.len();
        for (name, ok) in [
            ("modp", semiring_agrees(&t, &modp)?),
            ("matmodp", semiring_agrees(&t, &matp)?),
            ("minplus", semiring_agrees(&t, &minplus)?),
        ] {
            if !ok {
                return Err(format!("seed {seed}, {shape:?}, n = {}: {name} values differ", t.len()));
            }
        }
    }
    Ok(format!("1000 terms, {nodes} nodes, 3 semirings"))
}

/// Nested stars that keep the star height growing with the size.
fn adversarial_regexes() -> Vec<Term> {
    let mut out = Vec::new();
    let mut nested = String::from("a");
    let mut alternating = String::from("a");
    let mut mixed = String::from("a");
    for i in 0..40 {
        let l = if i % 2 == 0 { 'b' } else { 'a' };
        nested = format!("({nested})*");
        alternating = format!("(({alternating})*{l})*");
        mixed = if i % 3 == 2 { format!("({mixed}+{l})*") } else { format!("({mixed})*{l}") };
        for text in [&nested, &alternating, &mixed] {
            out.push(parse_regex(text).expect("well-formed adversarial regex"));
        }
    }
    out
}

fn regex_correctness() -> Verdict {
    let (_, c1) = depth_constant()?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut corpus: Vec<Term> = (0..500u64)
        .map(|seed| {
            let n = rng.gen_range(1..=300);
            let shape = if seed % 4 == 0 { Shape::Caterpillar } else { Shape::Random };
            generate(shape, Signature::Regex, n, seed)
        })
        .collect();
    corpus.extend(adversarial_regexes());
    let mut worst: f64 = 0.0;
    let mut worst_tslp: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, r) in corpus.iter().enumerate() {
        let c = balance_regex(r).map_err(|e| e.to_string())?;
        if !circuit_equiv(r, &c, DEFAULT_STATE_BUDGET).map_err(|e| e.to_string())? {
            return Err(format!("expression {i} changes its language"));
        }
        let unfolded = c.unfold().map_err(|e| e.to_string())?;
        let depth = c.stats().depth;
        let sh = star_height(&unfolded);
        if sh > depth {
            return Err(format!("expression {i}: star height {sh} > depth {depth}"));
        }
        let ratio = depth as f64 / log_n(r.len());
        worst = worst.max(ratio);
        worst_tslp = worst_tslp.max(depth_ratio(r)?);
        if ratio > c1 {
            failures.push(i);
        }
    }
    let summary = format!(
        "{} expressions; circuit depth/log up to {worst:.3} against C1 = {c1:.3} (program depth/log up to {worst_tslp:.3})",
        corpus.len()
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {} exceed the depth envelope", failures.len()))
    }
}

fn random_re(rng: &mut ChaCha8Rng, size: usize) -> Rc<Re> {
    let k = &mut Plain;
    match size {
        0 | 1 => match rng.gen_range(0..6) {
            0 => k.empty(),
            1 => k.epsilon(),
            2 | 3 => Rc::new(Re::Letter('a')),
            _ => Rc::new(Re::Letter('b')),
        },
        2 => {
            let x = random_re(rng, 1);
            k.star(&x)
        }
        _ => {
            let choice = rng.gen_range(0..3);
            if choice == 0 {
                let x = random_re(rng, size - 1);
                return k.star(&x);
            }
            let left = rng.gen_range(1..size - 1);
            let (x, y) = (random_re(rng, left), random_re(rng, size - 1 - left));
            if choice == 1 {
                k.union(&x, &y)
            } else {
                k.concat(&x, &y)
            }
        }
    }
}

fn dagger_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let k = &mut Plain;
    for i in 0..1000 {
        let mut pick = || {
            let size = rng.gen_range(1..=6);
            random_re(&mut rng, size)
        };
        let (alpha, beta, gamma, delta) = (pick(), pick(), pick(), pick());
        let bs = k.star(&beta);
        let abs = k.concat(&alpha, &bs);
        let absg = k.concat(&abs, &gamma);
        let lhs = k.union(&absg, &delta);
        let lhs = k.star(&lhs);
        let ds = k.star(&delta);
        let dsa = k.concat(&ds, &alpha);
        let loop_back = k.concat(&gamma, &dsa);
        let body = k.union(&beta, &loop_back);
        let body = k.star(&body);
        let rhs = k.concat(&dsa, &body);
        let rhs = k.concat(&rhs, &gamma);
        let rhs = k.concat(&rhs, &ds);
        let rhs = k.union(&rhs, &ds);
        let x = parse_regex(&render(&lhs)).map_err(|e| e.to_string())?;
        let y = parse_regex(&render(&rhs)).map_err(|e| e.to_string())?;
        if !regex_equiv(&x, &y).map_err(|e| e.to_string())? {
            return Err(format!("tuple {i}: {} vs {}", render(&lhs), render(&rhs)));
        }
    }
    Ok("1000 tuples".into())
}

fn sequential_oracle() -> Verdict {
    let mut trees = 0usize;
    for n in (1..=15).step_by(2) {
        for shape in full_binary_shapes(n) {
            compare_with_sequential(&binary_tree(&shape)).map_err(|e| format!("{shape:?}: {e}"))?;
            trees += 1;
        }
    }
    Ok(format!("{trees} trees"))
}

type Criterion = (&'static str, u64, fn() -> Verdict);

const CRITERIA: [Criterion; 9] = [
    ("round-trip exactness", 60, round_trip),
    ("depth envelope", 120, depth_envelope),
    ("size envelope", 120, size_envelope),
    ("figure contraction patterns", 1, figure_contraction),
    ("structural bounds sweep", 60, structural_bounds),
    ("semiring correctness", 120, semiring_correctness),
    ("regex correctness", 300, regex_correctness),
    ("dagger identity", 60, dagger_identity),
    ("sequential contraction oracle", 30, sequential_oracle),
];

fn main() -> ExitCode {
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, budget, run)) in CRITERIA.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let verdict = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let (ok, detail) = match verdict {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {detail} [{:.1} s / {budget} s{}]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" },
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
