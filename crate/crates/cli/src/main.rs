use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;
use treebal::algebra::{AlgebraError, BuiltinAlgebra};
use treebal::contraction::{internal_leaves, round_count, tree_at_round, ContractionError};
use treebal::decomposition::{binarize, hierarchical_definition, pattern_classes, DecompositionError};
use treebal::gen::{generate, Shape, Signature};
use treebal::pattern::{HierarchicalDefinition, Pattern};
use treebal::regex::equiv::EquivError;
use treebal::regex::{circuit_equiv, parse_regex, regex_circuit, render_regex, RegexError, DEFAULT_STATE_BUDGET};
use treebal::semiring::{semiring_circuit, MatModP64, MinPlusI64, ModP64, SemiringError};
use treebal::term::{parse_term_infer, RankedAlphabet, Term};
use treebal::tree::{tree_of, OrderedTree, TreeError};
use treebal::tslp::{build_tslp, Tslp, TslpError, DEFAULT_UNFOLD_CAP};

const UNFOLD_CAP_VAR: &str = "TREEBAL_UNFOLD_CAP";
const DEFAULT_SEMIRING: BuiltinAlgebra = BuiltinAlgebra::ModP(2_147_483_647);

#[derive(Parser)]
#[command(name = "treebal", version, about = "Balance terms into shallow shared programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a balanced tree straight-line program as productions.
    Balance(Common),
    /// Write a balanced circuit over `+` and `·`.
    Semiring {
        #[command(flatten)]
        common: Common,
        /// Evaluate in this semiring (modp:<p>, matmodp:<p>, minplus).
        #[arg(long)]
        algebra: Option<BuiltinAlgebra>,
    },
    /// Write a balanced regular-expression circuit.
    Regex(Common),
    /// Evaluate a term through its balanced program.
    Eval {
        #[command(flatten)]
        common: Common,
        /// modp:<p>, matmodp:<p>, minplus or free.
        #[arg(long)]
        algebra: BuiltinAlgebra,
    },
    /// Generate a term.
    Gen {
        /// caterpillar, complete or random.
        shape: Shape,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// tree, binary, semiring or regex.
        #[arg(long, default_value = "tree")]
        signature: Signature,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one DOT file per contraction round of the binarized tree.
    Rounds {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Input files; `-` is standard input.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Output file, or a directory when several inputs are given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the result against the input.
    #[arg(long)]
    verify: bool,
    /// Print a JSON run report per input on standard error.
    #[arg(long)]
    stats: bool,
    #[arg(long, value_name = "PATH")]
    emit_dot: Option<PathBuf>,
    /// Patterns of the hierarchical definition with their class ids, as JSON.
    #[arg(long, value_name = "PATH")]
    emit_hierdef: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    emit_rounds: Option<PathBuf>,
    /// Inputs processed in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Cap(_) => 3,
            CliError::Usage(_) => 64,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<TslpError> for CliError {
    fn from(e: TslpError) -> Self {
        match e {
            TslpError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::Tslp(e) => e.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SemiringError> for CliError {
    fn from(e: SemiringError) -> Self {
        match e {
            SemiringError::Tslp(e) => e.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<RegexError> for CliError {
    fn from(e: RegexError) -> Self {
        match e {
            RegexError::Tslp(e) => e.into(),
            RegexError::Equiv(EquivError::BudgetExceeded(_)) => CliError::Cap(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<DecompositionError> for CliError {
    fn from(e: DecompositionError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ContractionError> for CliError {
    fn from(e: ContractionError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Verdict {
    Verified,
    Skipped,
    Failed,
}

#[derive(Debug, Serialize)]
struct RunReport {
    schema: &'static str,
    command: &'static str,
    input: String,
    n: usize,
    tslp_size: usize,
    tslp_depth: usize,
    class_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    circuit_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    circuit_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    wall_ms: f64,
    verdict: Verdict,
}

#[derive(Clone, Copy)]
enum Kind<'a> {
    Balance,
    Semiring(Option<&'a BuiltinAlgebra>),
    Regex,
    Eval(&'a BuiltinAlgebra),
}

impl Kind<'_> {
    fn name(self) -> &'static str {
        match self {
            Kind::Balance => "balance",
            Kind::Semiring(_) => "semiring",
            Kind::Regex => "regex",
            Kind::Eval(_) => "eval",
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Kind::Balance => "tslp",
            Kind::Semiring(_) | Kind::Regex => "circuit",
            Kind::Eval(_) => "value",
        }
    }
}

/// Decomposition, pattern classes and shared program of one term.
struct Balanced {
    tree: Arc<OrderedTree>,
    hd: HierarchicalDefinition,
    class_of: Vec<u32>,
    class_count: usize,
    program: Tslp,
}

fn balance_term(t: &Term) -> Result<Balanced, CliError> {
    let tree = Arc::new(tree_of(t));
    let hd = hierarchical_definition(tree.clone())?;
    let classes = pattern_classes(&hd);
    let program = build_tslp(t.alphabet().clone(), &hd)?.minimal_dag();
    Ok(Balanced {
        tree,
        hd,
        class_of: classes.class_of,
        class_count: classes.class_count,
        program,
    })
}

fn unfold_cap() -> Result<u64, CliError> {
    match std::env::var(UNFOLD_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{UNFOLD_CAP_VAR} must be a node count, got `{v}`"))),
        Err(_) => Ok(DEFAULT_UNFOLD_CAP),
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn stem(input: &Path) -> String {
    if input == Path::new("-") {
        return "stdin".into();
    }
    input.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned())
}

/// `base` itself for a single input, `base/<stem>.<ext>` otherwise.
fn target(base: &Path, input: &Path, ext: &str, multi: bool) -> PathBuf {
    if multi {
        base.join(format!("{}.{ext}", stem(input)))
    } else {
        base.to_path_buf()
    }
}

fn hierdef_json(b: &Balanced) -> String {
    #[derive(Serialize)]
    struct HierDef<'a> {
        patterns: &'a [Pattern],
        class_of: &'a [u32],
        class_count: usize,
    }
    let doc = HierDef {
        patterns: b.hd.patterns(),
        class_of: &b.class_of,
        class_count: b.class_count,
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

/// DOT frames of the contraction rounds, binarizing first when needed.
fn round_frames(tree: &OrderedTree, alphabet: &RankedAlphabet) -> Result<Vec<String>, CliError> {
    let binary;
    let tree = if tree.check_full_binary().is_ok() {
        tree
    } else {
        binary = binarize(tree).tree;
        &*binary
    };
    let rounds = round_count(internal_leaves(tree)?.len());
    let mut frames = Vec::with_capacity(rounds + 1);
    for r in 0..=rounds {
        let state = tree_at_round(tree, r)?;
        let sub = state.tree(tree);
        let mut out = format!("digraph round_{r} {{\n  label=\"round {r}\";\n  node [shape=circle];\n");
        for (i, &v) in state.nodes.iter().enumerate() {
            let name = alphabet.name(sub.label(i)).replace('"', "\\\"");
            let _ = writeln!(out, "  n{v} [label=\"{name}\"];");
        }
        for (i, &v) in state.nodes.iter().enumerate() {
            for c in sub.children(i) {
                let _ = writeln!(out, "  n{v} -> n{};", state.nodes[c]);
            }
        }
        out.push_str("}\n");
        frames.push(out);
    }
    Ok(frames)
}

fn write_rounds(dir: &Path, tree: &OrderedTree, alphabet: &RankedAlphabet) -> Result<usize, CliError> {
    let frames = round_frames(tree, alphabet)?;
    fs::create_dir_all(dir)?;
    let width = (frames.len() - 1).to_string().len().max(2);
    for (r, frame) in frames.iter().enumerate() {
        write_output(&dir.join(format!("round_{r:0width$}.dot")), frame)?;
    }
    Ok(frames.len())
}

fn semiring_value(c: &treebal::semiring::SemiringCircuit, alg: &BuiltinAlgebra) -> Result<String, CliError> {
    Ok(match alg {
        BuiltinAlgebra::ModP(p) => c.eval(&ModP64::new(*p))?.to_string(),
        BuiltinAlgebra::MatModP(p) => c.eval(&MatModP64::new(*p))?.to_string(),
        BuiltinAlgebra::MinPlus => c.eval(&MinPlusI64::new())?.to_string(),
        BuiltinAlgebra::Free => return Err(CliError::Usage("the free algebra is not a semiring".into())),
    })
}

fn run_file(kind: Kind, input: &Path, opts: &Common, cap: u64) -> Result<RunReport, CliError> {
    let multi = opts.inputs.len() > 1;
    let text = read_input(input)?;
    let start = Instant::now();
    let term = match kind {
        Kind::Regex => parse_regex(text.trim()).map_err(|e| CliError::Input(e.to_string()))?,
        _ => parse_term_infer(text.trim()).map_err(|e| CliError::Input(e.to_string()))?,
    };
    let b = balance_term(&term)?;
    let mut report = RunReport {
        schema: "v1",
        command: kind.name(),
        input: input.display().to_string(),
        n: term.len(),
        tslp_size: b.program.stats().size,
        tslp_depth: b.program.stats().depth,
        class_count: b.class_count,
        circuit_size: None,
        circuit_depth: None,
        value: None,
        wall_ms: 0.0,
        verdict: Verdict::Skipped,
    };
    let passed = |ok: bool| if ok { Verdict::Verified } else { Verdict::Failed };
    let (output, dot) = match kind {
        Kind::Balance => {
            if opts.verify {
                report.verdict = passed(b.program.unfold_with_cap(cap)? == term);
            }
            (b.program.productions()?, b.program.to_dot())
        }
        Kind::Semiring(alg) => {
            let c = semiring_circuit(&b.program)?;
            let stats = c.stats();
            (report.circuit_size, report.circuit_depth) = (Some(stats.size), Some(stats.depth));
            if let Some(alg) = alg {
                report.value = Some(semiring_value(&c, alg)?);
            }
            if opts.verify {
                let alg = alg.unwrap_or(&DEFAULT_SEMIRING);
                report.verdict = passed(semiring_value(&c, alg)? == alg.eval_term(&term)?);
            }
            (c.to_text(), c.to_dot())
        }
        Kind::Regex => {
            let c = regex_circuit(&b.program)?;
            let stats = c.stats();
            (report.circuit_size, report.circuit_depth) = (Some(stats.size), Some(stats.depth));
            if opts.verify {
                report.verdict = passed(circuit_equiv(&term, &c, DEFAULT_STATE_BUDGET)?);
            }
            (c.to_text(), c.to_dot())
        }
        Kind::Eval(alg) => {
            let value = alg.eval_tslp(&b.program)?;
            if opts.verify {
                report.verdict = passed(value == alg.eval_term(&term)?);
            }
            report.value = Some(value.clone());
            (value + "\n", b.program.to_dot())
        }
    };
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;

    match &opts.out {
        Some(base) => write_output(&target(base, input, kind.extension(), multi), &output)?,
        None => print!("{output}"),
    }
    if let Some(base) = &opts.emit_dot {
        write_output(&target(base, input, "dot", multi), &dot)?;
    }
    if let Some(base) = &opts.emit_hierdef {
        write_output(&target(base, input, "hierdef.json", multi), &hierdef_json(&b))?;
    }
    if let Some(base) = &opts.emit_rounds {
        let dir = if multi { base.join(stem(input)) } else { base.clone() };
        write_rounds(&dir, &b.tree, term.alphabet())?;
    }
    Ok(report)
}

/// Runs `f` on `0..count` with up to `jobs` threads; results keep input order.
fn parallel_map<R: Send>(count: usize, jobs: usize, f: impl Fn(usize) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, count.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let r = f(i);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("every index ran")).collect()
}

fn run_batch(kind: Kind, opts: &Common) -> Result<u8, CliError> {
    let cap = unfold_cap()?;
    if opts.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    if opts.inputs.iter().filter(|p| p.as_path() == Path::new("-")).count() > 1 {
        return Err(CliError::Usage("standard input can be read only once".into()));
    }
    if opts.inputs.len() > 1 && opts.out.is_none() {
        return Err(CliError::Usage("--out <DIR> is required with several inputs".into()));
    }
    let results = parallel_map(opts.inputs.len(), opts.jobs, |i| run_file(kind, &opts.inputs[i], opts, cap));
    let mut code = 0;
    for (input, r) in opts.inputs.iter().zip(results) {
        match r {
            Ok(report) => {
                if opts.stats {
                    eprintln!("{}", serde_json::to_string(&report).expect("serializable"));
                }
                if report.verdict == Verdict::Failed {
                    eprintln!("treebal: {}: verification failed", input.display());
                    code = if code == 0 { 2 } else { code };
                }
            }
            Err(e) => {
                eprintln!("treebal: {}: {e}", input.display());
                code = if code == 0 { e.code() } else { code };
            }
        }
    }
    Ok(code)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Balance(opts) => run_batch(Kind::Balance, &opts),
        Command::Semiring { common, algebra } => {
            if algebra == Some(BuiltinAlgebra::Free) {
                return Err(CliError::Usage("the free algebra is not a semiring".into()));
            }
            run_batch(Kind::Semiring(algebra.as_ref()), &common)
        }
        Command::Regex(opts) => run_batch(Kind::Regex, &opts),
        Command::Eval { common, algebra } => run_batch(Kind::Eval(&algebra), &common),
        Command::Gen { shape, n, seed, signature, out } => {
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            let t = generate(shape, signature, n, seed);
            let text = match signature {
                Signature::Regex => render_regex(&t),
                _ => t.render(),
            } + "\n";
            match out {
                Some(path) => write_output(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Rounds { input, out } => {
            let in_file = |e: String| CliError::Input(format!("{}: {e}", input.display()));
            let text = read_input(&input).map_err(|e| in_file(e.to_string()))?;
            let term = parse_term_infer(text.trim()).map_err(|e| in_file(e.to_string()))?;
            write_rounds(&out, &tree_of(&term), term.alphabet())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("treebal: {e}");
            ExitCode::from(e.code())
        }
    }
}
