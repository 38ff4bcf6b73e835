//! Ranked alphabets, terms and contexts, and their text syntax.
//!
//! Terms are stored flat, as the preorder sequence of their symbols. Because
//! every symbol carries a fixed rank, the preorder sequence determines the
//! tree uniquely, and no recursion is needed to build, compare, drop or print
//! a term. This matters for the degenerate inputs the balancer is meant for:
//! a caterpillar with 10^5 nodes is just a vector.
//!
//! Concrete syntax: `sym` or `sym(t1,...,tr)`. A symbol token is any maximal
//! run of characters other than whitespace, `(`, `)` and `,`, so identifiers
//! (`f`, `x_1`), numerals (`42`) and operator names (`+`, `·`) all work.
//! Whitespace between tokens is ignored.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Name reserved for the parameter (hole) of a context.
pub const PARAMETER: &str = "x";

/// Index of a symbol inside a [`RankedAlphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Symbol(pub u32);

impl Symbol {
    /// The parameter `x` of a context. Never a member of an alphabet.
    pub const HOLE: Symbol = Symbol(u32::MAX);
    /// Label of nodes introduced by binarization.
    pub const PAD: Symbol = Symbol(u32::MAX - 1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_reserved(self) -> bool {
        self == Symbol::HOLE || self == Symbol::PAD
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("symbol `{0}` is declared twice")]
    Duplicate(String),
    #[error("`{PARAMETER}` is reserved for the context parameter")]
    ReservedParameter,
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
}

/// A finite set of function symbols, each with a rank.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankedAlphabet {
    names: Vec<String>,
    ranks: Vec<usize>,
    index: HashMap<String, Symbol>,
}

pub(crate) fn is_symbol_char(c: char) -> bool {
    !(c.is_whitespace() || c == '(' || c == ')' || c == ',')
}

impl RankedAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_symbols<'a, I>(symbols: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = (&'a str, usize)>,
    {
        let mut alphabet = Self::new();
        for (name, rank) in symbols {
            alphabet.add(name, rank)?;
        }
        Ok(alphabet)
    }

    pub fn add(&mut self, name: &str, rank: usize) -> Result<Symbol, AlphabetError> {
        if name == PARAMETER {
            return Err(AlphabetError::ReservedParameter);
        }
        if name.is_empty() || !name.chars().all(is_symbol_char) {
            return Err(AlphabetError::InvalidName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(AlphabetError::Duplicate(name.to_string()));
        }
        let sym = Symbol(self.names.len() as u32);
        self.names.push(name.to_string());
        self.ranks.push(rank);
        self.index.insert(name.to_string(), sym);
        Ok(sym)
    }

    /// Returns the symbol for `name`, adding it with `rank` if absent.
    pub fn intern(&mut self, name: &str, rank: usize) -> Result<Symbol, AlphabetError> {
        match self.index.get(name) {
            Some(&s) if self.ranks[s.index()] == rank => Ok(s),
            Some(_) => Err(AlphabetError::Duplicate(name.to_string())),
            None => self.add(name, rank),
        }
    }

    pub fn get(&self, name: &str) -> Option<Symbol> {
        self.index.get(name).copied()
    }

    pub fn rank(&self, sym: Symbol) -> usize {
        match sym {
            Symbol::HOLE => 0,
            Symbol::PAD => panic!("padding symbol has no fixed rank"),
            s => self.ranks[s.index()],
        }
    }

    pub fn name(&self, sym: Symbol) -> &str {
        match sym {
            Symbol::HOLE => PARAMETER,
            Symbol::PAD => "#",
            s => &self.names[s.index()],
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (Symbol, &str, usize)> + '_ {
        self.names
            .iter()
            .zip(&self.ranks)
            .enumerate()
            .map(|(i, (n, &r))| (Symbol(i as u32), n.as_str(), r))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` has rank {expected} but is applied to {found} arguments")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unbalanced parentheses")]
    UnbalancedParentheses,
    #[error("unexpected `{0}`")]
    Unexpected(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("parameter `{PARAMETER}` not allowed here")]
    UnexpectedParameter,
    #[error("a context needs exactly one parameter `{PARAMETER}`, found {0}")]
    ParameterCount(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(offset: usize, kind: ParseErrorKind) -> Self {
        Self { offset, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("malformed preorder sequence")]
    Malformed,
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(Symbol),
    #[error("expected exactly one parameter, found {0}")]
    ParameterCount(usize),
}

/// A term over a ranked alphabet, stored as its preorder symbol sequence.
#[derive(Clone)]
pub struct Term {
    alphabet: Arc<RankedAlphabet>,
    symbols: Vec<Symbol>,
}

/// A term with exactly one leaf labelled by the parameter.
#[derive(Clone)]
pub struct Context {
    alphabet: Arc<RankedAlphabet>,
    symbols: Vec<Symbol>,
}

fn check_preorder(alphabet: &RankedAlphabet, symbols: &[Symbol]) -> Result<usize, TermError> {
    let mut pending = 1usize;
    let mut holes = 0usize;
    for (i, &s) in symbols.iter().enumerate() {
        if pending == 0 {
            return Err(TermError::Malformed);
        }
        let rank = match s {
            Symbol::HOLE => {
                holes += 1;
                0
            }
            Symbol::PAD => return Err(TermError::UnknownSymbol(s)),
            s if s.index() < alphabet.len() => alphabet.rank(s),
            s => return Err(TermError::UnknownSymbol(s)),
        };
        pending = pending - 1 + rank;
        if pending == 0 && i + 1 != symbols.len() {
            return Err(TermError::Malformed);
        }
    }
    if pending != 0 {
        return Err(TermError::Malformed);
    }
    Ok(holes)
}

/// Writes a preorder symbol sequence in term syntax.
pub(crate) fn write_preorder(
    f: &mut impl fmt::Write,
    alphabet: &RankedAlphabet,
    symbols: &[Symbol],
) -> fmt::Result {
    let mut open: Vec<usize> = Vec::new();
    for &s in symbols {
        f.write_str(alphabet.name(s))?;
        let rank = alphabet.rank(s);
        if rank > 0 {
            f.write_char('(')?;
            open.push(rank);
            continue;
        }
        while let Some(top) = open.last_mut() {
            *top -= 1;
            if *top == 0 {
                open.pop();
                f.write_char(')')?;
            } else {
                f.write_char(',')?;
                break;
            }
        }
    }
    Ok(())
}

/// End (exclusive) of the subterm starting at `start` in a preorder sequence.
pub(crate) fn subterm_end(alphabet: &RankedAlphabet, symbols: &[Symbol], start: usize) -> usize {
    let mut pending = 1usize;
    let mut i = start;
    while pending > 0 {
        pending = pending - 1 + alphabet.rank(symbols[i]);
        i += 1;
    }
    i
}

impl Term {
    pub fn from_preorder(
        alphabet: Arc<RankedAlphabet>,
        symbols: Vec<Symbol>,
    ) -> Result<Self, TermError> {
        match check_preorder(&alphabet, &symbols)? {
            0 => Ok(Self { alphabet, symbols }),
            n => Err(TermError::ParameterCount(n)),
        }
    }

    pub(crate) fn from_preorder_unchecked(alphabet: Arc<RankedAlphabet>, symbols: Vec<Symbol>) -> Self {
        debug_assert!(check_preorder(&alphabet, &symbols) == Ok(0));
        Self { alphabet, symbols }
    }

    /// Builds `sym(children...)`. Panics if the arity or alphabet does not match.
    pub fn node(sym: Symbol, children: &[Term]) -> Self {
        let alphabet = children
            .first()
            .map(|c| c.alphabet.clone())
            .expect("use Term::leaf for constants");
        assert_eq!(alphabet.rank(sym), children.len(), "arity mismatch");
        let mut symbols = Vec::with_capacity(1 + children.iter().map(Term::len).sum::<usize>());
        symbols.push(sym);
        for c in children {
            assert!(Arc::ptr_eq(&c.alphabet, &alphabet) || *c.alphabet == *alphabet);
            symbols.extend_from_slice(&c.symbols);
        }
        Self { alphabet, symbols }
    }

    pub fn leaf(alphabet: Arc<RankedAlphabet>, sym: Symbol) -> Self {
        assert_eq!(alphabet.rank(sym), 0, "leaf symbol must have rank 0");
        Self {
            alphabet,
            symbols: vec![sym],
        }
    }

    pub fn alphabet(&self) -> &Arc<RankedAlphabet> {
        &self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn root(&self) -> Symbol {
        self.symbols[0]
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The direct subterms, in order.
    pub fn children(&self) -> Vec<Term> {
        let mut out = Vec::new();
        let mut i = 1;
        for _ in 0..self.alphabet.rank(self.root()) {
            let end = subterm_end(&self.alphabet, &self.symbols, i);
            out.push(Self {
                alphabet: self.alphabet.clone(),
                symbols: self.symbols[i..end].to_vec(),
            });
            i = end;
        }
        out
    }

    /// Height of the term (a constant has depth 0).
    pub fn depth(&self) -> usize {
        let mut stack: Vec<usize> = Vec::new();
        let mut best = 0;
        for &s in &self.symbols {
            best = best.max(stack.len());
            let rank = self.alphabet.rank(s);
            if rank > 0 {
                stack.push(rank);
                continue;
            }
            while let Some(top) = stack.last_mut() {
                *top -= 1;
                if *top == 0 {
                    stack.pop();
                } else {
                    break;
                }
            }
        }
        best
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet {
            return self.symbols == other.symbols;
        }
        self.symbols.len() == other.symbols.len()
            && self
                .symbols
                .iter()
                .zip(&other.symbols)
                .all(|(&a, &b)| self.alphabet.name(a) == other.alphabet.name(b))
    }
}

impl Eq for Term {}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_preorder(f, &self.alphabet, &self.symbols)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

impl Context {
    pub fn from_preorder(
        alphabet: Arc<RankedAlphabet>,
        symbols: Vec<Symbol>,
    ) -> Result<Self, TermError> {
        match check_preorder(&alphabet, &symbols)? {
            1 => Ok(Self { alphabet, symbols }),
            n => Err(TermError::ParameterCount(n)),
        }
    }

    /// The trivial context `x`.
    pub fn identity(alphabet: Arc<RankedAlphabet>) -> Self {
        Self {
            alphabet,
            symbols: vec![Symbol::HOLE],
        }
    }

    pub fn alphabet(&self) -> &Arc<RankedAlphabet> {
        &self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn hole_position(&self) -> usize {
        self.symbols
            .iter()
            .position(|&s| s == Symbol::HOLE)
            .expect("context without parameter")
    }

    fn splice(&self, filler: &[Symbol]) -> Vec<Symbol> {
        let h = self.hole_position();
        let mut out = Vec::with_capacity(self.symbols.len() + filler.len() - 1);
        out.extend_from_slice(&self.symbols[..h]);
        out.extend_from_slice(filler);
        out.extend_from_slice(&self.symbols[h + 1..]);
        out
    }

    /// `s(t)`: replaces the parameter by `t`.
    pub fn apply(&self, t: &Term) -> Term {
        Term {
            alphabet: self.alphabet.clone(),
            symbols: self.splice(&t.symbols),
        }
    }

    /// `s(t(x))`.
    pub fn compose(&self, inner: &Context) -> Context {
        Context {
            alphabet: self.alphabet.clone(),
            symbols: self.splice(&inner.symbols),
        }
    }
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

impl Eq for Context {}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_preorder(f, &self.alphabet, &self.symbols)
    }
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Context({self})")
    }
}

enum Token<'a> {
    Sym(&'a str),
    Open,
    Close,
    Comma,
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Option<(usize, Token<'a>)> {
        let rest = &self.text[self.pos..];
        let skipped = rest.len() - rest.trim_start().len();
        self.pos += skipped;
        let start = self.pos;
        let c = self.text[start..].chars().next()?;
        let tok = match c {
            '(' => Token::Open,
            ')' => Token::Close,
            ',' => Token::Comma,
            _ => {
                let len = self.text[start..]
                    .find(|c: char| !is_symbol_char(c))
                    .unwrap_or(self.text.len() - start);
                self.pos += len;
                return Some((start, Token::Sym(&self.text[start..start + len])));
            }
        };
        self.pos += 1;
        Some((start, tok))
    }
}

/// How the parser resolves symbol names.
enum Resolve<'a> {
    Fixed(&'a RankedAlphabet),
    Infer(&'a mut InferState),
}

#[derive(Default)]
struct InferState {
    names: Vec<String>,
    ranks: Vec<Option<usize>>,
    index: HashMap<String, Symbol>,
}

fn parse_preorder(
    text: &str,
    mut resolve: Resolve<'_>,
    allow_hole: bool,
) -> Result<Vec<Symbol>, ParseError> {
    let mut lex = Lexer { text, pos: 0 };
    let mut out: Vec<Symbol> = Vec::new();
    // (symbol, byte offset, number of completed children)
    let mut frames: Vec<(Symbol, usize, usize)> = Vec::new();

    let rank_of = |resolve: &Resolve<'_>, s: Symbol| -> Option<usize> {
        match resolve {
            Resolve::Fixed(a) => Some(a.rank(s)),
            Resolve::Infer(st) => st.ranks[s.index()],
        }
    };

    loop {
        // Expect a term.
        let (off, tok) = lex
            .next()
            .ok_or_else(|| ParseError::new(text.len(), ParseErrorKind::UnexpectedEnd))?;
        let name = match tok {
            Token::Sym(name) => name,
            Token::Open => return Err(ParseError::new(off, ParseErrorKind::Unexpected('('))),
            Token::Close => return Err(ParseError::new(off, ParseErrorKind::Unexpected(')'))),
            Token::Comma => return Err(ParseError::new(off, ParseErrorKind::Unexpected(','))),
        };
        let sym = if name == PARAMETER {
            if !allow_hole {
                return Err(ParseError::new(off, ParseErrorKind::UnexpectedParameter));
            }
            Symbol::HOLE
        } else {
            match &mut resolve {
                Resolve::Fixed(a) => a
                    .get(name)
                    .ok_or_else(|| ParseError::new(off, ParseErrorKind::UnknownSymbol(name.into())))?,
                Resolve::Infer(st) => match st.index.get(name) {
                    Some(&s) => s,
                    None => {
                        let s = Symbol(st.names.len() as u32);
                        st.names.push(name.to_string());
                        st.ranks.push(None);
                        st.index.insert(name.to_string(), s);
                        s
                    }
                },
            }
        };
        out.push(sym);

        let save = lex.pos;
        let has_args = matches!(lex.next(), Some((_, Token::Open)));
        if has_args {
            if sym == Symbol::HOLE {
                return Err(ParseError::new(save, ParseErrorKind::Unexpected('(')));
            }
            frames.push((sym, off, 0));
            continue;
        }
        lex.pos = save;

        // A leaf was completed; close frames as far as possible.
        let mut completed = (sym, off, 0usize);
        loop {
            let (csym, coff, count) = completed;
            if csym != Symbol::HOLE {
                match rank_of(&resolve, csym) {
                    Some(r) if r != count => {
                        let symbol = match &resolve {
                            Resolve::Fixed(a) => a.name(csym).to_string(),
                            Resolve::Infer(st) => st.names[csym.index()].clone(),
                        };
                        return Err(ParseError::new(
                            coff,
                            ParseErrorKind::ArityMismatch {
                                symbol,
                                expected: r,
                                found: count,
                            },
                        ));
                    }
                    Some(_) => {}
                    None => {
                        if let Resolve::Infer(st) = &mut resolve {
                            st.ranks[csym.index()] = Some(count);
                        }
                    }
                }
            }
            let Some(frame) = frames.last_mut() else {
                return match lex.next() {
                    None => Ok(out),
                    Some((o, Token::Close)) => {
                        Err(ParseError::new(o, ParseErrorKind::UnbalancedParentheses))
                    }
                    Some((o, _)) => Err(ParseError::new(
                        o,
                        ParseErrorKind::Unexpected(text[o..].chars().next().unwrap_or(' ')),
                    )),
                };
            };
            frame.2 += 1;
            match lex.next() {
                Some((_, Token::Comma)) => break,
                Some((_, Token::Close)) => {
                    completed = frames.pop().unwrap();
                }
                Some((o, Token::Open)) => {
                    return Err(ParseError::new(o, ParseErrorKind::Unexpected('(')))
                }
                Some((o, Token::Sym(_))) => {
                    return Err(ParseError::new(
                        o,
                        ParseErrorKind::Unexpected(text[o..].chars().next().unwrap()),
                    ))
                }
                None => {
                    return Err(ParseError::new(
                        text.len(),
                        ParseErrorKind::UnbalancedParentheses,
                    ))
                }
            }
        }
    }
}

/// Parses a term whose symbols must all belong to `alphabet`.
pub fn parse_term(text: &str, alphabet: &Arc<RankedAlphabet>) -> Result<Term, ParseError> {
    let symbols = parse_preorder(text, Resolve::Fixed(alphabet), false)?;
    Ok(Term {
        alphabet: alphabet.clone(),
        symbols,
    })
}

fn finish_inferred(st: InferState) -> RankedAlphabet {
    let mut alphabet = RankedAlphabet::new();
    for (name, rank) in st.names.iter().zip(&st.ranks) {
        alphabet
            .add(name, rank.unwrap_or(0))
            .expect("names are unique and not reserved");
    }
    alphabet
}

/// Parses a term, declaring every symbol at its first occurrence with the
/// rank found there. Later occurrences must agree.
pub fn parse_term_infer(text: &str) -> Result<Term, ParseError> {
    let mut st = InferState::default();
    let symbols = parse_preorder(text, Resolve::Infer(&mut st), false)?;
    Ok(Term {
        alphabet: Arc::new(finish_inferred(st)),
        symbols,
    })
}

fn count_holes(symbols: &[Symbol]) -> usize {
    symbols.iter().filter(|&&s| s == Symbol::HOLE).count()
}

pub fn parse_context(text: &str, alphabet: &Arc<RankedAlphabet>) -> Result<Context, ParseError> {
    let symbols = parse_preorder(text, Resolve::Fixed(alphabet), true)?;
    match count_holes(&symbols) {
        1 => Ok(Context {
            alphabet: alphabet.clone(),
            symbols,
        }),
        n => Err(ParseError::new(0, ParseErrorKind::ParameterCount(n))),
    }
}

pub fn render_term(t: &Term) -> String {
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIG3: &str = "a(b(c(d,e(f,g)),h(i,j)),k(l(m(n,o),p),q(r,s(t,u))))";

    fn alpha(spec: &[(&str, usize)]) -> Arc<RankedAlphabet> {
        Arc::new(RankedAlphabet::from_symbols(spec.iter().copied()).unwrap())
    }

    #[test]
    fn constant() {
        let a = alpha(&[("a", 0)]);
        let t = parse_term("a", &a).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.render(), "a");
    }

    #[test]
    fn figure_term_roundtrip() {
        let t = parse_term_infer(FIG3).unwrap();
        assert_eq!(t.len(), 21);
        assert_eq!(t.render(), FIG3);
        assert_eq!(t.alphabet().rank(t.alphabet().get("a").unwrap()), 2);
        assert_eq!(t.alphabet().rank(t.alphabet().get("p").unwrap()), 0);
    }

    #[test]
    fn identical_leaves() {
        let a = alpha(&[("f", 2), ("a", 0)]);
        let t = parse_term(" f( a , a ) ", &a).unwrap();
        assert_eq!(t.render(), "f(a,a)");
        let kids = t.children();
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0], kids[1]);
    }

    #[test]
    fn operator_and_numeral_symbols() {
        let t = parse_term_infer("+(1,·(2,3))").unwrap();
        assert_eq!(t.render(), "+(1,·(2,3))");
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn errors_carry_offsets() {
        let a = alpha(&[("f", 2), ("a", 0)]);
        let e = parse_term("f(a,b)", &a).unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(matches!(e.kind, ParseErrorKind::UnknownSymbol(_)));

        let e = parse_term("f(a)", &a).unwrap_err();
        assert_eq!(e.offset, 0);
        assert!(matches!(
            e.kind,
            ParseErrorKind::ArityMismatch { expected: 2, found: 1, .. }
        ));

        let e = parse_term("f(a,a", &a).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnbalancedParentheses);
        assert_eq!(e.offset, 5);

        let e = parse_term("f(a,a))", &a).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnbalancedParentheses);
        assert_eq!(e.offset, 6);

        let e = parse_term("", &a).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
    }

    #[test]
    fn inconsistent_reuse_is_rejected() {
        let e = parse_term_infer("f(f(a,a))").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ArityMismatch { .. }));
        let e = parse_term_infer("g(a(b),a)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ArityMismatch { .. }));
    }

    #[test]
    fn parameter_is_reserved() {
        assert_eq!(
            RankedAlphabet::new().add("x", 0),
            Err(AlphabetError::ReservedParameter)
        );
        let e = parse_term_infer("f(x)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedParameter);
    }

    #[test]
    fn contexts() {
        let a = alpha(&[("f", 2), ("g", 1), ("a", 0), ("b", 0)]);
        let s = parse_context("f(x,b)", &a).unwrap();
        let t = parse_term("g(a)", &a).unwrap();
        assert_eq!(s.apply(&t).render(), "f(g(a),b)");
        let s2 = parse_context("g(x)", &a).unwrap();
        assert_eq!(s.compose(&s2).to_string(), "f(g(x),b)");
        assert!(parse_context("f(a,b)", &a).is_err());
        assert!(parse_context("f(x,x)", &a).is_err());
        assert_eq!(Context::identity(a.clone()).apply(&t), t);
    }

    #[test]
    fn deep_caterpillar_is_not_recursive() {
        let n = 200_000;
        let mut text = String::new();
        for _ in 0..n {
            text.push_str("g(");
        }
        text.push('a');
        for _ in 0..n {
            text.push(')');
        }
        let t = parse_term_infer(&text).unwrap();
        assert_eq!(t.len(), n + 1);
        assert_eq!(t.depth(), n);
        assert_eq!(t.render(), text);
    }
}
