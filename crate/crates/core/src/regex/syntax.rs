//! Regular expressions as terms over `0`, `1`, letters, `+`, `.` and `*`.

use std::sync::Arc;

use thiserror::Error;

use crate::term::{RankedAlphabet, Symbol, Term};

pub const EMPTY: &str = "0";
pub const EPSILON: &str = "1";
pub const UNION: &str = "+";
pub const CONCAT: &str = ".";
pub const STAR: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegexSym {
    Empty,
    Epsilon,
    Letter,
    Union,
    Concat,
    Star,
}

/// Role of `name` at `rank`, if it belongs to the regex signature.
pub fn classify(name: &str, rank: usize) -> Option<RegexSym> {
    match (name, rank) {
        (EMPTY, 0) => Some(RegexSym::Empty),
        (EPSILON, 0) => Some(RegexSym::Epsilon),
        (UNION, 2) => Some(RegexSym::Union),
        (CONCAT, 2) => Some(RegexSym::Concat),
        (STAR, 1) => Some(RegexSym::Star),
        (EMPTY | EPSILON | UNION | CONCAT | STAR, _) => None,
        (_, 0) => Some(RegexSym::Letter),
        _ => None,
    }
}

/// Roles of all symbols of `alphabet`, or the first offending name.
pub fn roles(alphabet: &RankedAlphabet) -> Result<Vec<RegexSym>, String> {
    alphabet
        .symbols()
        .map(|(_, name, rank)| classify(name, rank).ok_or_else(|| format!("{name}/{rank}")))
        .collect()
}

/// The operators, then `letters` as constants.
pub fn regex_alphabet(letters: impl IntoIterator<Item = char>) -> RankedAlphabet {
    let mut a = RankedAlphabet::from_symbols([
        (EMPTY, 0),
        (EPSILON, 0),
        (UNION, 2),
        (CONCAT, 2),
        (STAR, 1),
    ])
    .expect("static alphabet");
    for c in letters {
        a.intern(&c.to_string(), 0).expect("letters are valid names");
    }
    a
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("regex syntax error at offset {offset}: {message}")]
pub struct RegexParseError {
    pub offset: usize,
    pub message: String,
}

fn is_letter(c: char) -> bool {
    !c.is_whitespace() && !"()+.*01".contains(c) && c != 'x'
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
    alphabet: RankedAlphabet,
}

impl Parser<'_> {
    fn peek(&mut self) -> Option<char> {
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            if c.is_whitespace() {
                self.pos += 1;
            } else {
                return Some(c);
            }
        }
        None
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.text.len(), |&(o, _)| o)
    }

    fn error(&self, message: impl Into<String>) -> RegexParseError {
        RegexParseError {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn sym(&mut self, name: &str, rank: usize) -> Symbol {
        self.alphabet.intern(name, rank).expect("valid regex symbol")
    }

    fn binary(&mut self, name: &str, left: Vec<Symbol>, right: Vec<Symbol>) -> Vec<Symbol> {
        let mut v = Vec::with_capacity(left.len() + right.len() + 1);
        v.push(self.sym(name, 2));
        v.extend(left);
        v.extend(right);
        v
    }

    // union := concat ('+' concat)*, left associative
    fn union(&mut self) -> Result<Vec<Symbol>, RegexParseError> {
        let mut left = self.concat()?;
        while self.peek() == Some('+') {
            self.pos += 1;
            let right = self.concat()?;
            left = self.binary(UNION, left, right);
        }
        Ok(left)
    }

    // concat := star ('.'? star)*, left associative
    fn concat(&mut self) -> Result<Vec<Symbol>, RegexParseError> {
        let mut left = self.star()?;
        loop {
            match self.peek() {
                Some('.') => {
                    self.pos += 1;
                }
                Some(c) if c == '(' || c == '0' || c == '1' || is_letter(c) => {}
                _ => return Ok(left),
            }
            let right = self.star()?;
            left = self.binary(CONCAT, left, right);
        }
    }

    fn star(&mut self) -> Result<Vec<Symbol>, RegexParseError> {
        let mut inner = self.atom()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            inner.insert(0, self.sym(STAR, 1));
        }
        Ok(inner)
    }

    fn atom(&mut self) -> Result<Vec<Symbol>, RegexParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.union()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('0') => {
                self.pos += 1;
                Ok(vec![self.sym(EMPTY, 0)])
            }
            Some('1') => {
                self.pos += 1;
                Ok(vec![self.sym(EPSILON, 0)])
            }
            Some(c) if is_letter(c) => {
                self.pos += 1;
                Ok(vec![self.sym(&c.to_string(), 0)])
            }
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parses `0 | 1 | letter | r+r | r.r | rr | r* | (r)`; `*` binds tightest,
/// then concatenation, then `+`. Letters are single characters; `x` is
/// reserved.
pub fn parse_regex(text: &str) -> Result<Term, RegexParseError> {
    let mut p = Parser {
        chars: text.char_indices().collect(),
        pos: 0,
        text,
        alphabet: regex_alphabet([]),
    };
    let symbols = p.union()?;
    if p.peek().is_some() {
        return Err(p.error("trailing input"));
    }
    Ok(Term::from_preorder(Arc::new(p.alphabet), symbols).expect("parser emits terms"))
}

/// Text form with the fewest parentheses the precedences allow.
pub fn render_regex(t: &Term) -> String {
    let alphabet = t.alphabet();
    let syms = t.symbols();
    // precedence of each subterm: 0 union, 1 concat, 2 star or atom
    let mut stack: Vec<(String, u8)> = Vec::new();
    for &s in syms.iter().rev() {
        let name = alphabet.name(s);
        let rank = alphabet.rank(s);
        let item = match classify(name, rank) {
            Some(RegexSym::Union) => {
                let l = stack.pop().expect("left");
                let r = stack.pop().expect("right");
                // `+` is left associative: a union on the right needs parens
                (format!("{}+{}", l.0, wrap(r, 1)), 0)
            }
            Some(RegexSym::Concat) => {
                let l = stack.pop().expect("left");
                let r = stack.pop().expect("right");
                (format!("{}{}", wrap(l, 1), wrap(r, 2)), 1)
            }
            Some(RegexSym::Star) => {
                let inner = stack.pop().expect("operand");
                (format!("{}*", wrap(inner, 2)), 2)
            }
            _ => (name.to_string(), 3),
        };
        stack.push(item);
    }
    stack.pop().expect("nonempty").0
}

fn wrap((text, prec): (String, u8), min: u8) -> String {
    if prec >= min {
        text
    } else {
        format!("({text})")
    }
}

/// Largest number of nested stars.
pub fn star_height(t: &Term) -> usize {
    let alphabet = t.alphabet();
    let mut stack: Vec<usize> = Vec::new();
    for &s in t.symbols().iter().rev() {
        let rank = alphabet.rank(s);
        let below = (0..rank).map(|_| stack.pop().expect("child")).max().unwrap_or(0);
        let own = usize::from(classify(alphabet.name(s), rank) == Some(RegexSym::Star));
        stack.push(below + own);
    }
    stack.pop().expect("nonempty")
}
