//! Regular expressions as plain trees, with a word-membership matcher that
//! shares nothing with the derivative-based equivalence check.

use std::rc::Rc;

use treebal::regex::{syntax, KleeneOps, RegexSym};
use treebal::term::Term;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Re {
    Empty,
    Epsilon,
    Letter(char),
    Union(Rc<Re>, Rc<Re>),
    Concat(Rc<Re>, Rc<Re>),
    Star(Rc<Re>),
}

/// Builds expressions verbatim, without simplification.
pub struct Plain;

impl KleeneOps for Plain {
    type E = Rc<Re>;
    fn empty(&mut self) -> Rc<Re> {
        Rc::new(Re::Empty)
    }
    fn epsilon(&mut self) -> Rc<Re> {
        Rc::new(Re::Epsilon)
    }
    fn union(&mut self, x: &Rc<Re>, y: &Rc<Re>) -> Rc<Re> {
        Rc::new(Re::Union(x.clone(), y.clone()))
    }
    fn concat(&mut self, x: &Rc<Re>, y: &Rc<Re>) -> Rc<Re> {
        Rc::new(Re::Concat(x.clone(), y.clone()))
    }
    fn star(&mut self, x: &Rc<Re>) -> Rc<Re> {
        Rc::new(Re::Star(x.clone()))
    }
}

pub fn letter(c: char) -> Rc<Re> {
    Rc::new(Re::Letter(c))
}

/// Parenthesized text accepted by the regex parser.
pub fn render(r: &Re) -> String {
    match r {
        Re::Empty => "0".into(),
        Re::Epsilon => "1".into(),
        Re::Letter(c) => c.to_string(),
        Re::Union(x, y) => format!("({}+{})", render(x), render(y)),
        Re::Concat(x, y) => format!("({}.{})", render(x), render(y)),
        Re::Star(x) => format!("({})*", render(x)),
    }
}

pub fn from_term(t: &Term) -> Rc<Re> {
    let alphabet = t.alphabet();
    let mut stack: Vec<Rc<Re>> = Vec::new();
    for &s in t.symbols().iter().rev() {
        let name = alphabet.name(s);
        let node = match syntax::classify(name, alphabet.rank(s)).expect("regex term") {
            RegexSym::Empty => Re::Empty,
            RegexSym::Epsilon => Re::Epsilon,
            RegexSym::Letter => Re::Letter(name.chars().next().unwrap()),
            RegexSym::Union => {
                let x = stack.pop().unwrap();
                Re::Union(x, stack.pop().unwrap())
            }
            RegexSym::Concat => {
                let x = stack.pop().unwrap();
                Re::Concat(x, stack.pop().unwrap())
            }
            RegexSym::Star => Re::Star(stack.pop().unwrap()),
        };
        stack.push(Rc::new(node));
    }
    stack.pop().unwrap()
}

/// End positions reachable from the start positions in `from`.
fn ends(r: &Re, word: &[char], from: u32) -> u32 {
    match r {
        Re::Empty => 0,
        Re::Epsilon => from,
        Re::Letter(c) => {
            let mut out = 0;
            for (i, &w) in word.iter().enumerate() {
                if from & (1 << i) != 0 && w == *c {
                    out |= 1 << (i + 1);
                }
            }
            out
        }
        Re::Union(x, y) => ends(x, word, from) | ends(y, word, from),
        Re::Concat(x, y) => {
            let mid = ends(x, word, from);
            if mid == 0 {
                0
            } else {
                ends(y, word, mid)
            }
        }
        Re::Star(x) => {
            let mut reach = from;
            loop {
                let next = reach | ends(x, word, reach);
                if next == reach {
                    return reach;
                }
                reach = next;
            }
        }
    }
}

pub fn matches(r: &Re, word: &[char]) -> bool {
    assert!(word.len() < 31);
    ends(r, word, 1) & (1 << word.len()) != 0
}

/// All words over `letters` of length at most `max_len`.
pub fn words(letters: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &c in letters {
                let mut v: Vec<char> = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// First word up to `max_len` on which the two expressions disagree.
pub fn first_difference(x: &Re, y: &Re, letters: &[char], max_len: usize) -> Option<String> {
    words(letters, max_len)
        .into_iter()
        .find(|w| matches(x, w) != matches(y, w))
        .map(|w| w.into_iter().collect())
}
