//! Regular expressions over edge labels.
//!
//! Grammar (star binds tighter than concatenation, which binds tighter
//! than union):
//!
//! ```text
//! expr   := term ("|" term)*
//! term   := factor+
//! factor := base "*"?
//! base   := LABEL | "." | "@" | "{}" | "(" expr ")"
//! ```
//!
//! A bare label is a letter followed by optional digits, so `abc` is the
//! concatenation `a b c` and `a1b2` is `a1 b2`. Labels with several letters
//! or other characters are quoted: `'knows'`. `.` is any single symbol, `@`
//! the empty word and `{}` the empty language; `.*` is therefore Σ*.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Label;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    Empty,
    Epsilon,
    Symbol(Label),
    Any,
    Union(Box<Regex>, Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    pub fn symbol(label: &str) -> Regex {
        Regex::Symbol(Label::new(label))
    }

    pub fn union(l: Regex, r: Regex) -> Regex {
        Regex::Union(Box::new(l), Box::new(r))
    }

    pub fn concat(l: Regex, r: Regex) -> Regex {
        Regex::Concat(Box::new(l), Box::new(r))
    }

    pub fn star(inner: Regex) -> Regex {
        Regex::Star(Box::new(inner))
    }

    /// Labels mentioned explicitly.
    pub fn symbols(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Label>) {
        match self {
            Regex::Symbol(l) => {
                out.insert(l.clone());
            }
            Regex::Union(l, r) | Regex::Concat(l, r) => {
                l.collect_symbols(out);
                r.collect_symbols(out);
            }
            Regex::Star(inner) => inner.collect_symbols(out),
            Regex::Empty | Regex::Epsilon | Regex::Any => {}
        }
    }

    pub fn uses_any(&self) -> bool {
        match self {
            Regex::Any => true,
            Regex::Union(l, r) | Regex::Concat(l, r) => l.uses_any() || r.uses_any(),
            Regex::Star(inner) => inner.uses_any(),
            _ => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Regex::Union(..) => 0,
            Regex::Concat(..) => 1,
            Regex::Star(..) => 2,
            _ => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Regex::Empty => f.write_str("{}"),
            Regex::Epsilon => f.write_str("@"),
            Regex::Any => f.write_str("."),
            Regex::Symbol(l) => {
                if is_bare_label(l.as_str()) {
                    f.write_str(l.as_str())
                } else {
                    write!(f, "'{}'", l)
                }
            }
            Regex::Union(l, r) => {
                l.fmt_at(f, 0)?;
                f.write_str(" | ")?;
                r.fmt_at(f, 1)
            }
            Regex::Concat(l, r) => {
                l.fmt_at(f, 1)?;
                f.write_str(" ")?;
                r.fmt_at(f, 2)
            }
            Regex::Star(inner) => {
                inner.fmt_at(f, 3)?;
                f.write_str("*")
            }
        }
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

fn is_bare_label(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic()) && chars.all(|c| c.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Label(String),
    Any,
    Epsilon,
    Empty,
    Pipe,
    Star,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '|' => out.push((start, Token::Pipe)),
            '*' => out.push((start, Token::Star)),
            '(' => out.push((start, Token::Open)),
            ')' => out.push((start, Token::Close)),
            '.' => out.push((start, Token::Any)),
            '@' => out.push((start, Token::Epsilon)),
            '{' => {
                if chars.get(i + 1) != Some(&'}') {
                    return Err(syntax(start, "expected `}` after `{`"));
                }
                i += 1;
                out.push((start, Token::Empty));
            }
            '\'' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '\'' {
                    j += 1;
                }
                if j >= chars.len() {
                    return Err(syntax(start, "unterminated quoted label"));
                }
                if j == i + 1 {
                    return Err(syntax(start, "empty quoted label"));
                }
                out.push((start, Token::Label(chars[i + 1..j].iter().collect())));
                i = j;
            }
            c if c.is_alphabetic() => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                out.push((start, Token::Label(chars[i..j].iter().collect())));
                i = j;
                continue;
            }
            other => return Err(syntax(start, &format!("unexpected character `{other}`"))),
        }
        i += 1;
    }
    Ok(out)
}

fn syntax(position: usize, message: &str) -> Error {
    Error::RegexSyntax {
        position,
        message: message.to_string(),
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn expr(&mut self) -> Result<Regex> {
        let mut acc = self.term()?;
        while self.peek() == Some(&Token::Pipe) {
            self.pos += 1;
            let rhs = self.term()?;
            acc = Regex::union(acc, rhs);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Regex> {
        let mut acc = self.factor()?;
        while matches!(
            self.peek(),
            Some(Token::Label(_) | Token::Any | Token::Epsilon | Token::Empty | Token::Open)
        ) {
            let rhs = self.factor()?;
            acc = Regex::concat(acc, rhs);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Regex> {
        let mut base = self.base()?;
        // `a**` is accepted and collapses to `a*`.
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            if !matches!(base, Regex::Star(_)) {
                base = Regex::star(base);
            }
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Regex> {
        let at = self.offset();
        let tok = self.peek().cloned();
        self.pos += 1;
        match tok {
            Some(Token::Label(l)) => Ok(Regex::Symbol(Label::new(l))),
            Some(Token::Any) => Ok(Regex::Any),
            Some(Token::Epsilon) => Ok(Regex::Epsilon),
            Some(Token::Empty) => Ok(Regex::Empty),
            Some(Token::Open) => {
                let inner = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(syntax(self.offset(), "expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Token::Star) => Err(syntax(at, "`*` must follow an operand")),
            Some(Token::Pipe) => Err(syntax(at, "`|` must separate two alternatives")),
            Some(Token::Close) => Err(syntax(at, "unbalanced `)`")),
            None => Err(syntax(at, "unexpected end of expression")),
        }
    }
}

/// Parses a query-atom expression.
pub fn parse_regex(text: &str) -> Result<Regex> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.chars().count(),
    };
    let ast = parser.expr()?;
    if parser.pos < parser.tokens.len() {
        return Err(syntax(parser.offset(), "unexpected trailing input"));
    }
    Ok(ast)
}
