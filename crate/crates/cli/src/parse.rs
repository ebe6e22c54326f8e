//! Surface syntax for algebra elements.
//!
//! ```text
//! expr   := ('+'|'-')? term (('+'|'-') term)*
//! term   := factor+
//! factor := scalar | atom ('^' nat)? | '(' expr ')' ('^' nat)?
//! atom   := IDENT | "d(" expr ")"
//! scalar := RATIONAL | 'q' ('^' INT)?
//! ```
//!
//! Juxtaposition is multiplication and `q` is the root of the calculus.
//! In rule files the wildcard `f` and its derivatives `f'`, `f''`, `f_x`,
//! `f_x_y` are also accepted.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use qdiff::differential::DifferentialStructure;
use qdiff::galgebra::{Atom, Element, GenId, Monomial, PatternAtom, TemplateAtom, Word};
use qdiff::{CycNum, RootExponent, Signature};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(BigRational),
    Plus,
    Minus,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(n) => write!(f, "`{n}`"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

/// Syntax error with a 1-based column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub column: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at column {}: expected {}, found {}",
            self.column,
            self.expected.join(" or "),
            self.found
        )
    }
}

impl std::error::Error for ParseError {}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn tokenize(input: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let num: BigInt = chars[start..i].iter().collect::<String>().parse().expect("digits");
                let mut value = BigRational::from_integer(num);
                if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                    let s = i + 1;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let den: BigInt = chars[s..i].iter().collect::<String>().parse().expect("digits");
                    if den.is_zero() {
                        return Err(ParseError {
                            column: s + 1,
                            expected: vec!["nonzero denominator"],
                            found: "`0`".into(),
                        });
                    }
                    value /= BigRational::from_integer(den);
                }
                out.push((start, Tok::Number(value)));
                continue;
            }
            c if is_ident_start(c) => {
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            other => {
                return Err(ParseError {
                    column: start + 1,
                    expected: vec!["expression"],
                    found: format!("`{other}`"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((chars.len(), Tok::End));
    Ok(out)
}

/// Parsed expression; positions are 1-based columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Sum(Vec<Expr>),
    Neg(Box<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, u32),
    Rational(BigRational),
    /// `q^k`.
    Root(i64),
    Symbol { name: String, column: usize },
    D(Box<Expr>),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn peek2(&self) -> &Tok {
        self.toks.get(self.at + 1).map(|t| &t.1).unwrap_or(&Tok::End)
    }

    fn column(&self) -> usize {
        self.toks[self.at].0 + 1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError {
            column: self.column(),
            expected,
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(vec![name]))
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Number(_) | Tok::LParen)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = Vec::new();
        let negate = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let first = self.term()?;
        terms.push(if negate { Expr::Neg(Box::new(first)) } else { first });
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        if !self.starts_factor() {
            return Err(self.error(vec!["number", "identifier", "'('"]));
        }
        let mut factors = Vec::new();
        while self.starts_factor() {
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    fn nat(&mut self) -> Result<u32, ParseError> {
        match self.peek().clone() {
            Tok::Number(n) if n.is_integer() => {
                let v = n.to_integer().try_into().map_err(|_| self.error(vec!["small exponent"]))?;
                self.bump();
                Ok(v)
            }
            _ => Err(self.error(vec!["natural number"])),
        }
    }

    fn power(&mut self, base: Expr) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Caret {
            self.bump();
            let e = self.nat()?;
            Ok(Expr::Power(Box::new(base), e))
        } else {
            Ok(base)
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let column = self.column();
        match self.bump() {
            Tok::Number(n) => Ok(Expr::Rational(n)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                self.power(inner)
            }
            Tok::Ident(name) if name == "q" => {
                if *self.peek() != Tok::Caret {
                    return Ok(Expr::Root(1));
                }
                self.bump();
                let negative = *self.peek() == Tok::Minus;
                if negative {
                    self.bump();
                }
                let e = self.nat()? as i64;
                Ok(Expr::Root(if negative { -e } else { e }))
            }
            Tok::Ident(name) if name == "d" && *self.peek() == Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                self.power(Expr::D(Box::new(inner)))
            }
            Tok::Ident(name) => self.power(Expr::Symbol { name, column }),
            _ => {
                self.at -= 1;
                Err(self.error(vec!["number", "identifier", "'('"]))
            }
        }
    }
}

pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: tokenize(input)?,
        at: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        let mut expected = vec!["'+'", "'-'"];
        if matches!(p.peek(), Tok::RParen) {
            expected = vec!["end of input"];
        }
        return Err(p.error(expected));
    }
    let _ = p.peek2();
    Ok(e)
}

/// Splits `lhs -> rhs`, keeping the column offset of `rhs`.
pub fn split_arrow(input: &str) -> Option<(&str, &str, usize)> {
    let i = input.find("->")?;
    Some((&input[..i], &input[i + 2..], i + 2))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Piece {
    Gen(GenId),
    Var(GenId),
    Wild(Vec<GenId>),
}

type LinComb = Vec<(CycNum, Vec<Piece>)>;

/// Resolves symbols of a calculus for evaluation.
pub struct Scope<'a> {
    pub signature: &'a Signature,
    pub root: RootExponent,
    pub differential: Option<&'a DifferentialStructure>,
    pub wildcards: bool,
}

impl Scope<'_> {
    fn n(&self) -> u32 {
        self.root.modulus()
    }

    fn symbol(&self, name: &str, column: usize) -> Result<Piece, CliError> {
        if let Some(g) = self.signature.id(name) {
            return Ok(if self.signature.get(g).is_variable() {
                Piece::Var(g)
            } else {
                Piece::Gen(g)
            });
        }
        if self.wildcards {
            if let Some(w) = self.wildcard(name) {
                return Ok(Piece::Wild(w));
            }
        }
        Err(CliError::UnknownSymbol {
            name: name.to_string(),
            column,
        })
    }

    fn wildcard(&self, name: &str) -> Option<Vec<GenId>> {
        let rest = name.strip_prefix('f')?;
        if rest.is_empty() {
            return Some(vec![]);
        }
        if rest.chars().all(|c| c == '\'') {
            let vars: Vec<GenId> = self.signature.variables().collect();
            return match vars.as_slice() {
                [v] => Some(vec![*v; rest.len()]),
                _ => None,
            };
        }
        let coords = rest.strip_prefix('_')?;
        let mut out = Vec::new();
        for c in coords.split('_') {
            let g = self.signature.id(c)?;
            if !self.signature.get(g).is_variable() {
                return None;
            }
            out.push(g);
        }
        out.sort_unstable();
        Some(out)
    }

    fn eval(&self, e: &Expr) -> Result<LinComb, CliError> {
        let n = self.n();
        Ok(match e {
            Expr::Sum(terms) => {
                let mut out = Vec::new();
                for t in terms {
                    out.extend(self.eval(t)?);
                }
                out
            }
            Expr::Neg(inner) => self.eval(inner)?.into_iter().map(|(c, w)| (-&c, w)).collect(),
            Expr::Product(fs) => {
                let mut acc: LinComb = vec![(CycNum::one(n), vec![])];
                for f in fs {
                    acc = mul(&acc, &self.eval(f)?);
                }
                acc
            }
            Expr::Power(base, k) => {
                let b = self.eval(base)?;
                let mut acc: LinComb = vec![(CycNum::one(n), vec![])];
                for _ in 0..*k {
                    acc = mul(&acc, &b);
                }
                acc
            }
            Expr::Rational(r) => vec![(CycNum::from_rational(n, r.clone()), vec![])],
            Expr::Root(k) => vec![(self.root.pow_cyc(*k), vec![])],
            Expr::Symbol { name, column } => vec![(CycNum::one(n), vec![self.symbol(name, *column)?])],
            Expr::D(inner) => {
                let ds = self.differential.ok_or_else(|| CliError::Usage("d(...) is not allowed here".into()))?;
                let e = to_element(&self.eval(inner)?, n)?;
                from_element(&ds.apply_d(&e)?)
            }
        })
    }
}

fn mul(a: &LinComb, b: &LinComb) -> LinComb {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, wa) in a {
        for (cb, wb) in b {
            let mut w = wa.clone();
            w.extend(wb.iter().cloned());
            out.push((ca * cb, w));
        }
    }
    out
}

fn to_element(l: &LinComb, n: u32) -> Result<Element, CliError> {
    let mut e = Element::zero(n);
    for (c, pieces) in l {
        let mut atoms = Vec::with_capacity(pieces.len());
        for p in pieces {
            atoms.push(match p {
                Piece::Gen(g) => Atom::Gen(*g),
                Piece::Var(v) => Atom::Func(Monomial::var(*v)),
                Piece::Wild(_) => return Err(CliError::Usage("wildcards are only allowed in rules".into())),
            });
        }
        e.add_term(Word::new(atoms).merged(), c.clone());
    }
    Ok(e)
}

fn from_element(e: &Element) -> LinComb {
    e.terms()
        .iter()
        .map(|(w, c)| {
            let mut pieces = Vec::new();
            for a in w.atoms() {
                match a {
                    Atom::Gen(g) => pieces.push(Piece::Gen(*g)),
                    Atom::Func(m) => {
                        for &(v, k) in m.pairs() {
                            pieces.extend(std::iter::repeat_n(Piece::Var(v), k as usize));
                        }
                    }
                }
            }
            (c.clone(), pieces)
        })
        .collect()
}

/// Parses and evaluates `input`, without normalizing.
pub fn eval_raw(input: &str, scope: &Scope) -> Result<Element, CliError> {
    let expr = parse(input)?;
    to_element(&scope.eval(&expr)?, scope.n())
}

/// Parses, evaluates and normalizes `input` in a calculus.
pub fn parse_element(input: &str, ds: &DifferentialStructure) -> Result<Element, CliError> {
    let scope = Scope {
        signature: ds.signature(),
        root: ds.q(),
        differential: Some(ds),
        wildcards: false,
    };
    Ok(ds.normalize(&eval_raw(input, &scope)?)?)
}

/// A rule pattern: a single product of non-variable generators and at
/// most one `f`, with coefficient 1.
pub fn parse_pattern(input: &str, scope: &Scope) -> Result<Vec<PatternAtom>, CliError> {
    let l = scope.eval(&parse(input)?)?;
    let bad = || CliError::Usage(format!("rule pattern `{}` must be a single word", input.trim()));
    let [(c, pieces)] = l.as_slice() else {
        return Err(bad());
    };
    if !c.is_one() {
        return Err(bad());
    }
    pieces
        .iter()
        .map(|p| match p {
            Piece::Gen(g) => Ok(PatternAtom::Gen(*g)),
            Piece::Wild(d) if d.is_empty() => Ok(PatternAtom::Wild),
            _ => Err(bad()),
        })
        .collect()
}

/// The right-hand side of a rule; `0` gives an empty list.
pub fn parse_template(input: &str, scope: &Scope) -> Result<Vec<(CycNum, Vec<TemplateAtom>)>, CliError> {
    let l = scope.eval(&parse(input)?)?;
    Ok(l.into_iter()
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, pieces)| {
            let atoms = pieces
                .into_iter()
                .map(|p| match p {
                    Piece::Gen(g) => TemplateAtom::Gen(g),
                    Piece::Var(v) => TemplateAtom::Func(Monomial::var(v)),
                    Piece::Wild(d) => TemplateAtom::Wild(d),
                })
                .collect();
            (c, atoms)
        })
        .collect())
}

/// `n/d` with `d = 1` printed explicitly.
pub fn rational_string(r: &BigRational) -> String {
    let d = if r.denom().is_one() { BigInt::one() } else { r.denom().clone() };
    format!("{}/{}", r.numer(), d)
}
