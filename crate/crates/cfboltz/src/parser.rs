//! The specification language.
//!
//! ```text
//! spec   := eq+
//! eq     := SYMBOL "=" term ("+" term)* ";"
//! term   := [coef "*"?] factor ("*"? factor)*
//! factor := ("z" | SYMBOL) ["^" INT]
//! coef   := INT | INT "/" INT | DECIMAL
//! ```
//!
//! Symbols start with an uppercase letter; `z` is reserved. Whitespace and `#` comments
//! are ignored. The left-hand side of the first equation is the target class.

use std::collections::HashMap;
use std::fmt;

use cfboltz_core::{CombinatorialSpec, Monomial};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {at}: {msg}")]
    Syntax { at: Location, msg: String },

    #[error("unknown symbol `{name}` at {at}")]
    UnknownSymbol { name: String, at: Location },

    #[error("non-positive coefficient at {at}")]
    NonPositiveCoefficient { at: Location },

    #[error(transparent)]
    Spec(#[from] cfboltz_core::Error),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Symbol(String),
    Z,
    Int(BigInt),
    Decimal(BigRational),
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Semi,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Symbol(s) => write!(f, "symbol `{s}`"),
            Tok::Z => write!(f, "`z`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Decimal(_) => write!(f, "decimal"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::Semi => write!(f, "`;`"),
        }
    }
}

fn syntax(at: Location, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { at, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Location)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let at = Location { line, col };
        let start = i;
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '=' => out.push((Tok::Eq, at)),
            '+' => out.push((Tok::Plus, at)),
            '-' => out.push((Tok::Minus, at)),
            '*' => out.push((Tok::Star, at)),
            '/' => out.push((Tok::Slash, at)),
            '^' => out.push((Tok::Caret, at)),
            ';' => out.push((Tok::Semi, at)),
            c if c.is_ascii_digit() => {
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let int: String = chars[start..=i].iter().collect();
                if chars.get(i + 1) == Some(&'.') {
                    let mut j = i + 1;
                    while j + 1 < chars.len() && chars[j + 1].is_ascii_digit() {
                        j += 1;
                    }
                    if j == i + 1 {
                        return Err(syntax(at, "expected digits after the decimal point"));
                    }
                    let frac: String = chars[i + 2..=j].iter().collect();
                    let num: BigInt = format!("{int}{frac}").parse().unwrap();
                    let den = BigInt::from(10).pow(frac.len() as u32);
                    out.push((Tok::Decimal(BigRational::new(num, den)), at));
                    i = j;
                } else {
                    out.push((Tok::Int(int.parse().unwrap()), at));
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                while i + 1 < chars.len() && (chars[i + 1].is_alphanumeric() || chars[i + 1] == '_') {
                    i += 1;
                }
                let word: String = chars[start..=i].iter().collect();
                if word == "z" {
                    out.push((Tok::Z, at));
                } else if c.is_uppercase() {
                    out.push((Tok::Symbol(word), at));
                } else {
                    return Err(syntax(at, format!("`{word}`: symbols must start with an uppercase letter")));
                }
            }
            c => return Err(syntax(at, format!("unexpected character `{c}`"))),
        }
        col += i - start + 1;
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Location)>,
    pos: usize,
    end: Location,
}

/// A term before symbol resolution: coefficient, `z` power, symbol powers.
type RawTerm = (BigRational, u32, Vec<(String, u32, Location)>);

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn loc(&self) -> Location {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    fn unexpected(&self, want: &str) -> ParseError {
        match self.peek() {
            Some(t) => syntax(self.loc(), format!("expected {want}, found {t}")),
            None => syntax(self.loc(), format!("expected {want}, found end of input")),
        }
    }

    fn expect(&mut self, t: Tok, want: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(want))
        }
    }

    fn equation(&mut self) -> Result<(String, Location, Vec<RawTerm>), ParseError> {
        let at = self.loc();
        let name = match self.peek() {
            Some(Tok::Symbol(s)) => s.clone(),
            _ => return Err(self.unexpected("a symbol")),
        };
        self.pos += 1;
        self.expect(Tok::Eq, "`=`")?;
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Semi) => {
                    self.pos += 1;
                    return Ok((name, at, terms));
                }
                _ => return Err(self.unexpected("`+` or `;`")),
            }
        }
    }

    fn coefficient(&mut self) -> Result<Option<BigRational>, ParseError> {
        let at = self.loc();
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let value = match self.peek().cloned() {
            Some(Tok::Int(p)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    let q = match self.peek().cloned() {
                        Some(Tok::Int(q)) => q,
                        _ => return Err(self.unexpected("an integer denominator")),
                    };
                    if q.is_zero() {
                        return Err(syntax(self.loc(), "zero denominator"));
                    }
                    self.pos += 1;
                    BigRational::new(p, q)
                } else {
                    BigRational::from_integer(p)
                }
            }
            Some(Tok::Decimal(d)) => {
                self.pos += 1;
                d
            }
            _ if negative => return Err(self.unexpected("a number")),
            _ => return Ok(None),
        };
        if negative || !value.is_positive() {
            return Err(ParseError::NonPositiveCoefficient { at });
        }
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
        }
        Ok(Some(value))
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        if self.peek() != Some(&Tok::Caret) {
            return Ok(1);
        }
        self.pos += 1;
        match self.peek().cloned() {
            Some(Tok::Int(e)) => {
                let at = self.loc();
                self.pos += 1;
                u32::try_from(e).map_err(|_| syntax(at, "exponent too large"))
            }
            _ => Err(self.unexpected("an integer exponent")),
        }
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let coeff = self.coefficient()?.unwrap_or_else(|| BigRational::from_integer(1.into()));
        let mut h = 0u32;
        let mut syms = Vec::new();
        let mut first = true;
        loop {
            if !first && self.peek() == Some(&Tok::Star) {
                self.pos += 1;
                if !matches!(self.peek(), Some(Tok::Z) | Some(Tok::Symbol(_))) {
                    return Err(self.unexpected("`z` or a symbol"));
                }
            }
            let at = self.loc();
            match self.peek().cloned() {
                Some(Tok::Z) => {
                    self.pos += 1;
                    h = h.checked_add(self.exponent()?).ok_or_else(|| syntax(at, "exponent too large"))?;
                }
                Some(Tok::Symbol(s)) => {
                    self.pos += 1;
                    let e = self.exponent()?;
                    syms.push((s, e, at));
                }
                _ if first => return Err(self.unexpected("`z` or a symbol")),
                _ => return Ok((coeff, h, syms)),
            }
            first = false;
        }
    }
}

/// Parses a specification; like terms are merged and terms sorted canonically.
pub fn parse_spec(text: &str) -> Result<CombinatorialSpec, ParseError> {
    let toks = lex(text)?;
    let end = {
        let line = text.lines().count().max(1);
        let col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
        Location { line, col }
    };
    let mut p = Parser { toks, pos: 0, end };
    let mut eqs = Vec::new();
    while p.peek().is_some() {
        eqs.push(p.equation()?);
    }
    if eqs.is_empty() {
        return Err(syntax(p.loc(), "empty specification"));
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, (name, at, _)) in eqs.iter().enumerate() {
        if index.insert(name.clone(), i).is_some() {
            return Err(syntax(*at, format!("`{name}` is defined twice")));
        }
    }
    let m = eqs.len();
    let mut productions = Vec::with_capacity(m);
    for (_, _, terms) in &eqs {
        let mut prod = Vec::with_capacity(terms.len());
        for (coeff, h, syms) in terms {
            let mut k = vec![0u32; m];
            for (s, e, at) in syms {
                let b = *index.get(s).ok_or_else(|| ParseError::UnknownSymbol { name: s.clone(), at: *at })?;
                k[b] = k[b].checked_add(*e).ok_or_else(|| syntax(*at, "exponent too large"))?;
            }
            prod.push(Monomial::new(coeff.clone(), *h, k));
        }
        productions.push(prod);
    }
    let symbols = eqs.into_iter().map(|e| e.0).collect();
    Ok(CombinatorialSpec::new(symbols, productions)?)
}
