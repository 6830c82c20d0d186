//! Recursive-descent parser for the formula language.
//!
//! Precedence, tightest first: `!`, `&`, `|`, `->` (right-associative), `<->`.
//! A bare identifier is an atom unless it starts a linear comparison such as
//! `c + p >= 0` or `h = 1`. `#` starts a comment that runs to the end of the line.

use crate::ast::{
    Addend, Comparator, Formula, LinearComparison, LinearTerm, Rational, SymbolId, SymbolTable,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rational),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    Cmp(Comparator),
    Plus,
    Minus,
    Star,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(r) => format!("number `{r}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Cmp(c) => format!("`{}`", c.as_str()),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let rest = &src[i..];
        let (tok, len) = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'#' => {
                i += rest.find('\n').unwrap_or(rest.len());
                continue;
            }
            b'!' => (Tok::Not, 1),
            b'&' => (Tok::And, 1),
            b'|' => (Tok::Or, 1),
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'+' => (Tok::Plus, 1),
            b'*' => (Tok::Star, 1),
            b'=' => (Tok::Cmp(Comparator::Eq), 1),
            b'-' if rest.starts_with("->") => (Tok::Implies, 2),
            b'-' => (Tok::Minus, 1),
            b'<' if rest.starts_with("<->") => (Tok::Iff, 3),
            b'<' if rest.starts_with("<=") => (Tok::Cmp(Comparator::Le), 2),
            b'<' => (Tok::Cmp(Comparator::Lt), 1),
            b'>' if rest.starts_with(">=") => (Tok::Cmp(Comparator::Ge), 2),
            b'>' => (Tok::Cmp(Comparator::Gt), 1),
            c if c.is_ascii_digit() => lex_number(src, i)?,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let len = rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                    .unwrap_or(rest.len());
                let word = &rest[..len];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word.to_string()),
                };
                (tok, len)
            }
            _ => {
                let ch = rest.chars().next().unwrap();
                return Err(Error::syntax(
                    src,
                    i,
                    format!("unexpected character `{ch}`"),
                ));
            }
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

/// Integer, decimal (`0.25`) or fraction (`3/4`) literal, read exactly.
fn lex_number(src: &str, start: usize) -> Result<(Tok, usize)> {
    let bytes = src.as_bytes();
    let digits_end = |from: usize| {
        let mut j = from;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    let overflow = || Error::syntax(src, start, "numeric literal out of range");
    let parse_int = |s: &str| s.parse::<i64>().map_err(|_| overflow());

    let int_end = digits_end(start);
    let integer = parse_int(&src[start..int_end])?;
    match bytes.get(int_end) {
        Some(b'.') => {
            let frac_end = digits_end(int_end + 1);
            if frac_end == int_end + 1 {
                return Err(Error::syntax(src, int_end, "expected digits after `.`"));
            }
            let frac = &src[int_end + 1..frac_end];
            let scale = 10i64.checked_pow(frac.len() as u32).ok_or_else(overflow)?;
            let numer = integer
                .checked_mul(scale)
                .and_then(|n| n.checked_add(parse_int(frac).ok()?))
                .ok_or_else(overflow)?;
            Ok((Tok::Number(Rational::new(numer, scale)), frac_end - start))
        }
        Some(b'/') => {
            let den_end = digits_end(int_end + 1);
            if den_end == int_end + 1 {
                return Err(Error::syntax(
                    src,
                    int_end,
                    "expected denominator after `/`",
                ));
            }
            let den = parse_int(&src[int_end + 1..den_end])?;
            if den == 0 {
                return Err(Error::syntax(src, int_end + 1, "zero denominator"));
            }
            Ok((Tok::Number(Rational::new(integer, den)), den_end - start))
        }
        _ => Ok((
            Tok::Number(Rational::from_integer(integer)),
            int_end - start,
        )),
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    table: &'a SymbolTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::syntax(self.src, self.offset(), message)
    }

    fn unexpected(&self, wanted: &str) -> Error {
        self.error(format!(
            "expected {wanted}, found {}",
            self.peek().describe()
        ))
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        self.atom()
    }

    fn starts_comparison(&self) -> bool {
        match self.peek() {
            Tok::Number(_) | Tok::Plus | Tok::Minus => true,
            Tok::Ident(_) => matches!(self.peek_at(1), Tok::Plus | Tok::Minus | Tok::Cmp(_)),
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        if self.starts_comparison() {
            return self.comparison();
        }
        let start = self.pos;
        match self.bump() {
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::Ident(name) => {
                let id = self.resolve(&name)?;
                let sym = self.table.get(id);
                if !sym.domain.is_atomic() {
                    return Err(Error::NumericAtom(name));
                }
                Ok(Formula::Atom(id))
            }
            Tok::LParen => {
                let inner = self.formula()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            _ => {
                self.pos = start;
                Err(self.unexpected("a formula"))
            }
        }
    }

    fn resolve(&self, name: &str) -> Result<SymbolId> {
        self.table
            .lookup(name)
            .ok_or_else(|| Error::UndeclaredSymbol(name.to_string()))
    }

    fn comparison(&mut self) -> Result<Formula> {
        let lhs = self.term()?;
        let cmp = match self.peek() {
            Tok::Cmp(c) => *c,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::LinCmp(LinearComparison { lhs, cmp, rhs }))
    }

    fn term(&mut self) -> Result<LinearTerm> {
        let mut addends = Vec::new();
        let mut negative = match self.peek() {
            Tok::Plus => {
                self.bump();
                false
            }
            Tok::Minus => {
                self.bump();
                true
            }
            _ => false,
        };
        loop {
            let mut addend = self.addend()?;
            if negative {
                addend.coef = -addend.coef;
            }
            addends.push(addend);
            negative = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
        }
        Ok(LinearTerm(addends))
    }

    fn addend(&mut self) -> Result<Addend> {
        let start = self.pos;
        match self.bump() {
            Tok::Number(coef) => {
                if *self.peek() != Tok::Star {
                    return Ok(Addend { coef, symbol: None });
                }
                self.bump();
                let ident = self.pos;
                match self.bump() {
                    Tok::Ident(name) => Ok(Addend {
                        coef,
                        symbol: Some(self.numeric(&name)?),
                    }),
                    _ => {
                        self.pos = ident;
                        Err(self.unexpected("an identifier after `*`"))
                    }
                }
            }
            Tok::Ident(name) => Ok(Addend {
                coef: Rational::from_integer(1),
                symbol: Some(self.numeric(&name)?),
            }),
            _ => {
                self.pos = start;
                Err(self.unexpected("a number or identifier"))
            }
        }
    }

    fn numeric(&self, name: &str) -> Result<SymbolId> {
        let id = self.resolve(name)?;
        if !self.table.domain(id).is_numeric() {
            return Err(Error::NonNumericComparison(name.to_string()));
        }
        Ok(id)
    }
}

/// Parse a formula against a symbol table.
pub fn parse_formula(text: &str, table: &SymbolTable) -> Result<Formula> {
    let toks = lex(text)?;
    let mut parser = Parser {
        src: text,
        toks,
        pos: 0,
        table,
    };
    let formula = parser.formula()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.unexpected("end of input"));
    }
    Ok(formula)
}

/// Parse a rational literal (`-3`, `0.25`, `3/4`).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let trimmed = text.trim();
    let (negative, body) = match trimmed.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, trimmed),
    };
    if !body.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(Error::syntax(text, 0, "expected a number"));
    }
    let (tok, len) = lex_number(body, 0)?;
    if len != body.len() {
        return Err(Error::syntax(body, len, "trailing characters after number"));
    }
    match tok {
        Tok::Number(r) if negative => Ok(-r),
        Tok::Number(r) => Ok(r),
        _ => unreachable!(),
    }
}
