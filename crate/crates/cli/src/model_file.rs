//! Model file reader.
//!
//! A model file is a sequence of sections:
//!
//! ```text
//! symbols   { h: bool, c: bool, x: unit, n: {-1, 0, 1}, r: real[-2, 3] }
//! semantics boolean
//! belief    bernoulli { h: 0.8, c: 0.5 }
//! measure   counting
//! theory    { rule: "h -> c" }
//! query     rule logic threshold(0.5) given { h: 1 }
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use std::collections::HashMap;

use nesy_core::{
    parse_formula, parse_rational, Belief, DiracPoint, Domain, Error, Formula, FuzzyMembership,
    IndependentBernoulli, Interpretation, LogLinear, LogicFn, MeasureSpec, MembershipCurve, Model,
    PartialInterpretation, Semantics, SymbolTable, Theory, ValueSet, DEFAULT_GRID,
};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub label: String,
    pub formula: Formula,
    pub logic: LogicFn,
    pub given: Option<PartialInterpretation>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub model: Model,
    pub measure: MeasureSpec,
    pub theory: Vec<(String, Formula)>,
    pub queries: Vec<Query>,
}

impl ModelFile {
    pub fn table(&self) -> &SymbolTable {
        self.model.table()
    }

    pub fn sentence(&self, name: &str) -> Option<&Formula> {
        self.theory.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::ModelFile {
        line,
        message: message.into(),
    }
}

fn at(line: usize, e: Error) -> Error {
    match e {
        Error::ModelFile { .. } => e,
        other => err(line, other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, Error> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '"' => {
                let start_line = line;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(err(start_line, "unterminated string")),
                        Some('"') => break,
                        Some(ch) => {
                            if *ch == '\n' {
                                line += 1;
                            }
                            s.push(*ch);
                        }
                    }
                    i += 1;
                }
                i += 1;
                out.push(Token {
                    tok: Tok::Str(s),
                    line: start_line,
                });
            }
            '{' | '}' | '(' | ')' | '[' | ']' | ',' | ':' | '=' | '^' => {
                out.push(Token {
                    tok: Tok::Punct(c),
                    line,
                });
                i += 1;
            }
            c if c.is_ascii_digit()
                || c == '.'
                || ((c == '-' || c == '+')
                    && chars
                        .get(i + 1)
                        .is_some_and(|d| d.is_ascii_digit() || *d == '.')) =>
            {
                let start = i;
                i += 1;
                while let Some(&d) = chars.get(i) {
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                    let slash = d == '/' && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign || slash {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Num(chars[start..i].iter().collect()),
                    line,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while chars
                    .get(i)
                    .is_some_and(|d| d.is_alphanumeric() || *d == '_')
                {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                });
            }
            other => return Err(err(line, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

fn describe(t: Option<&Token>) -> String {
    match t.map(|t| &t.tok) {
        None => "end of file".into(),
        Some(Tok::Ident(s)) => format!("`{s}`"),
        Some(Tok::Num(s)) => format!("number {s}"),
        Some(Tok::Str(s)) => format!("string \"{s}\""),
        Some(Tok::Punct(c)) => format!("`{c}`"),
    }
}

#[derive(Debug, Clone)]
enum DomainSyntax {
    Boolean,
    Unit,
    Set(Vec<String>),
    Real(f64, f64),
}

/// name, knots, exponent, line
type CurveDecl = (String, Vec<(f64, f64)>, f64, usize);

#[derive(Debug, Clone)]
enum BeliefSyntax {
    Bernoulli(Vec<(String, f64, usize)>),
    Dirac(Vec<(String, f64, usize)>),
    LogLinear {
        weights: Vec<(String, f64, usize)>,
        over: Option<Vec<(String, usize)>>,
    },
    FuzzySet(Vec<CurveDecl>),
}

#[derive(Debug, Clone)]
enum Target {
    Name(String),
    Expr(String),
}

#[derive(Debug, Clone)]
struct QuerySyntax {
    target: Target,
    logic: LogicFn,
    given: Vec<(String, f64, usize)>,
    line: usize,
}

#[derive(Default)]
struct Sections {
    symbols: Vec<(String, DomainSyntax, usize)>,
    semantics: Option<(Semantics, usize)>,
    belief: Option<(BeliefSyntax, usize)>,
    measure: Option<(MeasureSpec, usize)>,
    theory: Vec<(String, String, usize)>,
    queries: Vec<QuerySyntax>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn line(&self) -> usize {
        self.peek().map_or(self.last_line, |t| t.line)
    }

    fn unexpected(&self, wanted: &str) -> Error {
        err(
            self.line(),
            format!("expected {wanted}, found {}", describe(self.peek())),
        )
    }

    fn is_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c)
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == word)
    }

    fn punct(&mut self, c: char) -> Result<(), Error> {
        if self.is_punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, usize), Error> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                line,
            }) => {
                let r = (s.clone(), *line);
                self.pos += 1;
                Ok(r)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn string(&mut self) -> Result<(String, usize), Error> {
        match self.peek() {
            Some(Token {
                tok: Tok::Str(s),
                line,
            }) => {
                let r = (s.clone(), *line);
                self.pos += 1;
                Ok(r)
            }
            _ => Err(self.unexpected("a quoted formula")),
        }
    }

    fn raw_number(&mut self) -> Result<(String, usize), Error> {
        match self.peek() {
            Some(Token {
                tok: Tok::Num(s),
                line,
            }) => {
                let r = (s.clone(), *line);
                self.pos += 1;
                Ok(r)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn number(&mut self) -> Result<f64, Error> {
        let (raw, line) = self.raw_number()?;
        to_f64(&raw).ok_or_else(|| err(line, format!("invalid number `{raw}`")))
    }

    fn integer(&mut self) -> Result<u64, Error> {
        let (raw, line) = self.raw_number()?;
        raw.parse().map_err(|_| {
            err(
                line,
                format!("expected a non-negative integer, found `{raw}`"),
            )
        })
    }

    /// `{ item, item, ... }` with an optional trailing comma.
    fn braced<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, Error>,
    ) -> Result<Vec<T>, Error> {
        self.punct('{')?;
        let mut out = Vec::new();
        while !self.is_punct('}') {
            out.push(item(self)?);
            if !self.is_punct('}') {
                self.punct(',')?;
            }
        }
        self.punct('}')?;
        Ok(out)
    }

    fn named_numbers(&mut self) -> Result<Vec<(String, f64, usize)>, Error> {
        self.braced(|p| {
            let (name, line) = p.ident()?;
            p.punct(':')?;
            let v = p.number()?;
            Ok((name, v, line))
        })
    }

    fn file(&mut self) -> Result<Sections, Error> {
        let mut s = Sections::default();
        while self.peek().is_some() {
            let (word, line) = self.ident()?;
            match word.as_str() {
                "symbols" => {
                    let decls = self.braced(|p| {
                        let (name, line) = p.ident()?;
                        p.punct(':')?;
                        Ok((name, p.domain()?, line))
                    })?;
                    s.symbols.extend(decls);
                }
                "semantics" => {
                    let (name, nline) = self.ident()?;
                    let sem = Semantics::from_name(&name).ok_or_else(|| {
                        err(
                            nline,
                            format!("unknown semantics `{name}` (boolean, lukasiewicz, goedel, product)"),
                        )
                    })?;
                    once(&mut s.semantics, (sem, line), "semantics")?;
                }
                "belief" => {
                    let b = self.belief()?;
                    once(&mut s.belief, (b, line), "belief")?;
                }
                "measure" => {
                    let m = self.measure()?;
                    once(&mut s.measure, (m, line), "measure")?;
                }
                "theory" => {
                    let entries = self.braced(|p| {
                        let (name, line) = p.ident()?;
                        p.punct(':')?;
                        let (text, _) = p.string()?;
                        Ok((name, text, line))
                    })?;
                    s.theory.extend(entries);
                }
                "query" => {
                    let q = self.query(line)?;
                    s.queries.push(q);
                }
                other => {
                    return Err(err(
                        line,
                        format!("unknown section `{other}` (symbols, semantics, belief, measure, theory, query)"),
                    ))
                }
            }
        }
        Ok(s)
    }

    fn domain(&mut self) -> Result<DomainSyntax, Error> {
        if self.is_punct('{') {
            let vals = self.braced(|p| p.raw_number().map(|(raw, _)| raw))?;
            return Ok(DomainSyntax::Set(vals));
        }
        let (word, line) = self.ident()?;
        match word.as_str() {
            "bool" | "boolean" => Ok(DomainSyntax::Boolean),
            "unit" => Ok(DomainSyntax::Unit),
            "real" => {
                self.punct('[')?;
                let lo = self.number()?;
                self.punct(',')?;
                let hi = self.number()?;
                self.punct(']')?;
                Ok(DomainSyntax::Real(lo, hi))
            }
            other => Err(err(
                line,
                format!("unknown domain `{other}` (bool, unit, {{v, ...}}, real[lo, hi])"),
            )),
        }
    }

    fn belief(&mut self) -> Result<BeliefSyntax, Error> {
        let (kind, line) = self.ident()?;
        match kind.as_str() {
            "bernoulli" => Ok(BeliefSyntax::Bernoulli(self.named_numbers()?)),
            "dirac" => Ok(BeliefSyntax::Dirac(self.named_numbers()?)),
            "loglinear" => {
                let weights = self.named_numbers()?;
                let over = if self.is_ident("over") {
                    self.pos += 1;
                    Some(self.braced(|p| p.string())?)
                } else {
                    None
                };
                Ok(BeliefSyntax::LogLinear { weights, over })
            }
            "fuzzyset" => {
                let curves = self.braced(|p| {
                    let (name, line) = p.ident()?;
                    p.punct(':')?;
                    p.punct('[')?;
                    let mut knots = Vec::new();
                    while !p.is_punct(']') {
                        p.punct('(')?;
                        let x = p.number()?;
                        p.punct(',')?;
                        let y = p.number()?;
                        p.punct(')')?;
                        knots.push((x, y));
                        if !p.is_punct(']') {
                            p.punct(',')?;
                        }
                    }
                    p.punct(']')?;
                    let exponent = if p.is_punct('^') {
                        p.pos += 1;
                        p.number()?
                    } else {
                        1.0
                    };
                    Ok((name, knots, exponent, line))
                })?;
                Ok(BeliefSyntax::FuzzySet(curves))
            }
            other => Err(err(
                line,
                format!("unknown belief `{other}` (bernoulli, loglinear, dirac, fuzzyset)"),
            )),
        }
    }

    /// `key=value` pairs inside parentheses, each key at most once.
    fn options(&mut self, allowed: &[&str]) -> Result<HashMap<String, u64>, Error> {
        let mut opts = HashMap::new();
        if !self.is_punct('(') {
            return Ok(opts);
        }
        self.pos += 1;
        while !self.is_punct(')') {
            let (key, line) = self.ident()?;
            if !allowed.contains(&key.as_str()) {
                return Err(err(
                    line,
                    format!("unknown option `{key}` (expected {})", allowed.join(", ")),
                ));
            }
            self.punct('=')?;
            let v = self.integer()?;
            if opts.insert(key.clone(), v).is_some() {
                return Err(err(line, format!("option `{key}` given twice")));
            }
            if !self.is_punct(')') {
                self.punct(',')?;
            }
        }
        self.punct(')')?;
        Ok(opts)
    }

    fn measure(&mut self) -> Result<MeasureSpec, Error> {
        let (kind, line) = self.ident()?;
        let m = match kind.as_str() {
            "counting" => MeasureSpec::Counting,
            "quadrature" => {
                let o = self.options(&["g"])?;
                MeasureSpec::BorelQuadrature {
                    grid: o.get("g").map_or(DEFAULT_GRID, |g| *g as usize),
                }
            }
            "montecarlo" => {
                let o = self.options(&["n", "seed"])?;
                MeasureSpec::BorelMonteCarlo {
                    samples: o.get("n").map_or(DEFAULT_SAMPLES, |n| *n as usize),
                    seed: o.get("seed").copied().unwrap_or(DEFAULT_SEED),
                }
            }
            "mixed" => {
                self.punct('(')?;
                let inner = self.measure()?;
                self.punct(')')?;
                MeasureSpec::ProductMixed {
                    continuous: Box::new(inner),
                }
            }
            other => {
                return Err(err(
                    line,
                    format!("unknown measure `{other}` (counting, quadrature, montecarlo, mixed)"),
                ))
            }
        };
        m.validate().map_err(|e| at(line, e))?;
        Ok(m)
    }

    fn query(&mut self, line: usize) -> Result<QuerySyntax, Error> {
        let target = match self.peek() {
            Some(Token {
                tok: Tok::Str(_), ..
            }) => Target::Expr(self.string()?.0),
            _ => Target::Name(self.ident()?.0),
        };
        let mut logic = LogicFn::Direct;
        let mut given = Vec::new();
        loop {
            if self.is_ident("logic") {
                self.pos += 1;
                logic = self.logic()?;
            } else if self.is_ident("given") {
                self.pos += 1;
                given = self.named_numbers()?;
            } else {
                break;
            }
        }
        Ok(QuerySyntax {
            target,
            logic,
            given,
            line,
        })
    }

    fn logic(&mut self) -> Result<LogicFn, Error> {
        let (kind, line) = self.ident()?;
        let l = match kind.as_str() {
            "direct" => Ok(LogicFn::Direct),
            "threshold" => {
                self.punct('(')?;
                let tau = self.number()?;
                self.punct(')')?;
                LogicFn::threshold(tau)
            }
            "indicator" => {
                if self.is_punct('[') {
                    self.pos += 1;
                    let lo = self.number()?;
                    self.punct(',')?;
                    let hi = self.number()?;
                    self.punct(']')?;
                    LogicFn::value_set(ValueSet::Interval { lo, hi })
                } else {
                    let vs = self.braced(|p| p.number())?;
                    LogicFn::value_set(ValueSet::Finite(vs))
                }
            }
            other => {
                return Err(err(
                    line,
                    format!("unknown logic function `{other}` (direct, threshold, indicator)"),
                ))
            }
        };
        l.map_err(|e| at(line, e))
    }
}

fn once<T>(slot: &mut Option<(T, usize)>, value: (T, usize), what: &str) -> Result<(), Error> {
    if let Some((_, first)) = slot {
        return Err(err(
            value.1,
            format!("second `{what}` section (first on line {first})"),
        ));
    }
    *slot = Some(value);
    Ok(())
}

fn to_f64(raw: &str) -> Option<f64> {
    let v = if raw.contains('/') {
        let r = parse_rational(raw).ok()?;
        *r.numer() as f64 / *r.denom() as f64
    } else {
        raw.parse::<f64>().ok()?
    };
    v.is_finite().then_some(v)
}

/// Parse a formula found on `line` of the file, shifting its own line numbers.
pub fn formula_at(text: &str, table: &SymbolTable, line: usize) -> Result<Formula, Error> {
    parse_formula(text, table).map_err(|e| match e {
        Error::Syntax {
            line: inner,
            column,
            message,
            ..
        } => err(
            line + inner - 1,
            format!("in \"{text}\": column {column}: {message}"),
        ),
        other => err(line, format!("in \"{text}\": {other}")),
    })
}

fn lookup(table: &SymbolTable, name: &str, line: usize) -> Result<nesy_core::SymbolId, Error> {
    table
        .lookup(name)
        .ok_or_else(|| err(line, format!("undeclared symbol `{name}`")))
}

pub fn parse(src: &str) -> Result<ModelFile, Error> {
    let toks = lex(src)?;
    let last_line = src.lines().count().max(1);
    let mut p = Parser {
        toks,
        pos: 0,
        last_line,
    };
    let s = p.file()?;

    let mut table = SymbolTable::new();
    for (name, dom, line) in &s.symbols {
        let domain = match dom {
            DomainSyntax::Boolean => Domain::Boolean,
            DomainSyntax::Unit => Domain::UnitInterval,
            DomainSyntax::Set(raw) => {
                let vals = raw
                    .iter()
                    .map(|r| {
                        parse_rational(r)
                            .map_err(|_| err(*line, format!("`{r}` is not an exact rational")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Domain::finite_set(vals).map_err(|e| at(*line, e))?
            }
            DomainSyntax::Real(lo, hi) => {
                Domain::bounded_real(*lo, *hi).map_err(|e| at(*line, e))?
            }
        };
        table
            .declare(name.clone(), domain)
            .map_err(|e| at(*line, e))?;
    }

    let (semantics, _) = s
        .semantics
        .ok_or_else(|| err(last_line, "missing `semantics` section"))?;
    let (measure, _) = s
        .measure
        .clone()
        .ok_or_else(|| err(last_line, "missing `measure` section"))?;
    let (belief_syntax, belief_line) = s
        .belief
        .ok_or_else(|| err(last_line, "missing `belief` section"))?;

    let mut theory: Vec<(String, Formula)> = Vec::new();
    for (name, text, line) in &s.theory {
        if theory.iter().any(|(n, _)| n == name) {
            return Err(err(*line, format!("duplicate theory entry `{name}`")));
        }
        theory.push((name.clone(), formula_at(text, &table, *line)?));
    }

    let belief = match belief_syntax {
        BeliefSyntax::Bernoulli(entries) => {
            let probs = entries
                .iter()
                .map(|(n, v, line)| lookup(&table, n, *line).map(|id| (id, *v)))
                .collect::<Result<Vec<_>, _>>()?;
            Belief::Bernoulli(
                IndependentBernoulli::new(&table, probs).map_err(|e| at(belief_line, e))?,
            )
        }
        BeliefSyntax::Dirac(entries) => {
            let mut point = PartialInterpretation::new(table.len());
            for (n, v, line) in &entries {
                point.set(lookup(&table, n, *line)?, *v);
            }
            let full: Interpretation = point.complete(&table).map_err(|e| at(belief_line, e))?;
            Belief::Dirac(DiracPoint::new(&table, full).map_err(|e| at(belief_line, e))?)
        }
        BeliefSyntax::LogLinear { weights, over } => {
            let sentences = match &over {
                Some(list) => {
                    if list.len() != weights.len() {
                        return Err(err(
                            belief_line,
                            format!("{} weights for {} formulas", weights.len(), list.len()),
                        ));
                    }
                    list.iter()
                        .map(|(text, line)| formula_at(text, &table, *line))
                        .collect::<Result<Vec<_>, _>>()?
                }
                None => weights
                    .iter()
                    .map(|(n, _, line)| {
                        theory
                            .iter()
                            .find(|(t, _)| t == n)
                            .map(|(_, f)| f.clone())
                            .ok_or_else(|| err(*line, format!("no theory entry named `{n}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let theory = Theory::new(sentences).map_err(|e| at(belief_line, e))?;
            let w = weights.iter().map(|(_, v, _)| *v).collect();
            Belief::LogLinear(
                LogLinear::new(&table, theory, w, semantics, measure.clone())
                    .map_err(|e| at(belief_line, e))?,
            )
        }
        BeliefSyntax::FuzzySet(entries) => {
            let mut curves = Vec::new();
            for (n, knots, exponent, line) in entries {
                let id = lookup(&table, &n, line)?;
                let curve = MembershipCurve::new(knots).map_err(|e| at(line, e))?;
                curves.push((id, curve, exponent));
            }
            Belief::FuzzySet(FuzzyMembership::new(&table, curves).map_err(|e| at(belief_line, e))?)
        }
    };

    let mut queries = Vec::new();
    for q in s.queries {
        let (label, formula) = match q.target {
            Target::Name(n) => {
                let f = theory
                    .iter()
                    .find(|(t, _)| *t == n)
                    .map(|(_, f)| f.clone())
                    .ok_or_else(|| err(q.line, format!("no theory entry named `{n}`")))?;
                (n, f)
            }
            Target::Expr(text) => {
                let f = formula_at(&text, &table, q.line)?;
                (text, f)
            }
        };
        let given = if q.given.is_empty() {
            None
        } else {
            let mut p = PartialInterpretation::new(table.len());
            for (n, v, line) in &q.given {
                p.set(lookup(&table, n, *line)?, *v);
            }
            p.validate(&table).map_err(|e| at(q.line, e))?;
            Some(p)
        };
        queries.push(Query {
            label,
            formula,
            logic: q.logic,
            given,
            line: q.line,
        });
    }

    let model = Model::new(table, semantics, belief).map_err(|e| at(belief_line, e))?;
    Ok(ModelFile {
        model,
        measure,
        theory,
        queries,
    })
}
