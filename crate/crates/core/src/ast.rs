//! Symbols, domains, interpretations and the formula language.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Exact rational used for linear-comparison coefficients and finite domain values.
pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// `{0, 1}`
    Boolean,
    /// `[0, 1]`
    UnitInterval,
    /// Explicit non-empty list of distinct rationals, kept in declared order.
    FiniteSet(Vec<Rational>),
    /// Closed interval `[lo, hi]`.
    BoundedReal { lo: f64, hi: f64 },
}

impl Domain {
    pub fn finite_set(values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDomain("finite set is empty".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(Error::InvalidDomain(format!("duplicate value {v}")));
            }
            // Distinct rationals must stay distinct once stored as f64.
            let f = v.to_f64().unwrap_or(f64::NAN);
            if values[..i].iter().any(|w| w.to_f64() == Some(f)) {
                return Err(Error::InvalidDomain(format!(
                    "value {v} is not distinguishable in double precision"
                )));
            }
        }
        Ok(Domain::FiniteSet(values))
    }

    pub fn bounded_real(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidDomain(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Domain::BoundedReal { lo, hi })
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Domain::Boolean | Domain::FiniteSet(_))
    }

    /// Numeric domains are the ones linear comparisons range over.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Domain::FiniteSet(_) | Domain::BoundedReal { .. })
    }

    /// Domains that can be referenced as a propositional atom.
    pub fn is_atomic(&self) -> bool {
        matches!(self, Domain::Boolean | Domain::UnitInterval)
    }

    /// Values of a finite domain in declared order.
    pub fn values(&self) -> Option<Vec<f64>> {
        match self {
            Domain::Boolean => Some(vec![0.0, 1.0]),
            Domain::FiniteSet(vs) => Some(vs.iter().map(|v| v.to_f64().unwrap()).collect()),
            _ => None,
        }
    }

    /// `(lo, hi)` of a continuous domain.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self {
            Domain::UnitInterval => Some((0.0, 1.0)),
            Domain::BoundedReal { lo, hi } => Some((*lo, *hi)),
            _ => None,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        match self {
            Domain::Boolean => value == 0.0 || value == 1.0,
            Domain::UnitInterval => (0.0..=1.0).contains(&value),
            Domain::FiniteSet(vs) => vs.iter().any(|v| v.to_f64() == Some(value)),
            Domain::BoundedReal { lo, hi } => (*lo..=*hi).contains(&value),
        }
    }

    /// The exact rational a finite-set value stands for.
    pub(crate) fn exact_value(&self, value: f64) -> Option<Rational> {
        match self {
            Domain::FiniteSet(vs) => vs.iter().find(|v| v.to_f64() == Some(value)).copied(),
            Domain::Boolean if value == 0.0 || value == 1.0 => {
                Some(Rational::from_integer(value as i64))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Boolean => f.write_str("bool"),
            Domain::UnitInterval => f.write_str("unit"),
            Domain::FiniteSet(vs) => {
                f.write_str("{")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
            Domain::BoundedReal { lo, hi } => write!(f, "real[{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SymbolId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub name: String,
    pub domain: Domain,
    pub index: SymbolId,
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The ordered symbol set of a model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, SymbolId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_decls<S: Into<String>>(
        decls: impl IntoIterator<Item = (S, Domain)>,
    ) -> Result<Self> {
        let mut table = Self::new();
        for (name, domain) in decls {
            table.declare(name, domain)?;
        }
        Ok(table)
    }

    pub fn declare(&mut self, name: impl Into<String>, domain: Domain) -> Result<SymbolId> {
        let name = name.into();
        if !is_identifier(&name) || matches!(name.as_str(), "true" | "false") {
            return Err(Error::InvalidSymbolName(name));
        }
        if self.by_name.contains_key(&name) {
            return Err(Error::DuplicateSymbol(name));
        }
        let id = SymbolId(self.symbols.len());
        self.by_name.insert(name.clone(), id);
        self.symbols.push(Symbol {
            name,
            domain,
            index: id,
        });
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.0]
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.0].name
    }

    pub fn domain(&self, id: SymbolId) -> &Domain {
        &self.symbols[id.0].domain
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.symbols.len()).map(SymbolId)
    }

    /// Build a total interpretation from `(name, value)` pairs.
    pub fn interpretation<'a>(
        &self,
        pairs: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Interpretation> {
        let mut partial = PartialInterpretation::new(self.len());
        for (name, value) in pairs {
            let id = self
                .lookup(name)
                .ok_or_else(|| Error::UndeclaredSymbol(name.to_string()))?;
            partial.set(id, value);
        }
        partial.complete(self)
    }
}

/// A total assignment of values to every symbol of a table, indexed by symbol id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interpretation {
    values: Vec<f64>,
}

impl Interpretation {
    /// Checks totality and domain membership.
    pub fn new(table: &SymbolTable, values: Vec<f64>) -> Result<Self> {
        if values.len() != table.len() {
            let missing = table
                .iter()
                .nth(values.len())
                .map_or_else(|| "<extra values>".to_string(), |s| s.name.clone());
            return Err(Error::MissingAssignment(missing));
        }
        for (sym, &v) in table.iter().zip(&values) {
            if !sym.domain.contains(v) {
                return Err(Error::ValueOutOfDomain {
                    symbol: sym.name.clone(),
                    value: v,
                });
            }
        }
        Ok(Self { values })
    }

    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn get(&self, id: SymbolId) -> f64 {
        self.values[id.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(name, value)` pairs in symbol order.
    pub fn named<'a>(
        &'a self,
        table: &'a SymbolTable,
    ) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        table
            .iter()
            .map(move |s| (s.name.as_str(), self.values[s.index.0]))
    }
}

/// Values for a subset of symbols; used for conditioning and for building interpretations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartialInterpretation {
    values: Vec<Option<f64>>,
}

impl PartialInterpretation {
    pub fn new(len: usize) -> Self {
        Self {
            values: vec![None; len],
        }
    }

    pub fn set(&mut self, id: SymbolId, value: f64) {
        if id.0 >= self.values.len() {
            self.values.resize(id.0 + 1, None);
        }
        self.values[id.0] = Some(value);
    }

    pub fn get(&self, id: SymbolId) -> Option<f64> {
        self.values.get(id.0).copied().flatten()
    }

    pub fn is_fixed(&self, id: SymbolId) -> bool {
        self.get(id).is_some()
    }

    pub fn fixed(&self) -> impl Iterator<Item = (SymbolId, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (SymbolId(i), v)))
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }

    /// Checks every fixed value against its domain.
    pub fn validate(&self, table: &SymbolTable) -> Result<()> {
        for (id, v) in self.fixed() {
            if id.0 >= table.len() {
                return Err(Error::UndeclaredSymbol(format!("#{}", id.0)));
            }
            let sym = table.get(id);
            if !sym.domain.contains(v) {
                return Err(Error::ValueOutOfDomain {
                    symbol: sym.name.clone(),
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn complete(&self, table: &SymbolTable) -> Result<Interpretation> {
        let values = table
            .iter()
            .map(|s| {
                self.get(s.index)
                    .ok_or_else(|| Error::MissingAssignment(s.name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Interpretation::new(table, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub fn as_str(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }

    pub fn holds<T: PartialOrd>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Gt => lhs > rhs,
        }
    }
}

/// One summand `coef * symbol`, or a bare constant when `symbol` is `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Addend {
    pub coef: Rational,
    pub symbol: Option<SymbolId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearTerm(pub Vec<Addend>);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearComparison {
    pub lhs: LinearTerm,
    pub cmp: Comparator,
    pub rhs: LinearTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(SymbolId),
    True,
    False,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    LinCmp(LinearComparison),
}

#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn atom(id: SymbolId) -> Self {
        Formula::Atom(id)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Symbols occurring in the formula, ordered by index.
    pub fn free_symbols(&self) -> Vec<SymbolId> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_symbols(&self, out: &mut Vec<SymbolId>) {
        match self {
            Formula::Atom(id) => out.push(*id),
            Formula::True | Formula::False => {}
            Formula::Not(a) => a.collect_symbols(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Formula::LinCmp(c) => {
                out.extend(c.lhs.0.iter().chain(&c.rhs.0).filter_map(|a| a.symbol))
            }
        }
    }

    /// Whether the formula contains any linear comparison.
    pub fn has_comparisons(&self) -> bool {
        match self {
            Formula::LinCmp(_) => true,
            Formula::Atom(_) | Formula::True | Formula::False => false,
            Formula::Not(a) => a.has_comparisons(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.has_comparisons() || b.has_comparisons(),
        }
    }

    /// Check that atoms and comparisons reference symbols of the right kind.
    pub fn validate(&self, table: &SymbolTable) -> Result<()> {
        let check = |id: SymbolId| -> Result<&Symbol> {
            if id.0 < table.len() {
                Ok(table.get(id))
            } else {
                Err(Error::UndeclaredSymbol(format!("#{}", id.0)))
            }
        };
        match self {
            Formula::Atom(id) => {
                let sym = check(*id)?;
                if !sym.domain.is_atomic() {
                    return Err(Error::NumericAtom(sym.name.clone()));
                }
                Ok(())
            }
            Formula::True | Formula::False => Ok(()),
            Formula::Not(a) => a.validate(table),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.validate(table)?;
                b.validate(table)
            }
            Formula::LinCmp(c) => {
                for id in c.lhs.0.iter().chain(&c.rhs.0).filter_map(|a| a.symbol) {
                    let sym = check(id)?;
                    if !sym.domain.is_numeric() {
                        return Err(Error::NonNumericComparison(sym.name.clone()));
                    }
                }
                Ok(())
            }
        }
    }

    /// Display with symbol names resolved through `table`.
    pub fn display<'a>(&'a self, table: &'a SymbolTable) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            table,
        }
    }
}

/// Conjunction of N sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    sentences: Vec<Formula>,
}

impl Theory {
    pub fn new(sentences: Vec<Formula>) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::InvalidParameter(
                "a theory needs at least one sentence".into(),
            ));
        }
        Ok(Self { sentences })
    }

    pub fn sentences(&self) -> &[Formula] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn free_symbols(&self) -> Vec<SymbolId> {
        let mut out: Vec<_> = self
            .sentences
            .iter()
            .flat_map(Formula::free_symbols)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn conjunction(&self) -> Formula {
        let mut iter = self.sentences.iter().cloned();
        let first = iter.next().expect("theory is non-empty");
        iter.fold(first, Formula::and)
    }
}

// Printing precedence levels, loosest first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Iff,
    Implies,
    Or,
    And,
    Unary,
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    table: &'a SymbolTable,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self.formula, self.table, Prec::Iff)
    }
}

fn write_formula(
    f: &mut fmt::Formatter<'_>,
    phi: &Formula,
    table: &SymbolTable,
    ctx: Prec,
) -> fmt::Result {
    let prec = match phi {
        Formula::Atom(id) => return f.write_str(table.name(*id)),
        Formula::True => return f.write_str("true"),
        Formula::False => return f.write_str("false"),
        Formula::LinCmp(c) => {
            write_term(f, &c.lhs, table)?;
            write!(f, " {} ", c.cmp.as_str())?;
            return write_term(f, &c.rhs, table);
        }
        Formula::Not(_) => Prec::Unary,
        Formula::And(..) => Prec::And,
        Formula::Or(..) => Prec::Or,
        Formula::Implies(..) => Prec::Implies,
        Formula::Iff(..) => Prec::Iff,
    };
    let wrap = prec < ctx;
    if wrap {
        f.write_str("(")?;
    }
    // Left operands may repeat their own level (left-assoc chains), right ones
    // need one level tighter; implication is the right-associative exception.
    let (op, a, b, left, right) = match phi {
        Formula::Not(a) => {
            f.write_str("!")?;
            write_formula(f, a, table, Prec::Unary)?;
            return if wrap { f.write_str(")") } else { Ok(()) };
        }
        Formula::And(a, b) => (" & ", a, b, Prec::And, Prec::Unary),
        Formula::Or(a, b) => (" | ", a, b, Prec::Or, Prec::And),
        Formula::Implies(a, b) => (" -> ", a, b, Prec::Or, Prec::Implies),
        Formula::Iff(a, b) => (" <-> ", a, b, Prec::Iff, Prec::Implies),
        _ => unreachable!(),
    };
    write_formula(f, a, table, left)?;
    f.write_str(op)?;
    write_formula(f, b, table, right)?;
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}

fn write_term(f: &mut fmt::Formatter<'_>, term: &LinearTerm, table: &SymbolTable) -> fmt::Result {
    for (i, addend) in term.0.iter().enumerate() {
        let negative = addend.coef.is_negative();
        match (i, negative) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        let magnitude = addend.coef.abs();
        match addend.symbol {
            Some(id) if magnitude == Rational::from_integer(1) => f.write_str(table.name(id))?,
            Some(id) => {
                write_rational(f, &magnitude)?;
                write!(f, "*{}", table.name(id))?;
            }
            None => write_rational(f, &magnitude)?,
        }
    }
    if term.0.is_empty() {
        f.write_str("0")?;
    }
    Ok(())
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.denom() == &1 || r.is_zero() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Lexicographic stream of all interpretations over a finite subspace.
///
/// Symbols in `over` vary (the first listed is most significant); every other
/// symbol keeps the value it has in `base`. Domain values are visited in declared order.
#[derive(Debug, Clone)]
pub struct Enumeration {
    over: Vec<SymbolId>,
    domains: Vec<Vec<f64>>,
    digits: Vec<usize>,
    current: Vec<f64>,
    done: bool,
}

impl Enumeration {
    pub fn new(table: &SymbolTable, over: &[SymbolId], base: &[f64]) -> Result<Self> {
        let domains = over
            .iter()
            .map(|&id| {
                table
                    .domain(id)
                    .values()
                    .ok_or_else(|| Error::NotEnumerable(table.name(id).to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut current = base.to_vec();
        current.resize(table.len(), 0.0);
        for (&id, dom) in over.iter().zip(&domains) {
            current[id.0] = dom[0];
        }
        Ok(Self {
            over: over.to_vec(),
            digits: vec![0; over.len()],
            domains,
            current,
            done: false,
        })
    }

    /// Number of interpretations the stream yields.
    pub fn cardinality(&self) -> u128 {
        self.domains.iter().map(|d| d.len() as u128).product()
    }

    /// Visit every point without allocating; `visit` sees the full value vector.
    pub fn for_each_values(mut self, mut visit: impl FnMut(&[f64])) {
        while !self.done {
            visit(&self.current);
            self.advance();
        }
    }

    fn advance(&mut self) {
        for pos in (0..self.over.len()).rev() {
            self.digits[pos] += 1;
            if self.digits[pos] < self.domains[pos].len() {
                self.current[self.over[pos].0] = self.domains[pos][self.digits[pos]];
                return;
            }
            self.digits[pos] = 0;
            self.current[self.over[pos].0] = self.domains[pos][0];
        }
        self.done = true;
    }
}

impl Iterator for Enumeration {
    type Item = Interpretation;

    fn next(&mut self) -> Option<Interpretation> {
        if self.done {
            return None;
        }
        let out = Interpretation::from_values_unchecked(self.current.clone());
        self.advance();
        Some(out)
    }
}

/// All interpretations of a table whose symbols all have finite domains.
pub fn enumerate_interpretations(table: &SymbolTable) -> Result<Enumeration> {
    let all: Vec<_> = table.ids().collect();
    Enumeration::new(table, &all, &[])
}
