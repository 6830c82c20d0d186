//! Semantic functions mapping a formula and an interpretation to a truth value,
//! and the logic functions that select which values count.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::ast::{Domain, Formula, Interpretation, LinearComparison, LinearTerm, SymbolTable};
use crate::error::{Error, Result};

/// Absolute tolerance used when comparing semantic values for equality.
pub const VALUE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    Lukasiewicz,
    Goedel,
    Product,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Lukasiewicz, TNorm::Goedel, TNorm::Product];

    #[inline]
    pub fn and(self, x: f64, y: f64) -> f64 {
        match self {
            TNorm::Lukasiewicz => (x + y - 1.0).max(0.0),
            TNorm::Goedel => x.min(y),
            TNorm::Product => x * y,
        }
    }

    #[inline]
    pub fn or(self, x: f64, y: f64) -> f64 {
        match self {
            TNorm::Lukasiewicz => (x + y).min(1.0),
            TNorm::Goedel => x.max(y),
            TNorm::Product => x + y - x * y,
        }
    }

    #[inline]
    pub fn not(self, x: f64) -> f64 {
        match self {
            TNorm::Goedel => {
                if x == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            TNorm::Lukasiewicz | TNorm::Product => 1.0 - x,
        }
    }

    /// Residuum of the t-norm.
    #[inline]
    pub fn implies(self, x: f64, y: f64) -> f64 {
        match self {
            TNorm::Lukasiewicz => (1.0 - x + y).min(1.0),
            TNorm::Goedel => {
                if x <= y {
                    1.0
                } else {
                    y
                }
            }
            TNorm::Product => {
                if x <= y {
                    1.0
                } else {
                    y / x
                }
            }
        }
    }

    /// Biconditional as the conjunction of both implications.
    #[inline]
    pub fn iff(self, x: f64, y: f64) -> f64 {
        self.and(self.implies(x, y), self.implies(y, x))
    }

    pub fn name(self) -> &'static str {
        match self {
            TNorm::Lukasiewicz => "lukasiewicz",
            TNorm::Goedel => "goedel",
            TNorm::Product => "product",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    Boolean,
    Fuzzy(TNorm),
}

impl Semantics {
    pub fn name(self) -> &'static str {
        match self {
            Semantics::Boolean => "boolean",
            Semantics::Fuzzy(t) => t.name(),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "boolean" => Semantics::Boolean,
            "lukasiewicz" => Semantics::Fuzzy(TNorm::Lukasiewicz),
            "goedel" | "godel" => Semantics::Fuzzy(TNorm::Goedel),
            "product" => Semantics::Fuzzy(TNorm::Product),
            _ => return None,
        })
    }

    pub fn is_fuzzy(self) -> bool {
        matches!(self, Semantics::Fuzzy(_))
    }

    /// Whether a symbol with this domain may be used as an atom.
    pub fn accepts_atom(self, domain: &Domain) -> bool {
        match self {
            Semantics::Boolean => *domain == Domain::Boolean,
            Semantics::Fuzzy(_) => domain.is_atomic(),
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Semantics {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Check that `f` can be evaluated under `sem` over `table`.
pub fn check_formula(sem: Semantics, f: &Formula, table: &SymbolTable) -> Result<()> {
    f.validate(table)?;
    check_atoms(sem, f, table)
}

fn check_atoms(sem: Semantics, f: &Formula, table: &SymbolTable) -> Result<()> {
    match f {
        Formula::Atom(id) => {
            let sym = table.get(*id);
            if !sem.accepts_atom(&sym.domain) {
                return Err(Error::DomainMismatch {
                    symbol: sym.name.clone(),
                    detail: format!("{} atom under {} semantics", sym.domain, sem.name()),
                });
            }
            Ok(())
        }
        Formula::True | Formula::False | Formula::LinCmp(_) => Ok(()),
        Formula::Not(a) => check_atoms(sem, a, table),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            check_atoms(sem, a, table)?;
            check_atoms(sem, b, table)
        }
    }
}

/// Check the restriction of `values` to the formula's symbols.
pub(crate) fn check_values(f: &Formula, table: &SymbolTable, values: &[f64]) -> Result<()> {
    for id in f.free_symbols() {
        let sym = table.get(id);
        let v = *values
            .get(id.0)
            .ok_or_else(|| Error::MissingAssignment(sym.name.clone()))?;
        if !sym.domain.contains(v) {
            return Err(Error::ValueOutOfDomain {
                symbol: sym.name.clone(),
                value: v,
            });
        }
    }
    Ok(())
}

/// Evaluate `f` at `w`; Boolean semantics yields exactly 0 or 1, fuzzy semantics a value in [0, 1].
pub fn eval(sem: Semantics, f: &Formula, table: &SymbolTable, w: &Interpretation) -> Result<f64> {
    check_formula(sem, f, table)?;
    check_values(f, table, w.values())?;
    Ok(eval_unchecked(sem, f, table, w.values()))
}

/// Evaluation without domain checks; callers validate once up front.
pub(crate) fn eval_unchecked(
    sem: Semantics,
    f: &Formula,
    table: &SymbolTable,
    values: &[f64],
) -> f64 {
    match sem {
        Semantics::Boolean => {
            if eval_bool(f, table, values) {
                1.0
            } else {
                0.0
            }
        }
        Semantics::Fuzzy(t) => eval_fuzzy(t, f, table, values),
    }
}

fn eval_bool(f: &Formula, table: &SymbolTable, values: &[f64]) -> bool {
    match f {
        Formula::Atom(id) => values[id.0] == 1.0,
        Formula::True => true,
        Formula::False => false,
        Formula::Not(a) => !eval_bool(a, table, values),
        Formula::And(a, b) => eval_bool(a, table, values) && eval_bool(b, table, values),
        Formula::Or(a, b) => eval_bool(a, table, values) || eval_bool(b, table, values),
        // a -> b is !a | b under two-valued semantics
        Formula::Implies(a, b) => !eval_bool(a, table, values) || eval_bool(b, table, values),
        Formula::Iff(a, b) => eval_bool(a, table, values) == eval_bool(b, table, values),
        Formula::LinCmp(c) => comparison_holds(c, table, values),
    }
}

fn eval_fuzzy(t: TNorm, f: &Formula, table: &SymbolTable, values: &[f64]) -> f64 {
    match f {
        Formula::Atom(id) => values[id.0],
        Formula::True => 1.0,
        Formula::False => 0.0,
        Formula::Not(a) => t.not(eval_fuzzy(t, a, table, values)),
        Formula::And(a, b) => t.and(
            eval_fuzzy(t, a, table, values),
            eval_fuzzy(t, b, table, values),
        ),
        Formula::Or(a, b) => t.or(
            eval_fuzzy(t, a, table, values),
            eval_fuzzy(t, b, table, values),
        ),
        Formula::Implies(a, b) => t.implies(
            eval_fuzzy(t, a, table, values),
            eval_fuzzy(t, b, table, values),
        ),
        Formula::Iff(a, b) => t.iff(
            eval_fuzzy(t, a, table, values),
            eval_fuzzy(t, b, table, values),
        ),
        Formula::LinCmp(c) => {
            if comparison_holds(c, table, values) {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Exact rational comparison; finite-set values map back to their declared rationals.
pub(crate) fn comparison_holds(c: &LinearComparison, table: &SymbolTable, values: &[f64]) -> bool {
    let lhs = term_value(&c.lhs, table, values);
    let rhs = term_value(&c.rhs, table, values);
    c.cmp.holds(&lhs, &rhs)
}

fn term_value(term: &LinearTerm, table: &SymbolTable, values: &[f64]) -> BigRational {
    let big = |r: &crate::ast::Rational| {
        BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
    };
    term.0.iter().fold(BigRational::zero(), |acc, addend| {
        let coef = big(&addend.coef);
        match addend.symbol {
            None => acc + coef,
            Some(id) => {
                let v = values[id.0];
                let exact = match table.domain(id).exact_value(v) {
                    Some(r) => big(&r),
                    None => BigRational::from_float(v).expect("finite value"),
                };
                acc + coef * exact
            }
        }
    })
}

/// Selection set of a value-set logic function.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueSet {
    Finite(Vec<f64>),
    Interval { lo: f64, hi: f64 },
}

impl ValueSet {
    pub fn contains(&self, v: f64) -> bool {
        match self {
            ValueSet::Finite(vs) => vs.iter().any(|x| (x - v).abs() <= VALUE_TOLERANCE),
            ValueSet::Interval { lo, hi } => *lo <= v && v <= *hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicFn {
    /// `l(φ, ω) = φ(ω)`
    Direct,
    /// `l(φ, ω) = 1` if `φ(ω) > τ`, else 0.
    Threshold(f64),
    /// `l(φ, ω) = φ(ω)` if it lies in the selection set, else 0.
    ValueSet(ValueSet),
}

impl LogicFn {
    pub fn threshold(tau: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::InvalidParameter(format!(
                "threshold {tau} not in [0, 1)"
            )));
        }
        Ok(LogicFn::Threshold(tau))
    }

    pub fn value_set(set: ValueSet) -> Result<Self> {
        match &set {
            ValueSet::Finite(vs) if vs.iter().any(|v| !(0.0..=1.0).contains(v)) => Err(
                Error::InvalidParameter("selection values must lie in [0, 1]".into()),
            ),
            ValueSet::Interval { lo, hi } if !(0.0 <= *lo && lo <= hi && *hi <= 1.0) => {
                Err(Error::InvalidParameter(format!(
                    "selection interval [{lo}, {hi}] not within [0, 1]"
                )))
            }
            _ => Ok(LogicFn::ValueSet(set)),
        }
    }

    /// Apply to an already-computed semantic value.
    #[inline]
    pub fn select(&self, v: f64) -> f64 {
        match self {
            LogicFn::Direct => v,
            LogicFn::Threshold(tau) => {
                if v > *tau {
                    1.0
                } else {
                    0.0
                }
            }
            LogicFn::ValueSet(set) => {
                if set.contains(v) {
                    v
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            LogicFn::Direct => "direct".into(),
            LogicFn::Threshold(t) => format!("threshold({t})"),
            LogicFn::ValueSet(ValueSet::Finite(vs)) => format!("indicator{vs:?}"),
            LogicFn::ValueSet(ValueSet::Interval { lo, hi }) => format!("indicator[{lo}, {hi}]"),
        }
    }
}

pub fn apply_logic_fn(
    l: &LogicFn,
    sem: Semantics,
    f: &Formula,
    table: &SymbolTable,
    w: &Interpretation,
) -> Result<f64> {
    Ok(l.select(eval(sem, f, table, w)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn hcp(domain: Domain) -> SymbolTable {
        SymbolTable::from_decls([("h", domain.clone()), ("c", domain.clone()), ("p", domain)])
            .unwrap()
    }

    // Hand-unrolled Łukasiewicz value of h -> (c | p), written independently of `eval`.
    fn running_example_lukasiewicz(h: f64, c: f64, p: f64) -> f64 {
        let disj = f64::min(1.0, c + p);
        f64::min(1.0, 1.0 - h + disj)
    }

    #[test]
    fn boolean_running_example() {
        let t = hcp(Domain::Boolean);
        let f = parse_formula("h -> (c | p)", &t).unwrap();
        let w = t
            .interpretation([("h", 1.0), ("c", 1.0), ("p", 0.0)])
            .unwrap();
        assert_eq!(eval(Semantics::Boolean, &f, &t, &w).unwrap(), 1.0);
        assert_eq!(
            apply_logic_fn(&LogicFn::Direct, Semantics::Boolean, &f, &t, &w).unwrap(),
            1.0
        );
        let falsifier = t
            .interpretation([("h", 1.0), ("c", 0.0), ("p", 0.0)])
            .unwrap();
        assert_eq!(eval(Semantics::Boolean, &f, &t, &falsifier).unwrap(), 0.0);
    }

    #[test]
    fn lukasiewicz_running_example() {
        let t = hcp(Domain::UnitInterval);
        let f = parse_formula("h -> (c | p)", &t).unwrap();
        let sem = Semantics::Fuzzy(TNorm::Lukasiewicz);
        let w = t
            .interpretation([("h", 1.0), ("c", 0.5), ("p", 0.5)])
            .unwrap();
        assert_eq!(eval(sem, &f, &t, &w).unwrap(), 1.0);

        let w = t
            .interpretation([("h", 1.0), ("c", 0.3), ("p", 0.4)])
            .unwrap();
        let oracle = running_example_lukasiewicz(1.0, 0.3, 0.4);
        assert!((oracle - 0.7).abs() < VALUE_TOLERANCE);
        assert!((eval(sem, &f, &t, &w).unwrap() - oracle).abs() < VALUE_TOLERANCE);
    }

    #[test]
    fn linear_comparison_over_plus_minus_one() {
        let pm = Domain::finite_set(vec![(-1).into(), 1.into()]).unwrap();
        let t = hcp(pm);
        let f = parse_formula("h = 1 -> (c + p >= 0)", &t).unwrap();
        // Fails only when h = 1 and c = p = -1.
        let worlds = crate::ast::enumerate_interpretations(&t).unwrap();
        let mut models = 0;
        for w in worlds {
            let v = eval(Semantics::Boolean, &f, &t, &w).unwrap();
            let expected =
                !(w.values()[0] == 1.0 && w.values()[1] == -1.0 && w.values()[2] == -1.0);
            assert_eq!(v == 1.0, expected);
            models += v as usize;
        }
        assert_eq!(models, 7);
    }

    #[test]
    fn exact_comparison_with_thirds() {
        let thirds = Domain::finite_set(vec![
            crate::ast::Rational::new(1, 3),
            crate::ast::Rational::new(2, 3),
        ])
        .unwrap();
        let t = SymbolTable::from_decls([("x", thirds.clone()), ("y", thirds)]).unwrap();
        let f = parse_formula("x + y = 1", &t).unwrap();
        let w = t
            .interpretation([("x", 1.0 / 3.0), ("y", 2.0 / 3.0)])
            .unwrap();
        assert_eq!(eval(Semantics::Boolean, &f, &t, &w).unwrap(), 1.0);
        // Comparisons stay crisp under fuzzy semantics.
        assert_eq!(
            eval(Semantics::Fuzzy(TNorm::Product), &f, &t, &w).unwrap(),
            1.0
        );
    }

    #[test]
    fn bounded_real_comparison() {
        let t = SymbolTable::from_decls([("z", Domain::bounded_real(0.0, 2.0).unwrap())]).unwrap();
        let f = parse_formula("2*z > 3", &t).unwrap();
        let at = |v: f64| {
            eval(
                Semantics::Boolean,
                &f,
                &t,
                &t.interpretation([("z", v)]).unwrap(),
            )
            .unwrap()
        };
        assert_eq!(at(1.5), 0.0);
        assert_eq!(at(1.5000001), 1.0);
    }

    #[test]
    fn domain_mismatch() {
        let t = hcp(Domain::UnitInterval);
        let f = parse_formula("h", &t).unwrap();
        let w = t
            .interpretation([("h", 1.0), ("c", 0.0), ("p", 0.0)])
            .unwrap();
        assert!(matches!(
            eval(Semantics::Boolean, &f, &t, &w),
            Err(Error::DomainMismatch { .. })
        ));
        // Boolean atoms are fine under fuzzy semantics.
        let b = hcp(Domain::Boolean);
        let w = b
            .interpretation([("h", 1.0), ("c", 0.0), ("p", 0.0)])
            .unwrap();
        assert_eq!(
            eval(Semantics::Fuzzy(TNorm::Goedel), &f, &b, &w).unwrap(),
            1.0
        );
    }

    #[test]
    fn threshold_is_strict() {
        assert_eq!(LogicFn::threshold(0.5).unwrap().select(0.7), 1.0);
        assert_eq!(LogicFn::threshold(0.7).unwrap().select(0.7), 0.0);
        assert!(LogicFn::threshold(1.0).is_err());
        assert!(LogicFn::threshold(-0.1).is_err());
    }

    #[test]
    fn value_set_selection() {
        let l = LogicFn::value_set(ValueSet::Interval { lo: 0.5, hi: 0.8 }).unwrap();
        assert_eq!(l.select(0.6), 0.6);
        assert_eq!(l.select(0.9), 0.0);
        let l = LogicFn::value_set(ValueSet::Finite(vec![1.0])).unwrap();
        assert_eq!(l.select(1.0), 1.0);
        assert_eq!(l.select(0.0), 0.0);
        assert!(LogicFn::value_set(ValueSet::Interval { lo: 0.8, hi: 0.5 }).is_err());
    }

    #[test]
    fn goedel_connectives() {
        let g = TNorm::Goedel;
        assert_eq!(g.not(0.0), 1.0);
        assert_eq!(g.not(0.2), 0.0);
        assert_eq!(g.implies(0.3, 0.4), 1.0);
        assert_eq!(g.implies(0.5, 0.4), 0.4);
        assert_eq!(TNorm::Product.implies(0.5, 0.25), 0.5);
    }
}
