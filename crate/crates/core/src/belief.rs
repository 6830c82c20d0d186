//! Belief functions: parametrised nonnegative weights over interpretations.

use serde::Serialize;

use crate::ast::{Domain, Formula, Interpretation, SymbolId, SymbolTable, Theory};
use crate::error::{Error, Result};
use crate::integrator::{integrate, MeasureSpec, Space};
use crate::semantics::{check_formula, eval_unchecked, Semantics};

/// Product of independent Bernoulli factors, one per Boolean atom.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentBernoulli {
    /// Sorted by symbol id; covers every Boolean symbol of the table.
    probs: Vec<(SymbolId, f64)>,
}

impl IndependentBernoulli {
    pub fn new(
        table: &SymbolTable,
        probs: impl IntoIterator<Item = (SymbolId, f64)>,
    ) -> Result<Self> {
        let mut by_id: Vec<Option<f64>> = vec![None; table.len()];
        for (id, p) in probs {
            if id.0 >= table.len() {
                return Err(Error::UndeclaredSymbol(format!("#{}", id.0)));
            }
            let sym = table.get(id);
            if sym.domain != Domain::Boolean {
                return Err(Error::DomainMismatch {
                    symbol: sym.name.clone(),
                    detail: "Bernoulli probabilities need a Boolean symbol".into(),
                });
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "probability {p} for `{}` not in [0, 1]",
                    sym.name
                )));
            }
            by_id[id.0] = Some(p);
        }
        let mut out = Vec::new();
        for sym in table.iter().filter(|s| s.domain == Domain::Boolean) {
            let p =
                by_id[sym.index.0].ok_or_else(|| Error::MissingProbability(sym.name.clone()))?;
            out.push((sym.index, p));
        }
        Ok(Self { probs: out })
    }

    pub fn from_names<'a>(
        table: &SymbolTable,
        probs: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self> {
        let pairs = probs
            .into_iter()
            .map(|(n, p)| {
                table
                    .lookup(n)
                    .map(|id| (id, p))
                    .ok_or_else(|| Error::UndeclaredSymbol(n.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(table, pairs)
    }

    pub fn probs(&self) -> &[(SymbolId, f64)] {
        &self.probs
    }

    pub fn prob(&self, id: SymbolId) -> Option<f64> {
        self.probs.iter().find(|(s, _)| *s == id).map(|(_, p)| *p)
    }

    /// Probabilities indexed by symbol id; non-Boolean slots are `NaN`.
    pub fn dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![f64::NAN; len];
        for &(id, p) in &self.probs {
            out[id.0] = p;
        }
        out
    }

    pub(crate) fn with_params(&self, theta: &[f64]) -> Self {
        Self {
            probs: self
                .probs
                .iter()
                .zip(theta)
                .map(|(&(id, _), &p)| (id, p))
                .collect(),
        }
    }

    /// Marginal over `ids`; the other factors sum to one and are dropped.
    pub(crate) fn restrict(&self, ids: &[SymbolId]) -> Self {
        Self {
            probs: self
                .probs
                .iter()
                .filter(|(id, _)| ids.contains(id))
                .copied()
                .collect(),
        }
    }

    #[inline]
    pub(crate) fn weight_values(&self, values: &[f64]) -> f64 {
        self.probs
            .iter()
            .map(|&(id, p)| if values[id.0] == 1.0 { p } else { 1.0 - p })
            .product()
    }
}

/// Recorded normalizing constant of a log-linear belief.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalizer {
    pub z: f64,
    pub std_error: Option<f64>,
}

/// `exp(Σ λ_i φ_i(ω))`, optionally divided by its normalizing constant.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinear {
    theory: Theory,
    weights: Vec<f64>,
    semantics: Semantics,
    base_measure: MeasureSpec,
    /// The full symbol set the distribution ranges over.
    space: Vec<SymbolId>,
    normalizer: Option<Normalizer>,
}

impl LogLinear {
    pub fn new(
        table: &SymbolTable,
        theory: Theory,
        weights: Vec<f64>,
        semantics: Semantics,
        base_measure: MeasureSpec,
    ) -> Result<Self> {
        if weights.len() != theory.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} sentences",
                weights.len(),
                theory.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight {w} is not finite")));
        }
        for phi in theory.sentences() {
            check_formula(semantics, phi, table)?;
        }
        Ok(Self {
            theory,
            weights,
            semantics,
            base_measure,
            space: table.ids().collect(),
            normalizer: None,
        })
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn base_measure(&self) -> &MeasureSpec {
        &self.base_measure
    }

    pub fn normalizer(&self) -> Option<Normalizer> {
        self.normalizer
    }

    pub(crate) fn with_params(&self, theta: &[f64]) -> Self {
        Self {
            weights: theta.to_vec(),
            normalizer: None,
            ..self.clone()
        }
    }

    /// `Σ λ_i φ_i(ω)`
    #[inline]
    pub(crate) fn energy(&self, table: &SymbolTable, values: &[f64]) -> f64 {
        self.theory
            .sentences()
            .iter()
            .zip(&self.weights)
            .map(|(phi, lambda)| lambda * eval_unchecked(self.semantics, phi, table, values))
            .sum()
    }

    #[inline]
    pub(crate) fn unnormalized(&self, table: &SymbolTable, values: &[f64]) -> f64 {
        self.energy(table, values).exp()
    }

    /// Integrate the unnormalized weight over the base measure and record `Z`.
    pub fn normalize(&self, table: &SymbolTable) -> Result<LogLinear> {
        let space = Space::split(table, &self.space);
        let integral = integrate(table, &space, &[], &self.base_measure, 1, |values, out| {
            out[0] = self.unnormalized(table, values);
        })?;
        let z = integral.values[0];
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::NonFiniteNormalizer(z));
        }
        Ok(LogLinear {
            normalizer: Some(Normalizer {
                z,
                std_error: integral.std_errors().map(|se| se[0]),
            }),
            ..self.clone()
        })
    }
}

/// All mass on a single interpretation; only meaningful inside an integral.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracPoint {
    point: Interpretation,
}

impl DiracPoint {
    pub fn new(table: &SymbolTable, point: Interpretation) -> Result<Self> {
        // re-validate against this table
        let point = Interpretation::new(table, point.values().to_vec())?;
        Ok(Self { point })
    }

    pub fn point(&self) -> &Interpretation {
        &self.point
    }
}

/// Piecewise-linear membership curve on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipCurve {
    knots: Vec<(f64, f64)>,
}

impl MembershipCurve {
    /// Knots need strictly increasing `x` starting at 0 and ending at 1, with values in `[0, 1]`.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("membership curve: {msg}")));
        if knots.len() < 2 {
            return bad("needs at least two knots");
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return bad("knots must start at x=0 and end at x=1");
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return bad("knot positions must be strictly increasing");
        }
        if knots.iter().any(|&(_, y)| !(0.0..=1.0).contains(&y)) {
            return bad("values must lie in [0, 1]");
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn at(&self, x: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|&(kx, _)| kx <= x).clamp(1, k.len() - 1);
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        y0 + t * (y1 - y0)
    }
}

/// Fuzzy-set belief `∏_s curve_s(ω(s))^{w_s}` over fuzzy interpretations.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyMembership {
    curves: Vec<(SymbolId, MembershipCurve, f64)>,
}

impl FuzzyMembership {
    pub fn new(table: &SymbolTable, curves: Vec<(SymbolId, MembershipCurve, f64)>) -> Result<Self> {
        for (id, _, exponent) in &curves {
            let sym = table.get(*id);
            if !sym.domain.is_atomic() {
                return Err(Error::DomainMismatch {
                    symbol: sym.name.clone(),
                    detail: "membership curves need a Boolean or unit-interval symbol".into(),
                });
            }
            if !(exponent.is_finite() && *exponent >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "curve weight {exponent} must be >= 0"
                )));
            }
        }
        let mut curves = curves;
        curves.sort_by_key(|(id, _, _)| *id);
        if curves.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("two curves for one symbol".into()));
        }
        Ok(Self { curves })
    }

    pub fn curves(&self) -> &[(SymbolId, MembershipCurve, f64)] {
        &self.curves
    }

    #[inline]
    pub(crate) fn weight_values(&self, values: &[f64]) -> f64 {
        self.curves
            .iter()
            .map(|(id, c, w)| {
                let m = c.at(values[id.0]);
                if *w == 1.0 {
                    m
                } else {
                    m.powf(*w)
                }
            })
            .product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Belief {
    Bernoulli(IndependentBernoulli),
    LogLinear(LogLinear),
    Dirac(DiracPoint),
    FuzzySet(FuzzyMembership),
}

impl Belief {
    pub fn family(&self) -> &'static str {
        match self {
            Belief::Bernoulli(_) => "bernoulli",
            Belief::LogLinear(_) => "loglinear",
            Belief::Dirac(_) => "dirac",
            Belief::FuzzySet(_) => "fuzzyset",
        }
    }

    /// Symbols the belief puts weight on.
    pub fn support(&self, table: &SymbolTable) -> Vec<SymbolId> {
        match self {
            Belief::Bernoulli(b) => b.probs.iter().map(|(id, _)| *id).collect(),
            Belief::LogLinear(b) => b.space.clone(),
            Belief::Dirac(_) => table.ids().collect(),
            Belief::FuzzySet(b) => b.curves.iter().map(|(id, _, _)| *id).collect(),
        }
    }

    /// Parameter vector θ in a fixed order: probabilities, weights λ, or point coordinates.
    pub fn params(&self) -> Vec<f64> {
        match self {
            Belief::Bernoulli(b) => b.probs.iter().map(|(_, p)| *p).collect(),
            Belief::LogLinear(b) => b.weights.clone(),
            Belief::Dirac(d) => d.point.values().to_vec(),
            Belief::FuzzySet(f) => f.curves.iter().map(|(_, _, w)| *w).collect(),
        }
    }

    /// Replace θ; the result is validated like a freshly built belief.
    pub fn with_params(&self, table: &SymbolTable, theta: &[f64]) -> Result<Belief> {
        let expected = self.params().len();
        if theta.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "expected {expected} parameters, got {}",
                theta.len()
            )));
        }
        Ok(match self {
            Belief::Bernoulli(b) => {
                let next = b.with_params(theta);
                Belief::Bernoulli(IndependentBernoulli::new(table, next.probs)?)
            }
            Belief::LogLinear(b) => {
                let next = b.with_params(theta);
                Belief::LogLinear(LogLinear::new(
                    table,
                    next.theory,
                    next.weights,
                    next.semantics,
                    next.base_measure,
                )?)
            }
            Belief::Dirac(_) => Belief::Dirac(DiracPoint::new(
                table,
                Interpretation::new(table, theta.to_vec())?,
            )?),
            Belief::FuzzySet(f) => Belief::FuzzySet(FuzzyMembership::new(
                table,
                f.curves
                    .iter()
                    .zip(theta)
                    .map(|((id, c, _), w)| (*id, c.clone(), *w))
                    .collect(),
            )?),
        })
    }

    /// Unnormalized weight on raw values; callers have validated the values.
    #[inline]
    pub(crate) fn raw_weight(&self, table: &SymbolTable, values: &[f64]) -> f64 {
        match self {
            Belief::Bernoulli(b) => b.weight_values(values),
            Belief::LogLinear(b) => b.unnormalized(table, values),
            Belief::FuzzySet(f) => f.weight_values(values),
            Belief::Dirac(_) => unreachable!("Dirac beliefs are collapsed before integration"),
        }
    }
}

/// `b_θ(φ, ω)`. The formula argument is accepted for every family; none of the
/// families here reads it (a log-linear belief carries its own theory).
pub fn belief_weight(
    b: &Belief,
    table: &SymbolTable,
    _f: &Formula,
    w: &Interpretation,
) -> Result<f64> {
    let values = Interpretation::new(table, w.values().to_vec())?;
    let values = values.values();
    match b {
        Belief::Dirac(_) => Err(Error::AtomicBelief),
        Belief::LogLinear(ll) => {
            let raw = ll.unnormalized(table, values);
            Ok(match ll.normalizer {
                Some(n) => raw / n.z,
                None => raw,
            })
        }
        _ => Ok(b.raw_weight(table, values)),
    }
}
