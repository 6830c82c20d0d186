//! Parameter gradients of the functional for the differentiable belief families.

use serde::Serialize;

use crate::ast::{Formula, Interpretation, PartialInterpretation, SymbolId, SymbolTable};
use crate::belief::{Belief, IndependentBernoulli};
use crate::error::{Error, Result};
use crate::integrator::{
    integrate, integration_space, CircuitNode, CompiledCircuit, MeasureSpec, Space,
};
use crate::model::Model;
use crate::numeric::mean_and_std_error;
use crate::semantics::{check_formula, comparison_holds, eval_unchecked, LogicFn, TNorm};

/// What the `grad` vector differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradTarget {
    /// `∂F/∂θ`
    Value,
    /// `∂ log F/∂θ`
    LogValue,
}

/// A point where a connective is not differentiable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Kink {
    pub connective: &'static str,
    /// Coordinates whose partial derivative is affected.
    pub symbols: Vec<SymbolId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientResult {
    pub value: f64,
    pub grad: Vec<f64>,
    pub target: GradTarget,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub kinks: Vec<Kink>,
}

/// `∂ WMC / ∂p_s` by one reverse pass, aligned with `b.probs()`.
pub fn grad_wmc(
    circuit: &CompiledCircuit,
    b: &IndependentBernoulli,
    table: &SymbolTable,
) -> GradientResult {
    let probs = b.dense(table.len());
    let val = circuit.node_values(&probs);
    let nodes = circuit.nodes();
    let mut adj = vec![0.0; nodes.len()];
    let mut by_symbol = vec![0.0; table.len()];
    adj[circuit.root()] = 1.0;
    for i in (0..nodes.len()).rev() {
        let a = adj[i];
        if a == 0.0 {
            continue;
        }
        match &nodes[i] {
            CircuitNode::Const(_) => {}
            CircuitNode::Decision { symbol, low, high } => {
                let p = probs[symbol.0];
                by_symbol[symbol.0] += a * (val[*high] - val[*low]);
                adj[*low] += a * (1.0 - p);
                adj[*high] += a * p;
            }
            CircuitNode::And(children) => {
                // prefix/suffix products so zero-valued siblings are handled
                let n = children.len();
                let mut suffix = vec![1.0; n + 1];
                for j in (0..n).rev() {
                    suffix[j] = suffix[j + 1] * val[children[j]];
                }
                let mut prefix = 1.0;
                for (j, c) in children.iter().enumerate() {
                    adj[*c] += a * prefix * suffix[j + 1];
                    prefix *= val[*c];
                }
            }
        }
    }
    GradientResult {
        value: val[circuit.root()],
        grad: b.probs().iter().map(|(id, _)| by_symbol[id.0]).collect(),
        target: GradTarget::Value,
        std_error: None,
        kinks: Vec::new(),
    }
}

/// `∂ log F/∂λ_i = E[φ_i | l] − E[φ_i]` for a log-linear belief, on the backend `measure` selects.
///
/// The first expectation weights interpretations by `l(φ, ω) b(ω)`, the second by `b(ω)`.
/// Under Monte Carlo both share one sample set and errors are delta-method estimates.
pub fn grad_loglinear(
    model: &Model,
    l: &LogicFn,
    f: &Formula,
    measure: &MeasureSpec,
    condition: Option<&PartialInterpretation>,
) -> Result<GradientResult> {
    let Belief::LogLinear(ll) = model.belief() else {
        return Err(Error::Unsupported(
            "log-linear gradient needs a log-linear belief".into(),
        ));
    };
    let table = model.table();
    let sem = model.semantics();
    check_formula(sem, f, table)?;
    let mut base = vec![0.0; table.len()];
    if let Some(c) = condition {
        c.validate(table)?;
        for (id, v) in c.fixed() {
            base[id.0] = v;
        }
    }
    let n = ll.theory().len();
    let space = Space::split(table, &integration_space(model, f, condition));
    // components: [l·w, w, l·φ_i·w (n), φ_i·w (n)]
    let integral = integrate(table, &space, &base, measure, 2 + 2 * n, |values, out| {
        let w = ll.unnormalized(table, values);
        let lv = l.select(eval_unchecked(sem, f, table, values));
        out[0] = lv * w;
        out[1] = w;
        for (i, phi) in ll.theory().sentences().iter().enumerate() {
            let pv = eval_unchecked(ll.semantics(), phi, table, values);
            out[2 + i] = lv * pv * w;
            out[2 + n + i] = pv * w;
        }
    })?;

    let (num, den) = (integral.values[0], integral.values[1]);
    if !(den.is_finite() && den > 0.0) {
        return Err(Error::NonFiniteNormalizer(den));
    }
    if num <= 0.0 {
        return Err(Error::ZeroFunctional);
    }
    let conditional: Vec<f64> = (0..n).map(|i| integral.values[2 + i] / num).collect();
    let marginal: Vec<f64> = (0..n).map(|i| integral.values[2 + n + i] / den).collect();
    let grad = conditional
        .iter()
        .zip(&marginal)
        .map(|(a, b)| a - b)
        .collect();

    let std_error = integral.samples.as_ref().map(|s| {
        (0..n)
            .map(|i| {
                let influence: Vec<f64> = (0..s[0].len())
                    .map(|k| {
                        (s[2 + i][k] - conditional[i] * s[0][k]) / num
                            - (s[2 + n + i][k] - marginal[i] * s[1][k]) / den
                    })
                    .collect();
                mean_and_std_error(&influence).1
            })
            .collect()
    });
    Ok(GradientResult {
        value: num / den,
        grad,
        target: GradTarget::LogValue,
        std_error,
        kinks: Vec::new(),
    })
}

struct Dual {
    value: f64,
    grad: Vec<f64>,
}

struct DiracDiff<'a> {
    table: &'a SymbolTable,
    tnorm: TNorm,
    values: &'a [f64],
    kink_tolerance: f64,
    kinks: Vec<Kink>,
}

impl DiracDiff<'_> {
    fn constant(&self, value: f64) -> Dual {
        Dual {
            value,
            grad: vec![0.0; self.values.len()],
        }
    }

    /// Whether the point lies within tolerance of a switch between pieces
    /// whose first derivatives differ by `dgap`.
    fn near(&self, gap: f64, dgap: &[f64]) -> bool {
        if dgap.iter().all(|d| *d == 0.0) {
            return false;
        }
        let scale = dgap.iter().map(|d| d.abs()).sum::<f64>().max(1.0);
        gap.abs() <= self.kink_tolerance * scale
    }

    fn flag(&mut self, connective: &'static str, f: &Formula) {
        self.kinks.push(Kink {
            connective,
            symbols: f.free_symbols(),
        });
    }

    fn combine(a: &[f64], ca: f64, b: &[f64], cb: f64) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| ca * x + cb * y).collect()
    }

    fn diff(&mut self, f: &Formula) -> Dual {
        match f {
            Formula::Atom(id) => {
                let mut d = self.constant(self.values[id.0]);
                d.grad[id.0] = 1.0;
                d
            }
            Formula::True => self.constant(1.0),
            Formula::False => self.constant(0.0),
            Formula::LinCmp(c) => {
                let holds = comparison_holds(c, self.table, self.values);
                let mut eq = c.clone();
                eq.cmp = crate::ast::Comparator::Eq;
                // piecewise constant, discontinuous on the boundary
                if comparison_holds(&eq, self.table, self.values) {
                    self.flag("comparison", f);
                }
                self.constant(if holds { 1.0 } else { 0.0 })
            }
            Formula::Not(a) => {
                let x = self.diff(a);
                match self.tnorm {
                    TNorm::Goedel => {
                        if self.near(x.value, &x.grad) {
                            self.flag("not", f);
                        }
                        self.constant(self.tnorm.not(x.value))
                    }
                    _ => Dual {
                        value: 1.0 - x.value,
                        grad: x.grad.iter().map(|g| -g).collect(),
                    },
                }
            }
            Formula::And(a, b) => {
                let (x, y) = (self.diff(a), self.diff(b));
                self.and(f, x, y)
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.diff(a), self.diff(b));
                self.or(f, x, y)
            }
            Formula::Implies(a, b) => {
                let (x, y) = (self.diff(a), self.diff(b));
                self.implies(f, x, y)
            }
            Formula::Iff(a, b) => {
                let (x, y) = (self.diff(a), self.diff(b));
                let xy = self.implies(
                    f,
                    Dual {
                        value: x.value,
                        grad: x.grad.clone(),
                    },
                    Dual {
                        value: y.value,
                        grad: y.grad.clone(),
                    },
                );
                let yx = self.implies(f, y, x);
                self.and(f, xy, yx)
            }
        }
    }

    // At a tie between pieces, the first piece listed in the connective's
    // definition is used and the tie is recorded.
    fn and(&mut self, f: &Formula, x: Dual, y: Dual) -> Dual {
        match self.tnorm {
            TNorm::Lukasiewicz => {
                // max(0, x + y - 1)
                let s = x.value + y.value - 1.0;
                let ds = Self::combine(&x.grad, 1.0, &y.grad, 1.0);
                if self.near(s, &ds) {
                    self.flag("and", f);
                }
                if s > 0.0 {
                    Dual { value: s, grad: ds }
                } else {
                    self.constant(0.0)
                }
            }
            TNorm::Goedel => {
                // min(x, y)
                let gap = x.value - y.value;
                if self.near(gap, &Self::combine(&x.grad, 1.0, &y.grad, -1.0)) {
                    self.flag("and", f);
                }
                if x.value <= y.value {
                    x
                } else {
                    y
                }
            }
            TNorm::Product => Dual {
                value: x.value * y.value,
                grad: Self::combine(&x.grad, y.value, &y.grad, x.value),
            },
        }
    }

    fn or(&mut self, f: &Formula, x: Dual, y: Dual) -> Dual {
        match self.tnorm {
            TNorm::Lukasiewicz => {
                // min(1, x + y)
                let s = x.value + y.value;
                let ds = Self::combine(&x.grad, 1.0, &y.grad, 1.0);
                if self.near(s - 1.0, &ds) {
                    self.flag("or", f);
                }
                if s < 1.0 {
                    Dual { value: s, grad: ds }
                } else {
                    self.constant(1.0)
                }
            }
            TNorm::Goedel => {
                // max(x, y)
                let gap = x.value - y.value;
                if self.near(gap, &Self::combine(&x.grad, 1.0, &y.grad, -1.0)) {
                    self.flag("or", f);
                }
                if x.value >= y.value {
                    x
                } else {
                    y
                }
            }
            TNorm::Product => Dual {
                value: x.value + y.value - x.value * y.value,
                grad: Self::combine(&x.grad, 1.0 - y.value, &y.grad, 1.0 - x.value),
            },
        }
    }

    fn implies(&mut self, f: &Formula, x: Dual, y: Dual) -> Dual {
        match self.tnorm {
            TNorm::Lukasiewicz => {
                // min(1, 1 - x + y)
                let s = 1.0 - x.value + y.value;
                let ds = Self::combine(&x.grad, -1.0, &y.grad, 1.0);
                if self.near(s - 1.0, &ds) {
                    self.flag("implies", f);
                }
                if s < 1.0 {
                    Dual { value: s, grad: ds }
                } else {
                    self.constant(1.0)
                }
            }
            TNorm::Goedel | TNorm::Product => {
                // 1 if x <= y, else y (Goedel) or y / x (Product)
                let gap = x.value - y.value;
                if self.near(gap, &Self::combine(&x.grad, 1.0, &y.grad, -1.0)) {
                    self.flag("implies", f);
                }
                if x.value <= y.value {
                    self.constant(1.0)
                } else if self.tnorm == TNorm::Goedel {
                    y
                } else {
                    let inv = 1.0 / x.value;
                    Dual {
                        value: y.value / x.value,
                        grad: Self::combine(&y.grad, inv, &x.grad, -y.value * inv * inv),
                    }
                }
            }
        }
    }
}

/// Gradient of the collapsed value `φ_F(ω_θ)` with respect to the point coordinates.
///
/// Ties between the pieces of a connective use the first listed piece and are
/// reported in `kinks`. Gödel negation of a non-constant value at 0 is a discontinuity and is reported too.
pub fn grad_dirac(
    f: &Formula,
    table: &SymbolTable,
    tnorm: TNorm,
    point: &Interpretation,
) -> Result<GradientResult> {
    grad_dirac_with_tolerance(f, table, tnorm, point, 0.0)
}

/// As [`grad_dirac`], also reporting kinks within `tolerance` (first-order, sup-norm) of the point.
pub fn grad_dirac_with_tolerance(
    f: &Formula,
    table: &SymbolTable,
    tnorm: TNorm,
    point: &Interpretation,
    tolerance: f64,
) -> Result<GradientResult> {
    let sem = crate::semantics::Semantics::Fuzzy(tnorm);
    check_formula(sem, f, table)?;
    crate::semantics::check_values(f, table, point.values())?;
    let mut d = DiracDiff {
        table,
        tnorm,
        values: point.values(),
        kink_tolerance: tolerance,
        kinks: Vec::new(),
    };
    let out = d.diff(f);
    Ok(GradientResult {
        value: out.value,
        grad: out.grad,
        target: GradTarget::Value,
        std_error: None,
        kinks: d.kinks,
    })
}
