//! The functional `F(φ) = ∫ l(φ, ω) · b(φ, ω) dm(ω)` over counting and Borel measures.
//!
//! Finite-domain symbols are always aggregated with the counting measure.
//! Continuous symbols (unit interval, bounded reals) are integrated against
//! Lebesgue measure with a midpoint tensor grid or plain Monte Carlo. A Dirac
//! belief never reaches the numeric backends: the integral collapses to a
//! single evaluation at the point.
//!
//! When a conditioning assignment is supplied, the fixed symbols are removed
//! from the integration space and the result is divided by the belief mass of
//! the remaining space, giving `F(φ | evidence)`. Log-linear beliefs are always
//! divided by their mass under the measure in use (self-normalization).

pub mod circuit;
pub mod lebesgue;

use rayon::prelude::*;
use serde::Serialize;

use crate::ast::{
    Domain, Enumeration, Formula, Interpretation, PartialInterpretation, SymbolId, SymbolTable,
};
use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::numeric::{mean_and_std_error, ratio_and_std_error, CounterUniform, KahanSum};
use crate::semantics::{check_formula, eval_unchecked, LogicFn, Semantics};

pub use circuit::{compile, CircuitNode, CompiledCircuit, NodeId};
pub use lebesgue::{lebesgue_simple, MeasurableSet, SimpleTerm};

/// Largest number of continuous dimensions the tensor grid accepts.
pub const MAX_QUADRATURE_DIMS: usize = 8;

pub const DEFAULT_GRID: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureSpec {
    /// Counting measure over finite product domains.
    Counting,
    /// Midpoint rule with `grid` points per continuous dimension.
    #[serde(rename = "quadrature")]
    BorelQuadrature { grid: usize },
    /// Mean of `samples` uniform draws keyed by `seed`.
    #[serde(rename = "montecarlo")]
    BorelMonteCarlo { samples: usize, seed: u64 },
    /// Counting over finite symbols times a Borel rule over continuous ones.
    #[serde(rename = "mixed")]
    ProductMixed { continuous: Box<MeasureSpec> },
}

impl MeasureSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::Counting => Ok(()),
            MeasureSpec::BorelQuadrature { grid } if *grid < 2 => {
                Err(Error::InvalidMeasure(format!("grid {grid} < 2")))
            }
            MeasureSpec::BorelMonteCarlo { samples: 0, .. } => Err(Error::InvalidMeasure(
                "Monte Carlo needs at least one sample".into(),
            )),
            MeasureSpec::ProductMixed { continuous } => match continuous.as_ref() {
                MeasureSpec::BorelQuadrature { .. } | MeasureSpec::BorelMonteCarlo { .. } => {
                    continuous.validate()
                }
                other => Err(Error::InvalidMeasure(format!(
                    "mixed measure needs a Borel rule, got {other:?}"
                ))),
            },
            _ => Ok(()),
        }
    }

    /// The Borel rule for continuous symbols, if any.
    fn borel(&self) -> Option<&MeasureSpec> {
        match self {
            MeasureSpec::Counting => None,
            MeasureSpec::ProductMixed { continuous } => Some(continuous),
            other => Some(other),
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self.borel(), Some(MeasureSpec::BorelMonteCarlo { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Backend {
    #[serde(rename = "enum")]
    Enumeration,
    #[serde(rename = "circuit")]
    Circuit,
    #[serde(rename = "quad")]
    Quadrature,
    #[serde(rename = "mc")]
    MonteCarlo,
    #[serde(rename = "dirac")]
    Dirac,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Enumeration => "enum",
            Backend::Circuit => "circuit",
            Backend::Quadrature => "quad",
            Backend::MonteCarlo => "mc",
            Backend::Dirac => "dirac",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalResult {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub backend: Backend,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub models_visited: Option<u64>,
}

/// Integration variables split by domain kind, each list in symbol order.
#[derive(Debug, Clone, Default)]
pub(crate) struct Space {
    pub finite: Vec<SymbolId>,
    pub continuous: Vec<SymbolId>,
}

impl Space {
    pub fn split(table: &SymbolTable, ids: &[SymbolId]) -> Self {
        let mut space = Space::default();
        for &id in ids {
            if table.domain(id).is_finite() {
                space.finite.push(id);
            } else {
                space.continuous.push(id);
            }
        }
        space
    }
}

pub(crate) struct Integral {
    pub values: Vec<f64>,
    /// Per-component, per-sample contributions (Monte Carlo only).
    pub samples: Option<Vec<Vec<f64>>>,
    pub backend: Backend,
    /// Finite points visited by pure enumeration.
    pub points: Option<u64>,
}

impl Integral {
    pub fn std_errors(&self) -> Option<Vec<f64>> {
        self.samples
            .as_ref()
            .map(|s| s.iter().map(|c| mean_and_std_error(c).1).collect())
    }

    /// Component `num` divided by component `den`, with a delta-method error under MC.
    pub fn ratio(&self, num: usize, den: usize) -> Result<(f64, Option<f64>)> {
        let d = self.values[den];
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::NonFiniteNormalizer(d));
        }
        Ok(match &self.samples {
            Some(s) => {
                let (r, se) = ratio_and_std_error(&s[num], &s[den]);
                (r, Some(se))
            }
            None => (self.values[num] / d, None),
        })
    }
}

fn finite_domains(table: &SymbolTable, ids: &[SymbolId]) -> Vec<Vec<f64>> {
    ids.iter()
        .map(|&id| table.domain(id).values().unwrap())
        .collect()
}

/// Sum `integrand` over every assignment of the finite symbols, in lexicographic order.
#[inline]
fn sum_finite(
    ids: &[SymbolId],
    domains: &[Vec<f64>],
    values: &mut [f64],
    scratch: &mut [f64],
    acc: &mut [KahanSum],
    scale: f64,
    integrand: &(impl Fn(&[f64], &mut [f64]) + ?Sized),
) {
    let mut digits = vec![0usize; ids.len()];
    for (&id, dom) in ids.iter().zip(domains) {
        values[id.0] = dom[0];
    }
    loop {
        integrand(values, scratch);
        for (a, s) in acc.iter_mut().zip(scratch.iter()) {
            a.add(scale * s);
        }
        let mut pos = ids.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < domains[pos].len() {
                values[ids[pos].0] = domains[pos][digits[pos]];
                break;
            }
            digits[pos] = 0;
            values[ids[pos].0] = domains[pos][0];
        }
    }
}

/// Integrate a `k`-component integrand over `space`; other symbols keep their `base` values.
pub(crate) fn integrate<F>(
    table: &SymbolTable,
    space: &Space,
    base: &[f64],
    measure: &MeasureSpec,
    k: usize,
    integrand: F,
) -> Result<Integral>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    measure.validate()?;
    let mut values = base.to_vec();
    values.resize(table.len(), 0.0);
    let domains = finite_domains(table, &space.finite);

    match measure {
        MeasureSpec::Counting => {
            if let Some(&id) = space.continuous.first() {
                return Err(Error::NotEnumerable(table.name(id).to_string()));
            }
            let mut acc = vec![KahanSum::new(); k];
            let mut scratch = vec![0.0; k];
            sum_finite(
                &space.finite,
                &domains,
                &mut values,
                &mut scratch,
                &mut acc,
                1.0,
                &integrand,
            );
            let points = domains.iter().map(|d| d.len() as u64).product();
            return Ok(Integral {
                values: acc.iter().map(KahanSum::total).collect(),
                samples: None,
                backend: Backend::Enumeration,
                points: Some(points),
            });
        }
        MeasureSpec::BorelQuadrature { .. } | MeasureSpec::BorelMonteCarlo { .. } => {
            if let Some(&id) = space.finite.first() {
                return Err(Error::InvalidMeasure(format!(
                    "`{}` has a finite domain; use a mixed measure",
                    table.name(id)
                )));
            }
        }
        MeasureSpec::ProductMixed { .. } => {}
    }

    let bounds: Vec<(f64, f64)> = space
        .continuous
        .iter()
        .map(|&id| table.domain(id).bounds().unwrap())
        .collect();

    match measure.borel().expect("non-counting measure") {
        MeasureSpec::BorelQuadrature { grid } => {
            let dims = space.continuous.len();
            if dims > MAX_QUADRATURE_DIMS {
                return Err(Error::QuadratureDimension {
                    dims,
                    max: MAX_QUADRATURE_DIMS,
                });
            }
            let g = *grid;
            let steps: Vec<f64> = bounds.iter().map(|(lo, hi)| (hi - lo) / g as f64).collect();
            let cell: f64 = steps.iter().product();
            let mut acc = vec![KahanSum::new(); k];
            let mut scratch = vec![0.0; k];
            let mut index = vec![0usize; dims];
            let set_coord = |values: &mut [f64], d: usize, i: usize| {
                values[space.continuous[d].0] = bounds[d].0 + (i as f64 + 0.5) * steps[d];
            };
            for d in 0..dims {
                set_coord(&mut values, d, 0);
            }
            'grid: loop {
                sum_finite(
                    &space.finite,
                    &domains,
                    &mut values,
                    &mut scratch,
                    &mut acc,
                    cell,
                    &integrand,
                );
                let mut d = dims;
                loop {
                    if d == 0 {
                        break 'grid;
                    }
                    d -= 1;
                    index[d] += 1;
                    if index[d] < g {
                        set_coord(&mut values, d, index[d]);
                        break;
                    }
                    index[d] = 0;
                    set_coord(&mut values, d, 0);
                }
            }
            Ok(Integral {
                values: acc.iter().map(KahanSum::total).collect(),
                samples: None,
                backend: Backend::Quadrature,
                points: None,
            })
        }
        MeasureSpec::BorelMonteCarlo { samples, seed } => {
            let n = *samples;
            let dims = space.continuous.len();
            let volume: f64 = bounds.iter().map(|(lo, hi)| hi - lo).product();
            const CHUNK: usize = 4096;
            let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| {
                    let start = c * CHUNK;
                    let end = (start + CHUNK).min(n);
                    let mut rng = CounterUniform::new(*seed, dims);
                    rng.seek(start as u64);
                    let mut values = values.clone();
                    let mut unit = vec![0.0; dims];
                    let mut scratch = vec![0.0; k];
                    let mut out = Vec::with_capacity((end - start) * k);
                    for _ in start..end {
                        rng.next_point(&mut unit);
                        for (d, u) in unit.iter().enumerate() {
                            let (lo, hi) = bounds[d];
                            values[space.continuous[d].0] = lo + u * (hi - lo);
                        }
                        let mut acc = vec![KahanSum::new(); k];
                        sum_finite(
                            &space.finite,
                            &domains,
                            &mut values,
                            &mut scratch,
                            &mut acc,
                            volume,
                            &integrand,
                        );
                        out.extend(acc.iter().map(KahanSum::total));
                    }
                    out
                })
                .collect();
            let mut per_component = vec![Vec::with_capacity(n); k];
            for chunk in &chunks {
                for row in chunk.chunks_exact(k) {
                    for (j, v) in row.iter().enumerate() {
                        per_component[j].push(*v);
                    }
                }
            }
            let values = per_component
                .iter()
                .map(|c| mean_and_std_error(c).0)
                .collect();
            Ok(Integral {
                values,
                samples: Some(per_component),
                backend: Backend::MonteCarlo,
                points: None,
            })
        }
        _ => unreachable!("validated above"),
    }
}

/// Base value vector with the conditioning assignment applied.
fn base_values(table: &SymbolTable, condition: Option<&PartialInterpretation>) -> Result<Vec<f64>> {
    let mut base = vec![0.0; table.len()];
    if let Some(c) = condition {
        c.validate(table)?;
        for (id, v) in c.fixed() {
            base[id.0] = v;
        }
    }
    Ok(base)
}

fn has_evidence(condition: Option<&PartialInterpretation>) -> bool {
    condition.is_some_and(|c| !c.is_empty())
}

/// Integration variables: free symbols of `f` plus the belief's support, minus fixed symbols.
pub(crate) fn integration_space(
    model: &Model,
    f: &Formula,
    condition: Option<&PartialInterpretation>,
) -> Vec<SymbolId> {
    let mut ids = f.free_symbols();
    ids.extend(model.belief().support(model.table()));
    ids.sort_unstable();
    ids.dedup();
    ids.retain(|id| !condition.is_some_and(|c| c.is_fixed(*id)));
    ids
}

/// Collapse of the integral against a Dirac belief: evaluation at the point.
pub(crate) fn dirac_values(
    point: &Interpretation,
    condition: Option<&PartialInterpretation>,
) -> Vec<f64> {
    let mut values = point.values().to_vec();
    if let Some(c) = condition {
        for (id, v) in c.fixed() {
            values[id.0] = v;
        }
    }
    values
}

/// Neurosymbolic inference: `∫ l(φ, ω) b(φ, ω) dm(ω)` over the model's interpretations.
pub fn infer(
    model: &Model,
    l: &LogicFn,
    f: &Formula,
    measure: &MeasureSpec,
    condition: Option<&PartialInterpretation>,
) -> Result<FunctionalResult> {
    let table = model.table();
    let sem = model.semantics();
    check_formula(sem, f, table)?;
    let base = base_values(table, condition)?;

    if let Belief::Dirac(d) = model.belief() {
        let values = dirac_values(d.point(), condition);
        crate::semantics::check_values(f, table, &values)?;
        return Ok(FunctionalResult {
            value: l.select(eval_unchecked(sem, f, table, &values)),
            std_error: None,
            backend: Backend::Dirac,
            models_visited: None,
        });
    }

    // An independent Bernoulli belief is integrated over the query's atoms
    // only: the remaining factors marginalize to one.
    let marginal;
    let (belief, ids) = match model.belief() {
        Belief::Bernoulli(b) => {
            let mut ids = f.free_symbols();
            ids.retain(|id| !condition.is_some_and(|c| c.is_fixed(*id)));
            marginal = Belief::Bernoulli(b.restrict(&ids));
            (&marginal, ids)
        }
        b => (b, integration_space(model, f, condition)),
    };
    let space = Space::split(table, &ids);
    let normalize = match belief {
        Belief::LogLinear(_) => true,
        Belief::Bernoulli(_) => false,
        _ => has_evidence(condition),
    };
    let k = if normalize { 2 } else { 1 };
    let integral = integrate(table, &space, &base, measure, k, |values, out| {
        let w = belief.raw_weight(table, values);
        out[0] = l.select(eval_unchecked(sem, f, table, values)) * w;
        if normalize {
            out[1] = w;
        }
    })?;

    let (value, std_error) = if normalize {
        integral.ratio(0, 1)?
    } else {
        (integral.values[0], integral.std_errors().map(|s| s[0]))
    };
    Ok(FunctionalResult {
        value,
        std_error,
        backend: integral.backend,
        models_visited: integral.points,
    })
}

/// Exact WMC through a compiled circuit.
///
/// Needs Boolean semantics and an independent Bernoulli belief; evidence is
/// applied by pinning the fixed atoms' probabilities to 0 or 1.
pub fn infer_compiled(
    model: &Model,
    l: &LogicFn,
    f: &Formula,
    condition: Option<&PartialInterpretation>,
) -> Result<FunctionalResult> {
    let table = model.table();
    if model.semantics() != Semantics::Boolean {
        return Err(Error::Unsupported(
            "circuit backend needs Boolean semantics".into(),
        ));
    }
    let Belief::Bernoulli(b) = model.belief() else {
        return Err(Error::Unsupported(
            "circuit backend needs an independent Bernoulli belief".into(),
        ));
    };
    check_formula(Semantics::Boolean, f, table)?;
    let base = base_values(table, condition)?;
    let circuit = compile(f, table)?;
    let mut probs = b.dense(table.len());
    if let Some(c) = condition {
        for (id, _) in c.fixed() {
            probs[id.0] = base[id.0];
        }
    }
    let wmc = circuit.wmc(&probs);
    // Boolean values are 0 or 1 and every logic function maps 0 to 0.
    Ok(FunctionalResult {
        value: l.select(1.0) * wmc,
        std_error: None,
        backend: Backend::Circuit,
        models_visited: Some(circuit.len() as u64),
    })
}

/// The model set `{ω | μ_B(φ, ω) = 1}` over every symbol of the table.
pub fn enumerate_models(f: &Formula, table: &SymbolTable) -> Result<Vec<Interpretation>> {
    check_formula(Semantics::Boolean, f, table)?;
    let all: Vec<_> = table.ids().collect();
    let mut models = Vec::new();
    Enumeration::new(table, &all, &[])?.for_each_values(|values| {
        if eval_unchecked(Semantics::Boolean, f, table, values) == 1.0 {
            models.push(Interpretation::from_values_unchecked(values.to_vec()));
        }
    });
    Ok(models)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapResult {
    pub interpretation: Interpretation,
    pub score: f64,
}

/// Interpretation maximizing `l(φ, ω) · b(φ, ω)`.
///
/// Ties go to the first interpretation in enumeration order. Symbols outside
/// the integration space take the first value of their domain (lower bound for
/// intervals). Log-linear scores are normalized over the enumerated space.
pub fn map_inference(
    model: &Model,
    l: &LogicFn,
    f: &Formula,
    condition: Option<&PartialInterpretation>,
) -> Result<MapResult> {
    let table = model.table();
    let sem = model.semantics();
    check_formula(sem, f, table)?;

    if let Belief::Dirac(d) = model.belief() {
        let values = dirac_values(d.point(), condition);
        crate::semantics::check_values(f, table, &values)?;
        return Ok(MapResult {
            score: l.select(eval_unchecked(sem, f, table, &values)),
            interpretation: Interpretation::from_values_unchecked(values),
        });
    }

    let ids = integration_space(model, f, condition);
    if ids.iter().any(|&id| !table.domain(id).is_finite()) {
        return Err(Error::InfiniteMapSpace);
    }
    let mut base = base_values(table, condition)?;
    for sym in table.iter() {
        if !ids.contains(&sym.index) && !condition.is_some_and(|c| c.is_fixed(sym.index)) {
            base[sym.index.0] = match &sym.domain {
                Domain::Boolean | Domain::FiniteSet(_) => sym.domain.values().unwrap()[0],
                d => d.bounds().unwrap().0,
            };
        }
    }

    let belief = model.belief();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut mass = KahanSum::new();
    Enumeration::new(table, &ids, &base)?.for_each_values(|values| {
        let w = belief.raw_weight(table, values);
        mass.add(w);
        let score = l.select(eval_unchecked(sem, f, table, values)) * w;
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((values.to_vec(), score));
        }
    });
    let (values, mut score) = best.expect("enumeration yields at least one point");
    let normalize = matches!(belief, Belief::LogLinear(_)) || has_evidence(condition);
    if normalize {
        let z = mass.total();
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::NonFiniteNormalizer(z));
        }
        score /= z;
    }
    Ok(MapResult {
        interpretation: Interpretation::from_values_unchecked(values),
        score,
    })
}
