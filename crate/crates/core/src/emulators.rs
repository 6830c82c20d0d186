//! Presets reproducing the inference computed by existing neurosymbolic systems.
//!
//! Each preset is a fixed choice of semantics, logic function, belief family
//! and measure. Only the ground propositional core of each system is covered.

use std::fmt;

use serde::Serialize;

use crate::ast::{Domain, Formula, Interpretation, PartialInterpretation, SymbolTable};
use crate::belief::{Belief, IndependentBernoulli};
use crate::error::{Error, Result};
use crate::integrator::{
    compile, infer, infer_compiled, FunctionalResult, MeasureSpec, DEFAULT_GRID,
};
use crate::model::Model;
use crate::semantics::{check_formula, LogicFn, Semantics, TNorm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemPreset {
    SemanticLoss,
    DeepProblogProp,
    NeuraspProp,
    Nmln,
    Ltn,
    Sbr,
    Neupsl,
}

impl SystemPreset {
    pub const ALL: [SystemPreset; 7] = [
        SystemPreset::SemanticLoss,
        SystemPreset::DeepProblogProp,
        SystemPreset::NeuraspProp,
        SystemPreset::Nmln,
        SystemPreset::Ltn,
        SystemPreset::Sbr,
        SystemPreset::Neupsl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemPreset::SemanticLoss => "semantic_loss",
            SystemPreset::DeepProblogProp => "deepproblog_prop",
            SystemPreset::NeuraspProp => "neurasp_prop",
            SystemPreset::Nmln => "nmln",
            SystemPreset::Ltn => "ltn",
            SystemPreset::Sbr => "sbr",
            SystemPreset::Neupsl => "neupsl",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Belief family the preset consumes.
    pub fn belief_family(self) -> &'static str {
        match self {
            SystemPreset::SemanticLoss
            | SystemPreset::DeepProblogProp
            | SystemPreset::NeuraspProp => "bernoulli",
            SystemPreset::Nmln | SystemPreset::Neupsl => "loglinear",
            SystemPreset::Ltn | SystemPreset::Sbr => "dirac",
        }
    }

    fn mismatch(self, detail: impl Into<String>) -> Error {
        Error::PresetMismatch {
            preset: self.name().into(),
            detail: detail.into(),
        }
    }
}

impl Serialize for SystemPreset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl fmt::Display for SystemPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The `(semantics, logic function, belief, measure)` choice a preset ran with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Quadruple {
    pub semantics: String,
    pub logic_fn: String,
    pub belief: String,
    pub measure: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetResult {
    pub preset: SystemPreset,
    #[serde(flatten)]
    pub result: FunctionalResult,
    pub quadruple: Quadruple,
}

fn measure_label(m: &MeasureSpec) -> String {
    match m {
        MeasureSpec::Counting => "counting".into(),
        MeasureSpec::BorelQuadrature { grid } => format!("quadrature(g={grid})"),
        MeasureSpec::BorelMonteCarlo { samples, seed } => {
            format!("montecarlo(n={samples}, seed={seed})")
        }
        MeasureSpec::ProductMixed { continuous } => format!("mixed({})", measure_label(continuous)),
    }
}

fn require_boolean_atoms(p: SystemPreset, f: &Formula, table: &SymbolTable) -> Result<()> {
    for id in f.free_symbols() {
        if table.domain(id) != &Domain::Boolean {
            return Err(p.mismatch(format!("`{}` is not a Boolean atom", table.name(id))));
        }
    }
    Ok(())
}

/// The Borel rule a fuzzy-expectation preset integrates with.
fn fuzzy_measure(
    p: SystemPreset,
    table: &SymbolTable,
    measure: Option<&MeasureSpec>,
) -> Result<MeasureSpec> {
    let rule = match measure {
        None => MeasureSpec::BorelQuadrature { grid: DEFAULT_GRID },
        Some(MeasureSpec::Counting) => {
            return Err(p.mismatch("needs a Borel measure over the fuzzy cube"))
        }
        Some(MeasureSpec::ProductMixed { continuous }) => continuous.as_ref().clone(),
        Some(m) => m.clone(),
    };
    if table.iter().any(|s| s.domain.is_finite()) {
        Ok(MeasureSpec::ProductMixed {
            continuous: Box::new(rule),
        })
    } else {
        Ok(rule)
    }
}

/// What a preset resolves to for a given model: the model under the preset's
/// semantics, the measure, and whether the compiled circuit computes it.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetPlan {
    pub model: Model,
    pub measure: MeasureSpec,
    pub compiled: bool,
    pub quadruple: Quadruple,
}

/// Resolve preset `p` against `model`.
///
/// The three propositional probabilistic presets share the compiled WMC path.
/// `ltn` and `sbr` keep the model's t-norm when it is fuzzy and fall back to
/// Łukasiewicz; `neupsl` always uses Łukasiewicz. `measure` is only consulted
/// by `neupsl`, which defaults to midpoint quadrature.
pub fn plan_preset(
    p: SystemPreset,
    model: &Model,
    f: &Formula,
    measure: Option<&MeasureSpec>,
) -> Result<PresetPlan> {
    let table = model.table();
    let belief = model.belief();
    if belief.family() != p.belief_family() {
        return Err(p.mismatch(format!(
            "needs a {} belief, model has {}",
            p.belief_family(),
            belief.family()
        )));
    }
    let (model, measure, compiled, measure_name) = match (p, belief) {
        (
            SystemPreset::SemanticLoss | SystemPreset::DeepProblogProp | SystemPreset::NeuraspProp,
            _,
        ) => {
            require_boolean_atoms(p, f, table)?;
            let m = model.with_semantics(Semantics::Boolean)?;
            (m, MeasureSpec::Counting, true, "counting".to_string())
        }
        (SystemPreset::Nmln, Belief::LogLinear(ll)) => {
            require_boolean_atoms(p, f, table)?;
            let m = model.loglinear_with_semantics(ll, Semantics::Boolean)?;
            (m, MeasureSpec::Counting, false, "counting".to_string())
        }
        (SystemPreset::Ltn | SystemPreset::Sbr, _) => {
            let sem = match model.semantics() {
                s @ Semantics::Fuzzy(_) => s,
                Semantics::Boolean => Semantics::Fuzzy(TNorm::Lukasiewicz),
            };
            (
                model.with_semantics(sem)?,
                MeasureSpec::Counting,
                false,
                "dirac".to_string(),
            )
        }
        (SystemPreset::Neupsl, Belief::LogLinear(ll)) => {
            let m = model.loglinear_with_semantics(ll, Semantics::Fuzzy(TNorm::Lukasiewicz))?;
            let measure = fuzzy_measure(p, table, measure)?;
            let name = measure_label(&measure);
            (m, measure, false, name)
        }
        _ => unreachable!("belief family checked above"),
    };
    let quadruple = Quadruple {
        semantics: model.semantics().name().into(),
        logic_fn: LogicFn::Direct.name(),
        belief: p.belief_family().into(),
        measure: measure_name,
    };
    Ok(PresetPlan {
        model,
        measure,
        compiled,
        quadruple,
    })
}

/// Run `f` through the computation of preset `p` with the model's parameters.
pub fn run_preset(
    p: SystemPreset,
    model: &Model,
    f: &Formula,
    measure: Option<&MeasureSpec>,
    condition: Option<&PartialInterpretation>,
) -> Result<PresetResult> {
    let plan = plan_preset(p, model, f, measure)?;
    let direct = LogicFn::Direct;
    let result = if plan.compiled {
        infer_compiled(&plan.model, &direct, f, condition)?
    } else {
        infer(&plan.model, &direct, f, &plan.measure, condition)?
    };
    Ok(PresetResult {
        preset: p,
        result,
        quadruple: plan.quadruple,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemanticLoss {
    /// `-ln F`; infinite when saturated.
    pub loss: f64,
    pub wmc: f64,
    /// Set when `F = 0`.
    pub saturated: bool,
}

/// `-ln WMC(f)` under independent Bernoulli probabilities, on the compiled circuit.
pub fn semantic_loss(
    f: &Formula,
    table: &SymbolTable,
    b: &IndependentBernoulli,
) -> Result<SemanticLoss> {
    check_formula(Semantics::Boolean, f, table)?;
    let circuit = compile(f, table)?;
    let wmc = circuit.wmc(&b.dense(table.len()));
    Ok(if wmc > 0.0 {
        SemanticLoss {
            loss: -wmc.ln(),
            wmc,
            saturated: false,
        }
    } else {
        SemanticLoss {
            loss: f64::INFINITY,
            wmc,
            saturated: true,
        }
    })
}

/// Normalized log-linear probability of one interpretation under Boolean semantics and counting.
pub fn nmln_probability(model: &Model, w: &Interpretation) -> Result<f64> {
    let Belief::LogLinear(ll) = model.belief() else {
        return Err(SystemPreset::Nmln.mismatch("needs a loglinear belief"));
    };
    let table = model.table();
    let boolean = crate::belief::LogLinear::new(
        table,
        ll.theory().clone(),
        ll.weights().to_vec(),
        Semantics::Boolean,
        MeasureSpec::Counting,
    )?
    .normalize(table)?;
    crate::belief::belief_weight(&Belief::LogLinear(boolean), table, &Formula::True, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Theory;
    use crate::belief::{DiracPoint, LogLinear};
    use crate::parser::parse_formula;

    fn table(d: Domain) -> SymbolTable {
        SymbolTable::from_decls(["h", "c", "p"].map(|n| (n, d.clone()))).unwrap()
    }

    fn bernoulli_model() -> Model {
        let t = table(Domain::Boolean);
        let b = IndependentBernoulli::from_names(&t, [("h", 0.8), ("c", 0.5), ("p", 0.5)]).unwrap();
        Model::new(t, Semantics::Boolean, Belief::Bernoulli(b)).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for p in SystemPreset::ALL {
            assert_eq!(SystemPreset::from_name(p.name()), Some(p));
        }
        assert_eq!(SystemPreset::from_name("scallop"), None);
        for p in SystemPreset::ALL {
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{p}\""));
        }
    }

    #[test]
    fn probabilistic_presets_agree() {
        let m = bernoulli_model();
        let f = parse_formula("h -> (c | p)", m.table()).unwrap();
        let values: Vec<f64> = [
            SystemPreset::SemanticLoss,
            SystemPreset::DeepProblogProp,
            SystemPreset::NeuraspProp,
        ]
        .into_iter()
        .map(|p| run_preset(p, &m, &f, None, None).unwrap().result.value)
        .collect();
        assert!((values[0] - 0.8).abs() < 1e-12);
        assert_eq!(values[0].to_bits(), values[1].to_bits());
        assert_eq!(values[1].to_bits(), values[2].to_bits());
        let r = run_preset(SystemPreset::DeepProblogProp, &m, &f, None, None).unwrap();
        assert_eq!(
            r.quadruple,
            Quadruple {
                semantics: "boolean".into(),
                logic_fn: "direct".into(),
                belief: "bernoulli".into(),
                measure: "counting".into()
            }
        );
    }

    #[test]
    fn ltn_collapses_to_point() {
        let t = table(Domain::UnitInterval);
        let point = t
            .interpretation([("h", 1.0), ("c", 0.5), ("p", 0.5)])
            .unwrap();
        let d = DiracPoint::new(&t, point).unwrap();
        let m = Model::new(t, Semantics::Fuzzy(TNorm::Lukasiewicz), Belief::Dirac(d)).unwrap();
        let f = parse_formula("h -> (c | p)", m.table()).unwrap();
        let ltn = run_preset(SystemPreset::Ltn, &m, &f, None, None).unwrap();
        let sbr = run_preset(SystemPreset::Sbr, &m, &f, None, None).unwrap();
        assert_eq!(ltn.result.value, 1.0);
        assert_eq!(ltn.result, sbr.result);
        assert_eq!(ltn.quadruple.belief, "dirac");
    }

    #[test]
    fn neupsl_uniform_expectation() {
        let t = SymbolTable::from_decls([("a", Domain::UnitInterval)]).unwrap();
        let a = parse_formula("a", &t).unwrap();
        let sem = Semantics::Fuzzy(TNorm::Lukasiewicz);
        let ll = LogLinear::new(
            &t,
            Theory::new(vec![a.clone()]).unwrap(),
            vec![0.0],
            sem,
            MeasureSpec::BorelQuadrature { grid: DEFAULT_GRID },
        )
        .unwrap();
        let m = Model::new(t, sem, Belief::LogLinear(ll)).unwrap();
        let r = run_preset(SystemPreset::Neupsl, &m, &a, None, None).unwrap();
        assert!((r.result.value - 0.5).abs() < 1e-12);
        assert_eq!(r.quadruple.measure, "quadrature(g=200)");
        assert!(matches!(
            run_preset(
                SystemPreset::Neupsl,
                &m,
                &a,
                Some(&MeasureSpec::Counting),
                None
            ),
            Err(Error::PresetMismatch { .. })
        ));
    }

    #[test]
    fn wrong_family_is_rejected() {
        let m = bernoulli_model();
        let f = parse_formula("h", m.table()).unwrap();
        assert!(matches!(
            run_preset(SystemPreset::Ltn, &m, &f, None, None),
            Err(Error::PresetMismatch { .. })
        ));
    }

    #[test]
    fn semantic_loss_values() {
        let t = table(Domain::Boolean);
        let uniform =
            IndependentBernoulli::from_names(&t, [("h", 0.5), ("c", 0.5), ("p", 0.5)]).unwrap();
        assert_eq!(
            semantic_loss(&Formula::True, &t, &uniform).unwrap().loss,
            0.0
        );
        let f = parse_formula("h -> (c | p)", &t).unwrap();
        let sl = semantic_loss(&f, &t, &uniform).unwrap();
        assert!((sl.loss + 0.875f64.ln()).abs() < 1e-15);
        let sure =
            IndependentBernoulli::from_names(&t, [("h", 1.0), ("c", 0.5), ("p", 0.5)]).unwrap();
        assert_eq!(
            semantic_loss(&parse_formula("h", &t).unwrap(), &t, &sure)
                .unwrap()
                .loss,
            0.0
        );
        let never = semantic_loss(&Formula::False, &t, &uniform).unwrap();
        assert!(never.saturated && never.loss.is_infinite());
    }

    #[test]
    fn nmln_probabilities_sum_to_one() {
        let t = table(Domain::Boolean);
        let phi = parse_formula("h -> (c | p)", &t).unwrap();
        let ll = LogLinear::new(
            &t,
            Theory::new(vec![phi]).unwrap(),
            vec![1.0],
            Semantics::Boolean,
            MeasureSpec::Counting,
        )
        .unwrap();
        let m = Model::new(t.clone(), Semantics::Boolean, Belief::LogLinear(ll)).unwrap();
        let total: f64 = crate::ast::enumerate_interpretations(&t)
            .unwrap()
            .map(|w| nmln_probability(&m, &w).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        let falsifier = t
            .interpretation([("h", 1.0), ("c", 0.0), ("p", 0.0)])
            .unwrap();
        let e = std::f64::consts::E;
        assert!((nmln_probability(&m, &falsifier).unwrap() - 1.0 / (7.0 * e + 1.0)).abs() < 1e-15);
    }
}
