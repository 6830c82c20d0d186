//! Neurosymbolic inference: the integral of a logic function times a belief
//! over interpretations, under counting or Borel measures.
//!
//! ```
//! use nesy_core::{parse_formula, infer, Belief, Domain, IndependentBernoulli, LogicFn,
//!                 MeasureSpec, Model, Semantics, SymbolTable};
//!
//! let table = SymbolTable::from_decls(["h", "c", "p"].map(|n| (n, Domain::Boolean))).unwrap();
//! let f = parse_formula("h -> (c | p)", &table).unwrap();
//! let b = IndependentBernoulli::from_names(&table, [("h", 0.8), ("c", 0.5), ("p", 0.5)]).unwrap();
//! let model = Model::new(table, Semantics::Boolean, Belief::Bernoulli(b)).unwrap();
//! let r = infer(&model, &LogicFn::Direct, &f, &MeasureSpec::Counting, None).unwrap();
//! assert!((r.value - 0.8).abs() < 1e-12);
//! ```

pub mod ast;
pub mod belief;
pub mod emulators;
pub mod error;
pub mod gradients;
pub mod integrator;
pub mod model;
pub mod numeric;
pub mod parser;
pub mod semantics;

pub use ast::{
    enumerate_interpretations, Addend, Comparator, Domain, Enumeration, Formula, Interpretation,
    LinearComparison, LinearTerm, PartialInterpretation, Rational, Symbol, SymbolId, SymbolTable,
    Theory,
};
pub use belief::{
    belief_weight, Belief, DiracPoint, FuzzyMembership, IndependentBernoulli, LogLinear,
    MembershipCurve, Normalizer,
};
pub use emulators::{
    nmln_probability, plan_preset, run_preset, semantic_loss, PresetPlan, PresetResult, Quadruple,
    SemanticLoss, SystemPreset,
};
pub use error::{Error, Result};
pub use gradients::{
    grad_dirac, grad_dirac_with_tolerance, grad_loglinear, grad_wmc, GradTarget, GradientResult,
    Kink,
};
pub use integrator::{
    compile, enumerate_models, infer, infer_compiled, lebesgue_simple, map_inference, Backend,
    CircuitNode, CompiledCircuit, FunctionalResult, MapResult, MeasurableSet, MeasureSpec,
    SimpleTerm, DEFAULT_GRID, MAX_QUADRATURE_DIMS,
};
pub use model::Model;
pub use parser::{parse_formula, parse_rational};
pub use semantics::{apply_logic_fn, check_formula, eval, LogicFn, Semantics, TNorm, ValueSet};
