//! Lebesgue integral of simple functions under the counting measure.
//!
//! Every integrand over a finite interpretation space is simple: it takes
//! finitely many values, each on a set of interpretations. Summing value times
//! set cardinality gives the integral without reference to the enumeration
//! order or to any of the integrator's backends, which is what makes it useful
//! as a cross-check.

use crate::ast::Interpretation;
use crate::error::{Error, Result};
use crate::integrator::MeasureSpec;
use crate::numeric::KahanSum;

/// A measurable subset of a finite carrier.
pub enum MeasurableSet<'a> {
    /// Points of the carrier satisfying a predicate.
    Predicate(Box<dyn Fn(&Interpretation) -> bool + 'a>),
    /// Explicit carrier indices.
    Indices(Vec<usize>),
}

impl MeasurableSet<'_> {
    fn members(&self, carrier: &[Interpretation]) -> Vec<usize> {
        match self {
            MeasurableSet::Predicate(p) => (0..carrier.len()).filter(|&i| p(&carrier[i])).collect(),
            MeasurableSet::Indices(ix) => ix.clone(),
        }
    }
}

/// `coef · 1[set]`
pub struct SimpleTerm<'a> {
    pub coef: f64,
    pub set: MeasurableSet<'a>,
}

/// `Σ a_i · m(S_i)` for pairwise disjoint `S_i`; only the counting measure is supported.
pub fn lebesgue_simple(
    carrier: &[Interpretation],
    terms: &[SimpleTerm<'_>],
    measure: &MeasureSpec,
) -> Result<f64> {
    if *measure != MeasureSpec::Counting {
        return Err(Error::InvalidMeasure(
            "simple-function integration is defined here for the counting measure".into(),
        ));
    }
    let mut owner = vec![false; carrier.len()];
    let mut total = KahanSum::new();
    for term in terms {
        let members = term.set.members(carrier);
        for &i in &members {
            if i >= carrier.len() {
                return Err(Error::InvalidParameter(format!(
                    "index {i} outside the carrier"
                )));
            }
            if owner[i] {
                return Err(Error::OverlappingSets(i));
            }
            owner[i] = true;
        }
        // counting measure: m(S) = |S|
        total.add(term.coef * members.len() as f64);
    }
    Ok(total.total())
}

/// Level sets of `values`: one term per distinct value, over carrier indices.
pub fn level_sets(values: &[f64]) -> Vec<SimpleTerm<'static>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut terms: Vec<SimpleTerm<'static>> = Vec::new();
    for i in order {
        match terms.last_mut() {
            Some(t) if t.coef.to_bits() == values[i].to_bits() => {
                if let MeasurableSet::Indices(ix) = &mut t.set {
                    ix.push(i);
                }
            }
            _ => terms.push(SimpleTerm {
                coef: values[i],
                set: MeasurableSet::Indices(vec![i]),
            }),
        }
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{enumerate_interpretations, Domain, SymbolTable};

    fn cube() -> Vec<Interpretation> {
        let t = SymbolTable::from_decls(["h", "c", "p"].map(|n| (n, Domain::Boolean))).unwrap();
        enumerate_interpretations(&t).unwrap().collect()
    }

    #[test]
    fn seven_worlds_at_one_eighth() {
        let carrier = cube();
        let models = SimpleTerm {
            coef: 0.125,
            set: MeasurableSet::Predicate(Box::new(|w: &Interpretation| {
                !(w.values()[0] == 1.0 && w.values()[1] == 0.0 && w.values()[2] == 0.0)
            })),
        };
        assert_eq!(
            lebesgue_simple(&carrier, &[models], &MeasureSpec::Counting).unwrap(),
            0.875
        );
    }

    #[test]
    fn empty_and_singletons() {
        let carrier = cube();
        assert_eq!(
            lebesgue_simple(&carrier, &[], &MeasureSpec::Counting).unwrap(),
            0.0
        );
        let terms = [
            SimpleTerm {
                coef: 1.0,
                set: MeasurableSet::Indices(vec![0]),
            },
            SimpleTerm {
                coef: 1.0,
                set: MeasurableSet::Indices(vec![5]),
            },
        ];
        assert_eq!(
            lebesgue_simple(&carrier, &terms, &MeasureSpec::Counting).unwrap(),
            2.0
        );
    }

    #[test]
    fn overlap_is_rejected() {
        let carrier = cube();
        let terms = [
            SimpleTerm {
                coef: 1.0,
                set: MeasurableSet::Indices(vec![0, 1]),
            },
            SimpleTerm {
                coef: 2.0,
                set: MeasurableSet::Indices(vec![1]),
            },
        ];
        assert_eq!(
            lebesgue_simple(&carrier, &terms, &MeasureSpec::Counting).unwrap_err(),
            Error::OverlappingSets(1)
        );
        assert!(lebesgue_simple(&carrier, &[], &MeasureSpec::BorelQuadrature { grid: 4 }).is_err());
    }

    #[test]
    fn level_sets_partition() {
        let values = [0.5, 0.25, 0.5, 0.0];
        let terms = level_sets(&values);
        assert_eq!(terms.len(), 3);
        let carrier: Vec<_> = cube().into_iter().take(4).collect();
        assert_eq!(
            lebesgue_simple(&carrier, &terms, &MeasureSpec::Counting).unwrap(),
            1.25
        );
    }
}
