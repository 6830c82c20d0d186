#![allow(dead_code)]

use nesy_core::{
    Addend, Comparator, Domain, Formula, IndependentBernoulli, LinearComparison, LinearTerm,
    Rational, SymbolId, SymbolTable,
};
use rand::Rng;

pub fn table(n: usize, domain: Domain) -> SymbolTable {
    SymbolTable::from_decls((0..n).map(|i| (format!("s{i}"), domain.clone()))).unwrap()
}

/// Random connective tree over `atoms`; constants appear at about 5% of leaves.
pub fn random_formula(rng: &mut impl Rng, atoms: &[SymbolId], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..40) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::Atom(atoms[rng.gen_range(0..atoms.len())]),
        };
    }
    let sub = |rng: &mut _| random_formula(rng, atoms, depth - 1);
    match rng.gen_range(0..5) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        _ => Formula::iff(sub(rng), sub(rng)),
    }
}

/// Formula in which every atom occurs only positively (no negation, implication, equivalence).
pub fn random_positive_formula(rng: &mut impl Rng, atoms: &[SymbolId], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return Formula::Atom(atoms[rng.gen_range(0..atoms.len())]);
    }
    let a = random_positive_formula(rng, atoms, depth - 1);
    let b = random_positive_formula(rng, atoms, depth - 1);
    if rng.gen_bool(0.5) {
        Formula::and(a, b)
    } else {
        Formula::or(a, b)
    }
}

pub fn random_comparison(rng: &mut dyn rand::RngCore, numeric: &[SymbolId]) -> Formula {
    let term = |rng: &mut dyn rand::RngCore| {
        let n: usize = rng.gen_range(1..=3);
        LinearTerm(
            (0..n)
                .map(|_| Addend {
                    coef: Rational::new(rng.gen_range(-6..=6), rng.gen_range(1..=4)),
                    symbol: if rng.gen_bool(0.8) {
                        Some(numeric[rng.gen_range(0..numeric.len())])
                    } else {
                        None
                    },
                })
                .collect(),
        )
    };
    let cmp = [
        Comparator::Lt,
        Comparator::Le,
        Comparator::Eq,
        Comparator::Ge,
        Comparator::Gt,
    ][rng.gen_range(0..5)];
    Formula::LinCmp(LinearComparison {
        lhs: term(rng),
        cmp,
        rhs: term(rng),
    })
}

pub fn random_bernoulli(rng: &mut impl Rng, table: &SymbolTable) -> IndependentBernoulli {
    IndependentBernoulli::new(table, table.ids().map(|id| (id, rng.gen::<f64>()))).unwrap()
}

pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[i] += h;
    down[i] -= h;
    (f(&up) - f(&down)) / (2.0 * h)
}
