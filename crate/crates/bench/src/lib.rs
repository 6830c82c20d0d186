//! Seeded workloads shared by the benchmarks.

use nesy_core::{
    Belief, Domain, Formula, IndependentBernoulli, LogLinear, MeasureSpec, Model, Semantics,
    SymbolId, SymbolTable, TNorm, Theory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn table(n: usize, domain: Domain) -> SymbolTable {
    SymbolTable::from_decls((0..n).map(|i| (format!("x{i}"), domain.clone()))).unwrap()
}

pub fn random_formula(rng: &mut impl Rng, atoms: &[SymbolId], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return Formula::Atom(atoms[rng.gen_range(0..atoms.len())]);
    }
    let a = random_formula(rng, atoms, depth - 1);
    match rng.gen_range(0..5) {
        0 => Formula::not(a),
        1 => Formula::and(a, random_formula(rng, atoms, depth - 1)),
        2 => Formula::or(a, random_formula(rng, atoms, depth - 1)),
        3 => Formula::implies(a, random_formula(rng, atoms, depth - 1)),
        _ => Formula::iff(a, random_formula(rng, atoms, depth - 1)),
    }
}

/// Conjunction of `clauses` random three-literal clauses; every atom appears at least once.
pub fn random_cnf(rng: &mut impl Rng, atoms: &[SymbolId], clauses: usize) -> Formula {
    let literal = |rng: &mut ChaCha8Rng, id: SymbolId| {
        if rng.gen_bool(0.5) {
            Formula::atom(id)
        } else {
            Formula::not(Formula::atom(id))
        }
    };
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut out: Option<Formula> = None;
    for c in 0..clauses.max(atoms.len()) {
        let first = atoms[c % atoms.len()];
        let mut clause = literal(&mut local, first);
        for _ in 0..2 {
            let id = atoms[local.gen_range(0..atoms.len())];
            clause = Formula::or(clause, literal(&mut local, id));
        }
        out = Some(match out {
            None => clause,
            Some(acc) => Formula::and(acc, clause),
        });
    }
    out.unwrap_or(Formula::True)
}

/// Boolean model with random probabilities and a random CNF query.
pub fn bernoulli_workload(atoms: usize, clauses: usize, seed: u64) -> (Model, Formula) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = table(atoms, Domain::Boolean);
    let ids: Vec<_> = t.ids().collect();
    let f = random_cnf(&mut rng, &ids, clauses);
    let b =
        IndependentBernoulli::new(&t, t.ids().map(|id| (id, rng.gen_range(0.05..0.95)))).unwrap();
    (
        Model::new(t, Semantics::Boolean, Belief::Bernoulli(b)).unwrap(),
        f,
    )
}

/// Łukasiewicz log-linear model over `dims` unit-interval symbols.
pub fn fuzzy_workload(dims: usize, seed: u64) -> (Model, Formula) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = table(dims, Domain::UnitInterval);
    let ids: Vec<_> = t.ids().collect();
    let sem = Semantics::Fuzzy(TNorm::Lukasiewicz);
    let theory = Theory::new((0..2).map(|_| random_formula(&mut rng, &ids, 3)).collect()).unwrap();
    let weights = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let ll = LogLinear::new(
        &t,
        theory,
        weights,
        sem,
        MeasureSpec::BorelQuadrature { grid: 100 },
    )
    .unwrap();
    let f = random_formula(&mut rng, &ids, 4);
    (Model::new(t, sem, Belief::LogLinear(ll)).unwrap(), f)
}
