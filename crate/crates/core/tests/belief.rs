mod common;

use nesy_core::numeric::kahan_sum;
use nesy_core::{
    belief_weight, enumerate_interpretations, parse_formula, Belief, Domain, Formula,
    IndependentBernoulli, Interpretation, LogLinear, MeasureSpec, Semantics, SymbolTable, TNorm,
    Theory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hcp() -> SymbolTable {
    SymbolTable::from_decls(["h", "c", "p"].map(|n| (n, Domain::Boolean))).unwrap()
}

#[test]
fn bernoulli_weight_is_the_product() {
    let t = hcp();
    let b = IndependentBernoulli::from_names(&t, [("h", 0.8), ("c", 0.5), ("p", 0.5)]).unwrap();
    let w = t
        .interpretation([("h", 1.0), ("c", 0.0), ("p", 0.0)])
        .unwrap();
    let oracle = 0.8 * (1.0 - 0.5) * (1.0 - 0.5);
    let v = belief_weight(&Belief::Bernoulli(b), &t, &Formula::True, &w).unwrap();
    assert_eq!(v, oracle);
    assert!((v - 0.2).abs() < 1e-15);

    let sure = IndependentBernoulli::from_names(&t, [("h", 1.0), ("c", 1.0), ("p", 1.0)]).unwrap();
    let ones = t
        .interpretation([("h", 1.0), ("c", 1.0), ("p", 1.0)])
        .unwrap();
    assert_eq!(
        belief_weight(&Belief::Bernoulli(sure), &t, &Formula::True, &ones).unwrap(),
        1.0
    );
}

#[test]
fn loglinear_partition_functions() {
    let t = hcp();
    let phi = parse_formula("h -> (c | p)", &t).unwrap();
    let theory = Theory::new(vec![phi]).unwrap();
    let e = std::f64::consts::E;

    let ll = LogLinear::new(
        &t,
        theory.clone(),
        vec![1.0],
        Semantics::Boolean,
        MeasureSpec::Counting,
    )
    .unwrap();
    let w = t
        .interpretation([("h", 0.0), ("c", 0.0), ("p", 0.0)])
        .unwrap();
    assert_eq!(
        belief_weight(&Belief::LogLinear(ll.clone()), &t, &Formula::True, &w).unwrap(),
        e
    );
    let z = ll.normalize(&t).unwrap().normalizer().unwrap();
    // seven models at weight e, one falsifier at weight 1
    assert!((z.z - (7.0 * e + 1.0)).abs() < 1e-12);
    assert_eq!(z.std_error, None);

    let flat = LogLinear::new(
        &t,
        theory,
        vec![0.0],
        Semantics::Boolean,
        MeasureSpec::Counting,
    )
    .unwrap();
    assert_eq!(
        belief_weight(&Belief::LogLinear(flat.clone()), &t, &Formula::True, &w).unwrap(),
        1.0
    );
    assert_eq!(flat.normalize(&t).unwrap().normalizer().unwrap().z, 8.0);

    let u = SymbolTable::from_decls([("a", Domain::UnitInterval)]).unwrap();
    let a = parse_formula("a", &u).unwrap();
    let uniform = LogLinear::new(
        &u,
        Theory::new(vec![a]).unwrap(),
        vec![0.0],
        Semantics::Fuzzy(TNorm::Lukasiewicz),
        MeasureSpec::BorelQuadrature { grid: 200 },
    )
    .unwrap();
    assert!((uniform.normalize(&u).unwrap().normalizer().unwrap().z - 1.0).abs() < 1e-12);
}

#[test]
fn bernoulli_mass_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [1, 5, 12, 20] {
        let t = common::table(n, Domain::Boolean);
        let b = Belief::Bernoulli(common::random_bernoulli(&mut rng, &t));
        let mass = kahan_sum(
            enumerate_interpretations(&t)
                .unwrap()
                .map(|w| belief_weight(&b, &t, &Formula::True, &w).unwrap()),
        );
        assert!((mass - 1.0).abs() <= 1e-12, "n = {n}: {mass}");
    }
}

#[test]
fn bernoulli_marginals_recover_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let t = common::table(10, Domain::Boolean);
    let b = common::random_bernoulli(&mut rng, &t);
    let belief = Belief::Bernoulli(b.clone());
    let worlds: Vec<Interpretation> = enumerate_interpretations(&t).unwrap().collect();
    for id in t.ids() {
        let marginal = kahan_sum(
            worlds
                .iter()
                .filter(|w| w.get(id) == 1.0)
                .map(|w| belief_weight(&belief, &t, &Formula::True, w).unwrap()),
        );
        assert!((marginal - b.prob(id).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn normalized_loglinear_mass_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let t = common::table(6, Domain::Boolean);
    let atoms: Vec<_> = t.ids().collect();
    for _ in 0..50 {
        let n = rng.gen_range(1..=4);
        let theory = Theory::new(
            (0..n)
                .map(|_| common::random_formula(&mut rng, &atoms, 4))
                .collect(),
        )
        .unwrap();
        let weights = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let ll = LogLinear::new(
            &t,
            theory,
            weights,
            Semantics::Boolean,
            MeasureSpec::Counting,
        )
        .unwrap()
        .normalize(&t)
        .unwrap();
        let b = Belief::LogLinear(ll);
        let weights: Vec<f64> = enumerate_interpretations(&t)
            .unwrap()
            .map(|w| belief_weight(&b, &t, &Formula::True, &w).unwrap())
            .collect();
        assert!(weights.iter().all(|&w| w > 0.0));
        assert!((kahan_sum(weights) - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn normalized_loglinear_mass_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let t = common::table(3, Domain::UnitInterval);
    let atoms: Vec<_> = t.ids().collect();
    let sem = Semantics::Fuzzy(TNorm::Lukasiewicz);
    let mut inside = 0;
    let trials = 20;
    for trial in 0..trials {
        let theory = Theory::new(vec![common::random_formula(&mut rng, &atoms, 3)]).unwrap();
        let ll = LogLinear::new(
            &t,
            theory,
            vec![rng.gen_range(-2.0..2.0)],
            sem,
            MeasureSpec::BorelMonteCarlo {
                samples: 20_000,
                seed: trial,
            },
        )
        .unwrap()
        .normalize(&t)
        .unwrap();
        let z = ll.normalizer().unwrap();
        let b = Belief::LogLinear(ll);
        // fresh uniform sample, independent of the one that estimated Z
        let n = 20_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let w = Interpretation::new(&t, (0..3).map(|_| rng.gen()).collect()).unwrap();
                belief_weight(&b, &t, &Formula::True, &w).unwrap()
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = ((var / n as f64) + (z.std_error.unwrap() / z.z).powi(2)).sqrt();
        if (mean - 1.0).abs() <= 3.0 * se {
            inside += 1;
        }
    }
    // three standard errors cover 99.7% per trial
    assert!(inside >= trials - 1, "{inside}/{trials}");
}

#[test]
fn rescaling_leaves_normalized_probabilities_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let t = common::table(5, Domain::Boolean);
    let atoms: Vec<_> = t.ids().collect();
    for _ in 0..30 {
        let phi = common::random_formula(&mut rng, &atoms, 4);
        let lambda = rng.gen_range(-2.0..2.0);
        let k: f64 = rng.gen_range(0.01..100.0);
        let base = LogLinear::new(
            &t,
            Theory::new(vec![phi.clone()]).unwrap(),
            vec![lambda],
            Semantics::Boolean,
            MeasureSpec::Counting,
        )
        .unwrap()
        .normalize(&t)
        .unwrap();
        // a tautology weighted ln k multiplies every unnormalized weight by k
        let scaled = LogLinear::new(
            &t,
            Theory::new(vec![phi, Formula::True]).unwrap(),
            vec![lambda, k.ln()],
            Semantics::Boolean,
            MeasureSpec::Counting,
        )
        .unwrap()
        .normalize(&t)
        .unwrap();
        let (b0, b1) = (Belief::LogLinear(base), Belief::LogLinear(scaled));
        for w in enumerate_interpretations(&t).unwrap() {
            let p0 = belief_weight(&b0, &t, &Formula::True, &w).unwrap();
            let p1 = belief_weight(&b1, &t, &Formula::True, &w).unwrap();
            assert!((p0 - p1).abs() <= 1e-12);
        }
    }
}

#[test]
fn dirac_has_no_density_and_missing_probability_is_rejected() {
    let t = hcp();
    let point = t
        .interpretation([("h", 1.0), ("c", 0.0), ("p", 1.0)])
        .unwrap();
    let d = Belief::Dirac(nesy_core::DiracPoint::new(&t, point.clone()).unwrap());
    let err = belief_weight(&d, &t, &Formula::True, &point).unwrap_err();
    assert_eq!(err.to_string(), "atomic belief has no density");
    assert!(IndependentBernoulli::from_names(&t, [("h", 0.5), ("c", 0.5)]).is_err());
}
