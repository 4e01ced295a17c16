mod common;

use std::sync::Arc;

use ironing_core::algorithm::CountingAlgorithm;
use ironing_core::algorithms::{self, ConstantAlgorithm, HighestValue};
use ironing_core::ideal::{exact_interim_curves, expected_welfare};
use ironing_core::oracle::{
    discretize, estimate_rule, estimation_budget, geometric_bounds, mixing_weight, monotonize, stair,
    stair_budget, stair_compatible, statistical_iron, PieceStructure, StairSets,
};
use ironing_core::verify::{check_monotone, curve_regret};
use ironing_core::{Algorithm, CostModel, DiscreteDistribution, Error, ProductPrior, RandomStream};

fn three_agent_instance(seed: u64) -> (Arc<ProductPrior>, Arc<dyn Algorithm>) {
    let mut rng = RandomStream::new(seed);
    let prior = Arc::new(ProductPrior::new(
        (0..3)
            .map(|_| {
                let m = 2 + rng.below(3);
                common::random_dist(&mut rng, m)
            })
            .collect(),
    ));
    let table = common::random_table(prior.clone(), &mut rng);
    (prior, Arc::new(table))
}

#[test]
fn geometric_piece_bounds() {
    let b = geometric_bounds(0.5, 1.0, 2.0).unwrap();
    let want = [(0.0, 0.5), (0.5, 0.75), (0.75, 1.125), (1.125, 1.6875), (1.6875, 2.53125)];
    assert_eq!(b, want);
    assert!(matches!(geometric_bounds(1.0, 1.0, 2.0), Err(Error::BadEpsilon(_))));
}

#[test]
fn discretization_loses_at_most_two_n_eps_mu() {
    for seed in 0..20 {
        let (prior, alg) = three_agent_instance(seed);
        let cost = CostModel::zero();
        for eps in [0.05, 0.2, 0.5] {
            let (dot, _) = discretize(alg.clone(), prior.clone(), eps).unwrap();
            let base = expected_welfare(alg.as_ref(), &prior, &cost).unwrap();
            let w = expected_welfare(&dot, &prior, &cost).unwrap();
            assert!(w >= base - 2.0 * 3.0 * eps * prior.mu_max() - 1e-12, "seed {seed} eps {eps}");
        }
    }
}

#[test]
fn monotone_algorithm_is_rarely_ironed() {
    let prior = Arc::new(ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0, 3.0]).unwrap(), 2));
    let alg: Arc<dyn Algorithm> = Arc::new(HighestValue::new(2));
    let pieces = PieceStructure::atoms(&prior);
    let runs = 200;
    let empty = (0..runs)
        .filter(|&s| {
            let (_, iv, _) = statistical_iron(alg.clone(), prior.clone(), &pieces, 0.05, &RandomStream::new(s)).unwrap();
            iv.is_empty()
        })
        .count();
    assert!(empty >= 180, "{empty}/{runs}");
}

#[test]
fn statistical_ironing_welfare_bound() {
    let eps = 0.1;
    let cost = CostModel::zero();
    let (prior, alg) = three_agent_instance(8);
    let (dot, pieces) = discretize(alg, prior.clone(), eps).unwrap();
    let dot: Arc<dyn Algorithm> = Arc::new(dot);
    let base = expected_welfare(dot.as_ref(), &prior, &cost).unwrap();
    for seed in 0..50 {
        let (tilde, _, _) = statistical_iron(dot.clone(), prior.clone(), &pieces, eps, &RandomStream::new(seed)).unwrap();
        let w = expected_welfare(&tilde, &prior, &cost).unwrap();
        assert!(w >= base - 3.0 * eps * prior.mu_max() - 1e-12, "seed {seed}: {w} vs {base}");
    }
}

#[test]
fn stair_compatible_feasibility_welfare_bound() {
    let eps = 0.1;
    let prior = Arc::new(ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0, 4.0]).unwrap(), 3));
    let cost = CostModel::feasibility(|x| x.count() <= 1);
    let alg: Arc<dyn Algorithm> = Arc::new(HighestValue::new(3));
    let (dot, pieces) = discretize(alg, prior.clone(), eps).unwrap();
    let dot: Arc<dyn Algorithm> = Arc::new(dot);
    let base = expected_welfare(dot.as_ref(), &prior, &cost).unwrap();
    for seed in 0..50 {
        let sc = stair_compatible(dot.clone(), prior.clone(), &pieces, eps, &cost, &RandomStream::new(seed)).unwrap();
        for (i, s) in sc.sets.sets.iter().enumerate() {
            assert!(s.served(i));
            assert!(cost.is_feasible(s));
        }
        let w = expected_welfare(&sc.algorithm, &prior, &cost).unwrap();
        assert!(w >= base - 2.0 * eps * 3.0 * prior.mu_max() - 1e-12, "seed {seed}");
    }
}

#[test]
fn stair_sets_for_trivial_algorithms() {
    let prior = Arc::new(ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0, 3.0]).unwrap(), 2));
    let pieces = PieceStructure::atoms(&prior);
    let cost = CostModel::zero();
    let all: Arc<dyn Algorithm> = Arc::new(ConstantAlgorithm::serve_all(2));
    let sc = stair_compatible(all, prior.clone(), &pieces, 0.1, &cost, &RandomStream::new(1)).unwrap();
    assert_eq!(sc.sets.chosen, vec![1, 1]);
    assert_eq!(sc.pieces, pieces);
    assert_eq!(sc.sets.thresholds, vec![2.0, 2.0]);

    let none: Arc<dyn Algorithm> = Arc::new(ConstantAlgorithm::new(ironing_core::Allocation::empty(2)));
    let sc = stair_compatible(none, prior.clone(), &pieces, 0.1, &cost, &RandomStream::new(1)).unwrap();
    assert_eq!(sc.sets, StairSets { chosen: vec![4, 4], ..StairSets::singletons(2) });
    assert_eq!(sc.pieces.max_k(), 1);
}

#[test]
fn stair_levels() {
    let prior = ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0, 3.0]).unwrap(), 1);
    let s = stair(PieceStructure::atoms(&prior), StairSets::singletons(1));
    let served = |v: f64| s.lottery(&[v]).unwrap().unwrap().marginals(1)[0];
    assert_eq!(served(1.0), 0.0);
    assert_eq!(served(2.0), 0.5);
    assert_eq!(served(3.0), 1.0);
}

#[test]
fn estimation_uses_exactly_the_budget() {
    let (prior, table) = algorithms::two_bidder_worst_case();
    let counter = CountingAlgorithm::new(Arc::new(table));
    for (pieces, eps) in [(PieceStructure::atoms(&prior), 0.1), (PieceStructure::geometric(&prior, 0.3).unwrap(), 0.3)] {
        counter.reset();
        let rule = estimate_rule(&counter, &prior, &pieces, eps, &RandomStream::new(2)).unwrap();
        let cells: usize = (0..prior.n()).map(|i| pieces.k(i)).sum();
        assert_eq!(rule.samples_per_cell, estimation_budget(eps, pieces.max_k(), prior.n()));
        assert_eq!(counter.calls(), rule.samples_per_cell * cells as u64);
    }
}

#[test]
fn stair_search_uses_at_most_the_budget() {
    let (prior, table) = algorithms::two_bidder_worst_case();
    let eps = 0.1;
    let pieces = PieceStructure::atoms(&prior);
    let budget = stair_budget(eps, prior.n());

    let never = Arc::new(CountingAlgorithm::new(Arc::new(ConstantAlgorithm::new(ironing_core::Allocation::empty(2)))));
    stair_compatible(never.clone(), prior.clone(), &pieces, eps, &CostModel::zero(), &RandomStream::new(0)).unwrap();
    let cells: u64 = (0..prior.n()).map(|i| pieces.k(i) as u64).sum();
    assert_eq!(never.calls(), budget * cells);

    let counted = Arc::new(CountingAlgorithm::new(Arc::new(table)));
    stair_compatible(counted.clone(), prior, &pieces, eps, &CostModel::zero(), &RandomStream::new(0)).unwrap();
    assert!(counted.calls() <= budget * cells);
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let (prior, table) = algorithms::joint_service_example();
    let pieces = PieceStructure::atoms(&prior);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_rule(&table, &prior, &pieces, 0.1, &RandomStream::new(99)).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn monotonizing_a_monotone_algorithm() {
    let prior = Arc::new(ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0, 3.0]).unwrap(), 2));
    let alg: Arc<dyn Algorithm> = Arc::new(HighestValue::new(2));
    let cost = CostModel::k_units(1);
    let eps = 0.02;
    let base = expected_welfare(alg.as_ref(), &prior, &cost).unwrap();
    for seed in 0..10 {
        let m = monotonize(alg.clone(), prior.clone(), &cost, eps, &RandomStream::new(seed)).unwrap();
        assert_eq!(m.delta, mixing_weight(&m.pieces, eps));
        let curves = exact_interim_curves(m.algorithm.as_ref(), &prior).unwrap();
        for c in &curves {
            assert!(check_monotone(c, eps).is_empty());
            assert!(curve_regret(c) <= 2.0 * eps * prior.v_max());
        }
        let w = expected_welfare(m.algorithm.as_ref(), &prior, &cost).unwrap();
        let n = prior.n() as f64;
        assert!(w >= base - n * eps * prior.mu_max() - m.delta * n * prior.mu_max() - 1e-12);
    }
}

#[test]
fn single_piece_means_no_stair() {
    let prior = Arc::new(ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 1.01]).unwrap(), 2));
    let alg: Arc<dyn Algorithm> = Arc::new(HighestValue::new(2));
    let m = monotonize(alg, prior, &CostModel::zero(), 0.5, &RandomStream::new(0)).unwrap();
    assert_eq!(m.pieces.max_k(), 1);
    assert_eq!(m.delta, 0.0);
}

#[test]
fn oversized_mixing_weight_is_an_error() {
    let (prior, table) = algorithms::two_bidder_worst_case();
    let r = monotonize(Arc::new(table), prior, &CostModel::zero(), 0.3, &RandomStream::new(0));
    assert!(matches!(r, Err(Error::DeltaOverflow { .. })));
}
