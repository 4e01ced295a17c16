//! Instances shared by the benchmarks in `benches/`.

use std::sync::Arc;

use ironing_core::algorithms::{TableAlgorithm, TableEntry};
use ironing_core::prior::TupleIter;
use ironing_core::{DiscreteDistribution, InterimCurve, ProductPrior, RandomStream};

/// `n` agents with `m` equally likely atoms each.
pub fn uniform_prior(n: usize, m: usize) -> Arc<ProductPrior> {
    let values: Vec<f64> = (1..=m).map(|v| v as f64).collect();
    Arc::new(ProductPrior::iid(DiscreteDistribution::uniform(&values).expect("valid grid"), n))
}

/// Table serving each agent with an independent pseudo-random probability.
pub fn random_table(prior: Arc<ProductPrior>, seed: u64) -> TableAlgorithm {
    let mut rng = RandomStream::new(seed);
    let sizes = prior.agents().iter().map(|d| d.len()).collect();
    let entries = TupleIter::new(sizes)
        .map(|_| TableEntry::Probs((0..prior.n()).map(|_| rng.uniform()).collect()))
        .collect();
    TableAlgorithm::new(prior, entries).expect("table covers the support")
}

/// Non-monotone curve on `m` uniform atoms.
pub fn zigzag_curve(m: usize) -> (DiscreteDistribution, InterimCurve) {
    let values: Vec<f64> = (1..=m).map(|v| v as f64).collect();
    let d = DiscreteDistribution::uniform(&values).expect("valid grid");
    let probs: Vec<f64> = (0..m).map(|j| if j % 2 == 0 { 0.8 - 0.3 * j as f64 / m as f64 } else { 0.1 }).collect();
    let c = InterimCurve::on_grid(0, &d, &probs);
    (d, c)
}
