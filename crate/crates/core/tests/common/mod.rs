#![allow(dead_code)]

use std::sync::Arc;

use ironing_core::algorithms::{TableAlgorithm, TableEntry};
use ironing_core::{Allocation, CostModel, DiscreteDistribution, ProductPrior, RandomStream};

/// Random distribution with `m` atoms: strictly increasing values in
/// `(0, 10]`, positive masses.
pub fn random_dist(rng: &mut RandomStream, m: usize) -> DiscreteDistribution {
    let mut v = 0.0;
    let mut atoms = Vec::with_capacity(m);
    let weights: Vec<f64> = (0..m).map(|_| 0.05 + rng.uniform()).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        v += 0.1 + rng.uniform() * (9.0 / m as f64);
        atoms.push((v, w / total));
    }
    // absorb rounding so the masses sum to one
    let drift: f64 = 1.0 - atoms.iter().map(|a| a.1).sum::<f64>();
    atoms[0].1 += drift;
    DiscreteDistribution::new(atoms).expect("valid random distribution")
}

pub fn random_prior(rng: &mut RandomStream, max_n: usize, max_atoms: usize) -> Arc<ProductPrior> {
    let n = 1 + rng.below(max_n);
    Arc::new(ProductPrior::new((0..n).map(|_| {
        let m = 1 + rng.below(max_atoms);
        random_dist(rng, m)
    }).collect()))
}

/// Random table: each cell is a deterministic allocation, independent
/// per-agent probabilities, or a joint service probability.
pub fn random_table(prior: Arc<ProductPrior>, rng: &mut RandomStream) -> TableAlgorithm {
    let n = prior.n();
    let cells = prior.support_size() as usize;
    let entries = (0..cells)
        .map(|_| match rng.below(3) {
            0 => TableEntry::Bits((0..n).map(|_| u8::from(rng.bernoulli(0.5))).collect()),
            1 => TableEntry::Probs((0..n).map(|_| rng.uniform()).collect()),
            _ => TableEntry::Joint(rng.uniform()),
        })
        .collect();
    TableAlgorithm::new(prior, entries).expect("table covers the support")
}

/// General cost: a random non-negative cost per allocation.
pub fn random_cost(n: usize, rng: &mut RandomStream) -> CostModel {
    let table: Vec<f64> = (0..1usize << n).map(|_| 3.0 * rng.uniform()).collect();
    CostModel::general(move |x: &Allocation| {
        let mask = x.as_slice().iter().fold(0usize, |m, &b| (m << 1) | usize::from(b));
        table[mask]
    })
}
