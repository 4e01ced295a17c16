//! Concrete algorithm oracles the reduction is exercised on.

mod knapsack;
mod simple;
mod single_minded;
mod table;

pub use knapsack::KnapsackGreedy;
pub use simple::{ConstantAlgorithm, FnAlgorithm, HighestValue, PostedPrice};
pub use single_minded::{GreedySingleMinded, SingleMindedInstance};
pub use table::{TableAlgorithm, TableEntry};

use std::sync::Arc;

use crate::error::Result;
use crate::prior::{DiscreteDistribution, ProductPrior};

pub fn greedy_single_minded(instance: SingleMindedInstance) -> Result<GreedySingleMinded> {
    GreedySingleMinded::new(instance)
}

pub fn knapsack_greedy(capacity: f64, sizes: Vec<f64>) -> Result<KnapsackGreedy> {
    KnapsackGreedy::new(capacity, sizes)
}

pub fn table_algorithm(prior: Arc<ProductPrior>, entries: Vec<TableEntry>) -> Result<TableAlgorithm> {
    TableAlgorithm::new(prior, entries)
}

/// Two unit-demand bidders, two items. Bidder 1 is uniform on {1, 100},
/// bidder 2 uniform on {10, 1000, 1001}. The rule is a worst-case 11/10
/// approximation that is not monotone for bidder 1.
pub fn two_bidder_worst_case() -> (Arc<ProductPrior>, TableAlgorithm) {
    let prior = Arc::new(ProductPrior::new(vec![
        DiscreteDistribution::uniform(&[1.0, 100.0]).unwrap(),
        DiscreteDistribution::uniform(&[10.0, 1000.0, 1001.0]).unwrap(),
    ]));
    let bits = |a: u8, b: u8| TableEntry::Bits(vec![a, b]);
    // row-major over (v1 index, v2 index)
    let entries = vec![
        bits(0, 1), bits(1, 1), bits(1, 1), // v1 = 1
        bits(1, 0), bits(0, 1), bits(0, 1), // v1 = 100
    ];
    let alg = TableAlgorithm::new(prior.clone(), entries).unwrap();
    (prior, alg)
}

/// Two agents served jointly (both or neither). Agent 1 uniform on {1, 2},
/// agent 2 uniform on {1, ..., 6}; entries are joint service probabilities.
pub fn joint_service_example() -> (Arc<ProductPrior>, TableAlgorithm) {
    let prior = Arc::new(ProductPrior::new(vec![
        DiscreteDistribution::uniform(&[1.0, 2.0]).unwrap(),
        DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap(),
    ]));
    let rows = [
        [0.80, 0.20, 0.82, 0.22, 0.84, 0.24],
        [0.20, 0.60, 0.60, 0.20, 0.20, 0.60],
    ];
    let entries = rows.iter().flatten().map(|&p| TableEntry::Joint(p)).collect();
    let alg = TableAlgorithm::new(prior.clone(), entries).unwrap();
    (prior, alg)
}
