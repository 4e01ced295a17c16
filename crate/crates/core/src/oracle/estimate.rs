//! Sampling estimates of piecewise-constant interim rules.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::Algorithm;
use crate::error::{Error, Result};
use crate::ideal::{convex_hull, hull_blocks, CumulativeCurve, CurveMode, InterimCurve, IntervalSet, IronedAlgorithm};
use crate::oracle::pieces::PieceStructure;
use crate::prior::ProductPrior;
use crate::rng::RandomStream;

/// Mean allocation `y[i][j]` of agent `i` over profiles with `v_i` in piece `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedRule {
    pub y: Vec<Vec<f64>>,
    pub samples_per_cell: u64,
    pub eps: f64,
}

impl EstimatedRule {
    /// The estimate spread over agent `i`'s atom grid.
    pub fn curve(&self, prior: &ProductPrior, pieces: &PieceStructure, i: usize) -> InterimCurve {
        let d = prior.agent(i);
        let points = (0..d.len())
            .map(|j| (d.value(j), self.y[i][pieces.piece_of_atom(i, j)]))
            .collect();
        InterimCurve { agent: i, points, mode: CurveMode::Estimated { samples: self.samples_per_cell } }
    }
}

/// Samples per cell: `⌈4 ε⁻² ln(2k / (nε))⌉`, at least one.
pub fn estimation_budget(eps: f64, k: usize, n: usize) -> u64 {
    let b = 4.0 / (eps * eps) * (2.0 * k as f64 / (n as f64 * eps)).ln();
    (b.ceil() as u64).max(1)
}

/// Samples per piece when searching for stair sets: `⌈ε⁻² ln(n / 2ε)⌉`, at least one.
pub fn stair_budget(eps: f64, n: usize) -> u64 {
    let b = (n as f64 / (2.0 * eps)).ln() / (eps * eps);
    (b.ceil() as u64).max(1)
}

/// Runs `alg` on `samples` profiles drawn from the prior with agent `i`'s
/// value conditioned on atoms `first..=last`, returning how often `i` won.
pub(crate) fn conditioned_wins(
    alg: &dyn Algorithm,
    prior: &ProductPrior,
    i: usize,
    (first, last): (usize, usize),
    samples: u64,
    rng: &mut RandomStream,
) -> Result<u64> {
    let mut wins = 0;
    let mut values = vec![0.0; prior.n()];
    for _ in 0..samples {
        draw_conditioned(prior, i, first, last, &mut values, rng);
        if alg.allocate(&values, rng)?.served(i) {
            wins += 1;
        }
    }
    Ok(wins)
}

/// Fills `values` with a profile whose `i`th value is restricted to atoms
/// `first..=last`; coordinates are drawn in agent order.
pub(crate) fn draw_conditioned(
    prior: &ProductPrior,
    i: usize,
    first: usize,
    last: usize,
    values: &mut [f64],
    rng: &mut RandomStream,
) {
    for (t, v) in values.iter_mut().enumerate() {
        let d = prior.agent(t);
        *v = if t == i { d.value(d.conditional_sample_index(first, last, rng)) } else { d.sample(rng) };
    }
}

/// Estimates every `(agent, piece)` cell with the budget for `eps`. Cells run
/// in parallel on child streams keyed by `(agent, piece)`.
pub fn estimate_rule(
    alg: &dyn Algorithm,
    prior: &ProductPrior,
    pieces: &PieceStructure,
    eps: f64,
    rng: &RandomStream,
) -> Result<EstimatedRule> {
    let samples = estimation_budget(eps, pieces.max_k(), prior.n());
    estimate_rule_with_budget(alg, prior, pieces, eps, samples, rng)
}

/// [`estimate_rule`] with an explicit per-cell sample count.
pub fn estimate_rule_with_budget(
    alg: &dyn Algorithm,
    prior: &ProductPrior,
    pieces: &PieceStructure,
    eps: f64,
    samples: u64,
    rng: &RandomStream,
) -> Result<EstimatedRule> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadEpsilon(eps));
    }
    pieces.validate(prior)?;
    let cells: Vec<(usize, usize)> = (0..prior.n())
        .flat_map(|i| (0..pieces.k(i)).map(move |j| (i, j)))
        .collect();
    let wins: Vec<u64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let p = pieces.agent(i)[j];
            let mut cell_rng = rng.child2(i as u64, j as u64);
            conditioned_wins(alg, prior, i, (p.first, p.last), samples, &mut cell_rng)
        })
        .collect::<Result<_>>()?;
    let mut y: Vec<Vec<f64>> = (0..prior.n()).map(|i| Vec::with_capacity(pieces.k(i))).collect();
    for (&(i, _), w) in cells.iter().zip(wins) {
        y[i].push(w as f64 / samples as f64);
    }
    Ok(EstimatedRule { y, samples_per_cell: samples, eps })
}

/// Monotonizing intervals of the estimated rule, treating each piece as one
/// atom of the piece's mass.
pub fn estimated_intervals(rule: &EstimatedRule, prior: &ProductPrior, pieces: &PieceStructure) -> IntervalSet {
    let blocks: Vec<Vec<(usize, usize)>> = (0..prior.n())
        .map(|i| {
            let g = CumulativeCurve::from_slopes(&pieces.masses(prior, i), &rule.y[i]);
            let ps = pieces.agent(i);
            hull_blocks(&g, &convex_hull(&g))
                .into_iter()
                .map(|(a, b)| (ps[a].first, ps[b].last))
                .collect()
        })
        .collect();
    IntervalSet::from_blocks(prior, &blocks)
}

/// Estimates the rule of `alg` and irons it on the estimate's monotonizing
/// intervals.
pub fn statistical_iron(
    alg: Arc<dyn Algorithm>,
    prior: Arc<ProductPrior>,
    pieces: &PieceStructure,
    eps: f64,
    rng: &RandomStream,
) -> Result<(IronedAlgorithm, IntervalSet, EstimatedRule)> {
    let rule = estimate_rule(alg.as_ref(), &prior, pieces, eps, rng)?;
    let intervals = estimated_intervals(&rule, &prior, pieces);
    let ironed = IronedAlgorithm::new(alg, prior, intervals.clone())?.with_pieces(pieces.clone());
    Ok((ironed, intervals, rule))
}
