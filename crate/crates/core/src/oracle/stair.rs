//! Stair sets and the stair algorithm.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, Lottery};
use crate::error::Result;
use crate::ideal::{IntervalSet, IronedAlgorithm};
use crate::model::{Allocation, CostModel};
use crate::oracle::estimate::{draw_conditioned, stair_budget};
use crate::oracle::pieces::PieceStructure;
use crate::prior::ProductPrior;
use crate::rng::RandomStream;

/// Per-agent stair data: the set `S_i` (always containing `i`), the stair
/// threshold `w_i` (possibly infinite) and the chosen 1-based piece `j_i`
/// (`k_i + 1` when no piece qualified).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StairSets {
    pub sets: Vec<Allocation>,
    #[serde(with = "inf_as_null")]
    pub thresholds: Vec<f64>,
    pub chosen: Vec<usize>,
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|&x| x.is_finite().then_some(x))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

impl StairSets {
    /// Every agent served alone, no thresholds.
    pub fn singletons(n: usize) -> Self {
        Self {
            sets: (0..n).map(|i| Allocation::singleton(n, i)).collect(),
            thresholds: vec![f64::INFINITY; n],
            chosen: vec![1; n],
        }
    }
}

/// Picks an agent `i` uniformly and serves `S_i` with probability
/// `(j - 1)/(k_i - 1)`, where `j` is the 1-based piece holding `v_i`.
/// Agents with a single piece are never served.
pub struct StairAlgorithm {
    pieces: PieceStructure,
    sets: StairSets,
}

impl StairAlgorithm {
    pub fn new(pieces: PieceStructure, sets: StairSets) -> Self {
        Self { pieces, sets }
    }

    fn level(&self, i: usize, v: f64) -> f64 {
        let k = self.pieces.k(i);
        if k <= 1 {
            return 0.0;
        }
        self.pieces.piece_of(i, v) as f64 / (k - 1) as f64
    }
}

impl Algorithm for StairAlgorithm {
    fn agents(&self) -> usize {
        self.pieces.n()
    }

    fn allocate(&self, values: &[f64], rng: &mut RandomStream) -> Result<Allocation> {
        let n = self.agents();
        let i = rng.below(n);
        if rng.bernoulli(self.level(i, values[i])) {
            Ok(self.sets.sets[i].clone())
        } else {
            Ok(Allocation::empty(n))
        }
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        let n = self.agents();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            let p = self.level(i, values[i]);
            out.push((p / n as f64, self.sets.sets[i].clone()));
            out.push(((1.0 - p) / n as f64, Allocation::empty(n)));
        }
        Ok(Some(Lottery(out).merged()))
    }

    fn pieces(&self) -> Option<&PieceStructure> {
        Some(&self.pieces)
    }

    fn name(&self) -> String {
        "stair".into()
    }
}

pub fn stair(pieces: PieceStructure, sets: StairSets) -> StairAlgorithm {
    StairAlgorithm::new(pieces, sets)
}

/// Output of [`stair_compatible`].
pub struct StairCompatible {
    pub algorithm: IronedAlgorithm,
    pub pieces: PieceStructure,
    pub sets: StairSets,
    pub samples_per_piece: u64,
}

/// For each agent, scans pieces from the bottom, sampling conditioned
/// profiles until one yields an allocation `T ∋ i` with
/// `c(T) <= lo(piece) + n μ_max / √ε`. Pieces below the chosen one are
/// fused and ironed together.
pub fn stair_compatible(
    alg: Arc<dyn Algorithm>,
    prior: Arc<ProductPrior>,
    pieces: &PieceStructure,
    eps: f64,
    cost: &CostModel,
    rng: &RandomStream,
) -> Result<StairCompatible> {
    pieces.validate(&prior)?;
    let n = prior.n();
    let samples = stair_budget(eps, n);
    let slack = n as f64 * prior.mu_max() / eps.sqrt();
    let found: Vec<Option<(usize, Allocation)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut values = vec![0.0; n];
            for (j, p) in pieces.agent(i).iter().enumerate() {
                let mut cell_rng = rng.child2(i as u64, j as u64);
                for _ in 0..samples {
                    draw_conditioned(&prior, i, p.first, p.last, &mut values, &mut cell_rng);
                    let t = alg.allocate(&values, &mut cell_rng)?;
                    if t.served(i) && cost.cost(&t) <= p.lo + slack {
                        return Ok(Some((j, t)));
                    }
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;

    let mut merged = pieces.clone();
    let mut blocks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut sets = Vec::with_capacity(n);
    let mut thresholds = Vec::with_capacity(n);
    let mut chosen = Vec::with_capacity(n);
    for (i, f) in found.into_iter().enumerate() {
        let k = pieces.k(i);
        let (j, set) = match f {
            Some((j, t)) => (j + 1, t),
            None => (k + 1, Allocation::singleton(n, i)),
        };
        let fused = j - 1;
        merged = merged.merge_prefix(i, fused);
        if fused >= 2 {
            let ps = pieces.agent(i);
            blocks[i].push((ps[0].first, ps[fused - 1].last));
        }
        let w = if j > k { f64::INFINITY } else { merged.agent(i)[0].hi };
        sets.push(set);
        thresholds.push(w);
        chosen.push(j);
    }
    let intervals = IntervalSet::from_blocks(&prior, &blocks);
    let algorithm = IronedAlgorithm::new(alg, prior, intervals)?.with_pieces(merged.clone());
    Ok(StairCompatible {
        algorithm,
        pieces: merged,
        sets: StairSets { sets, thresholds, chosen },
        samples_per_piece: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{ConstantAlgorithm, FnAlgorithm};
    use crate::prior::DiscreteDistribution;

    fn prior3() -> Arc<ProductPrior> {
        Arc::new(ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0, 3.0]).unwrap(), 2))
    }

    #[test]
    fn stair_levels() {
        let prior = prior3();
        let pieces = PieceStructure::atoms(&prior);
        let s = stair(pieces, StairSets::singletons(2));
        let at = |v: [f64; 2]| s.lottery(&v).unwrap().unwrap().marginals(2);
        assert_eq!(at([1.0, 1.0]), vec![0.0, 0.0]);
        assert_eq!(at([2.0, 1.0]), vec![0.25, 0.0]);
        assert_eq!(at([3.0, 3.0]), vec![0.5, 0.5]);
        let mut rng = RandomStream::new(1);
        for _ in 0..100 {
            assert!(s.allocate(&[1.0, 1.0], &mut rng).unwrap().count() == 0);
        }
    }

    #[test]
    fn single_piece_stair_never_serves() {
        let prior = Arc::new(ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0]).unwrap(), 1));
        let pieces = PieceStructure::atoms(&prior).merge_prefix(0, 2);
        let s = stair(pieces, StairSets::singletons(1));
        assert_eq!(s.lottery(&[2.0]).unwrap().unwrap().marginals(1), vec![0.0]);
    }

    #[test]
    fn serve_all_picks_first_piece() {
        let prior = prior3();
        let pieces = PieceStructure::atoms(&prior);
        let alg: Arc<dyn Algorithm> = Arc::new(ConstantAlgorithm::serve_all(2));
        let out = stair_compatible(alg, prior, &pieces, 0.1, &CostModel::zero(), &RandomStream::new(5)).unwrap();
        assert_eq!(out.sets.chosen, vec![1, 1]);
        assert_eq!(out.sets.sets[0], Allocation::full(2));
        assert_eq!(out.sets.thresholds, vec![2.0, 2.0]);
        assert_eq!(out.pieces, pieces);
        assert!(out.algorithm.intervals().is_empty());
    }

    #[test]
    fn never_serving_agent_falls_back() {
        let prior = prior3();
        let pieces = PieceStructure::atoms(&prior);
        let alg: Arc<dyn Algorithm> =
            Arc::new(FnAlgorithm::new(2, "only-first", |_v: &[f64]| Allocation::singleton(2, 0)));
        let out = stair_compatible(alg, prior, &pieces, 0.1, &CostModel::zero(), &RandomStream::new(5)).unwrap();
        assert_eq!(out.sets.chosen, vec![1, 4]);
        assert_eq!(out.sets.sets[1], Allocation::singleton(2, 1));
        assert_eq!(out.sets.thresholds[1], f64::INFINITY);
        assert_eq!(out.pieces.k(1), 1);
        assert_eq!(out.algorithm.intervals().agent(1).len(), 1);
        let json = serde_json::to_string(&out.sets).unwrap();
        assert!(json.contains("null"));
        let back: StairSets = serde_json::from_str(&json).unwrap();
        assert_eq!(back, out.sets);
    }
}
