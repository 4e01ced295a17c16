//! Sampling-based reduction for black-box algorithms.
//!
//! Pipeline: geometric discretization, stair-compatible re-ironing of low
//! pieces, statistical ironing on an estimated rule, and a final mixture
//! with the stair algorithm that absorbs residual estimation error.

pub mod estimate;
pub mod pieces;
pub mod stair;

use std::sync::Arc;

use serde_json::{json, Value};

pub use estimate::{
    estimate_rule, estimate_rule_with_budget, estimated_intervals, estimation_budget, stair_budget,
    statistical_iron, EstimatedRule,
};
pub use pieces::{geometric_bounds, Piece, PieceStructure};
pub use stair::{stair, stair_compatible, StairAlgorithm, StairCompatible, StairSets};

use crate::algorithm::{Algorithm, Lottery, Structure};
use crate::error::{Error, Result};
use crate::ideal::{IntervalSet, IronedAlgorithm};
use crate::model::{Allocation, CostModel};
use crate::prior::ProductPrior;
use crate::rng::RandomStream;

/// Runs component `k` with probability `w_k`, chosen by one uniform draw
/// taken before anything else.
pub struct MixtureAlgorithm {
    parts: Vec<(f64, Arc<dyn Algorithm>)>,
}

impl MixtureAlgorithm {
    pub fn new(parts: Vec<(f64, Arc<dyn Algorithm>)>) -> Result<Self> {
        let total: f64 = parts.iter().map(|p| p.0).sum();
        if parts.is_empty() || parts.iter().any(|p| !(0.0..=1.0).contains(&p.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution("mixture weights must be a probability vector".into()));
        }
        let n = parts[0].1.agents();
        if let Some(p) = parts.iter().find(|p| p.1.agents() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.1.agents() });
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[(f64, Arc<dyn Algorithm>)] {
        &self.parts
    }
}

impl Algorithm for MixtureAlgorithm {
    fn agents(&self) -> usize {
        self.parts[0].1.agents()
    }

    fn allocate(&self, values: &[f64], rng: &mut RandomStream) -> Result<Allocation> {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (w, part) in &self.parts {
            acc += w;
            if u < acc {
                return part.allocate(values, rng);
            }
        }
        let last = self.parts.iter().rev().find(|p| p.0 > 0.0).unwrap_or(&self.parts[0]);
        last.1.allocate(values, rng)
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        let mut out = Vec::new();
        for (w, part) in &self.parts {
            if *w == 0.0 {
                continue;
            }
            match part.lottery(values)? {
                Some(l) => out.extend(l.0.into_iter().map(|(p, x)| (w * p, x))),
                None => return Ok(None),
            }
        }
        Ok(Some(Lottery(out).merged()))
    }

    fn structure(&self) -> Structure<'_> {
        Structure::Mixture(self.parts.iter().map(|(w, a)| (*w, a.as_ref())).collect())
    }

    fn name(&self) -> String {
        let parts: Vec<String> = self.parts.iter().map(|(w, a)| format!("{w}*{}", a.name())).collect();
        format!("mixture({})", parts.join(" + "))
    }
}

/// Irons `alg` on the geometric pieces for `eps`, making it constant on each.
pub fn discretize(
    alg: Arc<dyn Algorithm>,
    prior: Arc<ProductPrior>,
    eps: f64,
) -> Result<(IronedAlgorithm, PieceStructure)> {
    let pieces = PieceStructure::geometric(&prior, eps)?;
    let intervals = pieces.ironing_intervals(&prior);
    let ironed = IronedAlgorithm::new(alg, prior, intervals)?.with_pieces(pieces.clone());
    Ok((ironed, pieces))
}

/// Stair mixing weight `2(k - 1) n ε` for the largest piece count `k`.
pub fn mixing_weight(pieces: &PieceStructure, eps: f64) -> f64 {
    2.0 * (pieces.max_k().saturating_sub(1)) as f64 * pieces.n() as f64 * eps
}

/// Everything produced by [`monotonize`].
pub struct Monotonization {
    pub algorithm: Arc<MixtureAlgorithm>,
    pub sets: StairSets,
    pub delta: f64,
    pub eps: f64,
    pub discretized_pieces: PieceStructure,
    pub pieces: PieceStructure,
    pub estimate: EstimatedRule,
    pub intervals: IntervalSet,
    pub stair_samples_per_piece: u64,
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

impl Monotonization {
    /// Reduction report: pieces, estimates, intervals, mixing weight, stair
    /// sets and sample budgets.
    pub fn report(&self) -> Value {
        let pieces = |ps: &PieceStructure| -> Value {
            ps.per_agent
                .iter()
                .map(|a| {
                    a.iter()
                        .map(|p| json!({"lo": p.lo, "hi": finite_or_null(p.hi), "first_atom": p.first, "last_atom": p.last}))
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        json!({
            "eps": self.eps,
            "delta": self.delta,
            "discretized_pieces": pieces(&self.discretized_pieces),
            "pieces": pieces(&self.pieces),
            "estimate": {
                "y": self.estimate.y,
                "samples_per_cell": self.estimate.samples_per_cell,
            },
            "intervals": self.intervals.per_agent,
            "stair": {
                "sets": self.sets.sets.iter().map(|s| s.served_agents().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "thresholds": self.sets.thresholds.iter().map(|&w| finite_or_null(w)).collect::<Vec<_>>(),
                "chosen_piece": self.sets.chosen,
                "samples_per_piece": self.stair_samples_per_piece,
            },
        })
    }
}

/// Full pipeline: discretize, make stair-compatible, statistically iron,
/// then mix with the stair algorithm at weight `δ = 2(k - 1) n ε`.
pub fn monotonize(
    alg: Arc<dyn Algorithm>,
    prior: Arc<ProductPrior>,
    cost: &CostModel,
    eps: f64,
    rng: &RandomStream,
) -> Result<Monotonization> {
    let (dot, discretized_pieces) = discretize(alg, prior.clone(), eps)?;
    let sc = stair_compatible(Arc::new(dot), prior.clone(), &discretized_pieces, eps, cost, &rng.child(1))?;
    let delta = mixing_weight(&sc.pieces, eps);
    if delta > 1.0 {
        return Err(Error::DeltaOverflow { delta });
    }
    let (tilde, intervals, estimate) =
        statistical_iron(Arc::new(sc.algorithm), prior, &sc.pieces, eps, &rng.child(2))?;
    let stair_alg = stair(sc.pieces.clone(), sc.sets.clone());
    let algorithm = Arc::new(MixtureAlgorithm::new(vec![
        (delta, Arc::new(stair_alg) as Arc<dyn Algorithm>),
        (1.0 - delta, Arc::new(tilde) as Arc<dyn Algorithm>),
    ])?);
    Ok(Monotonization {
        algorithm,
        sets: sc.sets,
        delta,
        eps,
        discretized_pieces,
        pieces: sc.pieces,
        estimate,
        intervals,
        stair_samples_per_piece: sc.samples_per_piece,
    })
}
