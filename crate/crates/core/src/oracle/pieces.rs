//! Value pieces on which discretized algorithms are constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideal::IntervalSet;
use crate::prior::{DiscreteDistribution, ProductPrior};

/// Half-open value range `[lo, hi)` holding atoms `first..=last`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub first: usize,
    pub last: usize,
}

impl Piece {
    pub fn atoms(&self) -> usize {
        self.last - self.first + 1
    }
}

/// Per-agent ordered partition of the value line into pieces, each holding
/// at least one atom of that agent's prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceStructure {
    pub per_agent: Vec<Vec<Piece>>,
}

/// Raw geometric boundaries: `[0, εμ)`, then `[εμ(1+ε)^t, εμ(1+ε)^(t+1))`
/// while the lower end does not exceed `v_max`.
pub fn geometric_bounds(eps: f64, mu_max: f64, v_max: f64) -> Result<Vec<(f64, f64)>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadEpsilon(eps));
    }
    if mu_max <= 0.0 {
        return Err(Error::ZeroMeanPrior);
    }
    let base = eps * mu_max;
    let mut out = vec![(0.0, base)];
    let mut t = 0;
    loop {
        let lo = base * (1.0 + eps).powi(t);
        if lo > v_max {
            break;
        }
        out.push((lo, base * (1.0 + eps).powi(t + 1)));
        t += 1;
    }
    Ok(out)
}

/// Assigns atoms to the ranges and folds atom-free ranges into a neighbour:
/// into the left one, or the right one for a leading run.
fn assign(dist: &DiscreteDistribution, bounds: &[(f64, f64)]) -> Vec<Piece> {
    let values = dist.values();
    let mut out: Vec<Piece> = Vec::new();
    let mut pending_lo: Option<f64> = None;
    for &(lo, hi) in bounds {
        let first = values.partition_point(|&a| a < lo);
        let end = values.partition_point(|&a| a < hi);
        if first < end {
            let lo = pending_lo.take().unwrap_or(lo);
            out.push(Piece { lo, hi, first, last: end - 1 });
        } else if let Some(prev) = out.last_mut() {
            prev.hi = hi;
        } else if pending_lo.is_none() {
            pending_lo = Some(lo);
        }
    }
    out
}

impl PieceStructure {
    /// Geometric discretization with atom-free pieces merged away.
    pub fn geometric(prior: &ProductPrior, eps: f64) -> Result<Self> {
        let bounds = geometric_bounds(eps, prior.mu_max(), prior.v_max())?;
        let per_agent: Vec<Vec<Piece>> = prior.agents().iter().map(|d| assign(d, &bounds)).collect();
        if per_agent.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInstance("an atom lies outside every piece".into()));
        }
        Ok(Self { per_agent })
    }

    /// One piece per atom: `[v_j, v_{j+1})`, the first starting at 0 and the
    /// last unbounded.
    pub fn atoms(prior: &ProductPrior) -> Self {
        let per_agent = prior
            .agents()
            .iter()
            .map(|d| {
                (0..d.len())
                    .map(|j| Piece {
                        lo: if j == 0 { 0.0 } else { d.value(j) },
                        hi: if j + 1 == d.len() { f64::INFINITY } else { d.value(j + 1) },
                        first: j,
                        last: j,
                    })
                    .collect()
            })
            .collect();
        Self { per_agent }
    }

    pub fn n(&self) -> usize {
        self.per_agent.len()
    }

    pub fn agent(&self, i: usize) -> &[Piece] {
        &self.per_agent[i]
    }

    pub fn k(&self, i: usize) -> usize {
        self.per_agent[i].len()
    }

    pub fn max_k(&self) -> usize {
        self.per_agent.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// 0-based index of the piece containing `v`; values below every piece
    /// map to the first one and values above to the last.
    pub fn piece_of(&self, i: usize, v: f64) -> usize {
        let ps = &self.per_agent[i];
        ps.partition_point(|p| p.lo <= v).saturating_sub(1)
    }

    /// Piece index holding atom `j` of agent `i`.
    pub fn piece_of_atom(&self, i: usize, j: usize) -> usize {
        self.per_agent[i].partition_point(|p| p.last < j)
    }

    pub fn masses(&self, prior: &ProductPrior, i: usize) -> Vec<f64> {
        let d = prior.agent(i);
        self.per_agent[i].iter().map(|p| d.mass_between(p.first, p.last)).collect()
    }

    /// Resampling intervals: every piece with two or more atoms.
    pub fn ironing_intervals(&self, prior: &ProductPrior) -> IntervalSet {
        let blocks: Vec<Vec<(usize, usize)>> = self
            .per_agent
            .iter()
            .map(|ps| ps.iter().filter(|p| p.atoms() >= 2).map(|p| (p.first, p.last)).collect())
            .collect();
        IntervalSet::from_blocks(prior, &blocks)
    }

    /// Copy with agent `i`'s pieces `0..count` fused into one.
    pub fn merge_prefix(&self, i: usize, count: usize) -> Self {
        let mut out = self.clone();
        if count >= 2 {
            let ps = &mut out.per_agent[i];
            let fused = Piece { lo: ps[0].lo, hi: ps[count - 1].hi, first: ps[0].first, last: ps[count - 1].last };
            ps.splice(0..count, [fused]);
        }
        out
    }

    /// Checks coverage of each agent's atoms in order.
    pub fn validate(&self, prior: &ProductPrior) -> Result<()> {
        if self.n() != prior.n() {
            return Err(Error::DimensionMismatch { expected: prior.n(), got: self.n() });
        }
        for (i, ps) in self.per_agent.iter().enumerate() {
            let mut next = 0;
            for p in ps {
                if p.first != next || p.last < p.first || p.lo >= p.hi {
                    return Err(Error::InvalidInstance(format!("agent {i}: malformed piece structure")));
                }
                next = p.last + 1;
            }
            if next != prior.agent(i).len() {
                return Err(Error::InvalidInstance(format!("agent {i}: pieces do not cover every atom")));
            }
        }
        Ok(())
    }
}
