//! Interval sets and the resampling ironed algorithm.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, Lottery, Structure, ValueKernel};
use crate::error::{Error, Result};
use crate::model::Allocation;
use crate::oracle::PieceStructure;
use crate::prior::{ProductPrior, ValueInterval};
use crate::rng::RandomStream;

/// Per-agent disjoint, atom-aligned closed value intervals to iron on.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub per_agent: Vec<Vec<ValueInterval>>,
}

impl IntervalSet {
    pub fn empty(n: usize) -> Self {
        Self { per_agent: vec![Vec::new(); n] }
    }

    pub fn new(per_agent: Vec<Vec<ValueInterval>>) -> Self {
        Self { per_agent }
    }

    pub fn agent(&self, i: usize) -> &[ValueInterval] {
        &self.per_agent[i]
    }

    pub fn is_empty(&self) -> bool {
        self.per_agent.iter().all(Vec::is_empty)
    }

    pub fn find(&self, agent: usize, v: f64) -> Option<ValueInterval> {
        self.per_agent[agent].iter().copied().find(|iv| iv.contains(v))
    }

    /// Atom-index blocks `(first, last)` per agent, after validating the set
    /// against `prior`: sorted, disjoint, endpoints on atoms, and each
    /// interval holding at least two atoms.
    pub fn blocks(&self, prior: &ProductPrior) -> Result<Vec<Vec<(usize, usize)>>> {
        if self.per_agent.len() != prior.n() {
            return Err(Error::DimensionMismatch { expected: prior.n(), got: self.per_agent.len() });
        }
        self.per_agent
            .iter()
            .enumerate()
            .map(|(i, ivs)| {
                let d = prior.agent(i);
                let mut out: Vec<(usize, usize)> = Vec::with_capacity(ivs.len());
                for iv in ivs {
                    let (first, last) = match (d.index_of(iv.lo), d.index_of(iv.hi)) {
                        (Some(a), Some(b)) if a < b => (a, b),
                        _ => {
                            return Err(Error::InvalidInstance(format!(
                                "agent {i}: interval [{}, {}] is not atom-aligned with two or more atoms",
                                iv.lo, iv.hi
                            )))
                        }
                    };
                    if out.last().is_some_and(|&(_, prev)| first <= prev) {
                        return Err(Error::InvalidInstance(format!(
                            "agent {i}: intervals overlap or are unsorted"
                        )));
                    }
                    out.push((first, last));
                }
                Ok(out)
            })
            .collect()
    }

    /// Interval set from atom-index blocks.
    pub fn from_blocks(prior: &ProductPrior, blocks: &[Vec<(usize, usize)>]) -> Self {
        Self {
            per_agent: blocks
                .iter()
                .enumerate()
                .map(|(i, bs)| {
                    let d = prior.agent(i);
                    bs.iter().map(|&(a, b)| ValueInterval::new(d.value(a), d.value(b))).collect()
                })
                .collect(),
        }
    }
}

/// Runs `inner` after redrawing each agent's report from its prior
/// restricted to the interval containing it. Reports outside every interval
/// pass through unchanged.
pub struct IronedAlgorithm {
    inner: Arc<dyn Algorithm>,
    prior: Arc<ProductPrior>,
    intervals: IntervalSet,
    blocks: Vec<Vec<(usize, usize)>>,
    kernel: ValueKernel,
    pieces: Option<PieceStructure>,
}

impl IronedAlgorithm {
    pub fn new(inner: Arc<dyn Algorithm>, prior: Arc<ProductPrior>, intervals: IntervalSet) -> Result<Self> {
        if inner.agents() != prior.n() {
            return Err(Error::DimensionMismatch { expected: prior.n(), got: inner.agents() });
        }
        let blocks = intervals.blocks(&prior)?;
        let kernel = ValueKernel::from_blocks(&prior, &blocks);
        Ok(Self { inner, prior, intervals, blocks, kernel, pieces: None })
    }

    /// Annotates the algorithm with the pieces on which it is constant.
    pub fn with_pieces(mut self, pieces: PieceStructure) -> Self {
        self.pieces = Some(pieces);
        self
    }

    pub fn intervals(&self) -> &IntervalSet {
        &self.intervals
    }

    pub fn inner(&self) -> &Arc<dyn Algorithm> {
        &self.inner
    }

    pub fn prior(&self) -> &Arc<ProductPrior> {
        &self.prior
    }

    fn resample(&self, values: &[f64], rng: &mut RandomStream) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let d = self.prior.agent(i);
                match self.blocks[i]
                    .iter()
                    .find(|&&(a, b)| d.value(a) <= v && v <= d.value(b))
                {
                    Some(&(a, b)) => d.value(d.conditional_sample_index(a, b, rng)),
                    None => v,
                }
            })
            .collect()
    }
}

impl Algorithm for IronedAlgorithm {
    fn agents(&self) -> usize {
        self.prior.n()
    }

    fn allocate(&self, values: &[f64], rng: &mut RandomStream) -> Result<Allocation> {
        if values.len() != self.prior.n() {
            return Err(Error::DimensionMismatch { expected: self.prior.n(), got: values.len() });
        }
        let redrawn = self.resample(values, rng);
        self.inner.allocate(&redrawn, rng)
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        match self.prior.indices_of(values) {
            Ok(idx) => crate::ideal::exact::profile_lottery(self, &self.prior, &idx).map(Some),
            Err(_) => Ok(None),
        }
    }

    fn structure(&self) -> Structure<'_> {
        Structure::Resampled { inner: self.inner.as_ref(), kernel: &self.kernel }
    }

    fn pieces(&self) -> Option<&PieceStructure> {
        self.pieces.as_ref()
    }

    fn name(&self) -> String {
        format!("ironed({})", self.inner.name())
    }
}

/// Wraps `alg` so that reports inside any interval are resampled first.
pub fn iron_on_intervals(
    alg: Arc<dyn Algorithm>,
    prior: Arc<ProductPrior>,
    intervals: IntervalSet,
) -> Result<IronedAlgorithm> {
    IronedAlgorithm::new(alg, prior, intervals)
}
