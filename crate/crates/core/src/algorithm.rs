//! The black-box algorithm interface.
//!
//! An [`Algorithm`] maps a reported valuation profile plus randomness to a
//! binary allocation. Besides the black-box [`Algorithm::allocate`] entry
//! point, implementations may expose structure that lets the exact engine in
//! [`crate::ideal::exact`] compute interim allocation rules without sampling:
//!
//! - [`Algorithm::lottery`]: the exact outcome distribution at a profile;
//! - [`Algorithm::structure`]: "resample each report, then delegate"
//!   ([`Structure::Resampled`]) or a convex combination
//!   ([`Structure::Mixture`]).

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::Result;
use crate::model::{Allocation, CostModel};
use crate::oracle::PieceStructure;
use crate::prior::ProductPrior;
use crate::rng::RandomStream;

/// A finite distribution over allocations.
#[derive(Clone, Debug, PartialEq)]
pub struct Lottery(pub Vec<(f64, Allocation)>);

impl Lottery {
    pub fn point(x: Allocation) -> Self {
        Self(vec![(1.0, x)])
    }

    /// Outcome of one uniform draw `u` where agent `i` is served iff
    /// `u < probs[i]`. Outcomes are nested, so the support has at most
    /// `n + 1` allocations.
    pub fn threshold(probs: &[f64]) -> Self {
        let mut cuts: Vec<f64> = probs.iter().copied().filter(|&p| p > 0.0 && p < 1.0).collect();
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let x = Allocation::new(probs.iter().map(|&p| lo < p).collect());
            out.push((hi - lo, x));
        }
        Self(out).merged()
    }

    /// Combines repeated allocations and drops zero-probability entries.
    pub fn merged(self) -> Self {
        let mut acc: BTreeMap<Allocation, f64> = BTreeMap::new();
        for (p, x) in self.0 {
            *acc.entry(x).or_insert(0.0) += p;
        }
        Self(acc.into_iter().filter(|(_, p)| *p > 0.0).map(|(x, p)| (p, x)).collect())
    }

    pub fn marginals(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for (p, x) in &self.0 {
            for i in x.served_agents() {
                m[i] += p;
            }
        }
        m
    }

    pub fn expected_cost(&self, cost: &CostModel) -> f64 {
        self.0
            .iter()
            .map(|(p, x)| {
                let c = cost.cost(x);
                if c == f64::INFINITY {
                    f64::INFINITY
                } else {
                    p * c
                }
            })
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.0.iter().map(|(p, _)| p).sum()
    }
}

/// Per-agent Markov kernel on atom indices: reports are redrawn
/// independently across agents before the inner algorithm runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueKernel {
    /// `rows[agent][atom]` is a sparse distribution over atom indices.
    rows: Vec<Vec<Vec<(usize, f64)>>>,
}

impl ValueKernel {
    pub fn identity(prior: &ProductPrior) -> Self {
        Self {
            rows: prior
                .agents()
                .iter()
                .map(|d| (0..d.len()).map(|j| vec![(j, 1.0)]).collect())
                .collect(),
        }
    }

    /// Kernel that redraws an atom in block `first..=last` from the prior
    /// restricted to that block. Atoms outside every block pass through.
    pub fn from_blocks(prior: &ProductPrior, blocks: &[Vec<(usize, usize)>]) -> Self {
        let mut k = Self::identity(prior);
        for (i, agent_blocks) in blocks.iter().enumerate() {
            let d = prior.agent(i);
            for &(first, last) in agent_blocks {
                let total = d.mass_between(first, last);
                let row: Vec<(usize, f64)> = (first..=last).map(|t| (t, d.mass(t) / total)).collect();
                for j in first..=last {
                    k.rows[i][j] = row.clone();
                }
            }
        }
        k
    }

    pub fn agents(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, agent: usize, atom: usize) -> &[(usize, f64)] {
        &self.rows[agent][atom]
    }

    /// Pushes a distribution over atom indices through the agent's kernel.
    pub fn push(&self, agent: usize, input: &[(usize, f64)]) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(j, p) in input {
            for &(t, q) in &self.rows[agent][j] {
                *acc.entry(t).or_insert(0.0) += p * q;
            }
        }
        acc.into_iter().collect()
    }
}

/// Structural view of an algorithm, used by exact analysis.
pub enum Structure<'a> {
    /// Only `allocate` and possibly `lottery` are available.
    Opaque,
    /// Each report is redrawn through `kernel`, then `inner` runs.
    Resampled {
        inner: &'a dyn Algorithm,
        kernel: &'a ValueKernel,
    },
    /// Runs component `k` with probability `weights[k]`.
    Mixture(Vec<(f64, &'a dyn Algorithm)>),
}

/// A (possibly randomized) allocation rule over reported values.
pub trait Algorithm: Send + Sync {
    fn agents(&self) -> usize;

    /// One black-box invocation. Deterministic given `(values, rng state)`.
    fn allocate(&self, values: &[f64], rng: &mut RandomStream) -> Result<Allocation>;

    /// Exact outcome distribution at `values`, when available in closed form.
    fn lottery(&self, _values: &[f64]) -> Result<Option<Lottery>> {
        Ok(None)
    }

    fn structure(&self) -> Structure<'_> {
        Structure::Opaque
    }

    /// Value pieces on which the interim rule is known to be constant.
    fn pieces(&self) -> Option<&PieceStructure> {
        None
    }

    fn name(&self) -> String {
        "algorithm".into()
    }
}

impl<A: Algorithm + ?Sized> Algorithm for Arc<A> {
    fn agents(&self) -> usize {
        (**self).agents()
    }

    fn allocate(&self, values: &[f64], rng: &mut RandomStream) -> Result<Allocation> {
        (**self).allocate(values, rng)
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        (**self).lottery(values)
    }

    fn structure(&self) -> Structure<'_> {
        (**self).structure()
    }

    fn pieces(&self) -> Option<&PieceStructure> {
        (**self).pieces()
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// Wraps an algorithm and counts `allocate` invocations.
pub struct CountingAlgorithm {
    inner: Arc<dyn Algorithm>,
    calls: AtomicU64,
}

impl CountingAlgorithm {
    pub fn new(inner: Arc<dyn Algorithm>) -> Self {
        Self { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl Algorithm for CountingAlgorithm {
    fn agents(&self) -> usize {
        self.inner.agents()
    }

    fn allocate(&self, values: &[f64], rng: &mut RandomStream) -> Result<Allocation> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.allocate(values, rng)
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        self.inner.lottery(values)
    }

    fn structure(&self) -> Structure<'_> {
        self.inner.structure()
    }

    fn pieces(&self) -> Option<&PieceStructure> {
        self.inner.pieces()
    }

    fn name(&self) -> String {
        format!("counted({})", self.inner.name())
    }
}
