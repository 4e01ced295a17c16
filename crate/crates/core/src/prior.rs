//! Finite-support value distributions and product priors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

const MASS_TOL: f64 = 1e-12;

/// Closed value interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ValueInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// A finite-support distribution over non-negative values.
///
/// Atom values are strictly increasing, masses positive and summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    values: Vec<f64>,
    masses: Vec<f64>,
    cdf: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::validated(atoms).map_err(|(atom, reason)| {
            Error::InvalidDistribution(format!("atom {atom}: {reason}"))
        })
    }

    fn validated(atoms: Vec<(f64, f64)>) -> std::result::Result<Self, (usize, String)> {
        if atoms.is_empty() {
            return Err((0, "distribution has no atoms".into()));
        }
        let mut values = Vec::with_capacity(atoms.len());
        let mut masses = Vec::with_capacity(atoms.len());
        for (j, &(v, p)) in atoms.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err((j, format!("value {v} must be finite and non-negative")));
            }
            if !(p > 0.0) || !p.is_finite() {
                return Err((j, format!("mass {p} must be positive")));
            }
            if let Some(&prev) = values.last() {
                if v <= prev {
                    return Err((j, format!("value {v} does not exceed previous atom {prev}")));
                }
            }
            values.push(v);
            masses.push(p);
        }
        let cdf: Vec<f64> = masses
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let total = *cdf.last().unwrap();
        if (total - 1.0).abs() > MASS_TOL {
            return Err((atoms.len() - 1, format!("masses sum to {total}, not 1")));
        }
        Ok(Self { values, masses, cdf })
    }

    /// Equal masses on the given strictly increasing values.
    pub fn uniform(values: &[f64]) -> Result<Self> {
        let p = 1.0 / values.len() as f64;
        Self::new(values.iter().map(|&v| (v, p)).collect())
    }

    /// Point mass at `v`.
    pub fn degenerate(v: f64) -> Result<Self> {
        Self::new(vec![(v, 1.0)])
    }

    /// Grid discretization of a continuous distribution: `m` equal-mass atoms
    /// placed at the quantile-cell midpoints `quantile((j + 1/2) / m)`.
    pub fn from_quantile_fn(quantile: impl Fn(f64) -> f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDistribution("grid needs at least one atom".into()));
        }
        let p = 1.0 / m as f64;
        let atoms = (0..m)
            .map(|j| (quantile((j as f64 + 0.5) * p), p))
            .collect();
        Self::new(atoms)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn mass(&self, j: usize) -> f64 {
        self.masses[j]
    }

    /// Cumulative mass `F(atom_j)`, i.e. the prefix sum through atom `j`.
    pub fn cdf(&self, j: usize) -> f64 {
        self.cdf[j]
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.masses.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, p)| v * p).sum()
    }

    pub fn max_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    /// Index of the atom equal to `v`.
    pub fn index_of(&self, v: f64) -> Option<usize> {
        self.values
            .binary_search_by(|a| a.partial_cmp(&v).unwrap())
            .ok()
    }

    /// Index of the largest atom `<= v`.
    pub fn floor_index(&self, v: f64) -> Option<usize> {
        let k = self.values.partition_point(|&a| a <= v);
        k.checked_sub(1)
    }

    /// Inclusive index range of the atoms inside `interval`.
    pub fn atom_range(&self, interval: ValueInterval) -> Option<(usize, usize)> {
        let first = self.values.partition_point(|&a| a < interval.lo);
        let end = self.values.partition_point(|&a| a <= interval.hi);
        (first < end).then(|| (first, end - 1))
    }

    /// Total mass of atoms `first..=last`.
    pub fn mass_between(&self, first: usize, last: usize) -> f64 {
        let below = if first == 0 { 0.0 } else { self.cdf[first - 1] };
        self.cdf[last] - below
    }

    fn index_for_cdf(&self, target: f64, first: usize, last: usize) -> usize {
        let k = first + self.cdf[first..=last].partition_point(|&c| c <= target);
        k.min(last)
    }

    pub fn sample_index(&self, rng: &mut RandomStream) -> usize {
        self.index_for_cdf(rng.uniform(), 0, self.len() - 1)
    }

    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        self.values[self.sample_index(rng)]
    }

    /// Atom index drawn from the distribution restricted to atoms `first..=last`.
    pub fn conditional_sample_index(&self, first: usize, last: usize, rng: &mut RandomStream) -> usize {
        if first == last {
            return first;
        }
        let below = if first == 0 { 0.0 } else { self.cdf[first - 1] };
        let target = below + rng.uniform() * (self.cdf[last] - below);
        self.index_for_cdf(target, first, last)
    }

    /// Value drawn from the distribution conditioned on lying in `interval`.
    pub fn conditional_sample(&self, interval: ValueInterval, rng: &mut RandomStream) -> Result<f64> {
        let (first, last) = self.atom_range(interval).ok_or(Error::EmptyInterval {
            lo: interval.lo,
            hi: interval.hi,
        })?;
        Ok(self.values[self.conditional_sample_index(first, last, rng)])
    }
}

/// Independent per-agent priors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPrior {
    agents: Vec<DiscreteDistribution>,
    mu_max: f64,
    v_max: f64,
}

#[derive(Serialize, Deserialize)]
struct PriorFile {
    agents: Vec<AgentAtoms>,
}

#[derive(Serialize, Deserialize)]
struct AgentAtoms {
    atoms: Vec<(f64, f64)>,
}

impl ProductPrior {
    pub fn new(agents: Vec<DiscreteDistribution>) -> Self {
        let mu_max = agents.iter().map(|d| d.mean()).fold(0.0, f64::max);
        let v_max = agents.iter().map(|d| d.max_value()).fold(0.0, f64::max);
        Self { agents, mu_max, v_max }
    }

    /// Identical distribution for each of `n` agents.
    pub fn iid(dist: DiscreteDistribution, n: usize) -> Self {
        Self::new(vec![dist; n])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PriorFile = serde_json::from_str(text)?;
        let agents = file
            .agents
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                DiscreteDistribution::validated(a.atoms).map_err(|(atom, reason)| Error::InvalidPrior {
                    agent: i,
                    atom,
                    reason,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if agents.is_empty() {
            return Err(Error::InvalidPrior {
                agent: 0,
                atom: 0,
                reason: "prior has no agents".into(),
            });
        }
        Ok(Self::new(agents))
    }

    pub fn to_json(&self) -> String {
        let file = PriorFile {
            agents: self
                .agents
                .iter()
                .map(|d| AgentAtoms { atoms: d.atoms().collect() })
                .collect(),
        };
        serde_json::to_string(&file).expect("prior serializes")
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&self, i: usize) -> &DiscreteDistribution {
        &self.agents[i]
    }

    pub fn agents(&self) -> &[DiscreteDistribution] {
        &self.agents
    }

    /// Largest expected valuation across agents.
    pub fn mu_max(&self) -> f64 {
        self.mu_max
    }

    /// Upper bound on every atom value.
    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Number of atom tuples in the product support.
    pub fn support_size(&self) -> u128 {
        self.agents.iter().map(|d| d.len() as u128).product()
    }

    pub fn sample_profile(&self, rng: &mut RandomStream) -> Vec<f64> {
        self.agents.iter().map(|d| d.sample(rng)).collect()
    }

    /// Atom values for an index tuple.
    pub fn values_at(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(i, &j)| self.agents[i].value(j)).collect()
    }

    /// Probability of an index tuple.
    pub fn mass_at(&self, idx: &[usize]) -> f64 {
        idx.iter().enumerate().map(|(i, &j)| self.agents[i].mass(j)).product()
    }

    /// Checks that every coordinate of `values` is an atom; returns the indices.
    pub fn indices_of(&self, values: &[f64]) -> Result<Vec<usize>> {
        if values.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: values.len() });
        }
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| self.agents[i].index_of(v).ok_or(Error::OffSupport { agent: i, value: v }))
            .collect()
    }
}

/// Odometer over index tuples of a product of finite sets with the given sizes.
#[derive(Clone, Debug)]
pub struct TupleIter {
    sizes: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl TupleIter {
    pub fn new(sizes: Vec<usize>) -> Self {
        let current = (!sizes.contains(&0)).then(|| vec![0; sizes.len()]);
        Self { sizes, current }
    }
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut k = cur.len();
        loop {
            if k == 0 {
                self.current = None;
                break;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < self.sizes[k] {
                break;
            }
            cur[k] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> DiscreteDistribution {
        DiscreteDistribution::new(vec![(1.0, 0.5), (100.0, 0.5)]).unwrap()
    }

    #[test]
    fn degenerate_prior_always_same_profile() {
        let prior = ProductPrior::iid(DiscreteDistribution::degenerate(5.0).unwrap(), 3);
        let mut rng = RandomStream::new(1);
        for _ in 0..100 {
            assert_eq!(prior.sample_profile(&mut rng), vec![5.0; 3]);
        }
    }

    #[test]
    fn sampling_frequency_matches_mass() {
        let d = two_point();
        let mut rng = RandomStream::new(11);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| d.sample(&mut rng) == 100.0).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.002, "freq {freq}");
    }

    #[test]
    fn fixed_seed_fixed_profile() {
        let prior = ProductPrior::new(vec![two_point(), DiscreteDistribution::uniform(&[10.0, 1000.0, 1001.0]).unwrap()]);
        let a = prior.sample_profile(&mut RandomStream::new(9));
        let b = prior.sample_profile(&mut RandomStream::new(9));
        assert_eq!(a, b);
    }

    #[test]
    fn conditional_sample_two_atoms() {
        let d = two_point();
        let mut rng = RandomStream::new(3);
        let n = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..n {
            if d.conditional_sample(ValueInterval::new(1.0, 100.0), &mut rng).unwrap() == 100.0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.002, "freq {freq}");
    }

    #[test]
    fn conditional_sample_renormalizes() {
        let d = DiscreteDistribution::new(vec![(1.0, 0.25), (2.0, 0.25), (3.0, 0.5)]).unwrap();
        let mut rng = RandomStream::new(5);
        let n = 300_000;
        let hits = (0..n)
            .filter(|_| d.conditional_sample(ValueInterval::new(2.0, 3.0), &mut rng).unwrap() == 3.0)
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.004, "freq {freq}");
    }

    #[test]
    fn conditional_sample_single_atom_and_empty() {
        let d = DiscreteDistribution::new(vec![(1.0, 0.25), (2.0, 0.25), (3.0, 0.5)]).unwrap();
        let mut rng = RandomStream::new(5);
        for _ in 0..50 {
            assert_eq!(d.conditional_sample(ValueInterval::new(1.5, 2.5), &mut rng).unwrap(), 2.0);
        }
        assert!(matches!(
            d.conditional_sample(ValueInterval::new(3.5, 9.0), &mut rng),
            Err(Error::EmptyInterval { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let text = r#"{"agents":[{"atoms":[[1,0.5],[100,0.5]]},{"atoms":[[10,0.25],[20,0.75]]}]}"#;
        let prior = ProductPrior::from_json(text).unwrap();
        assert_eq!(prior.n(), 2);
        assert!((prior.mu_max() - 50.5).abs() < 1e-12);
        assert_eq!(prior.v_max(), 100.0);
        assert_eq!(ProductPrior::from_json(&prior.to_json()).unwrap(), prior);

        let bad = r#"{"agents":[{"atoms":[[1,1.0]]},{"atoms":[[10,0.5],[5,0.5]]}]}"#;
        match ProductPrior::from_json(bad) {
            Err(Error::InvalidPrior { agent, atom, .. }) => assert_eq!((agent, atom), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
        let bad_mass = r#"{"agents":[{"atoms":[[1,0.5],[2,0.4]]}]}"#;
        assert!(matches!(ProductPrior::from_json(bad_mass), Err(Error::InvalidPrior { agent: 0, .. })));
    }

    #[test]
    fn cdf_is_prefix_sum() {
        let d = DiscreteDistribution::new(vec![(1.0, 0.25), (2.0, 0.25), (3.0, 0.5)]).unwrap();
        assert_eq!(d.cdf(0), 0.25);
        assert_eq!(d.cdf(1), 0.5);
        assert_eq!(d.cdf(2), 1.0);
        assert_eq!(d.mass_between(1, 2), 0.75);
        assert_eq!(d.floor_index(2.5), Some(1));
        assert_eq!(d.floor_index(0.5), None);
        assert_eq!(d.atom_range(ValueInterval::new(1.5, 3.0)), Some((1, 2)));
    }

    #[test]
    fn tuple_iter_enumerates_product() {
        let all: Vec<_> = TupleIter::new(vec![2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[5], vec![1, 2]);
        assert_eq!(TupleIter::new(vec![]).count(), 1);
    }
}
