//! Profiles, allocations, cost models, welfare and the brute-force optimum.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest agent count `brute_force_opt` will enumerate.
pub const MAX_OPT_AGENTS: usize = 20;

/// One reported value per agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValuationProfile(pub Vec<f64>);

impl Deref for ValuationProfile {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ValuationProfile {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Binary service indicators, one per agent.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<u8>", into = "Vec<u8>")]
pub struct Allocation(Vec<bool>);

impl From<Vec<u8>> for Allocation {
    fn from(bits: Vec<u8>) -> Self {
        Self(bits.into_iter().map(|b| b != 0).collect())
    }
}

impl From<Allocation> for Vec<u8> {
    fn from(a: Allocation) -> Self {
        a.0.into_iter().map(u8::from).collect()
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b { '1' } else { '0' }).collect();
        write!(f, "Allocation({s})")
    }
}

impl Allocation {
    pub fn new(served: Vec<bool>) -> Self {
        Self(served)
    }

    pub fn empty(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn singleton(n: usize, i: usize) -> Self {
        let mut a = Self::empty(n);
        a.0[i] = true;
        a
    }

    /// Allocation whose bit vector, read with agent 0 as the most significant
    /// digit, spells `mask`. Iterating `mask` upward visits allocations in
    /// lexicographic order.
    pub fn from_lex_mask(mask: u64, n: usize) -> Self {
        Self((0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect())
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn served(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, served: bool) {
        self.0[i] = served;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn served_agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// `true` when every agent served here is also served in `other`.
    pub fn is_subset_of(&self, other: &Allocation) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| !a || b)
    }
}

pub type CostFn = Arc<dyn Fn(&Allocation) -> f64 + Send + Sync>;
pub type FeasibleFn = Arc<dyn Fn(&Allocation) -> bool + Send + Sync>;

/// The seller's cost over allocations; `+inf` encodes infeasibility.
#[derive(Clone)]
pub enum CostModel {
    General(CostFn),
    Feasibility(FeasibleFn),
    DownwardClosed(FeasibleFn),
}

impl fmt::Debug for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::General(_) => f.write_str("CostModel::General"),
            Self::Feasibility(_) => f.write_str("CostModel::Feasibility"),
            Self::DownwardClosed(_) => f.write_str("CostModel::DownwardClosed"),
        }
    }
}

impl CostModel {
    /// Every allocation feasible at zero cost.
    pub fn zero() -> Self {
        Self::DownwardClosed(Arc::new(|_| true))
    }

    pub fn general(f: impl Fn(&Allocation) -> f64 + Send + Sync + 'static) -> Self {
        Self::General(Arc::new(f))
    }

    pub fn feasibility(f: impl Fn(&Allocation) -> bool + Send + Sync + 'static) -> Self {
        Self::Feasibility(Arc::new(f))
    }

    pub fn downward_closed(f: impl Fn(&Allocation) -> bool + Send + Sync + 'static) -> Self {
        Self::DownwardClosed(Arc::new(f))
    }

    /// At most `k` agents served (k identical unit-demand items).
    pub fn k_units(k: usize) -> Self {
        Self::downward_closed(move |a| a.count() <= k)
    }

    pub fn cost(&self, x: &Allocation) -> f64 {
        match self {
            Self::General(c) => c(x),
            Self::Feasibility(f) | Self::DownwardClosed(f) => {
                if f(x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn is_feasible(&self, x: &Allocation) -> bool {
        self.cost(x).is_finite()
    }

    /// Exhaustively checks the downward-closed property over all `2^n` sets.
    pub fn check_downward_closed(&self, n: usize) -> bool {
        let sets: Vec<Allocation> = (0..1u64 << n).map(|m| Allocation::from_lex_mask(m, n)).collect();
        sets.iter().filter(|s| self.is_feasible(s)).all(|s| {
            sets.iter()
                .filter(|t| t.is_subset_of(s))
                .all(|t| self.is_feasible(t))
        })
    }
}

/// `sum_i v_i x_i - c(x)`, or `-inf` when `x` is infeasible.
pub fn welfare(values: &[f64], x: &Allocation, cost: &CostModel) -> f64 {
    let c = cost.cost(x);
    if c == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let gross: f64 = x.served_agents().map(|i| values[i]).sum();
    gross - c
}

/// Exhaustive welfare maximum over all `2^n` allocations; ties go to the
/// lexicographically smallest allocation.
pub fn brute_force_opt(values: &[f64], cost: &CostModel) -> Result<(f64, Allocation)> {
    let n = values.len();
    if n > MAX_OPT_AGENTS {
        return Err(Error::TooManyAgents { n, max: MAX_OPT_AGENTS });
    }
    let mut best = (f64::NEG_INFINITY, Allocation::empty(n));
    for mask in 0..1u64 << n {
        let x = Allocation::from_lex_mask(mask, n);
        let w = welfare(values, &x, cost);
        if w > best.0 {
            best = (w, x);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welfare_examples() {
        let zero = CostModel::zero();
        assert_eq!(welfare(&[3.0, 4.0], &Allocation::full(2), &zero), 7.0);
        let nothing = CostModel::feasibility(|a| a.count() == 0);
        assert_eq!(
            welfare(&[3.0, 4.0], &Allocation::singleton(2, 0), &nothing),
            f64::NEG_INFINITY
        );
        assert_eq!(welfare(&[100.0, 10.0], &Allocation::singleton(2, 0), &zero), 100.0);
    }

    #[test]
    fn opt_examples() {
        let (w, x) = brute_force_opt(&[100.0, 10.0], &CostModel::k_units(2)).unwrap();
        assert_eq!(w, 110.0);
        assert_eq!(x, Allocation::full(2));

        let only_empty = CostModel::feasibility(|a| a.count() == 0);
        let (w, x) = brute_force_opt(&[5.0, 6.0, 7.0], &only_empty).unwrap();
        assert_eq!(w, 0.0);
        assert_eq!(x, Allocation::empty(3));

        assert!(matches!(
            brute_force_opt(&[1.0; 21], &CostModel::zero()),
            Err(Error::TooManyAgents { n: 21, .. })
        ));
    }

    #[test]
    fn opt_tie_breaks_lexicographically() {
        // serving agent 0 or agent 1 alone both give 5
        let (_, x) = brute_force_opt(&[5.0, 5.0], &CostModel::k_units(1)).unwrap();
        assert_eq!(x, Allocation::new(vec![false, true]));
    }

    #[test]
    fn lex_mask_order() {
        assert_eq!(Allocation::from_lex_mask(1, 3), Allocation::new(vec![false, false, true]));
        assert_eq!(Allocation::from_lex_mask(4, 3), Allocation::new(vec![true, false, false]));
    }

    #[test]
    fn downward_closed_check() {
        assert!(CostModel::k_units(2).check_downward_closed(5));
        assert!(!CostModel::downward_closed(|a| a.count() != 1).check_downward_closed(3));
    }
}
