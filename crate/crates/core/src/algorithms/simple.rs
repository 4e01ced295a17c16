use std::sync::Arc;

use crate::algorithm::{Algorithm, Lottery};
use crate::error::Result;
use crate::model::Allocation;
use crate::rng::RandomStream;

/// Returns the same allocation regardless of reports.
#[derive(Clone, Debug)]
pub struct ConstantAlgorithm {
    alloc: Allocation,
}

impl ConstantAlgorithm {
    pub fn new(alloc: Allocation) -> Self {
        Self { alloc }
    }

    pub fn serve_all(n: usize) -> Self {
        Self::new(Allocation::full(n))
    }
}

impl Algorithm for ConstantAlgorithm {
    fn agents(&self) -> usize {
        self.alloc.len()
    }

    fn allocate(&self, _: &[f64], _: &mut RandomStream) -> Result<Allocation> {
        Ok(self.alloc.clone())
    }

    fn lottery(&self, _: &[f64]) -> Result<Option<Lottery>> {
        Ok(Some(Lottery::point(self.alloc.clone())))
    }

    fn name(&self) -> String {
        "constant".into()
    }
}

/// Serves agent `i` iff its report reaches `prices[i]`.
#[derive(Clone, Debug)]
pub struct PostedPrice {
    prices: Vec<f64>,
}

impl PostedPrice {
    pub fn new(prices: Vec<f64>) -> Self {
        Self { prices }
    }

    fn decide(&self, values: &[f64]) -> Allocation {
        Allocation::new(values.iter().zip(&self.prices).map(|(v, t)| v >= t).collect())
    }
}

impl Algorithm for PostedPrice {
    fn agents(&self) -> usize {
        self.prices.len()
    }

    fn allocate(&self, values: &[f64], _: &mut RandomStream) -> Result<Allocation> {
        Ok(self.decide(values))
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        Ok(Some(Lottery::point(self.decide(values))))
    }

    fn name(&self) -> String {
        "posted-price".into()
    }
}

/// Serves the single highest positive report; ties go to the lower index.
#[derive(Clone, Debug)]
pub struct HighestValue {
    n: usize,
}

impl HighestValue {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    fn decide(&self, values: &[f64]) -> Allocation {
        let mut best: Option<usize> = None;
        for (i, &v) in values.iter().enumerate() {
            if v > 0.0 && best.is_none_or(|b| v > values[b]) {
                best = Some(i);
            }
        }
        match best {
            Some(i) => Allocation::singleton(self.n, i),
            None => Allocation::empty(self.n),
        }
    }
}

impl Algorithm for HighestValue {
    fn agents(&self) -> usize {
        self.n
    }

    fn allocate(&self, values: &[f64], _: &mut RandomStream) -> Result<Allocation> {
        Ok(self.decide(values))
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        Ok(Some(Lottery::point(self.decide(values))))
    }

    fn name(&self) -> String {
        "highest-value".into()
    }
}

type RuleFn = Arc<dyn Fn(&[f64]) -> Allocation + Send + Sync>;

/// Deterministic rule given by a closure.
#[derive(Clone)]
pub struct FnAlgorithm {
    n: usize,
    name: String,
    rule: RuleFn,
}

impl FnAlgorithm {
    pub fn new(n: usize, name: &str, rule: impl Fn(&[f64]) -> Allocation + Send + Sync + 'static) -> Self {
        Self { n, name: name.into(), rule: Arc::new(rule) }
    }
}

impl Algorithm for FnAlgorithm {
    fn agents(&self) -> usize {
        self.n
    }

    fn allocate(&self, values: &[f64], _: &mut RandomStream) -> Result<Allocation> {
        Ok((self.rule)(values))
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        Ok(Some(Lottery::point((self.rule)(values))))
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn highest_value_ties_lower_index() {
        let a = HighestValue::new(3);
        let mut rng = RandomStream::new(0);
        assert_eq!(a.allocate(&[2.0, 5.0, 5.0], &mut rng).unwrap(), Allocation::singleton(3, 1));
        assert_eq!(a.allocate(&[0.0, 0.0, 0.0], &mut rng).unwrap(), Allocation::empty(3));
    }

    #[test]
    fn posted_price_threshold() {
        let a = PostedPrice::new(vec![5.0, 7.0]);
        let mut rng = RandomStream::new(0);
        assert_eq!(a.allocate(&[5.0, 6.9], &mut rng).unwrap(), Allocation::new(vec![true, false]));
    }
}
