use crate::algorithm::{Algorithm, Lottery};
use crate::error::{Error, Result};
use crate::model::{Allocation, CostModel};
use crate::rng::RandomStream;

/// Value-density greedy knapsack: agents sorted by `v_i / size_i`
/// (ties to the lower index) and admitted while they fit.
#[derive(Clone, Debug)]
pub struct KnapsackGreedy {
    capacity: f64,
    sizes: Vec<f64>,
}

impl KnapsackGreedy {
    pub fn new(capacity: f64, sizes: Vec<f64>) -> Result<Self> {
        if let Some((i, s)) = sizes.iter().enumerate().find(|(_, &s)| !(s > 0.0)) {
            return Err(Error::InvalidInstance(format!("agent {i} has non-positive size {s}")));
        }
        Ok(Self { capacity, sizes })
    }

    pub fn cost_model(&self) -> CostModel {
        let (cap, sizes) = (self.capacity, self.sizes.clone());
        CostModel::downward_closed(move |x| x.served_agents().map(|i| sizes[i]).sum::<f64>() <= cap)
    }

    fn decide(&self, values: &[f64]) -> Allocation {
        let n = self.sizes.len();
        let density = |i: usize| values[i] / self.sizes[i];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| density(b).partial_cmp(&density(a)).unwrap());
        let mut load = 0.0;
        let mut x = Allocation::empty(n);
        for i in order {
            if load + self.sizes[i] <= self.capacity {
                load += self.sizes[i];
                x.set(i, true);
            }
        }
        x
    }
}

impl Algorithm for KnapsackGreedy {
    fn agents(&self) -> usize {
        self.sizes.len()
    }

    fn allocate(&self, values: &[f64], _: &mut RandomStream) -> Result<Allocation> {
        Ok(self.decide(values))
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        Ok(Some(Lottery::point(self.decide(values))))
    }

    fn name(&self) -> String {
        "knapsack".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_items_all_fit() {
        let k = KnapsackGreedy::new(10.0, vec![2.0; 5]).unwrap();
        let x = k.allocate(&[1.0, 5.0, 3.0, 2.0, 4.0], &mut RandomStream::new(0)).unwrap();
        assert_eq!(x, Allocation::full(5));
    }

    #[test]
    fn only_first_density_fits() {
        let k = KnapsackGreedy::new(10.0, vec![6.0, 6.0, 6.0]).unwrap();
        let x = k.allocate(&[9.0, 8.0, 7.0], &mut RandomStream::new(0)).unwrap();
        assert_eq!(x, Allocation::singleton(3, 0));
    }

    #[test]
    fn rejects_zero_size() {
        assert!(KnapsackGreedy::new(1.0, vec![1.0, 0.0]).is_err());
    }
}
