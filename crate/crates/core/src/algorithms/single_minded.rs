use crate::algorithm::{Algorithm, Lottery};
use crate::error::{Error, Result};
use crate::model::{Allocation, CostModel};
use crate::rng::RandomStream;

/// Single-minded combinatorial auction: agent `i` wants exactly `bundles[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleMindedInstance {
    pub items: usize,
    pub bundles: Vec<Vec<usize>>,
}

impl SingleMindedInstance {
    pub fn new(items: usize, bundles: Vec<Vec<usize>>) -> Result<Self> {
        for (i, b) in bundles.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::InvalidInstance(format!("agent {i} has an empty bundle")));
            }
            if let Some(&bad) = b.iter().find(|&&t| t >= items) {
                return Err(Error::InvalidInstance(format!("agent {i} wants item {bad} >= {items}")));
            }
        }
        Ok(Self { items, bundles })
    }

    /// Served agents must have pairwise disjoint bundles.
    pub fn cost_model(&self) -> CostModel {
        let inst = self.clone();
        CostModel::downward_closed(move |x| inst.disjoint(x))
    }

    pub fn disjoint(&self, x: &Allocation) -> bool {
        let mut used = vec![false; self.items];
        for i in x.served_agents() {
            for &t in &self.bundles[i] {
                if used[t] {
                    return false;
                }
                used[t] = true;
            }
        }
        true
    }
}

/// Greedy by `v_i / sqrt(|bundle_i|)`, admitting an agent when its bundle is
/// still available. Ties go to the lower index.
#[derive(Clone, Debug)]
pub struct GreedySingleMinded {
    instance: SingleMindedInstance,
}

impl GreedySingleMinded {
    pub fn new(instance: SingleMindedInstance) -> Result<Self> {
        let instance = SingleMindedInstance::new(instance.items, instance.bundles)?;
        Ok(Self { instance })
    }

    pub fn instance(&self) -> &SingleMindedInstance {
        &self.instance
    }

    pub fn cost_model(&self) -> CostModel {
        self.instance.cost_model()
    }

    fn decide(&self, values: &[f64]) -> Allocation {
        let n = self.instance.bundles.len();
        let score = |i: usize| values[i] / (self.instance.bundles[i].len() as f64).sqrt();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| score(b).partial_cmp(&score(a)).unwrap());
        let mut used = vec![false; self.instance.items];
        let mut x = Allocation::empty(n);
        for i in order {
            let bundle = &self.instance.bundles[i];
            if bundle.iter().all(|&t| !used[t]) {
                for &t in bundle {
                    used[t] = true;
                }
                x.set(i, true);
            }
        }
        x
    }
}

impl Algorithm for GreedySingleMinded {
    fn agents(&self) -> usize {
        self.instance.bundles.len()
    }

    fn allocate(&self, values: &[f64], _: &mut RandomStream) -> Result<Allocation> {
        Ok(self.decide(values))
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        Ok(Some(Lottery::point(self.decide(values))))
    }

    fn name(&self) -> String {
        "greedy-smca".into()
    }
}
