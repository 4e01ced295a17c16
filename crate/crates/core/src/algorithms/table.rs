use std::sync::Arc;

use serde_json::Value;

use crate::algorithm::{Algorithm, Lottery};
use crate::error::{Error, Result};
use crate::model::Allocation;
use crate::prior::ProductPrior;
use crate::rng::RandomStream;

/// One cell of an allocation table.
#[derive(Clone, Debug, PartialEq)]
pub enum TableEntry {
    /// Deterministic allocation bit-vector.
    Bits(Vec<u8>),
    /// Per-agent service probabilities, coupled through one uniform draw.
    Probs(Vec<f64>),
    /// Every agent served together with this probability, else nobody.
    Joint(f64),
}

impl TableEntry {
    fn probs(&self, n: usize) -> Vec<f64> {
        match self {
            Self::Bits(b) => b.iter().map(|&x| f64::from(x)).collect(),
            Self::Probs(p) => p.clone(),
            Self::Joint(p) => vec![*p; n],
        }
    }

    fn is_random(&self) -> bool {
        match self {
            Self::Bits(_) => false,
            Self::Probs(p) => p.iter().any(|&q| q > 0.0 && q < 1.0),
            Self::Joint(p) => *p > 0.0 && *p < 1.0,
        }
    }
}

/// Allocation rule given explicitly on the product of the prior's supports.
///
/// Cells are stored row-major over per-agent atom indices (agent 0 slowest).
/// Tables with any randomized cell draw exactly one uniform per call.
#[derive(Clone, Debug)]
pub struct TableAlgorithm {
    prior: Arc<ProductPrior>,
    cells: Vec<Vec<f64>>,
    randomized: bool,
}

impl TableAlgorithm {
    pub fn new(prior: Arc<ProductPrior>, entries: Vec<TableEntry>) -> Result<Self> {
        let n = prior.n();
        let expected = prior.support_size();
        if entries.len() as u128 != expected {
            return Err(Error::InvalidTable(format!(
                "table has {} cells but the prior support has {expected}",
                entries.len()
            )));
        }
        let randomized = entries.iter().any(TableEntry::is_random);
        let cells = entries
            .iter()
            .enumerate()
            .map(|(c, e)| {
                let p = e.probs(n);
                if p.len() != n {
                    return Err(Error::InvalidTable(format!("cell {c} has {} entries, expected {n}", p.len())));
                }
                if p.iter().any(|&q| !(0.0..=1.0).contains(&q)) {
                    return Err(Error::InvalidTable(format!("cell {c} has a probability outside [0, 1]")));
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { prior, cells, randomized })
    }

    /// Parses nested arrays indexed by per-agent atom indices. A leaf is a
    /// number (joint probability) or an array of per-agent probabilities.
    pub fn from_json(prior: Arc<ProductPrior>, text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)?;
        let mut entries = Vec::new();
        collect_leaves(&root, 0, prior.n(), &mut entries)?;
        Self::new(prior, entries)
    }

    pub fn to_json(&self) -> String {
        fn build(t: &TableAlgorithm, depth: usize, offset: usize, stride: usize) -> Value {
            if depth == t.prior.n() {
                return Value::from(t.cells[offset].clone());
            }
            let len = t.prior.agent(depth).len();
            let inner = stride / len;
            Value::Array((0..len).map(|j| build(t, depth + 1, offset + j * inner, inner)).collect())
        }
        build(self, 0, 0, self.cells.len()).to_string()
    }

    pub fn prior(&self) -> &Arc<ProductPrior> {
        &self.prior
    }

    fn cell_index(&self, values: &[f64]) -> Result<usize> {
        let idx = self.prior.indices_of(values)?;
        Ok(idx
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &j)| acc * self.prior.agent(i).len() + j))
    }

    /// Per-agent service probabilities at an index tuple.
    pub fn probs_at(&self, values: &[f64]) -> Result<&[f64]> {
        Ok(&self.cells[self.cell_index(values)?])
    }
}

fn collect_leaves(v: &Value, depth: usize, n: usize, out: &mut Vec<TableEntry>) -> Result<()> {
    if depth == n {
        return match v {
            Value::Number(p) => {
                out.push(TableEntry::Joint(p.as_f64().unwrap_or(f64::NAN)));
                Ok(())
            }
            Value::Array(xs) => {
                let ps = xs
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| Error::InvalidTable("non-numeric leaf entry".into())))
                    .collect::<Result<Vec<f64>>>()?;
                if ps.iter().all(|&p| p == 0.0 || p == 1.0) {
                    out.push(TableEntry::Bits(ps.iter().map(|&p| p as u8).collect()));
                } else {
                    out.push(TableEntry::Probs(ps));
                }
                Ok(())
            }
            _ => Err(Error::InvalidTable(format!("unexpected leaf at depth {depth}"))),
        };
    }
    match v {
        Value::Array(xs) => xs.iter().try_for_each(|x| collect_leaves(x, depth + 1, n, out)),
        _ => Err(Error::InvalidTable(format!("expected an array at depth {depth}"))),
    }
}

impl Algorithm for TableAlgorithm {
    fn agents(&self) -> usize {
        self.prior.n()
    }

    fn allocate(&self, values: &[f64], rng: &mut RandomStream) -> Result<Allocation> {
        let p = &self.cells[self.cell_index(values)?];
        let u = if self.randomized { rng.uniform() } else { 0.0 };
        Ok(Allocation::new(p.iter().map(|&q| u < q).collect()))
    }

    fn lottery(&self, values: &[f64]) -> Result<Option<Lottery>> {
        Ok(Some(Lottery::threshold(&self.cells[self.cell_index(values)?])))
    }

    fn name(&self) -> String {
        "table".into()
    }
}
