//! Parsing of `--alg` and `--cost` specifications.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use ironing_core::algorithms::{
    ConstantAlgorithm, GreedySingleMinded, HighestValue, KnapsackGreedy, PostedPrice, SingleMindedInstance,
    TableAlgorithm,
};
use ironing_core::{Algorithm, CostModel, ProductPrior};

/// Algorithm names accepted by `--alg`, with their parameter syntax.
pub const ALGORITHMS: &[(&str, &str)] = &[
    ("greedy-smca", "greedy-smca[:items=M,bundles=0+1/1/2]"),
    ("knapsack", "knapsack:capacity=C,sizes=a/b/c"),
    ("highest-value", "highest-value"),
    ("serve-all", "serve-all"),
    ("posted-price", "posted-price:prices=p1/p2/..."),
    ("table", "table:PATH.json"),
];

/// A parsed algorithm together with the cost model it implies.
pub struct Loaded {
    pub algorithm: Arc<dyn Algorithm>,
    pub natural_cost: CostModel,
}

fn params(text: &str) -> Result<BTreeMap<&str, &str>> {
    let mut out = BTreeMap::new();
    for part in text.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, got `{part}`"))?;
        out.insert(k.trim(), v.trim());
    }
    Ok(out)
}

fn numbers(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split('/')
        .map(|t| t.parse::<f64>().with_context(|| format!("{what}: `{t}` is not a number")))
        .collect()
}

fn bundles(text: &str) -> Result<Vec<Vec<usize>>> {
    text.split('/')
        .map(|b| {
            b.split('+')
                .map(|t| t.parse::<usize>().with_context(|| format!("bundles: `{t}` is not an item index")))
                .collect()
        })
        .collect()
}

fn check_agents(alg: &dyn Algorithm, prior: &ProductPrior) -> Result<()> {
    if alg.agents() != prior.n() {
        bail!(
            "algorithm `{}` is for {} agents but the prior has {}",
            alg.name(),
            alg.agents(),
            prior.n()
        );
    }
    Ok(())
}

/// Builds the algorithm named by `spec` for `prior`. Relative table paths
/// are resolved against `base`.
pub fn parse_algorithm(spec: &str, prior: &Arc<ProductPrior>, base: &Path) -> Result<Loaded> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let n = prior.n();
    let loaded = match name {
        "greedy-smca" => {
            let p = params(rest)?;
            let items = p.get("items").map_or(Ok(2), |s| s.parse::<usize>()).context("items")?;
            let b = match p.get("bundles") {
                Some(s) => bundles(s)?,
                None => (0..n).map(|i| if i == 0 { (0..items).collect() } else { vec![(i - 1) % items] }).collect(),
            };
            let g = GreedySingleMinded::new(SingleMindedInstance::new(items, b)?)?;
            Loaded { natural_cost: g.cost_model(), algorithm: Arc::new(g) }
        }
        "knapsack" => {
            let p = params(rest)?;
            let capacity: f64 = p
                .get("capacity")
                .ok_or_else(|| anyhow!("knapsack needs capacity=C"))?
                .parse()
                .context("capacity")?;
            let sizes = numbers(p.get("sizes").ok_or_else(|| anyhow!("knapsack needs sizes=a/b/c"))?, "sizes")?;
            let k = KnapsackGreedy::new(capacity, sizes)?;
            Loaded { natural_cost: k.cost_model(), algorithm: Arc::new(k) }
        }
        "highest-value" => Loaded { algorithm: Arc::new(HighestValue::new(n)), natural_cost: CostModel::k_units(1) },
        "serve-all" => Loaded { algorithm: Arc::new(ConstantAlgorithm::serve_all(n)), natural_cost: CostModel::zero() },
        "posted-price" => {
            let p = params(rest)?;
            let prices = numbers(p.get("prices").ok_or_else(|| anyhow!("posted-price needs prices=p1/p2/..."))?, "prices")?;
            Loaded { algorithm: Arc::new(PostedPrice::new(prices)), natural_cost: CostModel::zero() }
        }
        "table" => {
            if rest.is_empty() {
                bail!("table needs a file: table:PATH.json");
            }
            let path = base.join(rest);
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading table {}", path.display()))?;
            let t = TableAlgorithm::from_json(prior.clone(), &text)
                .with_context(|| format!("parsing table {}", path.display()))?;
            Loaded { algorithm: Arc::new(t), natural_cost: CostModel::zero() }
        }
        other => {
            let known: Vec<&str> = ALGORITHMS.iter().map(|a| a.0).collect();
            bail!("unknown algorithm `{other}`; expected one of {}", known.join(", "))
        }
    };
    check_agents(loaded.algorithm.as_ref(), prior)?;
    Ok(loaded)
}

/// `auto` keeps the algorithm's own cost model; `zero` and `k-units:K` override it.
pub fn parse_cost(spec: &str, natural: CostModel) -> Result<CostModel> {
    match spec.split_once(':').unwrap_or((spec, "")) {
        ("auto", _) => Ok(natural),
        ("zero", _) => Ok(CostModel::zero()),
        ("k-units", k) => Ok(CostModel::k_units(k.parse().with_context(|| format!("k-units: `{k}` is not a count"))?)),
        _ => bail!("unknown cost model `{spec}`; expected auto, zero or k-units:K"),
    }
}
