//! Exact expectations over finite-support priors.
//!
//! Inputs to an algorithm are represented as a product of per-agent sparse
//! distributions over atom indices. Resampling layers push each factor
//! through their kernel, mixtures combine linearly, and opaque algorithms are
//! enumerated over the product support using their exact lotteries (or an
//! inner Monte Carlo estimate when no lottery exists).

use std::collections::BTreeMap;

use crate::algorithm::{Algorithm, Lottery, Structure};
use crate::error::{Error, Result};
use crate::ideal::curve::{CurveMode, InterimCurve};
use crate::model::{Allocation, CostModel};
use crate::prior::{ProductPrior, TupleIter};
use crate::rng::RandomStream;

/// Largest product support enumerated exactly.
pub const EXACT_SUPPORT_LIMIT: u128 = 1_000_000;

/// Inner Monte Carlo budget per support tuple for algorithms without a lottery.
pub const DEFAULT_INNER_SAMPLES: u64 = 10_000;

pub type Inputs = Vec<Vec<(usize, f64)>>;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub marginals: Vec<f64>,
    pub cost: f64,
    /// Set when some leaf had to be estimated by sampling.
    pub estimated: Option<u64>,
}

fn check_support(inputs: &Inputs) -> Result<()> {
    let size: u128 = inputs.iter().map(|d| d.len() as u128).product();
    if size > EXACT_SUPPORT_LIMIT {
        return Err(Error::SupportTooLarge { size, max: EXACT_SUPPORT_LIMIT });
    }
    Ok(())
}

fn tuple_seed(idx: &[usize]) -> u64 {
    idx.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &j| (h ^ j as u64).wrapping_mul(0x0100_0000_01b3))
}

fn sampled_lottery(alg: &dyn Algorithm, values: &[f64], idx: &[usize], samples: u64) -> Result<Lottery> {
    let mut rng = RandomStream::new(tuple_seed(idx));
    let mut counts: BTreeMap<Allocation, u64> = BTreeMap::new();
    for _ in 0..samples {
        *counts.entry(alg.allocate(values, &mut rng)?).or_insert(0) += 1;
    }
    Ok(Lottery(counts.into_iter().map(|(x, c)| (c as f64 / samples as f64, x)).collect()))
}

/// Expected per-agent service probabilities and expected cost when the
/// reports are drawn from the product distribution `inputs`.
pub fn expected_outcome(
    alg: &dyn Algorithm,
    prior: &ProductPrior,
    inputs: &Inputs,
    cost: Option<&CostModel>,
) -> Result<Outcome> {
    let n = prior.n();
    match alg.structure() {
        Structure::Resampled { inner, kernel } => {
            let pushed: Inputs = inputs.iter().enumerate().map(|(i, d)| kernel.push(i, d)).collect();
            expected_outcome(inner, prior, &pushed, cost)
        }
        Structure::Mixture(parts) => {
            let mut acc = Outcome { marginals: vec![0.0; n], cost: 0.0, estimated: None };
            for (w, part) in parts {
                if w == 0.0 {
                    continue;
                }
                let o = expected_outcome(part, prior, inputs, cost)?;
                for (a, m) in acc.marginals.iter_mut().zip(&o.marginals) {
                    *a += w * m;
                }
                acc.cost += w * o.cost;
                acc.estimated = acc.estimated.or(o.estimated);
            }
            Ok(acc)
        }
        Structure::Opaque => {
            check_support(inputs)?;
            let mut acc = Outcome { marginals: vec![0.0; n], cost: 0.0, estimated: None };
            let sizes: Vec<usize> = inputs.iter().map(Vec::len).collect();
            let mut values = vec![0.0; n];
            let mut idx = vec![0usize; n];
            for pos in TupleIter::new(sizes) {
                let mut p = 1.0;
                for (i, &k) in pos.iter().enumerate() {
                    let (atom, q) = inputs[i][k];
                    p *= q;
                    idx[i] = atom;
                    values[i] = prior.agent(i).value(atom);
                }
                if p == 0.0 {
                    continue;
                }
                let lottery = match alg.lottery(&values)? {
                    Some(l) => l,
                    None => {
                        acc.estimated = Some(DEFAULT_INNER_SAMPLES);
                        sampled_lottery(alg, &values, &idx, DEFAULT_INNER_SAMPLES)?
                    }
                };
                for (q, x) in &lottery.0 {
                    for i in x.served_agents() {
                        acc.marginals[i] += p * q;
                    }
                }
                if let Some(c) = cost {
                    acc.cost += p * lottery.expected_cost(c);
                }
            }
            Ok(acc)
        }
    }
}

fn prior_inputs(prior: &ProductPrior) -> Inputs {
    prior
        .agents()
        .iter()
        .map(|d| d.masses().iter().copied().enumerate().collect())
        .collect()
}

/// Interim allocation rule `x_i(v)` at every atom of agent `agent`.
pub fn exact_interim_curve(alg: &dyn Algorithm, prior: &ProductPrior, agent: usize) -> Result<InterimCurve> {
    let d = prior.agent(agent);
    let mut inputs = prior_inputs(prior);
    let mut points = Vec::with_capacity(d.len());
    let mut mode = CurveMode::Exact;
    for j in 0..d.len() {
        inputs[agent] = vec![(j, 1.0)];
        let o = expected_outcome(alg, prior, &inputs, None)?;
        if let Some(samples) = o.estimated {
            mode = CurveMode::Estimated { samples };
        }
        points.push((d.value(j), o.marginals[agent].clamp(0.0, 1.0)));
    }
    Ok(InterimCurve { agent, points, mode })
}

pub fn exact_interim_curves(alg: &dyn Algorithm, prior: &ProductPrior) -> Result<Vec<InterimCurve>> {
    (0..prior.n()).map(|i| exact_interim_curve(alg, prior, i)).collect()
}

/// `E[c(x)]` with truthful reports drawn from the prior.
pub fn expected_cost(alg: &dyn Algorithm, prior: &ProductPrior, cost: &CostModel) -> Result<f64> {
    Ok(expected_outcome(alg, prior, &prior_inputs(prior), Some(cost))?.cost)
}

/// `E[sum_i v_i x_i(v) - c(x(v))]` with truthful reports.
pub fn expected_welfare(alg: &dyn Algorithm, prior: &ProductPrior, cost: &CostModel) -> Result<f64> {
    let curves = exact_interim_curves(alg, prior)?;
    let gross: f64 = curves
        .iter()
        .map(|c| c.expected_value_served(prior.agent(c.agent)))
        .sum();
    Ok(gross - expected_cost(alg, prior, cost)?)
}

/// Exact outcome distribution at one atom profile.
pub fn profile_lottery(alg: &dyn Algorithm, prior: &ProductPrior, idx: &[usize]) -> Result<Lottery> {
    let inputs: Inputs = idx.iter().map(|&j| vec![(j, 1.0)]).collect();
    Ok(outcome_lottery(alg, prior, &inputs)?.merged())
}

fn outcome_lottery(alg: &dyn Algorithm, prior: &ProductPrior, inputs: &Inputs) -> Result<Lottery> {
    match alg.structure() {
        Structure::Resampled { inner, kernel } => {
            let pushed: Inputs = inputs.iter().enumerate().map(|(i, d)| kernel.push(i, d)).collect();
            outcome_lottery(inner, prior, &pushed)
        }
        Structure::Mixture(parts) => {
            let mut out = Vec::new();
            for (w, part) in parts {
                out.extend(outcome_lottery(part, prior, inputs)?.0.into_iter().map(|(p, x)| (w * p, x)));
            }
            Ok(Lottery(out).merged())
        }
        Structure::Opaque => {
            check_support(inputs)?;
            let sizes: Vec<usize> = inputs.iter().map(Vec::len).collect();
            let mut out = Vec::new();
            for pos in TupleIter::new(sizes) {
                let p: f64 = pos.iter().enumerate().map(|(i, &k)| inputs[i][k].1).product();
                let idx: Vec<usize> = pos.iter().enumerate().map(|(i, &k)| inputs[i][k].0).collect();
                let values = prior.values_at(&idx);
                let l = match alg.lottery(&values)? {
                    Some(l) => l,
                    None => sampled_lottery(alg, &values, &idx, DEFAULT_INNER_SAMPLES)?,
                };
                out.extend(l.0.into_iter().map(|(q, x)| (p * q, x)));
            }
            Ok(Lottery(out).merged())
        }
    }
}

/// Largest absolute gap between the prior and the report distribution seen
/// by any non-resampling layer, with truthful reports from the prior.
pub fn input_distribution_gap(alg: &dyn Algorithm, prior: &ProductPrior) -> f64 {
    fn walk(alg: &dyn Algorithm, prior: &ProductPrior, inputs: &Inputs) -> f64 {
        match alg.structure() {
            Structure::Resampled { inner, kernel } => {
                let pushed: Inputs = inputs.iter().enumerate().map(|(i, d)| kernel.push(i, d)).collect();
                walk(inner, prior, &pushed)
            }
            Structure::Mixture(parts) => parts
                .into_iter()
                .map(|(_, part)| walk(part, prior, inputs))
                .fold(0.0, f64::max),
            Structure::Opaque => inputs
                .iter()
                .enumerate()
                .map(|(i, dist)| {
                    let d = prior.agent(i);
                    let mut seen = vec![0.0; d.len()];
                    for &(j, p) in dist {
                        seen[j] += p;
                    }
                    seen.iter()
                        .zip(d.masses())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max),
        }
    }
    walk(alg, prior, &prior_inputs(prior))
}
