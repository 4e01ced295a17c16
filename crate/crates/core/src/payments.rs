//! Payment rules: exact interim payments from curves and the sampling-based
//! payment procedure that needs only black-box calls.

use serde::{Deserialize, Serialize};

use crate::algorithm::Algorithm;
use crate::error::{Error, Result};
use crate::ideal::InterimCurve;
use crate::model::Allocation;
use crate::prior::{DiscreteDistribution, ProductPrior};
use crate::rng::RandomStream;

/// Default cap on the repeat-until-served loop.
pub const DEFAULT_T_MAX: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismOutcome {
    pub allocation: Allocation,
    pub payments: Vec<f64>,
    /// Algorithm invocations spent on each agent's payment.
    pub payment_calls: Vec<u64>,
}

/// Area under the step curve on `[0, values[j]]`: the lowest atom's
/// probability extends down to 0 and each atom's holds until the next atom.
fn area_below(curve: &InterimCurve, j: usize) -> f64 {
    let pts = &curve.points;
    let mut area = pts[0].0 * pts[0].1;
    for t in 0..j {
        area += pts[t].1 * (pts[t + 1].0 - pts[t].0);
    }
    area
}

/// Interim expected payment `v x(v) - ∫₀^v x(z) dz` at atom `v`.
pub fn exact_payment(curve: &InterimCurve, dist: &DiscreteDistribution, v: f64) -> Result<f64> {
    let j = dist
        .index_of(v)
        .filter(|&j| j < curve.points.len() && curve.points[j].0 == v)
        .ok_or(Error::OffSupport { agent: curve.agent, value: v })?;
    Ok(v * curve.points[j].1 - area_below(curve, j))
}

/// Exact payments at every atom of the curve.
pub fn exact_payments(curve: &InterimCurve) -> Vec<f64> {
    (0..curve.points.len())
        .map(|j| curve.points[j].0 * curve.points[j].1 - area_below(curve, j))
        .collect()
}

/// One draw of the payment procedure and the algorithm calls it used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaymentSample {
    pub payment: f64,
    pub calls: u64,
}

fn fresh_profile(prior: &ProductPrior, i: usize, v: f64, rng: &mut RandomStream) -> Vec<f64> {
    (0..prior.n())
        .map(|t| if t == i { v } else { prior.agent(t).sample(rng) })
        .collect()
}

/// Sampling payment for agent `i` with value `profile[i]`, to be charged
/// when the algorithm served `i`:
///
/// 1. draw `v'` uniformly from `[0, v_i]` and snap it to the largest atom at
///    most `v'` (the lowest atom if none);
/// 2. run the algorithm at `v'` against fresh opponents;
/// 3. `X = v_i` if `i` was served, else 0;
/// 4. if `X ≠ 0`, rerun at `v_i` with fresh opponents until `i` is served,
///    `T` runs in all;
/// 5. pay `v_i - T X`.
pub fn oracle_payment(
    alg: &dyn Algorithm,
    prior: &ProductPrior,
    profile: &[f64],
    i: usize,
    rng: &mut RandomStream,
    t_max: u64,
) -> Result<PaymentSample> {
    let v = profile[i];
    let d = prior.agent(i);
    let u = rng.uniform() * v;
    let snapped = d.value(d.floor_index(u).unwrap_or(0));
    let deviation = fresh_profile(prior, i, snapped, rng);
    let mut calls = 1;
    if !alg.allocate(&deviation, rng)?.served(i) {
        return Ok(PaymentSample { payment: v, calls });
    }
    let mut t = 0;
    loop {
        if t == t_max {
            return Err(Error::IterationCapExceeded { agent: i, cap: t_max });
        }
        t += 1;
        calls += 1;
        let p = fresh_profile(prior, i, v, rng);
        if alg.allocate(&p, rng)?.served(i) {
            break;
        }
    }
    Ok(PaymentSample { payment: v - t as f64 * v, calls })
}

/// Runs the algorithm once on `profile` and charges each served agent via
/// [`oracle_payment`] on its own child stream; unserved agents pay 0.
pub fn run_mechanism(
    alg: &dyn Algorithm,
    prior: &ProductPrior,
    profile: &[f64],
    rng: &mut RandomStream,
    t_max: u64,
) -> Result<MechanismOutcome> {
    let n = prior.n();
    let allocation = alg.allocate(profile, rng)?;
    let base = rng.clone();
    rng.uniform();
    let mut payments = vec![0.0; n];
    let mut payment_calls = vec![0; n];
    for i in allocation.served_agents() {
        let s = oracle_payment(alg, prior, profile, i, &mut base.child(i as u64), t_max)?;
        payments[i] = s.payment;
        payment_calls[i] = s.calls;
    }
    Ok(MechanismOutcome { allocation, payments, payment_calls })
}
