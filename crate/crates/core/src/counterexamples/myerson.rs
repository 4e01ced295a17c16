use std::sync::Arc;

use serde::Serialize;

use super::render_rows;
use crate::algorithm::Algorithm;
use crate::algorithms::FnAlgorithm;
use crate::error::{Error, Result};
use crate::ideal::{
    convex_hull, exact_interim_curves, hull_slopes_per_atom, ideal_ironed_algorithm, CumulativeCurve, IntervalSet,
};
use crate::model::Allocation;
use crate::prior::{DiscreteDistribution, ProductPrior};

/// Virtual value of the half-half mixture of `U[10, 11]` and `U[11, 15]`.
pub fn virtual_value(v: f64) -> f64 {
    if v <= 11.0 {
        2.0 * v - 12.0
    } else {
        2.0 * v - 15.0
    }
}

/// `grid` equal-mass atoms at quantile midpoints of the mixture.
pub fn mixture_prior(grid: usize) -> Result<DiscreteDistribution> {
    DiscreteDistribution::from_quantile_fn(
        |q| if q <= 0.5 { 10.0 + 2.0 * q } else { 11.0 + 8.0 * (q - 0.5) },
        grid,
    )
}

/// Serves the bidder with the largest positive score; ties go to the lower index.
fn score_auction(n: usize, name: &str, score: impl Fn(usize, f64) -> f64 + Send + Sync + 'static) -> FnAlgorithm {
    FnAlgorithm::new(n, name, move |v: &[f64]| {
        let mut best: Option<(usize, f64)> = None;
        for (i, &x) in v.iter().enumerate() {
            let s = score(i, x);
            if s > 0.0 && best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        match best {
            Some((i, _)) => Allocation::singleton(n, i),
            None => Allocation::empty(n),
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MyersonReport {
    pub grid: usize,
    pub lowest_atom: f64,
    /// Bidder whose figures are headlined (the one losing exact ties).
    pub audited_bidder: usize,
    /// `x'(lowest)` per bidder: serve the largest ironed virtual value.
    pub ironed_virtual_at_lowest: Vec<f64>,
    /// `x''(lowest)` per bidder: serve the largest raw virtual value, then
    /// iron the allocation rule.
    pub ironed_allocation_at_lowest: Vec<f64>,
    /// Raw rule `x(lowest)` per bidder.
    pub raw_at_lowest: Vec<f64>,
    pub virtual_values: Vec<(f64, f64)>,
    pub ironed_virtual_values: Vec<(f64, f64)>,
    pub allocation_intervals: IntervalSet,
    /// Audited bidder's curves as `(value, x, x', x'')`.
    pub curves: Vec<(f64, f64, f64, f64)>,
    pub table: String,
}

/// Two bidders with values from the half-half mixture of `U[10, 11]` and
/// `U[11, 15]`, discretized to `grid` atoms. Compares the auction that irons
/// virtual values with the one that irons the allocation rule induced by raw
/// virtual values, at the lowest atom.
pub fn myerson_vs_allocation_ironing(grid: usize) -> Result<MyersonReport> {
    if grid < 100 {
        return Err(Error::InvalidInstance(format!("grid must have at least 100 atoms, got {grid}")));
    }
    let n = 2;
    let audited = 1;
    let dist = mixture_prior(grid)?;
    let prior = Arc::new(ProductPrior::iid(dist.clone(), n));

    let raw: Arc<dyn Algorithm> = Arc::new(score_auction(n, "max-virtual-value", |_, v| virtual_value(v)));
    let allocation_ironed = ideal_ironed_algorithm(raw, prior.clone())?;

    let phi: Vec<f64> = dist.values().iter().map(|&v| virtual_value(v)).collect();
    let revenue = CumulativeCurve::from_slopes(dist.masses(), &phi);
    let phi_bar = hull_slopes_per_atom(&revenue, &convex_hull(&revenue));
    let lookup = {
        let dist = dist.clone();
        let phi_bar = phi_bar.clone();
        move |_: usize, v: f64| dist.index_of(v).map_or(f64::NEG_INFINITY, |j| phi_bar[j])
    };
    let ironed_virtual: Arc<dyn Algorithm> = Arc::new(score_auction(n, "max-ironed-virtual-value", lookup));
    let x_prime = exact_interim_curves(ironed_virtual.as_ref(), &prior)?;

    let raw_curves = &allocation_ironed.raw_curves;
    let x_second = &allocation_ironed.ironed_curves;
    let curves: Vec<(f64, f64, f64, f64)> = (0..dist.len())
        .map(|j| (dist.value(j), raw_curves[audited].prob(j), x_prime[audited].prob(j), x_second[audited].prob(j)))
        .collect();

    let header = ["bidder", "x(lowest)", "x'(lowest)", "x''(lowest)"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            vec![
                i.to_string(),
                format!("{:.6}", raw_curves[i].prob(0)),
                format!("{:.6}", x_prime[i].prob(0)),
                format!("{:.6}", x_second[i].prob(0)),
            ]
        })
        .collect();
    let mut table = render_rows(&header, &rows);
    table.push_str(&format!("grid {grid}, lowest atom {:.6}, audited bidder {audited}\n", dist.value(0)));

    Ok(MyersonReport {
        grid,
        lowest_atom: dist.value(0),
        audited_bidder: audited,
        ironed_virtual_at_lowest: x_prime.iter().map(|c| c.prob(0)).collect(),
        ironed_allocation_at_lowest: x_second.iter().map(|c| c.prob(0)).collect(),
        raw_at_lowest: raw_curves.iter().map(|c| c.prob(0)).collect(),
        virtual_values: dist.values().iter().copied().zip(phi).collect(),
        ironed_virtual_values: dist.values().iter().copied().zip(phi_bar).collect(),
        allocation_intervals: allocation_ironed.intervals.clone(),
        curves,
        table,
    })
}
