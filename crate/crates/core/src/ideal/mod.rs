//! Ideal-model ironing over finite-support priors.
//!
//! Pipeline per agent: exact interim curve, cumulative curve in probability
//! space, lower convex hull, monotonizing intervals. One resampling layer
//! then irons all agents at once.

pub mod curve;
pub mod exact;
pub mod iron;

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

pub use crate::prior::ValueInterval;
pub use curve::{
    convex_hull, cumulative_curve, hull_blocks, hull_slopes_per_atom, hull_vertices, monotonizing_intervals,
    CumulativeCurve, CurveMode, InterimCurve, HULL_TOL,
};
pub use exact::{
    expected_cost, expected_outcome, expected_welfare, exact_interim_curve, exact_interim_curves,
    input_distribution_gap, profile_lottery, EXACT_SUPPORT_LIMIT,
};
pub use iron::{iron_on_intervals, IntervalSet, IronedAlgorithm};

use crate::algorithm::Algorithm;
use crate::error::Result;
use crate::prior::{DiscreteDistribution, ProductPrior};

/// Hull-ironing of one curve: atom blocks to resample on and the ironed
/// probabilities (hull slope over each atom's segment).
pub fn iron_curve(curve: &InterimCurve, dist: &DiscreteDistribution) -> (Vec<(usize, usize)>, InterimCurve) {
    let g = cumulative_curve(curve, dist);
    let hull = convex_hull(&g);
    let blocks = hull_blocks(&g, &hull);
    let slopes = hull_slopes_per_atom(&g, &hull);
    let mut ironed = curve.clone();
    for (p, s) in ironed.points.iter_mut().zip(slopes) {
        p.1 = s.clamp(0.0, 1.0);
    }
    (blocks, ironed)
}

/// Output of the ideal pipeline.
pub struct IdealIroning {
    pub algorithm: Arc<IronedAlgorithm>,
    pub intervals: IntervalSet,
    pub raw_curves: Vec<InterimCurve>,
    pub ironed_curves: Vec<InterimCurve>,
}

/// Irons `alg` exactly on every agent's monotonizing intervals.
pub fn ideal_ironed_algorithm(alg: Arc<dyn Algorithm>, prior: Arc<ProductPrior>) -> Result<IdealIroning> {
    let raw_curves: Vec<InterimCurve> = (0..prior.n())
        .into_par_iter()
        .map(|i| exact_interim_curve(alg.as_ref(), &prior, i))
        .collect::<Result<_>>()?;
    let (blocks, ironed_curves): (Vec<_>, Vec<_>) = raw_curves
        .iter()
        .map(|c| iron_curve(c, prior.agent(c.agent)))
        .unzip();
    let intervals = IntervalSet::from_blocks(&prior, &blocks);
    let algorithm = Arc::new(iron_on_intervals(alg, prior, intervals.clone())?);
    Ok(IdealIroning { algorithm, intervals, raw_curves, ironed_curves })
}

/// CSV rows `agent,value,x,x_bar,in_interval` for paired raw and ironed curves.
pub fn curves_csv(raw: &[InterimCurve], ironed: &[InterimCurve], intervals: &IntervalSet) -> String {
    let mut out = String::from("agent,value,x,x_bar,in_interval\n");
    for (r, s) in raw.iter().zip(ironed) {
        for (&(v, x), &(_, xb)) in r.points.iter().zip(&s.points) {
            let flag = u8::from(intervals.find(r.agent, v).is_some());
            let _ = writeln!(out, "{},{},{},{},{}", r.agent, v, x, xb, flag);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{self, ConstantAlgorithm};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn worst_case_table_curves() {
        let (prior, table) = algorithms::two_bidder_worst_case();
        let c1 = exact_interim_curve(&table, &prior, 0).unwrap();
        assert_eq!(c1.values(), vec![1.0, 100.0]);
        assert!(close(c1.prob(0), 2.0 / 3.0) && close(c1.prob(1), 1.0 / 3.0));
        let c2 = exact_interim_curve(&table, &prior, 1).unwrap();
        assert_eq!(c2.values(), vec![10.0, 1000.0, 1001.0]);
        assert!(close(c2.prob(0), 0.5) && close(c2.prob(1), 1.0) && close(c2.prob(2), 1.0));
        assert!(c1.is_exact());
    }

    #[test]
    fn worst_case_table_ironing() {
        let (prior, table) = algorithms::two_bidder_worst_case();
        let out = ideal_ironed_algorithm(Arc::new(table), prior.clone()).unwrap();
        assert_eq!(out.intervals.agent(0), &[ValueInterval::new(1.0, 100.0)]);
        assert!(out.intervals.agent(1).is_empty());
        let c1 = exact_interim_curve(out.algorithm.as_ref(), &prior, 0).unwrap();
        assert!(close(c1.prob(0), 0.5) && close(c1.prob(1), 0.5));
        assert!(close(out.ironed_curves[0].prob(0), 0.5));
        let gain = out.ironed_curves[0].expected_value_served(prior.agent(0));
        let base = out.raw_curves[0].expected_value_served(prior.agent(0));
        assert!(close(gain, 25.25) && close(base, 17.0));
        assert_eq!(input_distribution_gap(out.algorithm.as_ref(), &prior), 0.0);
    }

    #[test]
    fn constant_algorithm_is_untouched() {
        let prior = Arc::new(ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0, 3.0]).unwrap(), 3));
        let alg: Arc<dyn Algorithm> = Arc::new(ConstantAlgorithm::serve_all(3));
        let out = ideal_ironed_algorithm(alg, prior).unwrap();
        assert!(out.intervals.is_empty());
        assert!(out.raw_curves.iter().all(|c| c.probs().iter().all(|&x| x == 1.0)));
        assert_eq!(out.raw_curves, out.ironed_curves);
    }

    #[test]
    fn six_atom_slice_on_middle_block() {
        let prior = Arc::new(ProductPrior::new(vec![
            DiscreteDistribution::degenerate(1.0).unwrap(),
            DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap(),
        ]));
        let probs = [0.2, 0.6, 0.6, 0.2, 0.2, 0.6];
        let alg: Arc<dyn Algorithm> = Arc::new(
            algorithms::table_algorithm(
                prior.clone(),
                probs.iter().map(|&p| algorithms::TableEntry::Joint(p)).collect(),
            )
            .unwrap(),
        );
        let intervals = IntervalSet::new(vec![vec![], vec![ValueInterval::new(2.0, 5.0)]]);
        let ironed = iron_on_intervals(alg, prior.clone(), intervals).unwrap();
        let c = exact_interim_curve(&ironed, &prior, 1).unwrap();
        for (x, want) in c.probs().iter().zip([0.2, 0.4, 0.4, 0.4, 0.4, 0.6]) {
            assert!(close(*x, want));
        }
    }

    #[test]
    fn csv_dump() {
        let (prior, table) = algorithms::two_bidder_worst_case();
        let out = ideal_ironed_algorithm(Arc::new(table), prior).unwrap();
        let csv = curves_csv(&out.raw_curves, &out.ironed_curves, &out.intervals);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[2], "0,100,0.3333333333333333,0.5,1");
        assert_eq!(lines[3], "1,10,0.5,0.5,0");
    }
}
