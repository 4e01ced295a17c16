use std::sync::Arc;

use serde::Serialize;

use super::render_rows;
use crate::algorithm::Algorithm;
use crate::algorithms::two_bidder_worst_case;
use crate::error::Result;
use crate::ideal::{ideal_ironed_algorithm, IntervalSet};
use crate::model::{brute_force_opt, CostModel};
use crate::prior::TupleIter;
use crate::verify::{profile_welfare, worst_case_ratio};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstCaseReport {
    pub raw_worst_case_ratio: f64,
    pub raw_worst_profile: Vec<f64>,
    pub ironed_welfare_at_100_10: f64,
    pub ironed_worst_case_ratio: f64,
    pub ironed_worst_profile: Vec<f64>,
    pub intervals: IntervalSet,
    /// `(v1, v2, OPT, raw welfare, ironed welfare)` per profile.
    pub profiles: Vec<(f64, f64, f64, f64, f64)>,
    pub table: String,
}

/// Ideal ironing of the two-bidder table: the raw rule is within 11/10 of
/// optimal everywhere, the ironed one only within a factor 2.
pub fn worstcase_scenario() -> Result<WorstCaseReport> {
    let (prior, table) = two_bidder_worst_case();
    let cost = CostModel::zero();
    let raw: Arc<dyn Algorithm> = Arc::new(table);
    let out = ideal_ironed_algorithm(raw.clone(), prior.clone())?;
    let ironed = out.algorithm.as_ref();

    let raw_worst = worst_case_ratio(raw.as_ref(), &prior, &cost)?;
    let ironed_worst = worst_case_ratio(ironed, &prior, &cost)?;

    let mut profiles = Vec::new();
    for idx in TupleIter::new(vec![prior.agent(0).len(), prior.agent(1).len()]) {
        let v = prior.values_at(&idx);
        let opt = brute_force_opt(&v, &cost)?.0;
        let wr = profile_welfare(raw.as_ref(), &prior, &idx, &cost)?;
        let wi = profile_welfare(ironed, &prior, &idx, &cost)?;
        profiles.push((v[0], v[1], opt, wr, wi));
    }
    let at = profiles
        .iter()
        .find(|p| p.0 == 100.0 && p.1 == 10.0)
        .map(|p| p.4)
        .expect("profile (100, 10) is in the support");

    let header = ["v1", "v2", "OPT", "A", "ironed A", "OPT/ironed"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = profiles
        .iter()
        .map(|p| {
            vec![
                p.0.to_string(),
                p.1.to_string(),
                p.2.to_string(),
                p.3.to_string(),
                p.4.to_string(),
                format!("{:.4}", p.2 / p.4),
            ]
        })
        .collect();
    let mut rendered = render_rows(&header, &rows);
    rendered.push_str(&format!(
        "worst-case ratio: raw {}, ironed {}\n",
        raw_worst.ratio, ironed_worst.ratio
    ));

    Ok(WorstCaseReport {
        raw_worst_case_ratio: raw_worst.ratio,
        raw_worst_profile: raw_worst.profile,
        ironed_welfare_at_100_10: at,
        ironed_worst_case_ratio: ironed_worst.ratio,
        ironed_worst_profile: ironed_worst.profile,
        intervals: out.intervals,
        profiles,
        table: rendered,
    })
}
