use num_rational::Ratio;
use serde::Serialize;

use super::render_rows;
use crate::ideal::{convex_hull, hull_blocks, CumulativeCurve};

type Q = Ratio<i64>;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

/// Jobs on related machines. Machine `m` has a random speed; a job of length
/// `l` on a machine of speed `s` takes `l / s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchedulingInstance {
    pub jobs: Vec<Q>,
    /// Per machine: `(speed, probability)` atoms in increasing speed order.
    pub speeds: Vec<Vec<(Q, Q)>>,
}

impl SchedulingInstance {
    /// Makespan when machines take `counts[m]` consecutive jobs in order.
    pub fn makespan(&self, counts: &[usize], speeds: &[Q]) -> Q {
        assert_eq!(counts.iter().sum::<usize>(), self.jobs.len(), "every job is assigned");
        let mut next = 0;
        let mut worst = q(0);
        for (m, &c) in counts.iter().enumerate() {
            let load: Q = self.jobs[next..next + c].iter().sum();
            next += c;
            worst = worst.max(load / speeds[m]);
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MakespanCase {
    pub true_speed: String,
    pub redrawn_speed: String,
    pub probability: String,
    pub allocation: Vec<usize>,
    pub makespan: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MakespanReport {
    pub original_expected_makespan: String,
    pub ironed_expected_makespan: String,
    pub original_value: f64,
    pub ironed_value: f64,
    /// Speeds of the last machine that are redrawn together.
    pub ironed_speeds: Vec<String>,
    pub cases: Vec<MakespanCase>,
    pub table: String,
    #[serde(skip)]
    pub original: Q,
    #[serde(skip)]
    pub ironed: Q,
}

fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Ten unit jobs, four machines of speed 2 and a fifth of speed 1 or 2 with
/// equal probability. The rule gives two jobs each when the fifth machine is
/// fast and `(6, 1, 0, 0, 3)` when it is slow, so the fifth machine's job
/// share falls as its speed rises. Ironing that share redraws its speed
/// uniformly from both atoms, which raises expected makespan from 2 to 9/4.
pub fn makespan_scenario() -> MakespanReport {
    let half = Q::new(1, 2);
    let fast = vec![(q(2), q(1))];
    let instance = SchedulingInstance {
        jobs: vec![q(1); 10],
        speeds: vec![fast.clone(), fast.clone(), fast.clone(), fast, vec![(q(1), half), (q(2), half)]],
    };
    let rule = |s5: Q| -> Vec<usize> {
        if s5 == q(2) {
            vec![2, 2, 2, 2, 2]
        } else {
            vec![6, 1, 0, 0, 3]
        }
    };
    let last = &instance.speeds[4];
    let speeds_with = |s5: Q| vec![q(2), q(2), q(2), q(2), s5];

    let original: Q = last.iter().map(|&(s, p)| p * instance.makespan(&rule(s), &speeds_with(s))).sum();

    // Share of the jobs given to the last machine, as a curve over its speed.
    let total = instance.jobs.len() as f64;
    let masses: Vec<f64> = last.iter().map(|&(_, p)| to_f64(p)).collect();
    let shares: Vec<f64> = last.iter().map(|&(s, _)| rule(s)[4] as f64 / total).collect();
    let g = CumulativeCurve::from_slopes(&masses, &shares);
    let blocks = hull_blocks(&g, &convex_hull(&g));
    let block_of = |j: usize| blocks.iter().copied().find(|&(a, b)| a <= j && j <= b).unwrap_or((j, j));

    let mut ironed = q(0);
    let mut cases = Vec::new();
    for (j, &(s, p)) in last.iter().enumerate() {
        let (a, b) = block_of(j);
        let block_mass: Q = last[a..=b].iter().map(|t| t.1).sum();
        for &(s_redrawn, p_redrawn) in &last[a..=b] {
            let prob = p * p_redrawn / block_mass;
            let alloc = rule(s_redrawn);
            let m = instance.makespan(&alloc, &speeds_with(s));
            ironed += prob * m;
            cases.push(MakespanCase {
                true_speed: s.to_string(),
                redrawn_speed: s_redrawn.to_string(),
                probability: prob.to_string(),
                allocation: alloc,
                makespan: m.to_string(),
            });
        }
    }
    let ironed_speeds = blocks
        .iter()
        .flat_map(|&(a, b)| last[a..=b].iter().map(|t| t.0.to_string()))
        .collect();

    let header = ["s5", "s5'", "prob", "allocation", "makespan"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = cases
        .iter()
        .map(|c| {
            vec![
                c.true_speed.clone(),
                c.redrawn_speed.clone(),
                c.probability.clone(),
                format!("{:?}", c.allocation),
                c.makespan.clone(),
            ]
        })
        .collect();
    let mut table = render_rows(&header, &rows);
    table.push_str(&format!("expected makespan: original {original}, ironed {ironed}\n"));

    MakespanReport {
        original_expected_makespan: original.to_string(),
        ironed_expected_makespan: ironed.to_string(),
        original_value: to_f64(original),
        ironed_value: to_f64(ironed),
        ironed_speeds,
        cases,
        table,
        original,
        ironed,
    }
}
