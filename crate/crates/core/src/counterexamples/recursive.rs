use serde::Serialize;

use super::render_rows;
use crate::algorithms::joint_service_example;
use crate::error::{Error, Result};
use crate::ideal::{convex_hull, hull_blocks, CumulativeCurve};
use crate::prior::{ProductPrior, TupleIter};

/// Guard on the number of ironing steps per run.
pub const MAX_RECURSIVE_STEPS: usize = 100;

const FLAT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursiveStep {
    pub agent: usize,
    /// The agent's curve under the cube before this step.
    pub curve: Vec<f64>,
    /// Ironed atom blocks (0-based, inclusive).
    pub blocks: Vec<(usize, usize)>,
    /// Cube after this step, as inclusive atom ranges per agent.
    pub cube: Vec<(usize, usize)>,
    /// Joint service probabilities after this step, row-major with agent 0 slowest.
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursiveRun {
    /// Atom indices of the starting profile.
    pub point: Vec<usize>,
    pub values: Vec<f64>,
    pub steps: Vec<RecursiveStep>,
    /// Final entry at the starting profile.
    pub final_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursiveReport {
    pub runs: Vec<RecursiveRun>,
    /// Agent 1's final allocation at `v1 = 1` and `v1 = 2`, with `v2 = 5`.
    pub x1_low: f64,
    pub x1_high: f64,
    pub monotone: bool,
    pub table: String,
}

fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut s = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * sizes[i + 1];
    }
    s
}

/// Agent `i`'s curve: the mass-weighted average over the other agents'
/// cube ranges, at each of `i`'s atoms.
fn curve_under_cube(prior: &ProductPrior, table: &[f64], cube: &[(usize, usize)], i: usize) -> Vec<f64> {
    let n = prior.n();
    let sizes: Vec<usize> = prior.agents().iter().map(|d| d.len()).collect();
    let st = strides(&sizes);
    let others: Vec<usize> = (0..n).filter(|&t| t != i).collect();
    let ranges: Vec<usize> = others.iter().map(|&t| cube[t].1 - cube[t].0 + 1).collect();
    (0..sizes[i])
        .map(|a| {
            let (mut num, mut den) = (0.0, 0.0);
            for off in TupleIter::new(ranges.clone()) {
                let mut pos = a * st[i];
                let mut w = 1.0;
                for (k, &t) in others.iter().enumerate() {
                    let j = cube[t].0 + off[k];
                    pos += j * st[t];
                    w *= prior.agent(t).mass(j);
                }
                num += w * table[pos];
                den += w;
            }
            num / den
        })
        .collect()
}

/// Replaces entries along axis `i` by their conditional average over each block.
fn iron_axis(prior: &ProductPrior, table: &mut [f64], i: usize, blocks: &[(usize, usize)]) {
    let sizes: Vec<usize> = prior.agents().iter().map(|d| d.len()).collect();
    let st = strides(&sizes);
    let d = prior.agent(i);
    let mut rest = sizes.clone();
    rest[i] = 1;
    for base in TupleIter::new(rest) {
        let origin: usize = base.iter().zip(&st).map(|(b, s)| b * s).sum();
        for &(a, b) in blocks {
            let mass = d.mass_between(a, b);
            let avg = (a..=b).map(|t| d.mass(t) * table[origin + t * st[i]]).sum::<f64>() / mass;
            for t in a..=b {
                table[origin + t * st[i]] = avg;
            }
        }
    }
}

fn is_monotone(curve: &[f64]) -> bool {
    curve.windows(2).all(|w| w[1] >= w[0] - FLAT_TOL)
}

/// Point-wise recursive ironing from profile `point`: starting from
/// singleton cubes, repeatedly pick the next agent (round-robin from
/// `first`) whose curve under the cube is non-monotone, iron it along that
/// agent's axis, and widen its cube to the ironed block holding its value.
pub fn recursive_ironing(prior: &ProductPrior, table: &[f64], point: &[usize], first: usize) -> Result<RecursiveRun> {
    let n = prior.n();
    let mut table = table.to_vec();
    let mut cube: Vec<(usize, usize)> = point.iter().map(|&j| (j, j)).collect();
    let mut steps = Vec::new();
    let mut next = first;
    loop {
        let curves: Vec<Vec<f64>> = (0..n).map(|i| curve_under_cube(prior, &table, &cube, i)).collect();
        let Some(agent) = (0..n).map(|k| (next + k) % n).find(|&i| !is_monotone(&curves[i])) else {
            break;
        };
        if steps.len() == MAX_RECURSIVE_STEPS {
            return Err(Error::NonTermination(MAX_RECURSIVE_STEPS));
        }
        let g = CumulativeCurve::from_slopes(prior.agent(agent).masses(), &curves[agent]);
        let blocks = hull_blocks(&g, &convex_hull(&g));
        iron_axis(prior, &mut table, agent, &blocks);
        if let Some(&b) = blocks.iter().find(|&&(a, b)| a <= point[agent] && point[agent] <= b) {
            cube[agent] = b;
        }
        steps.push(RecursiveStep {
            agent,
            curve: curves[agent].clone(),
            blocks,
            cube: cube.clone(),
            table: table.clone(),
        });
        next = (agent + 1) % n;
    }
    let st = strides(&prior.agents().iter().map(|d| d.len()).collect::<Vec<_>>());
    let pos: usize = point.iter().zip(&st).map(|(j, s)| j * s).sum();
    Ok(RecursiveRun { point: point.to_vec(), values: prior.values_at(point), steps, final_value: table[pos] })
}

fn render_table(prior: &ProductPrior, table: &[f64]) -> String {
    let d1 = prior.agent(0);
    let d2 = prior.agent(1);
    let mut header = vec!["v1 \\ v2".to_string()];
    header.extend(d2.values().iter().map(|v| v.to_string()));
    let rows: Vec<Vec<String>> = (0..d1.len())
        .map(|r| {
            let mut row = vec![d1.value(r).to_string()];
            row.extend((0..d2.len()).map(|c| format!("{:.2}", table[r * d2.len() + c])));
            row
        })
        .collect();
    render_rows(&header, &rows)
}

/// Recursive ironing of the two-agent joint-service table from `(1, 5)` and
/// `(2, 5)`, agent 2 first. Each run ends monotone at its own profile, yet
/// together they leave agent 1 with a higher allocation at value 1 than at
/// value 2.
pub fn recursive_ironing_scenario() -> Result<RecursiveReport> {
    let (prior, alg) = joint_service_example();
    let d2 = prior.agent(1);
    let table: Vec<f64> = TupleIter::new(vec![prior.agent(0).len(), d2.len()])
        .map(|idx| alg.probs_at(&prior.values_at(&idx)).map(|p| p[0]))
        .collect::<Result<_>>()?;
    let five = d2.index_of(5.0).expect("5 is an atom of agent 2");
    let mut runs = Vec::new();
    for v1 in 0..prior.agent(0).len() {
        runs.push(recursive_ironing(&prior, &table, &[v1, five], 1)?);
    }
    let (x1_low, x1_high) = (runs[0].final_value, runs[1].final_value);

    let mut rendered = String::new();
    for run in &runs {
        for (s, step) in run.steps.iter().enumerate() {
            rendered.push_str(&format!(
                "start ({}, {}), step {} (agent {}):\n",
                run.values[0],
                run.values[1],
                s + 1,
                step.agent + 1
            ));
            rendered.push_str(&render_table(&prior, &step.table));
        }
    }
    rendered.push_str(&format!("x1(1) = {x1_low:.2}, x1(2) = {x1_high:.2} at v2 = 5\n"));

    Ok(RecursiveReport { runs, x1_low, x1_high, monotone: x1_high >= x1_low - FLAT_TOL, table: rendered })
}
