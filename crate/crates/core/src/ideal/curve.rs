//! Interim curves, their probability-space integrals, and the lower hull.

use serde::{Deserialize, Serialize};

use crate::prior::{DiscreteDistribution, ValueInterval};

/// Cross products above `-HULL_TOL` count as collinear or convex.
pub const HULL_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode {
    Exact,
    /// Inner Monte Carlo with this many samples per point.
    Estimated { samples: u64 },
}

/// One agent's interim allocation probability at each atom of its prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterimCurve {
    pub agent: usize,
    /// `(atom value, allocation probability)` in increasing value order.
    pub points: Vec<(f64, f64)>,
    pub mode: CurveMode,
}

impl InterimCurve {
    pub fn exact(agent: usize, points: Vec<(f64, f64)>) -> Self {
        Self { agent, points, mode: CurveMode::Exact }
    }

    /// Curve on the atoms of `dist` with the given probabilities.
    pub fn on_grid(agent: usize, dist: &DiscreteDistribution, probs: &[f64]) -> Self {
        Self::exact(agent, dist.values().iter().copied().zip(probs.iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn prob(&self, j: usize) -> f64 {
        self.points[j].1
    }

    pub fn is_exact(&self) -> bool {
        self.mode == CurveMode::Exact
    }

    /// `E[v x(v)]` under `dist`.
    pub fn expected_value_served(&self, dist: &DiscreteDistribution) -> f64 {
        self.points.iter().zip(dist.masses()).map(|(&(v, x), &p)| p * v * x).sum()
    }
}

/// Piecewise-linear cumulative allocation rule `G(q)` in probability space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulativeCurve {
    /// `(q, G(q))` with `q` strictly increasing from 0 to 1.
    pub breakpoints: Vec<(f64, f64)>,
}

impl CumulativeCurve {
    /// Each atom of mass `masses[j]` owns a `q`-segment of that width on
    /// which `G` has slope `slopes[j]`.
    pub fn from_slopes(masses: &[f64], slopes: &[f64]) -> Self {
        let mut breakpoints = Vec::with_capacity(masses.len() + 1);
        breakpoints.push((0.0, 0.0));
        let (mut q, mut g) = (0.0, 0.0);
        for (j, (&p, &s)) in masses.iter().zip(slopes).enumerate() {
            q = if j + 1 == masses.len() { 1.0 } else { q + p };
            g += p * s;
            breakpoints.push((q, g));
        }
        Self { breakpoints }
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// `G(1) = E[x(v)]`.
    pub fn total(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |b| b.1)
    }

    /// Linear interpolation of `G` at `q` in `[0, 1]`.
    pub fn eval(&self, q: f64) -> f64 {
        let bp = &self.breakpoints;
        let k = bp.partition_point(|b| b.0 < q);
        if k == 0 {
            return bp[0].1;
        }
        if k == bp.len() {
            return bp[k - 1].1;
        }
        let (q0, g0) = bp[k - 1];
        let (q1, g1) = bp[k];
        g0 + (g1 - g0) * (q - q0) / (q1 - q0)
    }

    /// Slope of each segment.
    pub fn slopes(&self) -> Vec<f64> {
        self.breakpoints
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Breakpoint indices of the lower convex hull, by a monotone-chain scan.
/// Collinear breakpoints stay on the hull.
pub fn hull_vertices(g: &CumulativeCurve) -> Vec<usize> {
    let bp = &g.breakpoints;
    let mut stack: Vec<usize> = Vec::with_capacity(bp.len());
    for k in 0..bp.len() {
        while stack.len() >= 2
            && cross(bp[stack[stack.len() - 2]], bp[stack[stack.len() - 1]], bp[k]) < -HULL_TOL
        {
            stack.pop();
        }
        stack.push(k);
    }
    stack
}

/// Lower convex hull `Ḡ` of `G`.
pub fn convex_hull(g: &CumulativeCurve) -> CumulativeCurve {
    CumulativeCurve {
        breakpoints: hull_vertices(g).into_iter().map(|k| g.breakpoints[k]).collect(),
    }
}

/// Maximal runs of atoms (0-based, inclusive) whose segments lie strictly
/// above the hull. Every run spans at least two atoms.
pub fn hull_blocks(g: &CumulativeCurve, hull: &CumulativeCurve) -> Vec<(usize, usize)> {
    let positions: Vec<usize> = hull
        .breakpoints
        .iter()
        .map(|h| {
            g.breakpoints
                .iter()
                .position(|b| b.0 == h.0)
                .expect("hull vertices are breakpoints of G")
        })
        .collect();
    positions
        .windows(2)
        .filter(|w| w[1] - w[0] >= 2)
        .map(|w| (w[0], w[1] - 1))
        .collect()
}

/// Value intervals where `G > Ḡ`, mapped back through the atom grid.
pub fn monotonizing_intervals(
    g: &CumulativeCurve,
    hull: &CumulativeCurve,
    dist: &DiscreteDistribution,
) -> Vec<ValueInterval> {
    hull_blocks(g, hull)
        .into_iter()
        .map(|(a, b)| ValueInterval::new(dist.value(a), dist.value(b)))
        .collect()
}

/// Ironed probabilities: the hull slope over each atom's segment.
pub fn hull_slopes_per_atom(g: &CumulativeCurve, hull: &CumulativeCurve) -> Vec<f64> {
    let atoms = g.len() - 1;
    let mut out = Vec::with_capacity(atoms);
    let hb = &hull.breakpoints;
    let mut edge = 0;
    for t in 0..atoms {
        let mid = 0.5 * (g.breakpoints[t].0 + g.breakpoints[t + 1].0);
        while edge + 2 < hb.len() && hb[edge + 1].0 <= mid {
            edge += 1;
        }
        let (q0, g0) = hb[edge];
        let (q1, g1) = hb[edge + 1];
        out.push((g1 - g0) / (q1 - q0));
    }
    out
}

/// `G` for an interim curve under its agent's prior.
pub fn cumulative_curve(curve: &InterimCurve, dist: &DiscreteDistribution) -> CumulativeCurve {
    CumulativeCurve::from_slopes(dist.masses(), &curve.probs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn two_atom_non_monotone_curve() {
        let d = DiscreteDistribution::uniform(&[1.0, 100.0]).unwrap();
        let c = InterimCurve::on_grid(0, &d, &[2.0 / 3.0, 1.0 / 3.0]);
        let g = cumulative_curve(&c, &d);
        assert_eq!(g.len(), 3);
        assert!(close(g.breakpoints[1].0, 0.5) && close(g.breakpoints[1].1, 1.0 / 3.0));
        assert!(close(g.breakpoints[2].0, 1.0) && close(g.breakpoints[2].1, 0.5));

        let h = convex_hull(&g);
        assert_eq!(h.breakpoints, vec![(0.0, 0.0), g.breakpoints[2]]);
        // chord value at the middle breakpoint is .25 < 1/3
        assert!(close(h.eval(0.5), 0.25));
        assert_eq!(monotonizing_intervals(&g, &h, &d), vec![ValueInterval::new(1.0, 100.0)]);
        let slopes = hull_slopes_per_atom(&g, &h);
        assert!(close(slopes[0], 0.5) && close(slopes[1], 0.5));
    }

    #[test]
    fn zero_curve_is_flat() {
        let d = DiscreteDistribution::uniform(&[1.0, 2.0, 3.0]).unwrap();
        let g = cumulative_curve(&InterimCurve::on_grid(0, &d, &[0.0; 3]), &d);
        assert!(g.breakpoints.iter().all(|b| b.1 == 0.0));
        assert_eq!(convex_hull(&g), g);
        assert!(monotonizing_intervals(&g, &convex_hull(&g), &d).is_empty());
    }

    #[test]
    fn six_atom_pairs() {
        let d = DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let c = InterimCurve::on_grid(1, &d, &[0.8, 0.2, 0.82, 0.22, 0.84, 0.24]);
        let g = cumulative_curve(&c, &d);
        assert!((g.total() - 3.12 / 6.0).abs() < 1e-12);
        let h = convex_hull(&g);
        assert_eq!(hull_blocks(&g, &h), vec![(0, 1), (2, 3), (4, 5)]);
        let slopes = hull_slopes_per_atom(&g, &h);
        for (s, want) in slopes.iter().zip([0.5, 0.5, 0.52, 0.52, 0.54, 0.54]) {
            assert!((s - want).abs() < 1e-12);
        }
    }

    #[test]
    fn convex_input_is_its_own_hull() {
        let d = DiscreteDistribution::new(vec![(1.0, 0.1), (2.0, 0.4), (3.0, 0.2), (4.0, 0.3)]).unwrap();
        let c = InterimCurve::on_grid(0, &d, &[0.1, 0.1, 0.5, 0.9]);
        let g = cumulative_curve(&c, &d);
        let h = convex_hull(&g);
        assert_eq!(h, g);
        assert!(hull_blocks(&g, &h).is_empty());
    }

    #[test]
    fn eval_interpolates() {
        let g = CumulativeCurve { breakpoints: vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)] };
        assert!(close(g.eval(0.25), 0.125));
        assert!(close(g.eval(0.75), 0.625));
        assert_eq!(g.slopes(), vec![0.5, 1.5]);
    }
}
