//! Audits: monotonicity, closeness, best-response regret, approximation
//! factors, tail dominance and prior preservation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::algorithm::Algorithm;
use crate::error::{Error, Result};
use crate::ideal::{self, InterimCurve};
use crate::model::{brute_force_opt, CostModel};
use crate::payments::exact_payments;
use crate::prior::{DiscreteDistribution, ProductPrior, TupleIter};
use crate::rng::RandomStream;

/// Tail-sum slack used by [`dominance_check`].
pub const DOMINANCE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneViolation {
    pub agent: usize,
    pub lower_value: f64,
    pub upper_value: f64,
    /// `x(lower) - x(upper)`, positive.
    pub gap: f64,
}

/// Adjacent atoms where the curve drops by more than `tol`.
pub fn check_monotone(curve: &InterimCurve, tol: f64) -> Vec<MonotoneViolation> {
    curve
        .points
        .windows(2)
        .filter(|w| w[1].1 < w[0].1 - tol)
        .map(|w| MonotoneViolation {
            agent: curve.agent,
            lower_value: w[0].0,
            upper_value: w[1].0,
            gap: w[0].1 - w[1].1,
        })
        .collect()
}

/// Largest pointwise gap between two curves on the same grid.
pub fn eps_closeness(a: &InterimCurve, b: &InterimCurve) -> Result<f64> {
    if a.points.len() != b.points.len() || a.points.iter().zip(&b.points).any(|(p, q)| p.0 != q.0) {
        return Err(Error::GridMismatch);
    }
    Ok(a.points.iter().zip(&b.points).map(|(p, q)| (p.1 - q.1).abs()).fold(0.0, f64::max))
}

/// Largest utility gain from misreporting another atom when payments are
/// the exact interim payments of `curve`.
pub fn curve_regret(curve: &InterimCurve) -> f64 {
    let pay = exact_payments(curve);
    let pts = &curve.points;
    let mut worst: f64 = 0.0;
    for (j, &(v, x)) in pts.iter().enumerate() {
        let truthful = v * x - pay[j];
        for (t, &(_, xd)) in pts.iter().enumerate() {
            worst = worst.max(v * xd - pay[t] - truthful);
        }
    }
    worst
}

/// [`curve_regret`] on the exact interim curve of `alg` for `agent`.
pub fn best_response_regret(alg: &dyn Algorithm, prior: &ProductPrior, agent: usize) -> Result<f64> {
    Ok(curve_regret(&ideal::exact_interim_curve(alg, prior, agent)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceViolation {
    pub agent: usize,
    pub value: f64,
    pub raw_tail: f64,
    pub ironed_tail: f64,
}

/// Atoms `v` where `Σ_{z ≥ v} x̄(z) p(z)` falls below `Σ_{z ≥ v} x(z) p(z)`.
pub fn dominance_check(
    raw: &InterimCurve,
    ironed: &InterimCurve,
    dist: &DiscreteDistribution,
) -> Result<Vec<DominanceViolation>> {
    if raw.points.len() != dist.len() || eps_closeness(raw, ironed).is_err() {
        return Err(Error::GridMismatch);
    }
    let mut out = Vec::new();
    let (mut rt, mut it) = (0.0, 0.0);
    for j in (0..dist.len()).rev() {
        rt += raw.prob(j) * dist.mass(j);
        it += ironed.prob(j) * dist.mass(j);
        if it < rt - DOMINANCE_TOL {
            out.push(DominanceViolation { agent: raw.agent, value: dist.value(j), raw_tail: rt, ironed_tail: it });
        }
    }
    out.reverse();
    Ok(out)
}

/// Largest per-atom gap between the prior and the report distribution that
/// reaches the wrapped algorithm.
pub fn prior_preservation(alg: &dyn Algorithm, prior: &ProductPrior) -> f64 {
    ideal::input_distribution_gap(alg, prior)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxFactor {
    /// `E[OPT] / E[welfare of the algorithm]`.
    pub ratio: f64,
    pub expected_opt: f64,
    pub expected_welfare: f64,
    pub exact: bool,
    /// 95% interval for the ratio when estimated by sampling.
    pub confidence_interval: Option<(f64, f64)>,
    pub samples: Option<u64>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == den {
        1.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Expected welfare of `alg` at one profile, from its exact outcome
/// distribution.
pub fn profile_welfare(alg: &dyn Algorithm, prior: &ProductPrior, idx: &[usize], cost: &CostModel) -> Result<f64> {
    let lottery = ideal::profile_lottery(alg, prior, idx)?;
    let values = prior.values_at(idx);
    let gross: f64 = lottery
        .marginals(prior.n())
        .iter()
        .zip(&values)
        .map(|(x, v)| x * v)
        .sum();
    Ok(gross - lottery.expected_cost(cost))
}

/// Samples used by [`bayesian_approx_factor`] above the exact-enumeration limit.
pub const APPROX_SAMPLES: u64 = 100_000;

/// Bayesian approximation factor, exact when the support is small enough and
/// otherwise estimated with [`APPROX_SAMPLES`] profiles from a fixed stream.
pub fn bayesian_approx_factor(alg: &dyn Algorithm, prior: &ProductPrior, cost: &CostModel) -> Result<ApproxFactor> {
    if prior.support_size() <= ideal::EXACT_SUPPORT_LIMIT {
        let mut opt = 0.0;
        for idx in TupleIter::new(prior.agents().iter().map(DiscreteDistribution::len).collect()) {
            opt += prior.mass_at(&idx) * brute_force_opt(&prior.values_at(&idx), cost)?.0;
        }
        let w = ideal::expected_welfare(alg, prior, cost)?;
        return Ok(ApproxFactor {
            ratio: ratio(opt, w),
            expected_opt: opt,
            expected_welfare: w,
            exact: true,
            confidence_interval: None,
            samples: None,
        });
    }
    sampled_approx_factor(alg, prior, cost, APPROX_SAMPLES, &mut RandomStream::new(0))
}

/// Monte Carlo approximation factor with a delta-method 95% interval.
pub fn sampled_approx_factor(
    alg: &dyn Algorithm,
    prior: &ProductPrior,
    cost: &CostModel,
    samples: u64,
    rng: &mut RandomStream,
) -> Result<ApproxFactor> {
    let mut opts = Vec::with_capacity(samples as usize);
    let mut alg_w = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let v = prior.sample_profile(rng);
        opts.push(brute_force_opt(&v, cost)?.0);
        let w = match alg.lottery(&v)? {
            Some(l) => {
                let gross: f64 = l.marginals(prior.n()).iter().zip(&v).map(|(x, v)| x * v).sum();
                gross - l.expected_cost(cost)
            }
            None => crate::model::welfare(&v, &alg.allocate(&v, rng)?, cost),
        };
        alg_w.push(w);
    }
    let m = samples as f64;
    let mo = opts.iter().sum::<f64>() / m;
    let ma = alg_w.iter().sum::<f64>() / m;
    let r = ratio(mo, ma);
    let var = opts
        .iter()
        .zip(&alg_w)
        .map(|(o, a)| (o - mo - r * (a - ma)).powi(2))
        .sum::<f64>()
        / (m - 1.0).max(1.0);
    let se = (var / m).sqrt() / ma.abs();
    Ok(ApproxFactor {
        ratio: r,
        expected_opt: mo,
        expected_welfare: ma,
        exact: false,
        confidence_interval: Some((r - 1.96 * se, r + 1.96 * se)),
        samples: Some(samples),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub ratio: f64,
    /// Profile attaining the worst ratio.
    pub profile: Vec<f64>,
    pub opt: f64,
    pub welfare: f64,
}

/// Largest `OPT(v) / E[welfare at v]` over the whole support.
pub fn worst_case_ratio(alg: &dyn Algorithm, prior: &ProductPrior, cost: &CostModel) -> Result<WorstCase> {
    let size = prior.support_size();
    if size > ideal::EXACT_SUPPORT_LIMIT {
        return Err(Error::SupportTooLarge { size, max: ideal::EXACT_SUPPORT_LIMIT });
    }
    let mut worst: Option<WorstCase> = None;
    for idx in TupleIter::new(prior.agents().iter().map(DiscreteDistribution::len).collect()) {
        let values = prior.values_at(&idx);
        let opt = brute_force_opt(&values, cost)?.0;
        let w = profile_welfare(alg, prior, &idx, cost)?;
        let r = ratio(opt, w);
        if worst.as_ref().is_none_or(|b| r > b.ratio) {
            worst = Some(WorstCase { ratio: r, profile: values, opt, welfare: w });
        }
    }
    Ok(worst.expect("non-empty support"))
}

/// Pass/fail thresholds for [`audit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub monotone_tol: f64,
    /// Largest tolerated best-response gain.
    pub regret_bound: f64,
    /// Tolerated welfare loss of the ironed algorithm against the input.
    pub welfare_slack: f64,
    /// Whether tail dominance is a pass condition or informational only.
    pub require_dominance: bool,
    pub prior_tol: f64,
}

impl AuditConfig {
    /// Thresholds for exact ideal ironing.
    pub fn ideal(prior: &ProductPrior) -> Self {
        let scale = prior.v_max().max(1.0);
        Self {
            monotone_tol: 1e-9,
            regret_bound: 1e-9 * scale,
            welfare_slack: 1e-12 * scale * prior.n() as f64,
            require_dominance: true,
            prior_tol: 1e-12,
        }
    }

    /// Thresholds for the sampling-based reduction at `eps` with mixing
    /// weight `delta`.
    pub fn oracle(prior: &ProductPrior, eps: f64, delta: f64) -> Self {
        let n = prior.n() as f64;
        Self {
            monotone_tol: 1e-9,
            regret_bound: 2.0 * eps * prior.v_max(),
            welfare_slack: (eps + delta) * n * prior.mu_max(),
            require_dominance: false,
            prior_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelfareFigures {
    pub algorithm: f64,
    pub ironed: f64,
    pub opt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentAudit {
    pub agent: usize,
    pub raw_curve: Vec<(f64, f64)>,
    pub ironed_curve: Vec<(f64, f64)>,
    pub payments: Vec<f64>,
    pub regret: f64,
}

/// Audit of an ironed (or monotonized) algorithm against its input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config: AuditConfig,
    pub agents: Vec<AgentAudit>,
    pub monotonicity_violations: Vec<MonotoneViolation>,
    pub monotone: bool,
    pub max_regret: f64,
    pub regret_ok: bool,
    pub welfare: WelfareFigures,
    pub welfare_ok: bool,
    pub approx_ratio: ApproxFactor,
    pub dominance_violations: Vec<DominanceViolation>,
    pub dominance_ok: bool,
    pub prior_gap: f64,
    pub prior_ok: bool,
    pub passed: bool,
}

/// Exact audit of `ironed` against the input algorithm `raw`.
pub fn audit(
    raw: &dyn Algorithm,
    ironed: &dyn Algorithm,
    prior: &ProductPrior,
    cost: &CostModel,
    config: AuditConfig,
) -> Result<AuditReport> {
    let raw_curves = ideal::exact_interim_curves(raw, prior)?;
    let ironed_curves = ideal::exact_interim_curves(ironed, prior)?;
    let mut agents = Vec::with_capacity(prior.n());
    let mut monotonicity_violations = Vec::new();
    let mut dominance_violations = Vec::new();
    for (r, s) in raw_curves.iter().zip(&ironed_curves) {
        monotonicity_violations.extend(check_monotone(s, config.monotone_tol));
        dominance_violations.extend(dominance_check(r, s, prior.agent(r.agent))?);
        agents.push(AgentAudit {
            agent: r.agent,
            raw_curve: r.points.clone(),
            ironed_curve: s.points.clone(),
            payments: exact_payments(s),
            regret: curve_regret(s),
        });
    }
    let max_regret = agents.iter().map(|a| a.regret).fold(0.0, f64::max);
    let approx_ratio = bayesian_approx_factor(ironed, prior, cost)?;
    let welfare = WelfareFigures {
        algorithm: ideal::expected_welfare(raw, prior, cost)?,
        ironed: approx_ratio.expected_welfare,
        opt: approx_ratio.expected_opt,
    };
    let prior_gap = prior_preservation(ironed, prior);
    let monotone = monotonicity_violations.is_empty();
    let regret_ok = max_regret <= config.regret_bound;
    let welfare_ok = welfare.ironed >= welfare.algorithm - config.welfare_slack;
    let dominance_ok = dominance_violations.is_empty();
    let prior_ok = prior_gap <= config.prior_tol;
    let passed = monotone && regret_ok && welfare_ok && prior_ok && (dominance_ok || !config.require_dominance);
    Ok(AuditReport {
        config,
        agents,
        monotonicity_violations,
        monotone,
        max_regret,
        regret_ok,
        welfare,
        welfare_ok,
        approx_ratio,
        dominance_violations,
        dominance_ok,
        prior_gap,
        prior_ok,
        passed,
    })
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit report serializes")
    }

    /// Human-readable summary table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<22} {:>16}  {}", "check", "value", "status");
        let _ = writeln!(
            s,
            "{:<22} {:>16}  {}",
            "monotone",
            self.monotonicity_violations.len(),
            mark(self.monotone)
        );
        let _ = writeln!(s, "{:<22} {:>16.6e}  {}", "max regret", self.max_regret, mark(self.regret_ok));
        let _ = writeln!(s, "{:<22} {:>16.6}  {}", "welfare (input)", self.welfare.algorithm, "");
        let _ = writeln!(s, "{:<22} {:>16.6}  {}", "welfare (ironed)", self.welfare.ironed, mark(self.welfare_ok));
        let _ = writeln!(s, "{:<22} {:>16.6}  {}", "welfare (opt)", self.welfare.opt, "");
        let _ = writeln!(s, "{:<22} {:>16.6}  {}", "approximation ratio", self.approx_ratio.ratio, "");
        let dom = if self.config.require_dominance { mark(self.dominance_ok) } else { "info" };
        let _ = writeln!(s, "{:<22} {:>16}  {}", "tail dominance", self.dominance_violations.len(), dom);
        let _ = writeln!(s, "{:<22} {:>16.3e}  {}", "prior gap", self.prior_gap, mark(self.prior_ok));
        for v in &self.monotonicity_violations {
            let _ = writeln!(
                s,
                "  agent {} drops by {:.6} between {} and {}",
                v.agent, v.gap, v.lower_value, v.upper_value
            );
        }
        let _ = writeln!(s, "overall: {}", if self.passed { "PASS" } else { "FAIL" });
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms;
    use std::sync::Arc;

    #[test]
    fn monotone_examples() {
        let d = DiscreteDistribution::uniform(&[1.0, 100.0]).unwrap();
        let c = InterimCurve::on_grid(0, &d, &[2.0 / 3.0, 1.0 / 3.0]);
        let v = check_monotone(&c, 1e-9);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].lower_value, v[0].upper_value), (1.0, 100.0));
        assert!(check_monotone(&InterimCurve::on_grid(0, &d, &[0.3, 0.3]), 0.0).is_empty());
    }

    #[test]
    fn closeness_examples() {
        let d = DiscreteDistribution::uniform(&[1.0, 2.0]).unwrap();
        let a = InterimCurve::on_grid(0, &d, &[0.5, 0.5]);
        let b = InterimCurve::on_grid(0, &d, &[0.4, 0.7]);
        assert_eq!(eps_closeness(&a, &a).unwrap(), 0.0);
        assert!((eps_closeness(&a, &b).unwrap() - 0.2).abs() < 1e-15);
        let e = DiscreteDistribution::uniform(&[1.0, 3.0]).unwrap();
        let c = InterimCurve::on_grid(0, &e, &[0.5, 0.5]);
        assert!(matches!(eps_closeness(&a, &c), Err(Error::GridMismatch)));
    }

    #[test]
    fn worst_case_table_figures() {
        let (prior, table) = algorithms::two_bidder_worst_case();
        let zero = CostModel::zero();
        let raw = worst_case_ratio(&table, &prior, &zero).unwrap();
        assert_eq!(raw.ratio, 11.0 / 10.0);
        assert!(best_response_regret(&table, &prior, 0).unwrap() > 0.0);
        let f = bayesian_approx_factor(&table, &prior, &zero).unwrap();
        assert!(f.exact && f.ratio <= 1.1);

        let out = ideal::ideal_ironed_algorithm(Arc::new(table.clone()), prior.clone()).unwrap();
        let w = profile_welfare(out.algorithm.as_ref(), &prior, &[1, 0], &zero).unwrap();
        assert_eq!(w, 55.0);
        let ironed = worst_case_ratio(out.algorithm.as_ref(), &prior, &zero).unwrap();
        assert_eq!(ironed.ratio, 2.0);
        assert!(best_response_regret(out.algorithm.as_ref(), &prior, 0).unwrap() <= 1e-9);

        let dom = dominance_check(&out.raw_curves[0], &out.ironed_curves[0], prior.agent(0)).unwrap();
        assert!(dom.is_empty());
        assert_eq!(prior_preservation(out.algorithm.as_ref(), &prior), 0.0);

        let report = audit(&table, out.algorithm.as_ref(), &prior, &zero, AuditConfig::ideal(&prior)).unwrap();
        assert!(report.passed, "{}", report.to_table());
        assert!(report.to_table().contains("overall: PASS"));
        let back: AuditReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back.passed, report.passed);
    }

    #[test]
    fn raw_table_fails_audit_against_itself() {
        let (prior, table) = algorithms::two_bidder_worst_case();
        let report = audit(&table, &table, &prior, &CostModel::zero(), AuditConfig::ideal(&prior)).unwrap();
        assert!(!report.monotone && !report.passed);
        assert_eq!(report.monotonicity_violations.len(), 1);
    }

    #[test]
    fn sampled_factor_brackets_exact() {
        let (prior, table) = algorithms::two_bidder_worst_case();
        let zero = CostModel::zero();
        let exact = bayesian_approx_factor(&table, &prior, &zero).unwrap();
        let est = sampled_approx_factor(&table, &prior, &zero, 20_000, &mut RandomStream::new(3)).unwrap();
        let (lo, hi) = est.confidence_interval.unwrap();
        assert!(lo - 0.01 <= exact.ratio && exact.ratio <= hi + 0.01);
    }
}
