use std::sync::Arc;

use ironing_core::algorithms::{self, ConstantAlgorithm, FnAlgorithm, PostedPrice};
use ironing_core::ideal::{self, exact_interim_curve};
use ironing_core::payments::{exact_payment, exact_payments, oracle_payment, run_mechanism, DEFAULT_T_MAX};
use ironing_core::{Algorithm, Allocation, DiscreteDistribution, Error, ProductPrior, RandomStream};

/// Mean and standard error of the interim payment `1{served} * payment` for
/// agent `i` at value `v`.
fn interim_mean(alg: &dyn Algorithm, prior: &ProductPrior, i: usize, v: f64, trials: u64, seed: u64) -> (f64, f64) {
    let mut rng = RandomStream::new(seed);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..trials {
        let mut profile = prior.sample_profile(&mut rng);
        profile[i] = v;
        let served = alg.allocate(&profile, &mut rng).unwrap().served(i);
        let s = oracle_payment(alg, prior, &profile, i, &mut rng, DEFAULT_T_MAX).unwrap();
        let p = if served { s.payment } else { 0.0 };
        sum += p;
        sq += p * p;
    }
    let t = trials as f64;
    let mean = sum / t;
    (mean, ((sq / t - mean * mean) / t).max(0.0).sqrt())
}

#[test]
fn serving_everyone_is_free() {
    let prior = ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 5.0]).unwrap(), 2);
    let alg = ConstantAlgorithm::serve_all(2);
    let mut rng = RandomStream::new(0);
    for _ in 0..100 {
        let s = oracle_payment(&alg, &prior, &[5.0, 1.0], 0, &mut rng, DEFAULT_T_MAX).unwrap();
        assert_eq!(s.payment, 0.0);
        assert_eq!(s.calls, 2);
    }
}

#[test]
fn posted_price_charges_the_price() {
    let prior = ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap(), 1);
    // on a grid the threshold payment is the lowest served atom
    let alg = PostedPrice::new(vec![3.5]);
    let curve = exact_interim_curve(&alg, &prior, 0).unwrap();
    let exact = exact_payment(&curve, prior.agent(0), 7.0).unwrap();
    assert_eq!(exact, 4.0);
    let (mean, se) = interim_mean(&alg, &prior, 0, 7.0, 100_000, 3);
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn ironed_worst_case_table_payment_at_100() {
    let (prior, table) = algorithms::two_bidder_worst_case();
    let out = ideal::ideal_ironed_algorithm(Arc::new(table), prior.clone()).unwrap();
    let curve = exact_interim_curve(out.algorithm.as_ref(), &prior, 0).unwrap();
    let exact = exact_payment(&curve, prior.agent(0), 100.0).unwrap();
    let (mean, se) = interim_mean(out.algorithm.as_ref(), &prior, 0, 100.0, 100_000, 8);
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn exact_payments_match_pointwise_formula() {
    let d = DiscreteDistribution::uniform(&[1.0, 2.0, 4.0]).unwrap();
    let c = ironing_core::InterimCurve::on_grid(0, &d, &[0.2, 0.5, 1.0]);
    let all = exact_payments(&c);
    for (j, &v) in d.values().iter().enumerate() {
        assert_eq!(all[j], exact_payment(&c, &d, v).unwrap());
    }
    // 4*1 - (0.2*1 + 0.2*1 + 0.5*2)
    assert!((all[2] - 2.6).abs() < 1e-12);
}

#[test]
fn unserviceable_value_hits_the_cap() {
    let prior = ProductPrior::iid(DiscreteDistribution::uniform(&[1.0, 2.0]).unwrap(), 1);
    // served only at the lowest value, so the rerun at 2 never succeeds
    let alg = FnAlgorithm::new(1, "low-only", |v: &[f64]| {
        if v[0] < 1.5 {
            Allocation::full(1)
        } else {
            Allocation::empty(1)
        }
    });
    let mut rng = RandomStream::new(0);
    let r = (0..50).find_map(|_| oracle_payment(&alg, &prior, &[2.0], 0, &mut rng, 1000).err());
    assert!(matches!(r, Some(Error::IterationCapExceeded { agent: 0, cap: 1000 })));
}

#[test]
fn mechanism_runs_are_reproducible_and_rational() {
    let (prior, table) = algorithms::joint_service_example();
    let mut a = RandomStream::new(12);
    let mut b = RandomStream::new(12);
    for _ in 0..2000 {
        let profile = prior.sample_profile(&mut a);
        let _ = prior.sample_profile(&mut b);
        let x = run_mechanism(&table, &prior, &profile, &mut a, DEFAULT_T_MAX).unwrap();
        let y = run_mechanism(&table, &prior, &profile, &mut b, DEFAULT_T_MAX).unwrap();
        assert_eq!(x, y);
        for i in 0..prior.n() {
            assert!(x.payments[i] <= profile[i]);
            if !x.allocation.served(i) {
                assert_eq!(x.payments[i], 0.0);
                assert_eq!(x.payment_calls[i], 0);
            }
        }
    }
}
