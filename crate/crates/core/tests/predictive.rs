use std::f64::consts::PI;

use leakage_core::predictive::{mixture_predictive, PosteriorEnsemble, PredictiveDistribution};
use leakage_core::quadrature::integrate_with_breaks;
use leakage_core::special::{ks_critical_5pct, ks_statistic};
use leakage_core::{Error, Kind};
use proptest::prelude::*;

fn t2_cdf(t: f64) -> f64 {
    0.5 + t / (2.0 * (2.0 + t * t).sqrt())
}

fn cauchy_cdf(t: f64) -> f64 {
    0.5 + t.atan() / PI
}

fn continuous_family() -> impl Strategy<Value = PredictiveDistribution> {
    prop_oneof![
        (-50.0..50.0f64, 0.01..20.0f64).prop_map(|(m, s)| PredictiveDistribution::normal(m, s).unwrap()),
        (0.5..200.0f64, -50.0..50.0f64, 0.01..20.0f64)
            .prop_map(|(df, m, s)| PredictiveDistribution::student_t(df, m, s).unwrap()),
        (-3.0..3.0f64, 0.2..3.0f64, -2.0..0.5f64)
            .prop_map(|(m, s, lo)| PredictiveDistribution::truncated_normal(m, s, lo, lo + 4.0).unwrap()),
    ]
}

#[test]
fn student_t_matches_closed_forms() {
    let t2 = PredictiveDistribution::student_t(2.0, 0.0, 1.0).unwrap();
    let t1 = PredictiveDistribution::student_t(1.0, 0.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let t = -10.0 + 20.0 * i as f64 / 999.0;
        worst = worst.max((t2.cdf(t) - t2_cdf(t)).abs());
        worst = worst.max((t1.cdf(t) - cauchy_cdf(t)).abs());
    }
    assert!(worst <= 1e-10, "max error {worst}");
}

#[test]
fn poisson_examples() {
    let p = PredictiveDistribution::poisson(2.0).unwrap();
    let cdf4 = 7.0 * (-2.0f64).exp();
    assert!((p.cdf(4.0) - cdf4).abs() < 1e-14);
    assert_eq!(p.quantile(p.cdf(4.0)).unwrap(), 4.0);
    assert_eq!(p.quantile(0.947346).unwrap(), 4.0);
    assert_eq!(p.quantile(0.947348).unwrap(), 5.0);
    let total: f64 = (0..200).map(|k| p.density(f64::from(k))).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn quantile_rejects_boundaries() {
    let n = PredictiveDistribution::normal(0.0, 1.0).unwrap();
    assert_eq!(n.quantile(0.0).unwrap_err(), Error::ProbabilityOutOfRange(0.0));
    assert_eq!(n.quantile(1.0).unwrap_err(), Error::ProbabilityOutOfRange(1.0));
    assert!(n.quantile(f64::NAN).is_err());
}

#[test]
fn invalid_parameters() {
    assert!(PredictiveDistribution::normal(0.0, 0.0).is_err());
    assert!(PredictiveDistribution::student_t(0.0, 0.0, 1.0).is_err());
    assert!(PredictiveDistribution::student_t(1.0, 0.0, -1.0).is_err());
    assert!(PredictiveDistribution::poisson(-1.0).is_err());
    assert!(PredictiveDistribution::empirical(vec![]).is_err());
    assert_eq!(PredictiveDistribution::mixture(vec![]).unwrap_err(), Error::EmptyEnsemble);
    let mixed = PredictiveDistribution::mixture(vec![
        (0.5, PredictiveDistribution::normal(0.0, 1.0).unwrap()),
        (0.5, PredictiveDistribution::poisson(1.0).unwrap()),
    ]);
    assert_eq!(mixed.unwrap_err(), Error::MixedKinds);
}

#[test]
fn mixture_of_normals_example() {
    let m = PredictiveDistribution::mixture(vec![
        (0.3, PredictiveDistribution::normal(-1.0, 1.0).unwrap()),
        (0.7, PredictiveDistribution::normal(1.0, 1.0).unwrap()),
    ])
    .unwrap();
    let phi = |z: f64| 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
    let expected = 0.3 * phi(1.0) + 0.7 * phi(-1.0);
    assert!((m.cdf(0.0) - expected).abs() < 1e-12);
}

#[test]
fn ensemble_mixture_of_normal_kernels() {
    let ensemble = PosteriorEnsemble::uniform(vec![vec![0.0], vec![2.0], vec![4.0]]).unwrap();
    let m = mixture_predictive(&ensemble, |theta| PredictiveDistribution::normal(theta[0], 1.0)).unwrap();
    assert_eq!(m.kind(), Kind::Continuous);
    assert!((m.mean().unwrap() - 2.0).abs() < 1e-12);
    assert!((m.cdf(2.0) - 0.5).abs() < 1e-12);
}

#[test]
fn sampling_matches_cdf() {
    let cases = [
        PredictiveDistribution::normal(1.0, 2.0).unwrap(),
        PredictiveDistribution::student_t(3.0, -1.0, 0.5).unwrap(),
        PredictiveDistribution::student_t(1.0, 0.0, 1.0).unwrap(),
        PredictiveDistribution::truncated_normal(0.0, 1.0, 0.0, f64::INFINITY).unwrap(),
        PredictiveDistribution::mixture(vec![
            (0.3, PredictiveDistribution::normal(-1.0, 1.0).unwrap()),
            (0.7, PredictiveDistribution::normal(1.0, 1.0).unwrap()),
        ])
        .unwrap(),
    ];
    let n = 10_000;
    for (seed, d) in cases.iter().enumerate() {
        let sample = d.sample(n, seed as u64);
        let ks = ks_statistic(&sample, |y| d.cdf(y));
        assert!(ks < ks_critical_5pct(n), "{d:?}: KS {ks}");
    }
}

#[test]
fn sampling_is_deterministic() {
    let d = PredictiveDistribution::student_t(4.0, 0.0, 1.0).unwrap();
    assert_eq!(d.sample(100, 7), d.sample(100, 7));
    assert_ne!(d.sample(100, 7), d.sample(100, 8));
}

proptest! {
    #[test]
    fn cdf_is_monotone_with_limits(d in continuous_family(), a in -100.0..100.0f64, b in -100.0..100.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(d.cdf(lo) <= d.cdf(hi));
        prop_assert_eq!(d.cdf(f64::NEG_INFINITY), 0.0);
        prop_assert_eq!(d.cdf(f64::INFINITY), 1.0);
        prop_assert!(d.density(lo) >= 0.0);
    }

    #[test]
    fn quantile_round_trips(d in continuous_family(), p in 1e-6..(1.0 - 1e-6)) {
        let q = d.quantile(p).unwrap();
        prop_assert!((d.cdf(q) - p).abs() <= 1e-10, "cdf(q) = {} for p = {}", d.cdf(q), p);
    }

    #[test]
    fn t_oracles_hold_at_random_points(t in -1e3..1e3f64, loc in -5.0..5.0f64, scale in 0.1..10.0f64) {
        let z = (t - loc) / scale;
        let t2 = PredictiveDistribution::student_t(2.0, loc, scale).unwrap();
        let t1 = PredictiveDistribution::student_t(1.0, loc, scale).unwrap();
        prop_assert!((t2.cdf(t) - t2_cdf(z)).abs() <= 1e-10);
        prop_assert!((t1.cdf(t) - cauchy_cdf(z)).abs() <= 1e-10);
    }

    #[test]
    fn mixture_is_linear(
        w in 0.01..0.99f64,
        a in continuous_family(),
        b in continuous_family(),
        y in -60.0..60.0f64,
    ) {
        let m = PredictiveDistribution::mixture(vec![(w, a.clone()), (1.0 - w, b.clone())]).unwrap();
        prop_assert!((m.cdf(y) - (w * a.cdf(y) + (1.0 - w) * b.cdf(y))).abs() <= 1e-12);
        prop_assert!((m.density(y) - (w * a.density(y) + (1.0 - w) * b.density(y))).abs() <= 1e-12 * (1.0 + m.density(y)));
    }

    #[test]
    fn densities_integrate_to_one(d in continuous_family()) {
        let (lo, hi) = d.support();
        let breaks: Vec<f64> = [1e-6, 0.5, 1.0 - 1e-6].iter().map(|&p| d.quantile(p).unwrap()).collect();
        let q = integrate_with_breaks(|y| d.density(y), lo, hi, &breaks, 1e-10);
        prop_assert!((q.value - 1.0).abs() <= 1e-6, "mass {}", q.value);
    }

    #[test]
    fn poisson_pmf_sums_to_one(rate in 0.01..500.0f64) {
        let p = PredictiveDistribution::poisson(rate).unwrap();
        let top = (rate + 40.0 * rate.sqrt() + 50.0) as i64;
        let total: f64 = (0..=top).map(|k| p.density(k as f64)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        prop_assert!(p.cdf(rate.floor()) <= p.cdf(rate.floor() + 1.0));
    }

    #[test]
    fn discrete_quantile_is_generalized_inverse(rate in 0.1..50.0f64, p in 1e-6..(1.0 - 1e-6)) {
        let d = PredictiveDistribution::poisson(rate).unwrap();
        let q = d.quantile(p).unwrap();
        prop_assert!(d.cdf(q) >= p);
        prop_assert!(q == 0.0 || d.cdf(q - 1.0) < p);
    }
}
