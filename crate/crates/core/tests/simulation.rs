use std::time::Instant;

use leakage_core::calibration::default_levels;
use leakage_core::predictive::PredictiveDistribution;
use leakage_core::regression::load_dataset;
use leakage_core::simulation::{
    callcenter_leakage, gen_callcenter_like, gen_truncated_regression, impossibility_experiment, CallCenterConfig,
    SimConfig,
};
use leakage_core::special::{ks_critical_5pct, ks_statistic};
use leakage_core::Error;
use proptest::prelude::*;

#[test]
fn generators_round_trip_through_csv() {
    let cfg = SimConfig {
        n: 200,
        ..SimConfig::default_truncated()
    };
    let d = gen_truncated_regression(&cfg).unwrap();
    let text = d.to_csv_string().unwrap();
    assert!(text.starts_with("x1,y\n"));
    assert_eq!(load_dataset(text.as_bytes()).unwrap(), d);

    let c = gen_callcenter_like(&CallCenterConfig::default()).unwrap();
    let text = c.to_csv_string().unwrap();
    assert!(text.starts_with("abandonment,calls,absentees,location\n"));
    assert_eq!(load_dataset(text.as_bytes()).unwrap(), c);
}

#[test]
fn seeds_drive_everything() {
    let a = CallCenterConfig::default();
    let b = CallCenterConfig { seed: 7, ..a.clone() };
    assert_eq!(gen_callcenter_like(&a).unwrap(), gen_callcenter_like(&a).unwrap());
    assert_ne!(gen_callcenter_like(&a).unwrap(), gen_callcenter_like(&b).unwrap());
}

#[test]
fn truncated_sample_matches_analytic_cdf() {
    // A single-point covariate range makes every row share the same truth.
    let cfg = SimConfig {
        n: 10_000,
        coefficients: vec![0.3, 0.0],
        noise_sd: 1.2,
        support_lower: 0.0,
        covariate_ranges: vec![(0.0, 1.0)],
        seed: 99,
    };
    let ys = gen_truncated_regression(&cfg).unwrap().numeric("y").unwrap().to_vec();
    let truth = PredictiveDistribution::truncated_normal(0.3, 1.2, 0.0, f64::INFINITY).unwrap();
    let ks = ks_statistic(&ys, |y| truth.cdf(y));
    assert!(ks < ks_critical_5pct(ys.len()), "KS {ks}");
}

#[test]
fn untruncated_config_is_plain_normal_regression() {
    let cfg = SimConfig {
        n: 10_000,
        coefficients: vec![-1.0, 0.0],
        ..SimConfig::default_control()
    };
    let ys = gen_truncated_regression(&cfg).unwrap().numeric("y").unwrap().to_vec();
    assert!(ys.iter().any(|&y| y < 0.0));
    let truth = PredictiveDistribution::normal(-1.0, 1.0).unwrap();
    assert!(ks_statistic(&ys, |y| truth.cdf(y)) < ks_critical_5pct(ys.len()));
}

#[test]
fn invalid_configs_are_rejected() {
    let base = SimConfig::default_truncated();
    let cases = [
        SimConfig { n: 3, ..base.clone() },
        SimConfig { noise_sd: 0.0, ..base.clone() },
        SimConfig { covariate_ranges: vec![], coefficients: vec![1.0], ..base.clone() },
        SimConfig { coefficients: vec![1.0], ..base.clone() },
    ];
    for cfg in cases {
        assert!(gen_truncated_regression(&cfg).is_err(), "{cfg:?}");
    }
    let far = SimConfig { coefficients: vec![-50.0, 0.0], ..base };
    assert!(matches!(gen_truncated_regression(&far), Err(Error::Infeasible(_))));
}

#[test]
fn experiment_dichotomy() {
    let start = Instant::now();
    let levels = default_levels();
    let t = impossibility_experiment(&SimConfig::default_truncated(), &levels).unwrap();
    let c = impossibility_experiment(&SimConfig::default_control(), &levels).unwrap();
    let elapsed = start.elapsed();

    assert_eq!(t.n_holdout, 5_000);
    let l_min = t.leakage_min.unwrap();
    assert!(l_min > 0.05);
    assert_eq!(t.frequency_at_half_min, Some(0.0));
    assert_eq!(t.deviation_at_half_min, Some(0.5 * l_min));
    assert!(t.pit_uniformity_rejected());
    assert_eq!(t.empirical_cdf_below_bound, Some(0.0));
    assert!(t.marginal_gap_at_bound().unwrap() >= l_min - 0.01);
    assert!(t.mean_crps_truth < t.mean_crps_model.unwrap());

    assert!(!c.pit_uniformity_rejected());
    assert_eq!(c.leakage_min, None);
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
}

#[test]
fn callcenter_windows_at_default_seed() {
    let start = Instant::now();
    let cfg = CallCenterConfig::default();
    let l = callcenter_leakage(&gen_callcenter_like(&cfg).unwrap(), cfg.y_floor).unwrap();
    assert!((0.25..=0.50).contains(&l.median_a));
    assert!((0.005..=0.06).contains(&l.median_b));
    assert!(l.minimum_a >= 0.80);
    assert!((0.35..=0.65).contains(&l.minimum_b));
    assert!((0.07..=0.15).contains(&l.null_model));
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn draws_respect_bound_and_seed(
        seed in any::<u64>(),
        b0 in -3.0..3.0f64,
        b1 in -1.0..1.0f64,
        lower in -2.0..2.0f64,
        sd in 0.2..3.0f64,
    ) {
        let cfg = SimConfig {
            n: 50,
            coefficients: vec![b0, b1],
            noise_sd: sd,
            support_lower: lower,
            covariate_ranges: vec![(-2.0, 2.0)],
            seed,
        };
        let d = match gen_truncated_regression(&cfg) {
            Err(Error::Infeasible(_)) => return Err(TestCaseError::reject("no mass above the bound")),
            other => other.unwrap(),
        };
        prop_assert!(d.numeric("y").unwrap().iter().all(|&y| y >= lower));
        prop_assert!(d.numeric("x1").unwrap().iter().all(|&x| (-2.0..2.0).contains(&x)));
        prop_assert_eq!(d, gen_truncated_regression(&cfg).unwrap());
    }

    #[test]
    fn callcenter_ranges_hold_for_any_seed(seed in any::<u64>()) {
        let cfg = CallCenterConfig { seed, ..CallCenterConfig::default() };
        let d = gen_callcenter_like(&cfg).unwrap();
        let calls = d.numeric("calls").unwrap();
        let absent = d.numeric("absentees").unwrap();
        prop_assert_eq!(d.n_rows(), 104);
        prop_assert_eq!(calls.iter().copied().fold(f64::INFINITY, f64::min), 110.0);
        prop_assert_eq!(calls.iter().copied().fold(0.0, f64::max), 2995.0);
        prop_assert_eq!(absent.iter().copied().fold(f64::INFINITY, f64::min), 1.0);
        prop_assert_eq!(absent.iter().copied().fold(0.0, f64::max), 14.0);
        prop_assert!(d.numeric("abandonment").unwrap().iter().all(|&y| y >= 0.0));
    }
}
