use leakage_core::evidence::{leakage, leakage_profile, Evidence};
use leakage_core::predictive::{seeded_rng, PredictiveDistribution};
use leakage_core::regression::{fit, fit_dataset, load_dataset, CovariatePoint, Dataset, Matrix, ModelSpec};
use leakage_core::Error;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

/// Solves the normal equations `XᵀX β = Xᵀy` by Gaussian elimination with
/// partial pivoting.
fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * yi;
        }
    }
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for r in col + 1..p {
            let f = a[r][col] / a[col][col];
            for c in col..=p {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| a[i][j] * beta[j]).sum();
        beta[i] = (a[i][p] - s) / a[i][i];
    }
    beta
}

fn hand_ols() -> Dataset {
    load_dataset("x,y\n0,0\n1,1\n2,3\n".as_bytes()).unwrap()
}

#[test]
fn hand_ols_leakage() {
    let fit = fit_dataset(&hand_ols(), &ModelSpec::new("y", ["x"])).unwrap();
    let d = fit.predictive_at(&[1.0, 1.0]).unwrap();
    let r = leakage(&d, &Evidence::at_least(0.0).unwrap());
    let oracle = 0.5 + (-2.0 * 2.0f64.sqrt()).atan() / std::f64::consts::PI;
    assert!((r.leakage - oracle).abs() < 1e-12);
    assert!((r.leakage - 0.10817).abs() < 1e-4);
}

#[test]
fn null_model_leakage() {
    let data = load_dataset("y\n1\n2\n3\n".as_bytes()).unwrap();
    let fit = fit_dataset(&data, &ModelSpec::null("y")).unwrap();
    let r = leakage(&fit.predictive_at(&[1.0]).unwrap(), &Evidence::at_least(0.0).unwrap());
    // t(2) at −√3: ½ − √3 / (2√5)
    let oracle = 0.5 - 3.0f64.sqrt() / (2.0 * 5.0f64.sqrt());
    assert!((r.leakage - oracle).abs() < 1e-12);
    assert!((r.leakage - 0.11270).abs() < 1e-4);
}

#[test]
fn profile_examples() {
    let fit = fit_dataset(&hand_ols(), &ModelSpec::new("y", ["x"])).unwrap();
    let e = Evidence::at_least(0.0).unwrap();
    let one = CovariatePoint::new().with("x", 1.0);
    let single = leakage_profile(&fit, &e, std::slice::from_ref(&one)).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].leakage, leakage(&fit.predictive_at_point(&one).unwrap(), &e).leakage);
    assert_eq!(single[0].x_star.as_ref(), Some(&one));

    let grid: Vec<_> = (0..=20).map(|i| CovariatePoint::new().with("x", -1.0 + 0.2 * f64::from(i))).collect();
    let profile = leakage_profile(&fit, &e, &grid).unwrap();
    assert!(profile.windows(2).all(|w| w[1].leakage <= w[0].leakage));

    let null = fit_dataset(&hand_ols(), &ModelSpec::null("y")).unwrap();
    let both = leakage_profile(&null, &e, &[CovariatePoint::new(), CovariatePoint::new().with("x", 9.0)]).unwrap();
    assert_eq!(both[0].leakage, both[1].leakage);

    let bad = [one.clone(), CovariatePoint::new().with("z", 1.0)];
    match leakage_profile(&fit, &e, &bad) {
        Err(Error::GridPoint { index, .. }) => assert_eq!(index, 1),
        other => panic!("expected grid error, got {other:?}"),
    }
}

#[test]
fn load_dataset_errors_name_rows() {
    assert_eq!(load_dataset("".as_bytes()).unwrap_err(), Error::MissingHeader);
    assert!(matches!(
        load_dataset("a,b\n1,2\n3\n".as_bytes()),
        Err(Error::RaggedRow { row: 3, .. })
    ));
    assert!(matches!(
        load_dataset("a,b\n1,\n".as_bytes()),
        Err(Error::MissingValue { row: 2, .. })
    ));
}

#[test]
fn predictive_interval_coverage() {
    let mut rng = seeded_rng(11);
    let beta = [1.0, -2.0, 0.5];
    let sigma = 1.5;
    let n = 15;
    let sims = 500;
    let mut covered = 0;
    for _ in 0..sims {
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let row = vec![1.0, rng.random_range(-2.0..2.0), rng.random_range(0.0..5.0)];
            let e: f64 = rng.sample(StandardNormal);
            y.push(row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + sigma * e);
            rows.push(row);
        }
        let f = fit(&Matrix::from_rows(&rows), &y).unwrap();
        let x_star = [1.0, rng.random_range(-3.0..3.0), rng.random_range(-1.0..6.0)];
        let e: f64 = rng.sample(StandardNormal);
        let y_new = x_star.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + sigma * e;
        let d = f.predictive_at(&x_star).unwrap();
        let (lo, hi) = (d.quantile(0.05).unwrap(), d.quantile(0.95).unwrap());
        if (lo..=hi).contains(&y_new) {
            covered += 1;
        }
    }
    let rate = f64::from(covered) / f64::from(sims);
    assert!((rate - 0.90).abs() <= 0.04, "coverage {rate}");
}

#[test]
fn categorical_fit_matches_group_means() {
    let data = load_dataset("y,g\n1,a\n3,a\n10,b\n14,b\n".as_bytes()).unwrap();
    let f = fit_dataset(&data, &ModelSpec::new("y", ["g"])).unwrap();
    assert!((f.beta_hat[0] - 2.0).abs() < 1e-12);
    assert!((f.beta_hat[1] - 10.0).abs() < 1e-12);
    let PredictiveDistribution::StudentT(t) = f.predictive_at_point(&CovariatePoint::new().with("g", "b")).unwrap()
    else {
        panic!("expected Student-t");
    };
    assert!((t.location() - 12.0).abs() < 1e-12);
}

#[test]
fn dataset_csv_round_trip() {
    let data = load_dataset("calls,location,y\n110,A,0.5\n2995,B,14.1\n1200,A,3\n".as_bytes()).unwrap();
    let text = data.to_csv_string().unwrap();
    assert_eq!(load_dataset(text.as_bytes()).unwrap(), data);
}

fn design() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (6usize..30, 1usize..4).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(prop::collection::vec(-10.0..10.0f64, k), n),
            prop::collection::vec(-50.0..50.0f64, n),
        )
            .prop_map(|(xs, y)| {
                let rows = xs
                    .into_iter()
                    .map(|r| std::iter::once(1.0).chain(r).collect())
                    .collect();
                (rows, y)
            })
    })
}

proptest! {
    #[test]
    fn residuals_are_orthogonal_to_columns((rows, y) in design()) {
        let x = Matrix::from_rows(&rows);
        let f = fit(&x, &y).unwrap();
        let fitted = x.mul_vec(&f.beta_hat);
        let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let g = x.tr_mul_vec(&resid);
        let scale: f64 = rows.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max)
            * y.iter().map(|v| v.abs()).fold(1.0, f64::max)
            * rows.len() as f64;
        prop_assert!(g.iter().all(|v| v.abs() <= 1e-10 * scale), "Xᵀr = {:?}", g);
    }

    #[test]
    fn qr_agrees_with_normal_equations((rows, y) in design()) {
        let f = fit(&Matrix::from_rows(&rows), &y).unwrap();
        let oracle = normal_equations(&rows, &y);
        for (a, b) in f.beta_hat.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn predictive_scale_grows_with_leverage((rows, y) in design(), far in 20.0..100.0f64) {
        let f = fit(&Matrix::from_rows(&rows), &y).unwrap();
        let p = rows[0].len();
        let centre: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64).collect();
        let mut away = centre.clone();
        away[p - 1] += far;
        prop_assert!(f.leverage(&away).unwrap() > f.leverage(&centre).unwrap());
    }
}
