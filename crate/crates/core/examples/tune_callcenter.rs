//! Random search plus hill climb for the call-center generator's default coefficients.
//!
//! Every candidate is scored by how many of 200 seeds land all five fitted
//! leakages inside their target windows; the winner (and its result at the
//! default seed) is printed.
//!
//!     cargo run --release -p leakage-core --example tune_callcenter

use leakage_core::predictive::{seeded_rng, DEFAULT_SEED};
use rand::Rng;
use leakage_core::simulation::{callcenter_leakage, gen_callcenter_like, CallCenterConfig, CallCenterLeakage};

const SEEDS: u64 = 200;
const QUICK_SEEDS: u64 = 40;
const CANDIDATES: usize = 20_000;
const CLIMB_STEPS: usize = 1_500;

fn in_windows(l: &CallCenterLeakage) -> bool {
    (0.25..=0.50).contains(&l.median_a)
        && (0.005..=0.06).contains(&l.median_b)
        && l.minimum_a >= 0.80
        && (0.35..=0.65).contains(&l.minimum_b)
        && (0.07..=0.15).contains(&l.null_model)
}

fn score(base: &CallCenterConfig) -> usize {
    score_on(base, 0..SEEDS)
}

fn score_on(base: &CallCenterConfig, seeds: std::ops::Range<u64>) -> usize {
    seeds
        .filter(|&seed| {
            let cfg = CallCenterConfig { seed, ..base.clone() };
            gen_callcenter_like(&cfg)
                .and_then(|d| callcenter_leakage(&d, cfg.y_floor))
                .map(|l| in_windows(&l))
                .unwrap_or(false)
        })
        .count()
}

/// Per-window pass rates and mean leakages of one candidate.
fn describe(base: &CallCenterConfig) {
    let mut sums = [0.0; 5];
    let mut hits = [0usize; 5];
    for seed in 0..SEEDS {
        let cfg = CallCenterConfig { seed, ..base.clone() };
        let l = callcenter_leakage(&gen_callcenter_like(&cfg).expect("valid config"), cfg.y_floor).expect("fit");
        let v = [l.median_a, l.median_b, l.minimum_a, l.minimum_b, l.null_model];
        let ok = [
            (0.25..=0.50).contains(&l.median_a),
            (0.005..=0.06).contains(&l.median_b),
            l.minimum_a >= 0.80,
            (0.35..=0.65).contains(&l.minimum_b),
            (0.07..=0.15).contains(&l.null_model),
        ];
        for k in 0..5 {
            sums[k] += v[k];
            hits[k] += usize::from(ok[k]);
        }
    }
    let names = ["median A", "median B", "minimum A", "minimum B", "null"];
    for k in 0..5 {
        println!("{:>10}: mean {:.4}  in window {}/{SEEDS}", names[k], sums[k] / SEEDS as f64, hits[k]);
    }
    println!("all windows: {}/{SEEDS}", score(base));
}

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    if let [intercept, calls_effect, absentee_effect, location_b_offset, calls_log_sd, absentee_log_sd] = args[..] {
        describe(&CallCenterConfig {
            intercept,
            calls_effect,
            absentee_effect,
            location_b_offset,
            calls_log_sd,
            absentee_log_sd,
            ..CallCenterConfig::default()
        });
        return;
    }
    // Random search scored on a quick seed subset, then rescored in full.
    let mut rng = seeded_rng(DEFAULT_SEED);
    let mut shortlist: Vec<(usize, CallCenterConfig)> = Vec::new();
    for _ in 0..CANDIDATES {
        let cfg = CallCenterConfig {
            intercept: rng.random_range(-9.0..-2.0),
            calls_effect: rng.random_range(0.0003..0.005),
            absentee_effect: rng.random_range(0.05..1.0),
            location_b_offset: rng.random_range(1.5..6.0),
            calls_log_sd: rng.random_range(0.05..0.5),
            absentee_log_sd: rng.random_range(0.05..0.5),
            ..CallCenterConfig::default()
        };
        let s = score_on(&cfg, 0..QUICK_SEEDS);
        shortlist.push((s, cfg));
    }
    shortlist.sort_by(|a, b| b.0.cmp(&a.0));
    shortlist.truncate(20);
    let mut best: Option<(usize, CallCenterConfig)> = None;
    for (_, cfg) in shortlist {
        let s = score(&cfg);
        eprintln!("{s:>3}/{SEEDS} {:.3} {:.5} {:.3} {:.3} {:.3} {:.3}", cfg.intercept, cfg.calls_effect, cfg.absentee_effect, cfg.location_b_offset, cfg.calls_log_sd, cfg.absentee_log_sd);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, cfg));
        }
    }
    // Hill climb from the best shortlisted candidate.
    let (mut best_score, mut best_cfg) = best.expect("nonempty shortlist");
    for step in 0..CLIMB_STEPS {
        let shrink = 1.0 - step as f64 / CLIMB_STEPS as f64;
        let mut jitter = |v: f64, rel: f64| v * (1.0 + rel * shrink * rng.random_range(-1.0..1.0));
        let cfg = CallCenterConfig {
            intercept: jitter(best_cfg.intercept, 0.1),
            calls_effect: jitter(best_cfg.calls_effect, 0.1),
            absentee_effect: jitter(best_cfg.absentee_effect, 0.1),
            location_b_offset: jitter(best_cfg.location_b_offset, 0.1),
            calls_log_sd: jitter(best_cfg.calls_log_sd, 0.1),
            absentee_log_sd: jitter(best_cfg.absentee_log_sd, 0.1),
            ..best_cfg.clone()
        };
        let s = score(&cfg);
        if s > best_score {
            eprintln!("step {step}: {s}/{SEEDS}");
            best_score = s;
            best_cfg = cfg;
        }
    }
    let (s, cfg) = (best_score, best_cfg);
    let data = gen_callcenter_like(&CallCenterConfig { seed: DEFAULT_SEED, ..cfg.clone() }).expect("valid config");
    println!("best: {s}/{SEEDS} seeds inside all windows");
    println!("{cfg:#?}");
    println!("{:#?}", callcenter_leakage(&data, cfg.y_floor).expect("fit"));
}
