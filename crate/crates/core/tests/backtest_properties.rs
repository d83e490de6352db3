use cdm_core::backtest::{gap_stats, run_backtest, select_combination, BacktestConfig};
use cdm_core::estimators::{Estimator, EstimatorKind};
use cdm_core::ingest::GameSpec;
use cdm_core::synth::synth_history;
use proptest::prelude::*;

fn choose(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// P(exactly m matches) between a fixed M-subset and a uniform M-subset of K.
fn hypergeometric(k: u64, big_m: u64, m: u64) -> f64 {
    choose(big_m, m) * choose(k - big_m, big_m - m) / choose(k, big_m)
}

proptest! {
    #[test]
    fn gaps_rebuild_hit_indices(mut hits in prop::collection::btree_set(0usize..100_000, 0..50)) {
        let hits: Vec<usize> = std::mem::take(&mut hits).into_iter().collect();
        let summary = gap_stats(&hits).unwrap();
        prop_assert_eq!(summary.count, hits.len());
        if let Some(&first) = hits.first() {
            let mut rebuilt = vec![first];
            for g in &summary.gaps {
                rebuilt.push(rebuilt.last().unwrap() + *g as usize);
            }
            prop_assert_eq!(rebuilt, hits);
        }
    }

    #[test]
    fn selection_ignores_positive_rescaling(
        scores in prop::collection::vec(0.0f64..10.0, 20),
        c in 0.01f64..100.0,
    ) {
        let spec = GameSpec::set_draw(20, 5).unwrap();
        let scaled: Vec<f64> = scores.iter().map(|s| s * c).collect();
        prop_assert_eq!(
            select_combination(&[scores], &spec).unwrap().numbers,
            select_combination(&[scaled], &spec).unwrap().numbers
        );
    }

    #[test]
    fn selection_rescaling_positional(
        scores in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 10), 3),
        c in 0.01f64..100.0,
    ) {
        let spec = GameSpec::pick(3).unwrap();
        let scaled: Vec<Vec<f64>> = scores.iter().map(|v| v.iter().map(|s| s * c).collect()).collect();
        prop_assert_eq!(
            select_combination(&scores, &spec).unwrap().numbers,
            select_combination(&scaled, &spec).unwrap().numbers
        );
    }
}

#[test]
fn backtest_is_deterministic() {
    let spec = GameSpec::set_draw(52, 6).unwrap();
    let history = synth_history(&spec, 1_500, 2024).unwrap();
    for kind in [EstimatorKind::Mom, EstimatorKind::MainDiagonal] {
        let config = BacktestConfig {
            hit_threshold: 2,
            ..BacktestConfig::new(&spec, Estimator::new(kind))
        };
        assert_eq!(
            run_backtest(&history, &config).unwrap(),
            run_backtest(&history, &config).unwrap()
        );
    }
}

#[test]
fn match_distribution_on_noise_is_hypergeometric() {
    // 3σ per tier on a small game, every tier of the histogram.
    let spec = GameSpec::set_draw(20, 4).unwrap();
    let history = synth_history(&spec, 6_000, 77).unwrap();
    let config = BacktestConfig {
        hit_threshold: 1,
        ..BacktestConfig::new(&spec, Estimator::new(EstimatorKind::Mom))
    };
    let r = run_backtest(&history, &config).unwrap();
    let trials = r.draws.len() as f64;
    for (m, &observed) in r.tier_histogram.iter().enumerate() {
        let p = hypergeometric(20, 4, m as u64);
        let sd = (trials * p * (1.0 - p)).sqrt();
        assert!(
            (observed as f64 - trials * p).abs() <= 3.0 * sd + 1e-9,
            "tier {m}: observed {observed}, expected {:.1} ± {:.1}",
            trials * p,
            sd
        );
    }
}

#[test]
fn digit_game_backtest_runs() {
    let spec = GameSpec::pick(3).unwrap();
    let history = synth_history(&spec, 600, 3).unwrap();
    let config = BacktestConfig {
        hit_threshold: 1,
        ..BacktestConfig::new(&spec, Estimator::new(EstimatorKind::MainDiagonal))
    };
    let r = run_backtest(&history, &config).unwrap();
    assert_eq!(r.draws.len(), 590);
    assert!(r
        .draws
        .iter()
        .all(|d| d.prediction.len() == 3 && d.prediction.iter().all(|&x| x < 10)));
    // P(at least one of three positions matches) = 1 - 0.9³.
    let rate = r.hit_count as f64 / r.draws.len() as f64;
    let p = 1.0 - 0.9f64.powi(3);
    let sd = (p * (1.0 - p) / r.draws.len() as f64).sqrt();
    assert!((rate - p).abs() < 3.0 * sd, "rate {rate}");
}
