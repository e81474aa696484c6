use mimo_rfsel::allocation::{waterfill, waterfill_bisection};
use mimo_rfsel::channel::{draw_small_scale, trial_rng};
use mimo_rfsel::experiments::{run_trials, AggregateStats, Algorithm, ExperimentConfig};
use mimo_rfsel::precoder::build_gram;
use proptest::prelude::*;

fn gains_and_budget() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (prop::collection::vec(-3.0f64..3.0, 1..20), -2.0f64..2.0).prop_map(|(g, b)| {
        (
            g.into_iter().map(|e| 10f64.powf(e)).collect(),
            10f64.powf(b),
        )
    })
}

proptest! {
    #[test]
    fn waterfill_meets_budget_and_kkt((gains, budget) in gains_and_budget()) {
        let wf = waterfill(&gains, budget).unwrap();
        let total: f64 = wf.powers.iter().sum();
        prop_assert!((total - budget).abs() <= 1e-9 * budget);
        let mu = wf.water_level.unwrap();
        for (g, p) in gains.iter().zip(&wf.powers) {
            prop_assert!(*p >= 0.0);
            if *p > 0.0 {
                prop_assert!((p + 1.0 / g - mu).abs() <= 1e-9 * mu);
            } else {
                prop_assert!(1.0 / g >= mu * (1.0 - 1e-9));
            }
        }
        let bis = waterfill_bisection(&gains, budget).unwrap();
        for (a, b) in wf.powers.iter().zip(&bis.powers) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn waterfill_prefers_stronger_users((gains, budget) in gains_and_budget()) {
        let wf = waterfill(&gains, budget).unwrap();
        for i in 0..gains.len() {
            for j in 0..gains.len() {
                if gains[i] > gains[j] {
                    prop_assert!(wf.powers[i] >= wf.powers[j] - 1e-12);
                }
            }
        }
    }

    #[test]
    fn incremental_eta_matches_dense(k in 1usize..6, extra in 1usize..24, seed in any::<u64>()) {
        let n = k + extra;
        let ch = draw_small_scale(k, n, &mut trial_rng(seed, 0)).unwrap();
        let mut state = build_gram(&ch.h, &(0..k).collect::<Vec<_>>()).unwrap();
        for a in k..n {
            let predicted = state.eta_sq() - state.delta_eta_add(&ch.column(a));
            state.add_antenna(a, &ch.column(a)).unwrap();
            let dense = build_gram(&ch.h, &(0..=a).collect::<Vec<_>>()).unwrap().eta_sq();
            prop_assert!((state.eta_sq() - dense).abs() <= 1e-9 * dense);
            prop_assert!((predicted - dense).abs() <= 1e-9 * dense);
        }
    }
}

fn small_cfg(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        users: 2,
        antennas: 6,
        trials: 10,
        master_seed: seed,
        algorithms: vec![Algorithm::Greedy, Algorithm::Random, Algorithm::Analytic],
        ..Default::default()
    }
}

fn assert_close(a: &AggregateStats, b: &AggregateStats) {
    for (x, y) in a.rows().iter().zip(b.rows()) {
        assert_eq!(
            (x.algorithm, x.trials, x.skipped),
            (y.algorithm, y.trials, y.skipped)
        );
        for (u, v) in [
            (x.mean_rate, y.mean_rate),
            (x.stderr_rate, y.stderr_rate),
            (x.mean_chains, y.mean_chains),
            (x.mean_p_out, y.mean_p_out),
        ] {
            assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0), "{u} vs {v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn merge_is_commutative_and_associative(seed in any::<u64>(), cut1 in 1u64..5, cut2 in 5u64..9) {
        let cfg = small_cfg(seed);
        let a = run_trials(&cfg, 0..cut1).unwrap();
        let b = run_trials(&cfg, cut1..cut2).unwrap();
        let c = run_trials(&cfg, cut2..10).unwrap();
        assert_close(&a.merge(&b).unwrap(), &b.merge(&a).unwrap());
        let left = a.merge(&b).unwrap().merge(&c).unwrap();
        let right = a.merge(&b.merge(&c).unwrap()).unwrap();
        assert_close(&left, &right);
        assert_close(&left, &run_trials(&cfg, 0..10).unwrap());
    }
}

#[test]
fn halves_merge_to_full_run() {
    let mut cfg = small_cfg(3);
    cfg.trials = 100;
    let full = run_trials(&cfg, 0..100).unwrap();
    let halves = run_trials(&cfg, 0..50)
        .unwrap()
        .merge(&run_trials(&cfg, 50..100).unwrap())
        .unwrap();
    assert_close(&full, &halves);
}
