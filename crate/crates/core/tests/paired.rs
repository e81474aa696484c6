use mimo_rfsel::allocation::CircuitBudget;
use mimo_rfsel::channel::{draw_drop, trial_rng, DropParams};
use mimo_rfsel::selection::{greedy_select, random_select, GreedyOptions};

/// Per trial, greedy at its chosen chain count beats a random subset of the
/// same size on the same realization in at least 95% of trials.
#[test]
fn greedy_dominates_random_per_trial() {
    let params = DropParams {
        users: 4,
        antennas: 14,
        alpha: 3.7,
        cell_radius: 500.0,
        min_distance: 35.0,
    };
    let budget = CircuitBudget::new(1.0, 0.05).unwrap();
    let trials = 200;
    let mut wins = 0;
    for t in 0..trials {
        let mut rng = trial_rng(99, t);
        let drop = draw_drop(&params, &mut rng).unwrap();
        let g = greedy_select(&drop.channel, &budget, &GreedyOptions::default()).unwrap();
        let r = random_select(&drop.channel, &budget, g.chains, &mut rng).unwrap();
        if g.rate >= r.rate {
            wins += 1;
        }
    }
    assert!(wins as f64 >= 0.95 * trials as f64, "{wins}/{trials}");
}
