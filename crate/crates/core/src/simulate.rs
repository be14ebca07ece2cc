//! Seeded Monte-Carlo play of the repeated game.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded from a `u64`
//! through `SeedableRng::seed_from_u64`. Results are reproducible for a
//! fixed build, seed and initial condition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, ZdError};
use crate::game::GameSpec;
use crate::history::HistoryLayout;
use crate::markov::{check_players, Method, StationaryDistribution};
use crate::strategy::Strategy;

pub const RNG_ALGORITHM: &str = "ChaCha8";

/// How the first `n` joint states are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialCondition {
    /// Every player's action drawn uniformly and independently.
    Uniform,
    /// Joint-state indices in chronological order, oldest first.
    Fixed(Vec<usize>),
}

impl InitialCondition {
    pub fn describe(&self, layout: &HistoryLayout) -> String {
        match self {
            InitialCondition::Uniform => "uniform".to_string(),
            InitialCondition::Fixed(states) => {
                let labels: Vec<String> = states.iter().map(|&s| layout.states().label(s)).collect();
                format!("fixed[{}]", labels.join(" "))
            }
        }
    }
}

/// Running time averages up to the horizon `t`.
///
/// `avg_payoffs[a] = Σ_{t'=1..t} s_a(σ(t'))/t` and
/// `lagged_products[a][b] = Σ_{t'=1..t} s_a(σ(t')) s_b(σ(t'−1))/t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub horizon: u64,
    pub seed: u64,
    pub rng: &'static str,
    pub init: String,
    pub avg_payoffs: Vec<f64>,
    pub lagged_products: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub stats: TrajectoryStats,
    /// Visit frequencies of the length-`n` windows ending at rounds
    /// `max(1, n−1)..=t`; usable wherever a stationary distribution is.
    pub empirical: StationaryDistribution,
}

fn sample(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `u` above the cumulative sum: take the last action with
    // positive weight.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Plays rounds `0..=horizon`; rounds `0..n` come from `init`.
pub fn simulate(
    strategies: &[Strategy],
    game: &GameSpec,
    horizon: u64,
    seed: u64,
    init: &InitialCondition,
) -> Result<Trajectory> {
    check_players(strategies, game)?;
    let layout = *strategies[0].layout();
    if strategies.iter().any(|s| s.memory() != layout.memory()) {
        return Err(ZdError::domain("all strategies must share one memory length"));
    }
    let n = layout.memory();
    if horizon < 2 || horizon < n as u64 {
        return Err(ZdError::domain(format!(
            "horizon {horizon} is shorter than max(2, memory {n})"
        )));
    }
    let states = layout.states();
    let n_players = game.n_players();
    if let InitialCondition::Fixed(init_states) = init {
        if init_states.len() != n {
            return Err(ZdError::domain(format!(
                "initial condition has {} states, expected {}",
                init_states.len(),
                n
            )));
        }
        if init_states.iter().any(|&s| s >= states.state_count()) {
            return Err(ZdError::domain("initial joint state out of range"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history = 0usize;
    let mut prev_state = 0usize;
    let mut payoff_sums = vec![0.0; n_players];
    let mut product_sums = vec![vec![0.0; n_players]; n_players];
    let mut counts = vec![0u64; layout.history_count()];
    let first_window = (n as u64).saturating_sub(1).max(1);
    let mut actions = vec![0usize; n_players];

    for t in 0..=horizon {
        let state = if (t as usize) < n {
            match init {
                InitialCondition::Uniform => {
                    for a in actions.iter_mut() {
                        *a = rng.gen_range(0..states.n_actions());
                    }
                    states.state_from_digits(&actions)
                }
                InitialCondition::Fixed(s) => s[t as usize],
            }
        } else {
            for (a, strategy) in strategies.iter().enumerate() {
                actions[a] = sample(&mut rng, strategy.row(history));
            }
            states.state_from_digits(&actions)
        };
        history = layout.successor(history, state);
        if t >= 1 {
            for a in 0..n_players {
                let sa = game.payoff(a, state);
                payoff_sums[a] += sa;
                for (b, sum) in product_sums[a].iter_mut().enumerate() {
                    *sum += sa * game.payoff(b, prev_state);
                }
            }
        }
        if t >= first_window {
            counts[history] += 1;
        }
        prev_state = state;
    }

    let tf = horizon as f64;
    let windows = (horizon - first_window + 1) as f64;
    let weights = counts.iter().map(|&c| c as f64 / windows).collect();
    Ok(Trajectory {
        stats: TrajectoryStats {
            horizon,
            seed,
            rng: RNG_ALGORITHM,
            init: init.describe(&layout),
            avg_payoffs: payoff_sums.iter().map(|x| x / tf).collect(),
            lagged_products: product_sums
                .iter()
                .map(|row| row.iter().map(|x| x / tf).collect())
                .collect(),
        },
        empirical: StationaryDistribution::from_weights(layout, weights, Method::Empirical)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PdGame;

    fn constant(player: usize, p: f64, memory: usize) -> Strategy {
        let h = HistoryLayout::new(2, 2, memory).unwrap().history_count();
        Strategy::from_cooperation(player, 2, memory, &vec![p; h]).unwrap()
    }

    #[test]
    fn alld_pair_averages_to_punishment() {
        let game = PdGame::standard().game();
        let pair = [constant(0, 0.0, 2), constant(1, 0.0, 2)];
        for seed in [0, 1, 99] {
            let t = 1000;
            let traj = simulate(&pair, &game, t, seed, &InitialCondition::Uniform).unwrap();
            for a in 0..2 {
                assert!((traj.stats.avg_payoffs[a] - 1.0).abs() <= 2.0 * 5.0 / t as f64);
            }
        }
        let traj = simulate(&pair, &game, 1000, 5, &InitialCondition::Fixed(vec![3, 3])).unwrap();
        assert_eq!(traj.stats.avg_payoffs, vec![1.0, 1.0]);
        assert_eq!(traj.stats.lagged_products[0][1], 1.0);
        assert_eq!(traj.empirical.weights()[15], 1.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let game = PdGame::standard().game();
        let pair = [constant(0, 0.3, 2), constant(1, 0.6, 2)];
        let a = simulate(&pair, &game, 5000, 42, &InitialCondition::Uniform).unwrap();
        let b = simulate(&pair, &game, 5000, 42, &InitialCondition::Uniform).unwrap();
        assert_eq!(a, b);
        let c = simulate(&pair, &game, 5000, 43, &InitialCondition::Uniform).unwrap();
        assert_ne!(a.stats, c.stats);
    }

    #[test]
    fn rejects_short_horizon_and_bad_init() {
        let game = PdGame::standard().game();
        let triple: Vec<_> = [constant(0, 0.3, 3), constant(1, 0.6, 3)].to_vec();
        assert!(simulate(&triple, &game, 2, 0, &InitialCondition::Uniform).is_err());
        assert!(simulate(&triple, &game, 3, 0, &InitialCondition::Uniform).is_ok());
        assert!(simulate(&triple, &game, 10, 0, &InitialCondition::Fixed(vec![0, 1])).is_err());
        assert!(simulate(&triple, &game, 10, 0, &InitialCondition::Fixed(vec![0, 1, 4])).is_err());
    }

    #[test]
    fn averages_stay_in_payoff_range() {
        let game = PdGame::standard().game();
        let pair = [constant(0, 0.5, 1), constant(1, 0.5, 1)];
        let traj = simulate(&pair, &game, 2000, 7, &InitialCondition::Uniform).unwrap();
        for a in 0..2 {
            assert!((0.0..=5.0).contains(&traj.stats.avg_payoffs[a]));
            for b in 0..2 {
                assert!((0.0..=25.0).contains(&traj.stats.lagged_products[a][b]));
            }
        }
    }
}
