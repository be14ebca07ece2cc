//! One point of a sweep over the opponent family: player 1 fixed, player 2
//! cooperating with probability `q` after mutual cooperation.

use serde::Serialize;

use crate::catalog::make_opponent_q;
use crate::error::{Result, ZdError};
use crate::game::GameSpec;
use crate::markov::{align_memory, build_kernel, stationary_exact, StationaryOutcome};
use crate::relation::{correlations, verify_relation, PayoffRelation};
use crate::simulate::{simulate, InitialCondition};
use crate::strategy::Strategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Exact,
    Mc,
}

pub const DEFAULT_HORIZON: u64 = 100_000;

/// How a sweep point is computed. `horizon` and `seed` drive mc mode and the
/// per-point fallback of exact mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSettings {
    pub mode: SweepMode,
    pub horizon: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointSource {
    Exact,
    Mc,
    /// Exact mode found several stationary distributions and simulated instead.
    McFallback,
}

impl PointSource {
    pub fn flag(self) -> &'static str {
        match self {
            PointSource::Exact => "exact",
            PointSource::Mc => "mc",
            PointSource::McFallback => "mc-fallback",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub q: f64,
    pub avg: [f64; 2],
    /// `corr[a][b] = ⟨s_a(t+1) s_b(t)⟩`.
    pub corr: [[f64; 2]; 2],
    pub relation_residual: Option<f64>,
    pub source: PointSource,
}

/// Plays `strategy` (player 1) against the `q` opponent in a two-player
/// two-action game. In mc mode the averages are trajectory time averages and
/// the relation is checked on the empirical window distribution.
pub fn sweep_point(
    strategy: &Strategy,
    game: &GameSpec,
    q: f64,
    relation: Option<&PayoffRelation>,
    settings: SweepSettings,
) -> Result<SweepPoint> {
    if game.n_players() != 2 || game.n_actions() != 2 {
        return Err(ZdError::domain("sweeps need a two-player two-action game"));
    }
    if strategy.player() != 0 {
        return Err(ZdError::domain("the swept strategy must belong to player 1"));
    }
    let pair = align_memory(&[strategy.clone(), make_opponent_q(q)?])?;
    let source = match settings.mode {
        SweepMode::Mc => PointSource::Mc,
        SweepMode::Exact => match stationary_exact(&build_kernel(&pair, game)?)? {
            StationaryOutcome::Unique(dist) => {
                let corr = correlations(&dist, game, 2)?;
                let at = |a: usize, b: usize| corr.get(&[a, b]).unwrap_or(0.0);
                let relation_residual = relation.map(|r| verify_relation(r, &corr)).transpose()?;
                return Ok(SweepPoint {
                    q,
                    avg: [at(1, 0), at(2, 0)],
                    corr: [[at(1, 1), at(1, 2)], [at(2, 1), at(2, 2)]],
                    relation_residual,
                    source: PointSource::Exact,
                });
            }
            StationaryOutcome::Multiple(_) => PointSource::McFallback,
        },
    };
    mc_point(&pair, game, q, relation, settings.horizon, settings.seed, source)
}

fn mc_point(
    pair: &[Strategy],
    game: &GameSpec,
    q: f64,
    relation: Option<&PayoffRelation>,
    horizon: u64,
    seed: u64,
    source: PointSource,
) -> Result<SweepPoint> {
    let traj = simulate(pair, game, horizon, seed, &InitialCondition::Uniform)?;
    let s = &traj.stats;
    let relation_residual = match relation {
        Some(r) => {
            let order = traj.empirical.memory().max(r.memory());
            Some(verify_relation(r, &correlations(&traj.empirical, game, order)?)?)
        }
        None => None,
    };
    Ok(SweepPoint {
        q,
        avg: [s.avg_payoffs[0], s.avg_payoffs[1]],
        corr: [
            [s.lagged_products[0][0], s.lagged_products[0][1]],
            [s.lagged_products[1][0], s.lagged_products[1][1]],
        ],
        relation_residual,
        source,
    })
}

/// `steps` evenly spaced points from `start` to `stop` inclusive.
pub fn q_grid(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(ZdError::domain("q grid is empty"));
    }
    for q in [start, stop] {
        if !(0.0..=1.0).contains(&q) {
            return Err(ZdError::domain(format!("q = {q} is not a probability")));
        }
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                stop
            } else {
                start + (stop - start) * i as f64 / last
            }
        })
        .collect())
}
