//! Whether a target relation can be enforced by a two-action strategy.
//!
//! For two actions `T̂(2|h) = −T̂(1|h)`, so a relation with payoff expansion
//! `V(h)` is enforced exactly by the strategies with `T̂(1|h) = k·V(h)` for a
//! scale `k ≠ 0`. Each history confines `k` to an interval containing 0:
//! `k·V(h) ∈ [−1, 0]` if the player's own last action was 1, `[0, 1]`
//! otherwise. The admissible set is their intersection.

use crate::error::{Result, ZdError};
use crate::game::GameSpec;
use crate::history::HistoryLayout;
use crate::relation::PayoffRelation;
use crate::strategy::Strategy;

/// `|V(h)|` below this fraction of `max|V|` counts as zero.
pub const ZERO_FRACTION: f64 = 1e-12;

/// Closed interval `[lo, hi]` of admissible scales for one history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleInterval {
    pub history: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleStrategy {
    pub strategy: Strategy,
    /// The chosen scale: the admissible `k` of largest magnitude, positive on ties.
    pub k: f64,
    /// Full admissible range `[lo, hi]` (contains 0).
    pub admissible: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(FeasibleStrategy),
    /// Only `k = 0` survives: `upper` forces `k ≤ 0` and `lower` forces
    /// `k ≥ 0`, so no nonzero scale lies in both.
    Infeasible {
        upper: ScaleInterval,
        lower: ScaleInterval,
    },
    /// `V` is constant on all histories, which only a zero scale satisfies;
    /// the Repeat strategy is returned.
    Degenerate(Strategy),
}

impl Feasibility {
    /// Human-readable witness or summary.
    pub fn describe(&self, layout: &HistoryLayout) -> String {
        match self {
            Feasibility::Feasible(f) => format!(
                "feasible: k = {} (admissible [{}, {}])",
                f.k, f.admissible.0, f.admissible.1
            ),
            Feasibility::Infeasible { upper, lower } => format!(
                "infeasible: history {} requires k in [{}, {}], history {} requires k in [{}, {}]; they share only k = 0",
                layout.label(upper.history),
                upper.lo,
                upper.hi,
                layout.label(lower.history),
                lower.lo,
                lower.hi
            ),
            Feasibility::Degenerate(_) => {
                "degenerate: relation is constant on every history; only Repeat satisfies it".to_string()
            }
        }
    }
}

/// Constructs the strategy for `player` (0-based) enforcing `target`.
/// `action_coeffs` are the weights `c` on `T̂(1), T̂(2)`; they must differ.
pub fn feasible_strategy_for(
    target: &PayoffRelation,
    game: &GameSpec,
    player: usize,
    action_coeffs: &[f64],
) -> Result<Feasibility> {
    if target.n_players() != game.n_players() {
        return Err(ZdError::domain("relation and game have different player counts"));
    }
    feasible_from_coefficients(target.coeffs(), target.memory(), game, player, action_coeffs)
}

/// Same as [`feasible_strategy_for`] on a raw coefficient vector, which may
/// be all zero (reported as degenerate).
pub fn feasible_from_coefficients(
    coeffs: &[f64],
    memory: usize,
    game: &GameSpec,
    player: usize,
    action_coeffs: &[f64],
) -> Result<Feasibility> {
    if game.n_actions() != 2 {
        return Err(ZdError::domain("feasibility is only implemented for two-action games"));
    }
    if player >= game.n_players() {
        return Err(ZdError::domain(format!("player {} outside the game", player + 1)));
    }
    if action_coeffs.len() != 2 {
        return Err(ZdError::domain("expected two action coefficients"));
    }
    if action_coeffs[0] == action_coeffs[1] {
        return Err(ZdError::domain(
            "equal action coefficients select the identically-zero combination",
        ));
    }
    let layout = HistoryLayout::new(game.n_players(), 2, memory)?;
    let values: Vec<f64> = if coeffs.iter().all(|&c| c == 0.0) {
        vec![0.0; layout.history_count()]
    } else {
        let relation = PayoffRelation::new(game.n_players(), memory, coeffs.to_vec())?;
        (0..layout.history_count())
            .map(|h| relation.evaluate(game, &layout, h))
            .collect()
    };

    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let spread = values.iter().fold(0.0f64, |m, v| m.max((v - values[0]).abs()));
    if spread <= ZERO_FRACTION * scale.max(f64::MIN_POSITIVE) || scale == 0.0 {
        return Ok(Feasibility::Degenerate(Strategy::repeat(
            player,
            game.n_players(),
            2,
            memory,
        )?));
    }

    let cut = ZERO_FRACTION * scale;
    let intervals: Vec<ScaleInterval> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > cut)
        .map(|(h, &v)| {
            let cooperated = layout.last_action(h, player) == 0;
            // k·v ∈ [−1, 0] after own cooperation, [0, 1] after defection.
            let (lo, hi) = match (cooperated, v > 0.0) {
                (true, true) => (-1.0 / v, 0.0),
                (true, false) => (0.0, -1.0 / v),
                (false, true) => (0.0, 1.0 / v),
                (false, false) => (1.0 / v, 0.0),
            };
            ScaleInterval { history: h, lo, hi }
        })
        .collect();

    let upper = intervals.iter().find(|i| i.hi == 0.0).copied();
    let lower = intervals.iter().find(|i| i.lo == 0.0).copied();
    if let (Some(upper), Some(lower)) = (upper, lower) {
        return Ok(Feasibility::Infeasible { upper, lower });
    }
    let lo = intervals.iter().map(|i| i.lo).fold(f64::NEG_INFINITY, f64::max);
    let hi = intervals.iter().map(|i| i.hi).fold(f64::INFINITY, f64::min);
    let k = if hi >= -lo { hi } else { lo };

    // T̂(1|h) = k·V(h) scaled by 1/(c1 − c2) is absorbed into k.
    let coop: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(h, &v)| {
            let base = if layout.last_action(h, player) == 0 { 1.0 } else { 0.0 };
            let v = if v.abs() > cut { v } else { 0.0 };
            (base + k * v).clamp(0.0, 1.0)
        })
        .collect();
    let strategy = strategy_for_player(player, game.n_players(), memory, &coop)?;
    Ok(Feasibility::Feasible(FeasibleStrategy {
        strategy,
        k,
        admissible: (lo, hi),
    }))
}

fn strategy_for_player(player: usize, n_players: usize, memory: usize, coop: &[f64]) -> Result<Strategy> {
    let layout = HistoryLayout::new(n_players, 2, memory)?;
    let table = coop.iter().flat_map(|&p| [p, 1.0 - p]).collect();
    Strategy::new(player, layout, table)
}
