//! Games given by payoff tables, and the prisoner's dilemma specialization.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZdError};
use crate::history::StateLayout;

/// An `N`-player, `M`-action normal-form game.
///
/// Payoff tables are indexed by the joint-state index of [`StateLayout`].
/// Player indices are 0-based here; the constant function `s_0 = 1` is
/// addressed through basis index 0 in [`GameSpec::basis`], so basis index
/// `b > 0` is player `b - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    n_players: usize,
    n_actions: usize,
    payoffs: Vec<Vec<f64>>,
}

impl GameSpec {
    pub fn new(n_players: usize, n_actions: usize, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        if n_players == 0 || n_actions == 0 {
            return Err(ZdError::domain("a game needs at least one player and one action"));
        }
        if payoffs.len() != n_players {
            return Err(ZdError::domain(format!(
                "expected {} payoff tables, got {}",
                n_players,
                payoffs.len()
            )));
        }
        let states = StateLayout::new(n_players, n_actions)?.state_count();
        for (a, table) in payoffs.iter().enumerate() {
            if table.len() != states {
                return Err(ZdError::domain(format!(
                    "payoff table of player {} has {} entries, expected {}",
                    a + 1,
                    table.len(),
                    states
                )));
            }
            if let Some(x) = table.iter().find(|x| !x.is_finite()) {
                return Err(ZdError::domain(format!(
                    "payoff table of player {} contains non-finite value {}",
                    a + 1,
                    x
                )));
            }
        }
        Ok(Self {
            n_players,
            n_actions,
            payoffs,
        })
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn states(&self) -> StateLayout {
        StateLayout::new(self.n_players, self.n_actions).expect("validated at construction")
    }

    /// Payoff of 0-based `player` in joint state `state`.
    pub fn payoff(&self, player: usize, state: usize) -> f64 {
        self.payoffs[player][state]
    }

    pub fn payoff_table(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    /// Basis function `s_b`: `b = 0` is the constant 1, `b >= 1` is player `b - 1`.
    pub fn basis(&self, b: usize, state: usize) -> f64 {
        if b == 0 {
            1.0
        } else {
            self.payoffs[b - 1][state]
        }
    }

    /// Applies `s_a -> scale * s_a + shift` to every player's table.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        let payoffs = self
            .payoffs
            .iter()
            .map(|t| t.iter().map(|x| scale * x + shift).collect())
            .collect();
        Self::new(self.n_players, self.n_actions, payoffs)
    }

    pub fn payoff_range(&self) -> (f64, f64) {
        self.payoffs
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }
}

/// Prisoner's dilemma payoffs with `T > R > P > S`.
///
/// Player 1 receives `(R, S, T, P)` and player 2 `(R, T, S, P)` over the
/// joint states `(1,1), (1,2), (2,1), (2,2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdGame {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub p: f64,
}

impl PdGame {
    pub fn new(r: f64, s: f64, t: f64, p: f64) -> Result<Self> {
        if ![r, s, t, p].iter().all(|x| x.is_finite()) {
            return Err(ZdError::domain("payoffs must be finite"));
        }
        if !(t > r && r > p && p > s) {
            return Err(ZdError::domain(format!(
                "prisoner's dilemma requires T > R > P > S, got R={r}, S={s}, T={t}, P={p}"
            )));
        }
        Ok(Self { r, s, t, p })
    }

    /// The conventional `(R, S, T, P) = (3, 0, 5, 1)`.
    pub fn standard() -> Self {
        Self {
            r: 3.0,
            s: 0.0,
            t: 5.0,
            p: 1.0,
        }
    }

    /// `2R > T + S`: mutual cooperation beats alternation.
    pub fn cond_2r_gt_ts(&self) -> bool {
        2.0 * self.r > self.t + self.s
    }

    /// `2P < T + S`.
    pub fn cond_2p_lt_ts(&self) -> bool {
        2.0 * self.p < self.t + self.s
    }

    /// `T - P >= P - S`.
    pub fn cond_tp_ge_ps(&self) -> bool {
        self.t - self.p >= self.p - self.s
    }

    pub fn game(&self) -> GameSpec {
        let Self { r, s, t, p } = *self;
        GameSpec::new(2, 2, vec![vec![r, s, t, p], vec![r, t, s, p]])
            .expect("two-player two-action tables are well formed")
    }
}

impl Default for PdGame {
    fn default() -> Self {
        Self::standard()
    }
}
