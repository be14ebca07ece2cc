//! Canonical integer encodings of joint states and memory-n histories.
//!
//! A joint state `(σ_1, …, σ_N)` is a base-`M` number with player 1 as the
//! most significant digit. A history `(σ^(-1), …, σ^(-n))` is a base-`M^N`
//! number with the most recent state as the most significant digit. For the
//! two-player two-action game with memory two, history `h = 4·row + col`
//! where `row` is the last state and `col` the one before, which is the
//! row-major layout of the usual 4×4 strategy matrices.
//!
//! Public encode/decode functions take and return 1-based actions. The
//! `*_digit` helpers work on 0-based indices.

use crate::error::{Result, ZdError};

/// Hard cap on the number of histories `M^(nN)`.
pub const MAX_HISTORIES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    n_players: usize,
    n_actions: usize,
    state_count: usize,
}

impl StateLayout {
    pub fn new(n_players: usize, n_actions: usize) -> Result<Self> {
        if n_players == 0 || n_actions == 0 {
            return Err(ZdError::domain("need at least one player and one action"));
        }
        let state_count = checked_pow(n_actions, n_players)
            .filter(|&s| s <= MAX_HISTORIES)
            .ok_or_else(|| ZdError::Resource(format!("{n_actions}^{n_players} joint states exceed the cap")))?;
        Ok(Self {
            n_players,
            n_actions,
            state_count,
        })
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    /// 0-based action of 0-based `player` in joint state `state`.
    pub fn action_digit(&self, state: usize, player: usize) -> usize {
        let shift = self.n_actions.pow((self.n_players - 1 - player) as u32);
        (state / shift) % self.n_actions
    }

    pub fn state_from_digits(&self, actions: &[usize]) -> usize {
        actions.iter().fold(0, |acc, &d| acc * self.n_actions + d)
    }

    /// Encodes a joint state given as 1-based actions.
    pub fn encode(&self, actions: &[usize]) -> Result<usize> {
        if actions.len() != self.n_players {
            return Err(ZdError::domain(format!(
                "joint state has {} actions, expected {}",
                actions.len(),
                self.n_players
            )));
        }
        if let Some(&a) = actions.iter().find(|&&a| a == 0 || a > self.n_actions) {
            return Err(ZdError::domain(format!("action {a} outside 1..={}", self.n_actions)));
        }
        Ok(actions.iter().fold(0, |acc, &a| acc * self.n_actions + (a - 1)))
    }

    /// Decodes a joint state into 1-based actions.
    pub fn decode(&self, state: usize) -> Vec<usize> {
        (0..self.n_players).map(|p| self.action_digit(state, p) + 1).collect()
    }

    /// `(a,b,…)` with 1-based actions.
    pub fn label(&self, state: usize) -> String {
        let parts: Vec<String> = self.decode(state).iter().map(|a| a.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryLayout {
    states: StateLayout,
    memory: usize,
    history_count: usize,
}

impl HistoryLayout {
    pub fn new(n_players: usize, n_actions: usize, memory: usize) -> Result<Self> {
        if memory == 0 {
            return Err(ZdError::domain("memory length must be at least 1"));
        }
        let states = StateLayout::new(n_players, n_actions)?;
        let history_count = checked_pow(states.state_count, memory)
            .filter(|&h| h <= MAX_HISTORIES)
            .ok_or_else(|| {
                ZdError::Resource(format!(
                    "{}^{} histories exceed the cap of {}",
                    states.state_count, memory, MAX_HISTORIES
                ))
            })?;
        Ok(Self {
            states,
            memory,
            history_count,
        })
    }

    pub fn states(&self) -> StateLayout {
        self.states
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn n_players(&self) -> usize {
        self.states.n_players
    }

    pub fn n_actions(&self) -> usize {
        self.states.n_actions
    }

    pub fn state_count(&self) -> usize {
        self.states.state_count
    }

    pub fn history_count(&self) -> usize {
        self.history_count
    }

    /// Joint state at `lag` rounds back, `lag = 0` being the most recent.
    pub fn state_at(&self, history: usize, lag: usize) -> usize {
        let s = self.states.state_count;
        (history / s.pow((self.memory - 1 - lag) as u32)) % s
    }

    /// Most recent 0-based action of `player`.
    pub fn last_action(&self, history: usize, player: usize) -> usize {
        self.states.action_digit(self.state_at(history, 0), player)
    }

    /// History reached when `state` is played after `history`.
    pub fn successor(&self, history: usize, state: usize) -> usize {
        let s = self.states.state_count;
        state * s.pow((self.memory - 1) as u32) + history / s
    }

    /// Encodes `(σ^(-1), …, σ^(-n))`, each a list of 1-based actions.
    pub fn encode<S: AsRef<[usize]>>(&self, states: &[S]) -> Result<usize> {
        if states.len() != self.memory {
            return Err(ZdError::domain(format!(
                "history has {} states, expected {}",
                states.len(),
                self.memory
            )));
        }
        states.iter().try_fold(0, |acc, st| {
            Ok(acc * self.states.state_count + self.states.encode(st.as_ref())?)
        })
    }

    /// Decodes into `(σ^(-1), …, σ^(-n))` with 1-based actions.
    pub fn decode(&self, history: usize) -> Vec<Vec<usize>> {
        (0..self.memory)
            .map(|lag| self.states.decode(self.state_at(history, lag)))
            .collect()
    }

    pub fn label(&self, history: usize) -> String {
        let parts: Vec<String> = (0..self.memory)
            .map(|lag| self.states.label(self.state_at(history, lag)))
            .collect();
        format!("({})", parts.join(","))
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}
