//! Memory-n stochastic strategies.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZdError};
use crate::game::GameSpec;
use crate::history::HistoryLayout;

/// Per-history normalization tolerance applied when loading a table.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Conditional action probabilities `T_a(σ_a | h)` of one player.
///
/// `table[h * M + σ]` holds the probability of the 0-based action `σ` after
/// history `h`. Tables are validated on construction and never renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    player: usize,
    layout: HistoryLayout,
    table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Row sum differs from one by more than the tolerance.
    Normalization { history: usize, sum: f64 },
    /// Entry outside `[0, 1]` (or not finite).
    Range { history: usize, action: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `|Σ_σ T(σ|h) - 1|` per history.
    pub residuals: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Checks a flat table against the probability invariants.
pub fn validate_table(layout: &HistoryLayout, table: &[f64]) -> ValidationReport {
    let m = layout.n_actions();
    let mut residuals = Vec::with_capacity(layout.history_count());
    let mut violations = Vec::new();
    for (h, row) in table.chunks(m).enumerate() {
        let sum: f64 = row.iter().sum();
        let residual = (sum - 1.0).abs();
        for (action, &value) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                violations.push(Violation::Range {
                    history: h,
                    action,
                    value,
                });
            }
        }
        if residual.is_nan() || residual > NORMALIZATION_TOL {
            violations.push(Violation::Normalization { history: h, sum });
        }
        residuals.push(residual);
    }
    ValidationReport { residuals, violations }
}

pub fn validate_strategy(strategy: &Strategy) -> ValidationReport {
    validate_table(&strategy.layout, &strategy.table)
}

impl Strategy {
    /// Builds a strategy for 0-based `player` from a flat table.
    pub fn new(player: usize, layout: HistoryLayout, table: Vec<f64>) -> Result<Self> {
        if player >= layout.n_players() {
            return Err(ZdError::domain(format!(
                "player {} outside 1..={}",
                player + 1,
                layout.n_players()
            )));
        }
        let expected = layout.history_count() * layout.n_actions();
        if table.len() != expected {
            return Err(ZdError::domain(format!(
                "table has {} entries, expected {}",
                table.len(),
                expected
            )));
        }
        let report = validate_table(&layout, &table);
        if let Some(v) = report.violations.first() {
            let what = match v {
                Violation::Normalization { history, sum } => {
                    format!("probabilities after history {} sum to {}", layout.label(*history), sum)
                }
                Violation::Range { history, action, value } => format!(
                    "probability of action {} after history {} is {}",
                    action + 1,
                    layout.label(*history),
                    value
                ),
            };
            return Err(ZdError::Domain(what));
        }
        Ok(Self { player, layout, table })
    }

    /// Two-action strategy from the probability of action 1 after each history.
    pub fn from_cooperation(player: usize, n_players: usize, memory: usize, p1: &[f64]) -> Result<Self> {
        let layout = HistoryLayout::new(n_players, 2, memory)?;
        if p1.len() != layout.history_count() {
            return Err(ZdError::domain(format!(
                "expected {} probabilities, got {}",
                layout.history_count(),
                p1.len()
            )));
        }
        let table = p1.iter().flat_map(|&p| [p, 1.0 - p]).collect();
        Self::new(player, layout, table)
    }

    /// The strategy that repeats its own previous action.
    pub fn repeat(player: usize, n_players: usize, n_actions: usize, memory: usize) -> Result<Self> {
        let layout = HistoryLayout::new(n_players, n_actions, memory)?;
        let mut table = vec![0.0; layout.history_count() * n_actions];
        for h in 0..layout.history_count() {
            table[h * n_actions + layout.last_action(h, player)] = 1.0;
        }
        Self::new(player, layout, table)
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn memory(&self) -> usize {
        self.layout.memory()
    }

    pub fn layout(&self) -> &HistoryLayout {
        &self.layout
    }

    pub fn n_actions(&self) -> usize {
        self.layout.n_actions()
    }

    pub fn n_players(&self) -> usize {
        self.layout.n_players()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Distribution over 0-based actions after `history`.
    pub fn row(&self, history: usize) -> &[f64] {
        let m = self.n_actions();
        &self.table[history * m..(history + 1) * m]
    }

    pub fn prob(&self, action: usize, history: usize) -> f64 {
        self.table[history * self.n_actions() + action]
    }

    /// Probability of 0-based action 0 after every history.
    pub fn cooperation(&self) -> Vec<f64> {
        self.table.iter().step_by(self.n_actions()).copied().collect()
    }

    pub fn matches_game(&self, game: &GameSpec) -> bool {
        self.n_players() == game.n_players() && self.n_actions() == game.n_actions()
    }

    /// Embeds into a longer memory by ignoring the extra older states.
    pub fn promote(&self, memory: usize) -> Result<Self> {
        let current = self.memory();
        if memory < current {
            return Err(ZdError::domain(format!(
                "cannot promote a memory-{current} strategy to memory {memory}"
            )));
        }
        let layout = HistoryLayout::new(self.n_players(), self.n_actions(), memory)?;
        let drop = layout.state_count().pow((memory - current) as u32);
        let table = (0..layout.history_count())
            .flat_map(|h| self.row(h / drop).iter().copied())
            .collect();
        Ok(Self {
            player: self.player,
            layout,
            table,
        })
    }

    /// Inverse of [`Strategy::promote`]: keeps only the `memory` most recent
    /// states. Fails when the table depends on the dropped states.
    pub fn truncate(&self, memory: usize) -> Result<Self> {
        let current = self.memory();
        if memory == 0 || memory > current {
            return Err(ZdError::domain(format!(
                "cannot truncate a memory-{current} strategy to memory {memory}"
            )));
        }
        let layout = HistoryLayout::new(self.n_players(), self.n_actions(), memory)?;
        let drop = layout.state_count().pow((current - memory) as u32);
        let mut table = Vec::with_capacity(layout.history_count() * self.n_actions());
        for short in 0..layout.history_count() {
            let base = self.row(short * drop);
            for ext in 1..drop {
                if self.row(short * drop + ext) != base {
                    return Err(ZdError::domain(format!(
                        "strategy depends on states older than {memory} rounds"
                    )));
                }
            }
            table.extend_from_slice(base);
        }
        Ok(Self {
            player: self.player,
            layout,
            table,
        })
    }

    pub fn to_file(&self) -> StrategyFile {
        StrategyFile {
            player: self.player + 1,
            memory: self.memory(),
            n_actions: self.n_actions(),
            n_players: self.n_players(),
            table: self.table.chunks(self.n_actions()).map(|r| r.to_vec()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StrategyFile = serde_json::from_str(text).map_err(|e| ZdError::Format {
            line: e.line(),
            message: e.to_string(),
        })?;
        file.into_strategy()
    }
}

/// On-disk strategy schema. `player` is 1-based; `table` lists one row of
/// action probabilities per history in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub player: usize,
    pub memory: usize,
    pub n_actions: usize,
    pub n_players: usize,
    pub table: Vec<Vec<f64>>,
}

impl StrategyFile {
    pub fn into_strategy(self) -> Result<Strategy> {
        if self.player == 0 {
            return Err(ZdError::domain("player index is 1-based"));
        }
        let layout = HistoryLayout::new(self.n_players, self.n_actions, self.memory)?;
        if self.table.len() != layout.history_count() {
            return Err(ZdError::domain(format!(
                "table has {} rows, expected {}",
                self.table.len(),
                layout.history_count()
            )));
        }
        if let Some(i) = self.table.iter().position(|r| r.len() != self.n_actions) {
            return Err(ZdError::domain(format!(
                "row {} has {} entries, expected {}",
                i,
                self.table[i].len(),
                self.n_actions
            )));
        }
        Strategy::new(self.player - 1, layout, self.table.into_iter().flatten().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tft() -> Strategy {
        Strategy::from_cooperation(0, 2, 1, &[1.0, 0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn promote_tft_gives_identical_columns() {
        let t = tft().promote(2).unwrap();
        let coop = t.cooperation();
        for col in 0..4 {
            let column: Vec<f64> = (0..4).map(|row| coop[row * 4 + col]).collect();
            assert_eq!(column, vec![1.0, 0.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn promote_identity_and_rejects_shorter() {
        let t = tft();
        assert_eq!(t.promote(1).unwrap(), t);
        let t2 = t.promote(2).unwrap();
        assert!(t2.promote(1).is_err());
    }

    #[test]
    fn promote_alld_to_three() {
        let d = Strategy::from_cooperation(0, 2, 1, &[0.0; 4]).unwrap();
        let d3 = d.promote(3).unwrap();
        assert_eq!(d3.memory(), 3);
        assert!(d3.cooperation().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn truncate_inverts_promote() {
        let s = Strategy::from_cooperation(1, 2, 2, &(0..16).map(|i| i as f64 / 16.0).collect::<Vec<_>>()).unwrap();
        assert_eq!(s.promote(3).unwrap().truncate(2).unwrap(), s);
        assert!(s.truncate(1).is_err());
    }

    #[test]
    fn validation_reports_offending_history() {
        let layout = HistoryLayout::new(2, 2, 1).unwrap();
        let report = validate_table(&layout, &[1.0, 0.0, 0.5, 0.4, 0.0, 1.0, 1.0, 0.0]);
        assert!(!report.passed());
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            report.violations[0],
            Violation::Normalization { history: 1, .. }
        ));

        let report = validate_table(&layout, &[1.2, -0.2, 0.5, 0.5, 0.0, 1.0, 1.0, 0.0]);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::Range {
                history: 0,
                action: 0,
                ..
            }
        )));
    }

    #[test]
    fn tolerance_boundary() {
        let layout = HistoryLayout::new(1, 2, 1).unwrap();
        assert!(Strategy::new(0, layout, vec![0.5, 0.5 + 5e-13, 1.0, 0.0]).is_ok());
        assert!(Strategy::new(0, layout, vec![0.5, 0.5 + 5e-12, 1.0, 0.0]).is_err());
    }

    #[test]
    fn repeat_copies_own_action() {
        let r = Strategy::repeat(1, 2, 2, 1).unwrap();
        assert_eq!(r.cooperation(), vec![1.0, 0.0, 1.0, 0.0]);
        let r = Strategy::repeat(0, 2, 2, 1).unwrap();
        assert_eq!(r.cooperation(), vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let s = Strategy::from_cooperation(0, 2, 2, &[1.0 / 3.0; 16]).unwrap();
        let back = Strategy::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);

        let err = Strategy::from_json("{\n  \"player\": 1,\n  \"memory\": oops\n}").unwrap_err();
        assert!(matches!(err, ZdError::Format { line: 3, .. }));

        let bad = r#"{"player":1,"memory":1,"n_actions":2,"n_players":2,"table":[[1,0],[0.5,0.4],[0,1],[1,0]]}"#;
        assert!(matches!(Strategy::from_json(bad), Err(ZdError::Domain(_))));
    }
}
