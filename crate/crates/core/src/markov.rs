//! Markov chain over memory-n histories and its stationary distributions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, ZdError};
use crate::game::GameSpec;
use crate::history::HistoryLayout;
use crate::strategy::Strategy;

/// Rank tolerance on singular values of `P - I`.
pub const MULTIPLICITY_TOL: f64 = 1e-9;

/// Largest history space handled by the dense solver.
pub const MAX_DENSE_HISTORIES: usize = 4096;

/// Row-stochastic transition operator: `prob(h, σ)` is the probability that
/// joint state `σ` is played after history `h`, moving the chain to
/// `layout.successor(h, σ)`. The rows over `σ` sum to one.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    layout: HistoryLayout,
    probs: Vec<f64>,
}

impl TransitionKernel {
    pub fn layout(&self) -> &HistoryLayout {
        &self.layout
    }

    pub fn prob(&self, history: usize, state: usize) -> f64 {
        self.probs[history * self.layout.state_count() + state]
    }

    /// Probability of moving from `from` to `to`.
    pub fn transition(&self, from: usize, to: usize) -> f64 {
        let state = self.layout.state_at(to, 0);
        if self.layout.successor(from, state) == to {
            self.prob(from, state)
        } else {
            0.0
        }
    }

    /// Successors of `history` with their probabilities, zero entries skipped.
    pub fn successors(&self, history: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.layout.state_count();
        self.probs[history * s..(history + 1) * s]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(move |(state, &p)| (self.layout.successor(history, state), p))
    }

    /// One step of the distribution: `(Wπ)(h') = Σ_h W(h'|h) π(h)`.
    pub fn step(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; weights.len()];
        for (h, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (next, p) in self.successors(h) {
                out[next] += p * w;
            }
        }
        out
    }

    /// `‖Wπ − π‖∞`.
    pub fn stationarity_residual(&self, weights: &[f64]) -> f64 {
        self.step(weights)
            .iter()
            .zip(weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Column-stochastic dense matrix `P[(h', h)] = W(h'|h)`.
    fn dense(&self) -> DMatrix<f64> {
        let n = self.layout.history_count();
        let mut m = DMatrix::zeros(n, n);
        for h in 0..n {
            for (next, p) in self.successors(h) {
                m[(next, h)] += p;
            }
        }
        m
    }
}

/// Brings every strategy to the longest memory among them.
pub fn align_memory(strategies: &[Strategy]) -> Result<Vec<Strategy>> {
    let n = strategies.iter().map(Strategy::memory).max().unwrap_or(1);
    strategies.iter().map(|s| s.promote(n)).collect()
}

/// Joint transition probabilities `Π_a T_a(σ_a | h)`.
///
/// `strategies[a]` must belong to player `a`, and all must share one memory.
pub fn build_kernel(strategies: &[Strategy], game: &GameSpec) -> Result<TransitionKernel> {
    check_players(strategies, game)?;
    let layout = *strategies[0].layout();
    if let Some(s) = strategies.iter().find(|s| s.memory() != layout.memory()) {
        return Err(ZdError::domain(format!(
            "strategy of player {} has memory {}, expected {}",
            s.player() + 1,
            s.memory(),
            layout.memory()
        )));
    }
    let states = layout.states();
    let sc = states.state_count();
    let mut probs = vec![0.0; layout.history_count() * sc];
    for h in 0..layout.history_count() {
        for state in 0..sc {
            probs[h * sc + state] = strategies
                .iter()
                .enumerate()
                .map(|(a, s)| s.prob(states.action_digit(state, a), h))
                .product();
        }
    }
    Ok(TransitionKernel { layout, probs })
}

pub(crate) fn check_players(strategies: &[Strategy], game: &GameSpec) -> Result<()> {
    if strategies.len() != game.n_players() {
        return Err(ZdError::domain(format!(
            "{} strategies for a {}-player game",
            strategies.len(),
            game.n_players()
        )));
    }
    for (a, s) in strategies.iter().enumerate() {
        if !s.matches_game(game) {
            return Err(ZdError::domain(format!(
                "strategy of player {} is for {} players and {} actions",
                a + 1,
                s.n_players(),
                s.n_actions()
            )));
        }
        if s.player() != a {
            return Err(ZdError::domain(format!(
                "strategy in slot {} belongs to player {}",
                a + 1,
                s.player() + 1
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactSolve,
    PowerIteration,
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    layout: HistoryLayout,
    weights: Vec<f64>,
    method: Method,
    residual: Option<f64>,
}

impl StationaryDistribution {
    /// Wraps arbitrary weights; they must be nonnegative and sum to one.
    pub fn from_weights(layout: HistoryLayout, weights: Vec<f64>, method: Method) -> Result<Self> {
        if weights.len() != layout.history_count() {
            return Err(ZdError::domain(format!(
                "{} weights for {} histories",
                weights.len(),
                layout.history_count()
            )));
        }
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
            return Err(ZdError::domain("weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(ZdError::domain(format!("weights sum to {total}")));
        }
        Ok(Self {
            layout,
            weights,
            method,
            residual: None,
        })
    }

    pub fn layout(&self) -> &HistoryLayout {
        &self.layout
    }

    pub fn memory(&self) -> usize {
        self.layout.memory()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// `‖Wπ − π‖∞` against the kernel it was solved from, if any.
    pub fn residual(&self) -> Option<f64> {
        self.residual
    }

    /// Largest gap between the two ways of reading off the distribution of
    /// `n − 1` consecutive states: summing out the newest state or the oldest.
    pub fn marginal_consistency_residual(&self) -> f64 {
        let n = self.layout.memory();
        if n == 1 {
            return 0.0;
        }
        let s = self.layout.state_count();
        let inner = s.pow((n - 1) as u32);
        (0..inner)
            .map(|r| {
                let older: f64 = (0..s).map(|d| self.weights[d * inner + r]).sum();
                let newer: f64 = (0..s).map(|d| self.weights[r * s + d]).sum();
                (older - newer).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Distribution of the most recent joint state.
    pub fn state_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.layout.state_count()];
        for (h, &w) in self.weights.iter().enumerate() {
            out[self.layout.state_at(h, 0)] += w;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityReport {
    /// Dimension of the eigenvalue-1 eigenspace.
    pub dimension: usize,
    /// Set whenever averages must come from time averages of a trajectory.
    pub use_empirical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StationaryOutcome {
    Unique(StationaryDistribution),
    Multiple(MultiplicityReport),
}

impl StationaryOutcome {
    pub fn unique(self) -> Option<StationaryDistribution> {
        match self {
            StationaryOutcome::Unique(d) => Some(d),
            StationaryOutcome::Multiple(_) => None,
        }
    }
}

/// Solves `(P − I)π = 0, Σπ = 1` after checking that the eigenvalue-1
/// eigenspace is one-dimensional.
pub fn stationary_exact(kernel: &TransitionKernel) -> Result<StationaryOutcome> {
    let n = kernel.layout.history_count();
    if n > MAX_DENSE_HISTORIES {
        return Err(ZdError::Resource(format!(
            "{n} histories exceed the dense solver cap of {MAX_DENSE_HISTORIES}"
        )));
    }
    let mut a = kernel.dense();
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    let singular = a.clone().singular_values();
    let dimension = singular.iter().filter(|&&x| x < MULTIPLICITY_TOL).count();
    if dimension != 1 {
        return Ok(StationaryOutcome::Multiple(MultiplicityReport {
            dimension,
            use_empirical: true,
        }));
    }

    // With a one-dimensional null space, replacing one equation of
    // (P − I)π = 0 by Σπ = 1 gives a nonsingular system.
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let lu = a.clone().full_piv_lu();
    let mut solution = lu
        .solve(&rhs)
        .ok_or_else(|| ZdError::domain("stationary system is singular"))?;
    // One step of iterative refinement.
    let correction = lu.solve(&(&rhs - &a * &solution)).unwrap_or_else(|| DVector::zeros(n));
    solution += correction;

    let mut weights: Vec<f64> = solution.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let residual = kernel.stationarity_residual(&weights);
    Ok(StationaryOutcome::Unique(StationaryDistribution {
        layout: kernel.layout,
        weights,
        method: Method::ExactSolve,
        residual: Some(residual),
    }))
}

/// Lazy power iteration `π ← (π + Wπ)/2` from the uniform distribution.
///
/// Converges to the stationary distribution of an ergodic chain (the lazy
/// step removes periodicity). On a reducible chain it returns the limit
/// reached from the uniform start, which is one member of the eigenspace.
pub fn stationary_power(kernel: &TransitionKernel, tol: f64, max_iter: usize) -> Result<StationaryDistribution> {
    let n = kernel.layout.history_count();
    let mut weights = vec![1.0 / n as f64; n];
    for _ in 0..max_iter {
        let stepped = kernel.step(&weights);
        let delta = stepped
            .iter()
            .zip(&weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        weights.iter_mut().zip(&stepped).for_each(|(w, s)| *w = 0.5 * (*w + s));
        if delta < tol {
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            let residual = kernel.stationarity_residual(&weights);
            return Ok(StationaryDistribution {
                layout: kernel.layout,
                weights,
                method: Method::PowerIteration,
                residual: Some(residual),
            });
        }
    }
    Err(ZdError::domain(format!(
        "power iteration did not converge in {max_iter} steps"
    )))
}
