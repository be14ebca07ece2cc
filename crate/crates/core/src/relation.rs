//! Payoff-product basis, correlation functions and linear payoff relations.
//!
//! A multi-index `β = (b_1, …, b_k)` with `b_j ∈ 0..=N` names the product
//! `s_{b_1}(σ^(-1)) ⋯ s_{b_k}(σ^(-k))`, `b_1` applying to the most recent
//! state. Multi-indices are enumerated as base-`(N+1)` numbers with `b_1`
//! most significant.

use std::fmt::Write as _;

use crate::error::{Result, ZdError};
use crate::game::GameSpec;
use crate::history::HistoryLayout;
use crate::markov::StationaryDistribution;

pub fn basis_size(n_players: usize, order: usize) -> Option<usize> {
    (n_players + 1).checked_pow(order as u32)
}

pub fn multi_index(index: usize, n_players: usize, order: usize) -> Vec<usize> {
    let base = n_players + 1;
    let mut out = vec![0; order];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % base;
        rest /= base;
    }
    out
}

pub fn flat_index(beta: &[usize], n_players: usize) -> Result<usize> {
    beta.iter().try_fold(0, |acc, &b| {
        if b > n_players {
            Err(ZdError::domain(format!("basis index {b} outside 0..={n_players}")))
        } else {
            Ok(acc * (n_players + 1) + b)
        }
    })
}

/// `Π_j s_{β_j}(state at lag j of history)`.
pub fn basis_value(game: &GameSpec, layout: &HistoryLayout, beta: &[usize], history: usize) -> f64 {
    beta.iter()
        .enumerate()
        .map(|(lag, &b)| game.basis(b, layout.state_at(history, lag)))
        .product()
}

/// All `(N+1)^k` correlation functions of one order.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSet {
    n_players: usize,
    order: usize,
    values: Vec<f64>,
}

impl CorrelationSet {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value for `beta`; shorter multi-indices are padded with 0 in the
    /// older slots.
    pub fn get(&self, beta: &[usize]) -> Option<f64> {
        if beta.len() > self.order {
            return None;
        }
        let mut padded = beta.to_vec();
        padded.resize(self.order, 0);
        flat_index(&padded, self.n_players).ok().map(|i| self.values[i])
    }
}

fn check_game(dist: &StationaryDistribution, game: &GameSpec) -> Result<()> {
    let layout = dist.layout();
    if layout.n_players() != game.n_players() || layout.n_actions() != game.n_actions() {
        return Err(ZdError::domain("distribution and game dimensions differ"));
    }
    Ok(())
}

/// `⟨Π_j s_{β_j}(σ(t+k−j))⟩` for a single multi-index.
pub fn correlation(dist: &StationaryDistribution, game: &GameSpec, beta: &[usize]) -> Result<f64> {
    check_game(dist, game)?;
    if beta.len() > dist.memory() {
        return Err(ZdError::domain(format!(
            "lag pattern of length {} exceeds memory {}",
            beta.len(),
            dist.memory()
        )));
    }
    flat_index(beta, game.n_players())?;
    let layout = dist.layout();
    Ok(dist
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(h, &w)| w * basis_value(game, layout, beta, h))
        .sum())
}

/// Every correlation function of the given order, including `b = 0` slots.
pub fn correlations(dist: &StationaryDistribution, game: &GameSpec, order: usize) -> Result<CorrelationSet> {
    check_game(dist, game)?;
    if order == 0 || order > dist.memory() {
        return Err(ZdError::domain(format!(
            "correlation order {} outside 1..={}",
            order,
            dist.memory()
        )));
    }
    let n_players = game.n_players();
    let size = basis_size(n_players, order).ok_or_else(|| ZdError::Resource("basis too large".into()))?;
    let layout = dist.layout();
    let mut values = vec![0.0; size];
    let mut states = vec![0; order];
    for (h, &w) in dist.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (lag, s) in states.iter_mut().enumerate() {
            *s = layout.state_at(h, lag);
        }
        for (i, v) in values.iter_mut().enumerate() {
            let beta = multi_index(i, n_players, order);
            let prod: f64 = beta.iter().zip(&states).map(|(&b, &s)| game.basis(b, s)).product();
            *v += w * prod;
        }
    }
    Ok(CorrelationSet {
        n_players,
        order,
        values,
    })
}

/// Coefficients `α_β` of a linear relation `0 = Σ_β α_β ⟨s_β⟩`.
///
/// Coefficients are kept as given; [`PayoffRelation::gauge_fixed`] scales
/// them so the first nonzero one (in canonical order) equals 1, which is the
/// form used for comparison and rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffRelation {
    n_players: usize,
    memory: usize,
    coeffs: Vec<f64>,
}

/// Coefficients below this magnitude are treated as zero in comparisons
/// and renderings.
pub const COEFF_EPS: f64 = 1e-12;

impl PayoffRelation {
    pub fn new(n_players: usize, memory: usize, coeffs: Vec<f64>) -> Result<Self> {
        if memory == 0 {
            return Err(ZdError::domain("relation memory must be at least 1"));
        }
        let size = basis_size(n_players, memory).ok_or_else(|| ZdError::Resource("basis too large".into()))?;
        if coeffs.len() != size {
            return Err(ZdError::domain(format!(
                "{} coefficients, expected {}",
                coeffs.len(),
                size
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(ZdError::domain("relation coefficients must be finite"));
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return Err(ZdError::domain("relation coefficients are all zero"));
        }
        Ok(Self {
            n_players,
            memory,
            coeffs,
        })
    }

    /// Builds from `(multi-index, coefficient)` pairs; repeated indices add.
    pub fn from_terms(n_players: usize, memory: usize, terms: &[(&[usize], f64)]) -> Result<Self> {
        let size = basis_size(n_players, memory).ok_or_else(|| ZdError::Resource("basis too large".into()))?;
        let mut coeffs = vec![0.0; size];
        for (beta, c) in terms {
            if beta.len() != memory {
                return Err(ZdError::domain(format!(
                    "term index has length {}, expected {}",
                    beta.len(),
                    memory
                )));
            }
            coeffs[flat_index(beta, n_players)?] += c;
        }
        Self::new(n_players, memory, coeffs)
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, beta: &[usize]) -> f64 {
        flat_index(beta, self.n_players).map(|i| self.coeffs[i]).unwrap_or(0.0)
    }

    fn scale(&self) -> f64 {
        self.coeffs.iter().copied().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Scaled so the first coefficient above `COEFF_EPS·max|α|` is exactly 1.
    pub fn gauge_fixed(&self) -> Self {
        let cutoff = COEFF_EPS * self.scale();
        let lead = self
            .coeffs
            .iter()
            .copied()
            .find(|c| c.abs() > cutoff)
            .expect("nonzero by construction");
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| if c.abs() > cutoff { c / lead } else { 0.0 })
            .collect();
        Self {
            n_players: self.n_players,
            memory: self.memory,
            coeffs,
        }
    }

    /// Re-expresses the relation over a longer memory by padding older slots
    /// with index 0.
    pub fn promote(&self, memory: usize) -> Result<Self> {
        if memory < self.memory {
            return Err(ZdError::domain("cannot shorten a relation"));
        }
        let size = basis_size(self.n_players, memory).ok_or_else(|| ZdError::Resource("basis too large".into()))?;
        let shift = (self.n_players + 1).pow((memory - self.memory) as u32);
        let mut coeffs = vec![0.0; size];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i * shift] = c;
        }
        Self::new(self.n_players, memory, coeffs)
    }

    /// True when the two relations agree up to a nonzero factor, after
    /// padding to a common memory.
    pub fn proportional_to(&self, other: &Self, tol: f64) -> bool {
        if self.n_players != other.n_players {
            return false;
        }
        let m = self.memory.max(other.memory);
        let (Ok(a), Ok(b)) = (self.promote(m), other.promote(m)) else {
            return false;
        };
        let (a, b) = (a.gauge_fixed(), b.gauge_fixed());
        a.coeffs.iter().zip(&b.coeffs).all(|(x, y)| (x - y).abs() <= tol)
    }

    /// `Σ_β α_β Π_j s_{β_j}(state at lag j of history)`.
    pub fn evaluate(&self, game: &GameSpec, layout: &HistoryLayout, history: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| {
                let beta = multi_index(i, self.n_players, self.memory);
                c * basis_value(game, layout, &beta, history)
            })
            .sum()
    }

    /// One line per nonzero coefficient, `α[b1,b2] = value`.
    pub fn render_coefficients(&self) -> String {
        let cutoff = COEFF_EPS * self.scale();
        let mut out = String::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.abs() > cutoff {
                let beta: Vec<String> = multi_index(i, self.n_players, self.memory)
                    .iter()
                    .map(|b| b.to_string())
                    .collect();
                let _ = writeln!(out, "α[{}] = {}", beta.join(","), fmt_coeff(c));
            }
        }
        out
    }

    /// The relation in bracket notation, e.g.
    /// `0 = ⟨s2(t+1) s1(t)⟩ - ⟨s1(t)⟩`.
    pub fn render_relation(&self) -> String {
        let cutoff = COEFF_EPS * self.scale();
        let mut out = String::from("0 =");
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.abs() <= cutoff {
                continue;
            }
            let beta = multi_index(i, self.n_players, self.memory);
            let factors: Vec<String> = beta
                .iter()
                .enumerate()
                .filter(|(_, &b)| b != 0)
                .map(|(lag, &b)| format!("s{}({})", b, time_label(self.memory - 1 - lag)))
                .collect();
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    out.push_str(" -");
                }
                first = false;
            } else {
                let _ = write!(out, " {sign}");
            }
            let mag = c.abs();
            if factors.is_empty() {
                let _ = write!(out, " {}", fmt_coeff(mag));
            } else if (mag - 1.0).abs() <= COEFF_EPS {
                let _ = write!(out, " ⟨{}⟩", factors.join(" "));
            } else {
                let _ = write!(out, " {}·⟨{}⟩", fmt_coeff(mag), factors.join(" "));
            }
        }
        out
    }
}

fn time_label(offset: usize) -> String {
    if offset == 0 {
        "t".to_string()
    } else {
        format!("t+{offset}")
    }
}

/// Shortest representation that round-trips, with `-0` folded to `0`.
/// Shortest form of `x` after rounding to 12 significant digits, so that
/// round-off in a fitted coefficient does not reach the printed relation.
pub fn fmt_coeff(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// `Σ_β α_β ⟨s_β⟩` over a correlation set of at least the relation's order.
pub fn verify_relation(relation: &PayoffRelation, corr: &CorrelationSet) -> Result<f64> {
    if relation.n_players != corr.n_players {
        return Err(ZdError::domain(
            "relation and correlations have different player counts",
        ));
    }
    if relation.memory > corr.order {
        return Err(ZdError::domain(format!(
            "relation of memory {} needs correlations of order {}, got {}",
            relation.memory, relation.memory, corr.order
        )));
    }
    Ok(relation
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(i, &c)| {
            let beta = multi_index(i, relation.n_players, relation.memory);
            c * corr.get(&beta).expect("order checked above")
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PdGame;
    use crate::markov::Method;

    fn point_mass(layout: HistoryLayout, h: usize) -> StationaryDistribution {
        let mut w = vec![0.0; layout.history_count()];
        w[h] = 1.0;
        StationaryDistribution::from_weights(layout, w, Method::Empirical).unwrap()
    }

    #[test]
    fn multi_index_round_trip() {
        for i in 0..27 {
            let beta = multi_index(i, 2, 3);
            assert_eq!(flat_index(&beta, 2).unwrap(), i);
        }
        assert_eq!(multi_index(7, 2, 2), vec![2, 1]);
        assert!(flat_index(&[3, 0], 2).is_err());
    }

    #[test]
    fn correlations_on_point_mass() {
        let game = PdGame::standard().game();
        let layout = HistoryLayout::new(2, 2, 2).unwrap();
        let dist = point_mass(layout, 15);
        assert_eq!(correlation(&dist, &game, &[0, 0]).unwrap(), 1.0);
        assert_eq!(correlation(&dist, &game, &[1, 2]).unwrap(), 1.0);
        let set = correlations(&dist, &game, 2).unwrap();
        assert_eq!(set.get(&[0, 0]), Some(1.0));
        assert_eq!(set.get(&[2]), Some(1.0));
        assert!(correlation(&dist, &game, &[1, 1, 1]).is_err());
        assert!(correlations(&dist, &game, 3).is_err());

        // History ((1,2),(2,1)): s2 now = T = 5, s1 before = T = 5.
        let dist = point_mass(layout, 6);
        assert_eq!(correlation(&dist, &game, &[2, 1]).unwrap(), 25.0);
        assert_eq!(correlation(&dist, &game, &[1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn zero_relation_rejected() {
        assert!(PayoffRelation::new(2, 1, vec![0.0; 3]).is_err());
        assert!(PayoffRelation::new(2, 1, vec![0.0; 4]).is_err());
    }

    #[test]
    fn verifier_is_strategy_agnostic() {
        let game = PdGame::standard().game();
        let layout = HistoryLayout::new(2, 2, 2).unwrap();
        let zss = PayoffRelation::from_terms(2, 1, &[(&[0], -5.0), (&[1], 1.0), (&[2], 1.0)]).unwrap();
        let corr = correlations(&point_mass(layout, 15), &game, 2).unwrap();
        assert_eq!(verify_relation(&zss, &corr).unwrap(), -3.0);
    }

    #[test]
    fn gauge_and_rendering() {
        let r = PayoffRelation::from_terms(2, 2, &[(&[2, 1], 1.0), (&[2, 0], -0.0), (&[0, 1], -1.0)]).unwrap();
        let g = r.gauge_fixed();
        assert_eq!(g.coeff(&[0, 1]), 1.0);
        assert_eq!(g.coeff(&[2, 1]), -1.0);
        assert_eq!(g.render_coefficients(), "α[0,1] = 1\nα[2,1] = -1\n");
        assert_eq!(r.render_relation(), "0 = - ⟨s1(t)⟩ + ⟨s2(t+1) s1(t)⟩");
        assert!(r.proportional_to(&g, 1e-12));

        let one = PayoffRelation::from_terms(2, 1, &[(&[1], 2.0), (&[2], -2.0)]).unwrap();
        let two = PayoffRelation::from_terms(2, 2, &[(&[1, 0], -1.0), (&[2, 0], 1.0)]).unwrap();
        assert!(one.proportional_to(&two, 1e-12));
        assert!(!one.proportional_to(&r, 1e-12));
    }
}
