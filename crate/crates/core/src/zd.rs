//! Press–Dyson tensors and zero-determinant strategy detection.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, ZdError};
use crate::game::GameSpec;
use crate::history::HistoryLayout;
use crate::markov::StationaryDistribution;
use crate::relation::{basis_size, basis_value, fmt_coeff, multi_index, PayoffRelation};
use crate::strategy::Strategy;

/// Residual below which a strategy is certified as zero-determinant.
pub const DETECTION_TOL: f64 = 1e-9;

/// Largest payoff-product basis `(N+1)^n` the detector accepts.
pub const MAX_BASIS: usize = 10_000;

/// Largest dense system (histories × basis functions) the detector builds.
pub const MAX_SYSTEM_ENTRIES: usize = 4_000_000;

/// Relative threshold for dropping linearly dependent basis columns.
const BASIS_RANK_TOL: f64 = 1e-10;

/// `T̂_a(σ|h) = T_a(σ|h) − [σ = a's own action in the last round]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressDysonTensor {
    player: usize,
    layout: HistoryLayout,
    values: Vec<f64>,
}

impl PressDysonTensor {
    pub fn player(&self) -> usize {
        self.player
    }

    pub fn layout(&self) -> &HistoryLayout {
        &self.layout
    }

    pub fn memory(&self) -> usize {
        self.layout.memory()
    }

    pub fn value(&self, action: usize, history: usize) -> f64 {
        self.values[history * self.layout.n_actions() + action]
    }

    /// `T̂(action | h)` for every history in canonical order.
    pub fn slice(&self, action: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(action)
            .step_by(self.layout.n_actions())
            .copied()
            .collect()
    }

    /// `max_h |Σ_σ T̂(σ|h)|`.
    pub fn row_sum_residual(&self) -> f64 {
        self.values
            .chunks(self.layout.n_actions())
            .map(|row| row.iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

pub fn press_dyson(strategy: &Strategy) -> PressDysonTensor {
    let layout = *strategy.layout();
    let m = layout.n_actions();
    let mut values = strategy.table().to_vec();
    for h in 0..layout.history_count() {
        values[h * m + layout.last_action(h, strategy.player())] -= 1.0;
    }
    PressDysonTensor {
        player: strategy.player(),
        layout,
        values,
    }
}

/// `Σ_h T̂(σ|h) π(h)` for every action `σ`.
pub fn akin_residual(pd: &PressDysonTensor, dist: &StationaryDistribution) -> Result<Vec<f64>> {
    if pd.layout != *dist.layout() {
        return Err(ZdError::domain(format!(
            "tensor has memory {} but the distribution has memory {}",
            pd.memory(),
            dist.memory()
        )));
    }
    let m = pd.layout.n_actions();
    let mut out = vec![0.0; m];
    for (h, &w) in dist.weights().iter().enumerate() {
        for (a, o) in out.iter_mut().enumerate() {
            *o += pd.values[h * m + a] * w;
        }
    }
    Ok(out)
}

/// Evidence that `Σ_σ c_σ T̂(σ|·) = Σ_β α_β s_β(·)` holds on every history.
#[derive(Debug, Clone, PartialEq)]
pub struct ZdCertificate {
    pub memory: usize,
    /// Action weights, orthogonal to the all-ones vector, `‖c‖∞ = 1`, first
    /// nonzero entry positive.
    pub c: Vec<f64>,
    /// `α` in the same scale as `c`.
    pub relation: PayoffRelation,
    /// `max_h |Σ c T̂ − Σ α s_β|`.
    pub residual: f64,
    /// Relative distance from the tensor to the payoff basis span.
    pub fit_residual: f64,
    /// `Σ_σ c_σ T̂(σ|h)` per history.
    pub combination: Vec<f64>,
    /// Basis multi-indices dropped as linearly dependent on earlier ones.
    pub dropped_basis: Vec<usize>,
}

impl ZdCertificate {
    pub fn basis_degenerate(&self) -> bool {
        !self.dropped_basis.is_empty()
    }

    /// Text form: `c[σ]` lines, gauge-fixed `α[...]` lines, the relation and
    /// the residual.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, c) in self.c.iter().enumerate() {
            let _ = writeln!(out, "c[{}] = {}", i + 1, fmt_coeff(*c));
        }
        let fixed = self.relation.gauge_fixed();
        out.push_str(&fixed.render_coefficients());
        let _ = writeln!(out, "relation: {}", fixed.render_relation());
        let _ = writeln!(out, "residual = {:e}", self.residual);
        if self.basis_degenerate() {
            let dropped: Vec<String> = self
                .dropped_basis
                .iter()
                .map(|&i| {
                    let beta: Vec<String> = multi_index(i, self.relation.n_players(), self.memory)
                        .iter()
                        .map(|b| b.to_string())
                        .collect();
                    format!("[{}]", beta.join(","))
                })
                .collect();
            let _ = writeln!(out, "degenerate basis, dropped: {}", dropped.join(" "));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZdOutcome {
    Certificate(ZdCertificate),
    NotZd {
        residual: f64,
    },
    /// Every combination `Σ c T̂` with `c` off the all-ones direction
    /// vanishes, so only the empty relation `0 = 0` is enforced (e.g. Repeat).
    Vacuous,
}

impl ZdOutcome {
    pub fn certificate(&self) -> Option<&ZdCertificate> {
        match self {
            ZdOutcome::Certificate(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zd(&self) -> bool {
        matches!(self, ZdOutcome::Certificate(_))
    }
}

/// Memory-two detection.
pub fn detect_zd(strategy: &Strategy, game: &GameSpec) -> Result<ZdOutcome> {
    detect_zd_memory_n(strategy, game, 2)
}

/// Searches for `(c, α)` with `Σ_σ c_σ T̂(σ|h) = Σ_β α_β s_β(h)` over the
/// `n`-fold payoff-product basis, `c` not proportional to all-ones.
pub fn detect_zd_memory_n(strategy: &Strategy, game: &GameSpec, n: usize) -> Result<ZdOutcome> {
    if !strategy.matches_game(game) {
        return Err(ZdError::domain("strategy dimensions do not match the game"));
    }
    if strategy.memory() > n {
        return Err(ZdError::domain(format!(
            "memory-{} strategy cannot be analysed at memory {}",
            strategy.memory(),
            n
        )));
    }
    let n_players = game.n_players();
    let k = basis_size(n_players, n)
        .filter(|&k| k <= MAX_BASIS)
        .ok_or_else(|| ZdError::Resource(format!("basis ({}^{}) exceeds {}", n_players + 1, n, MAX_BASIS)))?;
    let layout = HistoryLayout::new(n_players, game.n_actions(), n)?;
    let rows = layout.history_count();
    if rows.saturating_mul(k) > MAX_SYSTEM_ENTRIES {
        return Err(ZdError::Resource(format!(
            "{rows}×{k} system exceeds {MAX_SYSTEM_ENTRIES} entries"
        )));
    }
    let strategy = strategy.promote(n)?;
    let pd = press_dyson(&strategy);
    let m = game.n_actions();
    if m < 2 {
        return Ok(ZdOutcome::Vacuous);
    }

    let u = complement_of_ones(m);
    let t_hat = DMatrix::from_row_slice(rows, m, &pd.values);
    let y = &t_hat * &u;
    let y_svd = y.clone().svd(true, true);
    let y_scale = y_svd.singular_values.max();
    let y_rank_cut = 1e-12 * y_scale.max(1.0);
    let range: Vec<usize> = (0..y_svd.singular_values.len())
        .filter(|&i| y_svd.singular_values[i] > y_rank_cut)
        .collect();
    if range.is_empty() {
        return Ok(ZdOutcome::Vacuous);
    }
    let u_y = y_svd.u.as_ref().expect("requested");
    let v_y_t = y_svd.v_t.as_ref().expect("requested");
    let q_y = u_y.select_columns(&range);

    let basis = DMatrix::from_fn(rows, k, |h, j| {
        basis_value(game, &layout, &multi_index(j, n_players, n), h)
    });
    let (q_b, kept) = orthonormal_columns(&basis);
    let dropped: Vec<usize> = (0..k).filter(|j| !kept.contains(j)).collect();

    let projected = &q_b * (q_b.transpose() * &q_y);
    let gap = &q_y - projected;
    let gap_svd = gap.svd(false, true);
    let (min_idx, fit_residual) =
        gap_svd
            .singular_values
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, s)| if s < best.1 { (i, s) } else { best },
            );
    if fit_residual.is_nan() || fit_residual >= DETECTION_TOL {
        return Ok(ZdOutcome::NotZd { residual: fit_residual });
    }

    let v = gap_svd.v_t.as_ref().expect("requested").row(min_idx).transpose();
    let w = &q_y * &v;
    // Y = U Σ Vᵀ, so Y d = Q_Y v for d = V Σ⁻¹ v.
    let scaled = DVector::from_iterator(
        range.len(),
        range.iter().enumerate().map(|(j, &i)| v[j] / y_svd.singular_values[i]),
    );
    let d = v_y_t.select_rows(&range).transpose() * scaled;
    let mut c = &u * d;

    let b_kept = DMatrix::from_fn(rows, kept.len(), |h, j| basis[(h, kept[j])]);
    let alpha_kept = b_kept
        .svd(true, true)
        .solve(&w, 1e-14)
        .map_err(|e| ZdError::Domain(format!("coefficient solve failed: {e}")))?;
    let mut alpha = vec![0.0; k];
    for (j, &col) in kept.iter().enumerate() {
        alpha[col] = alpha_kept[j];
    }

    let c_max = c.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let lead = c.iter().copied().find(|x| x.abs() > 1e-12 * c_max).unwrap_or(c_max);
    let gauge = lead.signum() * c_max;
    c /= gauge;
    alpha.iter_mut().for_each(|a| *a /= gauge);
    // Entries at the level of the fit noise are zero; the gauge-fixed form
    // picks its leading coefficient from what survives.
    let alpha_cut = DETECTION_TOL * alpha.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    alpha.iter_mut().for_each(|a| {
        if a.abs() <= alpha_cut {
            *a = 0.0
        }
    });
    c.iter_mut().for_each(|x| {
        if x.abs() <= DETECTION_TOL {
            *x = 0.0
        }
    });

    let combination: Vec<f64> = (0..rows).map(|h| (0..m).map(|s| c[s] * pd.value(s, h)).sum()).collect();
    let relation = PayoffRelation::new(n_players, n, alpha)?;
    let residual = (0..rows)
        .map(|h| (combination[h] - relation.evaluate(game, &layout, h)).abs())
        .fold(0.0, f64::max);

    Ok(ZdOutcome::Certificate(ZdCertificate {
        memory: n,
        c: c.iter().copied().collect(),
        relation,
        residual,
        fit_residual,
        combination,
        dropped_basis: dropped,
    }))
}

/// Orthonormal basis (columns) of the complement of the all-ones vector.
fn complement_of_ones(m: usize) -> DMatrix<f64> {
    let mut u = DMatrix::zeros(m, m - 1);
    for j in 0..m - 1 {
        // Helmert contrasts: j+1 ones, then −(j+1), normalized.
        let norm = (((j + 1) * (j + 2)) as f64).sqrt();
        for i in 0..=j {
            u[(i, j)] = 1.0 / norm;
        }
        u[(j + 1, j)] = -((j + 1) as f64) / norm;
    }
    u
}

/// Modified Gram–Schmidt in column order; returns the orthonormal columns
/// and the indices of the input columns that contributed one.
fn orthonormal_columns(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let mut kept_cols: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    for j in 0..a.ncols() {
        let col = a.column(j).into_owned();
        let norm0 = col.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = col;
        // Two passes keep the basis orthogonal to working precision.
        for _ in 0..2 {
            for q in &kept_cols {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm > BASIS_RANK_TOL * norm0 {
            kept_cols.push(v / norm);
            kept.push(j);
        }
    }
    let q = DMatrix::from_columns(&kept_cols);
    (q, kept)
}
