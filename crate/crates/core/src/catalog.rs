//! Named prisoner's-dilemma strategies.
//!
//! Tables are written as the probability of cooperating (action 1) with rows
//! indexed by the last joint state and columns by the one before, in the
//! state order `(1,1), (1,2), (2,1), (2,2)`. Memory-one strategies list one
//! entry per last state. Player-1 strategies unless stated otherwise.

use serde::Serialize;

use crate::error::{Result, ZdError};
use crate::game::PdGame;
use crate::relation::PayoffRelation;
use crate::strategy::Strategy;

fn memory_two(player: usize, rows: [[f64; 4]; 4]) -> Strategy {
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Strategy::from_cooperation(player, 2, 2, &flat).expect("catalog tables are valid")
}

fn memory_one(player: usize, row: [f64; 4]) -> Strategy {
    Strategy::from_cooperation(player, 2, 1, &row).expect("catalog tables are valid")
}

/// Correlation-to-average strategy; needs `T − P ≥ P − S`.
pub fn make_example1(g: &PdGame) -> Result<Strategy> {
    if !g.cond_tp_ge_ps() {
        return Err(ZdError::domain(
            "example1 is only defined for T - P >= P - S; the other regime needs a modified table that is not provided",
        ));
    }
    let PdGame { r, s, t, p } = *g;
    let tp = t - p;
    let ts = t - s;
    let d = tp * ts;
    Ok(memory_two(
        0,
        [
            [
                1.0 - (r - p) * (r - s) / d,
                1.0,
                1.0 - (r - p) / tp,
                1.0 - (r - p) * (p - s) / d,
            ],
            [1.0 - (r - s) / ts, 1.0, 0.0, 1.0 - (p - s) / ts],
            [(p - s) * (r - s) / d, 0.0, (p - s) / tp, (p - s) * (p - s) / d],
            [0.0, 0.0, 0.0, 0.0],
        ],
    ))
}

/// Extended tit-for-tat. Payoff independent.
pub fn make_etft() -> Strategy {
    memory_two(
        0,
        [
            [1.0, 1.0, 1.0, 1.0],
            [0.5, 0.0, 1.0, 0.5],
            [0.5, 1.0, 0.0, 0.5],
            [0.0, 0.0, 0.0, 0.0],
        ],
    )
}

/// ETFT with the middle entries of rows 2 and 3 swapped.
pub fn make_etft2() -> Strategy {
    memory_two(
        0,
        [
            [1.0, 1.0, 1.0, 1.0],
            [0.5, 1.0, 0.0, 0.5],
            [0.5, 0.0, 1.0, 0.5],
            [0.0, 0.0, 0.0, 0.0],
        ],
    )
}

/// Fickle tit-for-tat; needs `2R > T + S`.
pub fn make_ftft(g: &PdGame) -> Result<Strategy> {
    if !g.cond_2r_gt_ts() {
        return Err(ZdError::domain("ftft requires 2R > T + S"));
    }
    let PdGame { r, s, t, p } = *g;
    let alt = (t + s) / (2.0 * r);
    let pr = p / r;
    Ok(memory_two(
        0,
        [
            [1.0, 1.0, 1.0, 1.0],
            [0.0, 1.0 - alt, 1.0 - alt, 1.0 - pr],
            [1.0, alt, alt, pr],
            [0.0, 0.0, 0.0, 0.0],
        ],
    ))
}

fn zss_scale(g: &PdGame) -> Result<f64> {
    if !(g.cond_2r_gt_ts() && g.cond_2p_lt_ts()) {
        return Err(ZdError::domain("zero-sum strategies require 2R > T + S and 2P < T + S"));
    }
    Ok((2.0 * g.r - (g.t + g.s)).max((g.t + g.s) - 2.0 * g.p))
}

/// Memory-one zero-sum strategy fixing `⟨s1⟩ + ⟨s2⟩ = T + S`.
pub fn make_zss(g: &PdGame) -> Result<Strategy> {
    let a = zss_scale(g)?;
    let PdGame { r, s, t, p } = *g;
    Ok(memory_one(
        0,
        [1.0 - (2.0 * r - (t + s)) / a, 1.0, 0.0, ((t + s) - 2.0 * p) / a],
    ))
}

/// Memory-two extension of ZSS.
pub fn make_ezss(g: &PdGame) -> Result<Strategy> {
    let a = zss_scale(g)?;
    let PdGame { r, s, t, p } = *g;
    let hi = (2.0 * r - (t + s)) / a;
    let lo = ((t + s) - 2.0 * p) / a;
    let alt = (t + s) / (2.0 * r);
    let pr = p / r;
    Ok(memory_two(
        0,
        [
            [1.0 - hi, 1.0 - alt * hi, 1.0 - alt * hi, 1.0 - pr * hi],
            [1.0, 1.0, 1.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
            [lo, alt * lo, alt * lo, pr * lo],
        ],
    ))
}

pub fn make_tft() -> Strategy {
    memory_one(0, [1.0, 0.0, 1.0, 0.0])
}

/// Deterministic tit-for-tat / anti-tit-for-tat.
pub fn make_tft_atft() -> Strategy {
    memory_two(
        0,
        [
            [1.0, 1.0, 1.0, 1.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 0.0, 1.0],
            [1.0, 0.0, 1.0, 0.0],
        ],
    )
}

pub fn make_alld() -> Strategy {
    memory_one(0, [0.0; 4])
}

pub fn make_allc() -> Strategy {
    memory_one(0, [1.0; 4])
}

pub fn make_wsls() -> Strategy {
    memory_one(0, [1.0, 0.0, 0.0, 1.0])
}

pub fn make_repeat() -> Strategy {
    Strategy::repeat(0, 2, 2, 1).expect("valid dimensions")
}

/// Player-2 opponent: cooperates with probability `q` after mutual
/// cooperation and `2/3` otherwise.
pub fn make_opponent_q(q: f64) -> Result<Strategy> {
    if !(0.0..=1.0).contains(&q) {
        return Err(ZdError::domain(format!("q = {q} is not a probability")));
    }
    let o = 2.0 / 3.0;
    Ok(memory_two(1, [[q; 4], [o; 4], [o; 4], [o; 4]]))
}

/// Moves a player-1 table to player 2 by swapping the roles in every state.
pub fn as_player_two(strategy: &Strategy) -> Result<Strategy> {
    if strategy.n_players() != 2 || strategy.n_actions() != 2 || strategy.player() != 0 {
        return Err(ZdError::domain(
            "only two-player two-action player-1 strategies can be mirrored",
        ));
    }
    let layout = *strategy.layout();
    let swap_state = |st: usize| layout.states().state_from_digits(&[st % 2, st / 2]);
    let coop: Vec<f64> = (0..layout.history_count())
        .map(|h| {
            let mirrored = (0..layout.memory()).fold(0, |acc, lag| acc * 4 + swap_state(layout.state_at(h, lag)));
            strategy.prob(0, mirrored)
        })
        .collect();
    Strategy::from_cooperation(1, 2, layout.memory(), &coop)
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub memory: usize,
    pub preconditions: &'static str,
    pub citation: &'static str,
    /// `"published"` for tables with a printed source, `"conventional"` for
    /// standard strategies included for testing.
    pub origin: &'static str,
    pub zero_determinant: Option<bool>,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "example1",
        memory: 2,
        preconditions: "T>R>P>S, T-P>=P-S",
        citation: "memory-two ZD strategy linking <s2(t+1)s1(t)> to average payoffs",
        origin: "published",
        zero_determinant: Some(true),
    },
    CatalogEntry {
        name: "etft",
        memory: 2,
        preconditions: "none",
        citation: "extended tit-for-tat",
        origin: "published",
        zero_determinant: Some(true),
    },
    CatalogEntry {
        name: "etft2",
        memory: 2,
        preconditions: "none",
        citation: "type-2 extended tit-for-tat",
        origin: "published",
        zero_determinant: Some(true),
    },
    CatalogEntry {
        name: "ftft",
        memory: 2,
        preconditions: "2R>T+S",
        citation: "fickle tit-for-tat",
        origin: "published",
        zero_determinant: Some(true),
    },
    CatalogEntry {
        name: "zss",
        memory: 1,
        preconditions: "2R>T+S, 2P<T+S",
        citation: "memory-one zero-sum strategy",
        origin: "published",
        zero_determinant: Some(true),
    },
    CatalogEntry {
        name: "ezss",
        memory: 2,
        preconditions: "2R>T+S, 2P<T+S",
        citation: "extended zero-sum strategy",
        origin: "published",
        zero_determinant: Some(true),
    },
    CatalogEntry {
        name: "tft",
        memory: 1,
        preconditions: "none",
        citation: "tit-for-tat",
        origin: "published",
        zero_determinant: Some(true),
    },
    CatalogEntry {
        name: "tft-atft",
        memory: 2,
        preconditions: "none",
        citation: "tit-for-tat / anti-tit-for-tat",
        origin: "published",
        zero_determinant: None,
    },
    CatalogEntry {
        name: "repeat",
        memory: 1,
        preconditions: "none",
        citation: "repeat own previous action",
        origin: "published",
        zero_determinant: Some(false),
    },
    CatalogEntry {
        name: "opponent-q",
        memory: 2,
        preconditions: "0<=q<=1",
        citation: "player-2 opponent: q after (1,1), 2/3 otherwise",
        origin: "published",
        zero_determinant: None,
    },
    CatalogEntry {
        name: "alld",
        memory: 1,
        preconditions: "none",
        citation: "always defect",
        origin: "conventional",
        zero_determinant: None,
    },
    CatalogEntry {
        name: "allc",
        memory: 1,
        preconditions: "none",
        citation: "always cooperate",
        origin: "conventional",
        zero_determinant: None,
    },
    CatalogEntry {
        name: "wsls",
        memory: 1,
        preconditions: "none",
        citation: "win-stay lose-shift",
        origin: "conventional",
        zero_determinant: None,
    },
];

pub fn catalog_json() -> String {
    serde_json::to_string_pretty(CATALOG).expect("static data serializes")
}

/// Looks up a catalog strategy. `q` is only used by `opponent-q`.
pub fn by_name(name: &str, g: &PdGame, q: f64) -> Result<Strategy> {
    match name {
        "example1" => make_example1(g),
        "etft" => Ok(make_etft()),
        "etft2" => Ok(make_etft2()),
        "ftft" => make_ftft(g),
        "zss" => make_zss(g),
        "ezss" => make_ezss(g),
        "tft" => Ok(make_tft()),
        "tft-atft" => Ok(make_tft_atft()),
        "alld" => Ok(make_alld()),
        "allc" => Ok(make_allc()),
        "wsls" => Ok(make_wsls()),
        "repeat" => Ok(make_repeat()),
        "opponent-q" => make_opponent_q(q),
        other => Err(ZdError::domain(format!("unknown catalog strategy '{other}'"))),
    }
}

/// The relation each published zero-determinant entry enforces, written
/// slot by slot as the payoff expansion of its Press–Dyson matrix.
pub fn enforced_relation(name: &str, g: &PdGame) -> Option<PayoffRelation> {
    let PdGame { s, t, p, .. } = *g;
    let terms: Vec<(&[usize], f64)> = match name {
        // (s2' − P)(s1'' − S)
        "example1" => vec![(&[2, 1], 1.0), (&[2, 0], -s), (&[0, 1], -p), (&[0, 0], p * s)],
        // (s1' − s2')(s2'' − s1'') ± (T − S)(s1' − s2')
        "etft" | "etft2" => {
            let sign = if name == "etft" { 1.0 } else { -1.0 };
            vec![
                (&[1, 2], 1.0),
                (&[2, 1], 1.0),
                (&[1, 1], -1.0),
                (&[2, 2], -1.0),
                (&[1, 0], sign * (t - s)),
                (&[2, 0], -sign * (t - s)),
            ]
        }
        "ftft" => vec![(&[1, 2], 1.0), (&[2, 1], -1.0), (&[1, 1], 1.0), (&[2, 2], -1.0)],
        "zss" => return PayoffRelation::from_terms(2, 1, &[(&[1], 1.0), (&[2], 1.0), (&[0], -(t + s))]).ok(),
        // (s1' + s2' − (T + S))(s1'' + s2'')
        "ezss" => vec![
            (&[1, 1], 1.0),
            (&[1, 2], 1.0),
            (&[2, 1], 1.0),
            (&[2, 2], 1.0),
            (&[0, 1], -(t + s)),
            (&[0, 2], -(t + s)),
        ],
        "tft" => return PayoffRelation::from_terms(2, 1, &[(&[1], 1.0), (&[2], -1.0)]).ok(),
        _ => return None,
    };
    PayoffRelation::from_terms(2, 2, &terms).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::validate_strategy;

    fn rows(s: &Strategy) -> Vec<Vec<f64>> {
        s.cooperation().chunks(4).map(|r| r.to_vec()).collect()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn example1_at_standard_payoffs() {
        let e = make_example1(&PdGame::standard()).unwrap();
        let r = rows(&e);
        // 1 − 6/20, 1, 1 − 2/4, 1 − 2/20
        assert!(close(&r[0], &[0.7, 1.0, 0.5, 0.9]));
        assert!(close(&r[1], &[0.4, 1.0, 0.0, 0.8]));
        assert!(close(&r[2], &[0.15, 0.0, 0.25, 0.05]));
        assert_eq!(r[3], vec![0.0; 4]);
        // T(1 | (1,1),(2,1)) = 1 − (R−P)/(T−P)
        assert_eq!(e.prob(0, 2), 0.5);
        let bad = PdGame::new(3.0, 0.0, 3.5, 2.0).unwrap();
        assert!(make_example1(&bad).is_err());
    }

    #[test]
    fn etft_variants() {
        assert_eq!(rows(&make_etft())[1], vec![0.5, 0.0, 1.0, 0.5]);
        assert_eq!(rows(&make_etft2())[1], vec![0.5, 1.0, 0.0, 0.5]);
        let mut swapped = rows(&make_etft());
        swapped[1].swap(1, 2);
        swapped[2].swap(1, 2);
        assert_eq!(swapped, rows(&make_etft2()));
        assert!(validate_strategy(&make_etft()).passed());
        assert!(validate_strategy(&make_etft2()).passed());
    }

    #[test]
    fn ftft_table() {
        let f = make_ftft(&PdGame::standard()).unwrap();
        let r = rows(&f);
        assert!(close(&r[2], &[1.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 3.0]));
        assert_eq!(r[0], vec![1.0; 4]);
        assert_eq!(r[3], vec![0.0; 4]);
        assert!(make_ftft(&PdGame::new(2.5, 0.0, 5.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn zero_sum_tables() {
        let g = PdGame::standard();
        let z = make_zss(&g).unwrap();
        assert_eq!(z.memory(), 1);
        assert!((z.cooperation()[0] - 2.0 / 3.0).abs() < 1e-15);
        let ez = rows(&make_ezss(&g).unwrap());
        assert_eq!(ez[1], vec![1.0; 4]);
        assert_eq!(ez[2], vec![0.0; 4]);
        assert!((ez[0][3] - 8.0 / 9.0).abs() < 1e-15);
        assert!(make_zss(&PdGame::new(2.5, 0.0, 5.0, 1.0).unwrap()).is_err());
        assert!(make_ezss(&PdGame::new(4.0, 0.0, 5.0, 3.0).unwrap()).is_err());
    }

    #[test]
    fn simple_tables() {
        assert_eq!(rows(&make_tft_atft())[3], vec![1.0, 0.0, 1.0, 0.0]);
        assert!(make_alld().cooperation().iter().all(|&p| p == 0.0));
        assert!(make_allc().cooperation().iter().all(|&p| p == 1.0));
    }

    #[test]
    fn opponent_family() {
        let o = rows(&make_opponent_q(0.0).unwrap());
        assert_eq!(o[0], vec![0.0; 4]);
        assert!(o[1..].iter().flatten().all(|&p| p == 2.0 / 3.0));
        let c = make_opponent_q(2.0 / 3.0).unwrap();
        assert!(c.cooperation().iter().all(|&p| p == 2.0 / 3.0));
        for q in [0.0, 0.5, 1.0] {
            assert!(validate_strategy(&make_opponent_q(q).unwrap()).passed());
        }
        assert!(make_opponent_q(1.5).is_err());
        assert!(make_opponent_q(-0.1).is_err());
    }

    #[test]
    fn mirror_tft() {
        let t2 = as_player_two(&make_tft()).unwrap();
        // Player 2 copies player 1: cooperate after (1,·).
        assert_eq!(t2.cooperation(), vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn lookup() {
        let g = PdGame::standard();
        for e in CATALOG {
            let s = by_name(e.name, &g, 0.5).unwrap();
            assert_eq!(s.memory(), e.memory, "{}", e.name);
        }
        assert!(by_name("nope", &g, 0.5).is_err());
        assert!(catalog_json().contains("\"conventional\""));
    }
}
