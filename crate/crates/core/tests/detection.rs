use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zd_core::catalog::{self, enforced_relation};
use zd_core::{
    detect_zd, detect_zd_memory_n, feasible_strategy_for, press_dyson, Feasibility, GameSpec, PayoffRelation, PdGame,
    Strategy, ZdOutcome,
};

const ZD_NAMES: [&str; 7] = ["example1", "etft", "etft2", "ftft", "zss", "ezss", "tft"];

fn certificate(outcome: &ZdOutcome) -> &zd_core::ZdCertificate {
    outcome
        .certificate()
        .unwrap_or_else(|| panic!("expected a certificate, got {outcome:?}"))
}

fn pd_rows(s: &Strategy) -> Vec<Vec<f64>> {
    press_dyson(s).slice(0).chunks(4).map(|r| r.to_vec()).collect()
}

#[test]
fn press_dyson_matrices() {
    let g = PdGame::standard();
    let etft = pd_rows(&catalog::make_etft());
    assert_eq!(etft[0], vec![0.0; 4]);
    assert_eq!(etft[1], vec![-0.5, -1.0, 0.0, -0.5]);
    assert_eq!(etft[2], vec![0.5, 1.0, 0.0, 0.5]);

    // −(R−P)(R−S)/((T−P)(T−S)) = −6/20
    let ex1 = pd_rows(&catalog::make_example1(&g).unwrap());
    assert!((ex1[0][0] + 0.3).abs() < 1e-15);
    assert_eq!(ex1[1][2], -1.0);

    let repeat = catalog::make_repeat().promote(2).unwrap();
    assert!(press_dyson(&repeat).slice(0).iter().all(|&x| x == 0.0));

    let ftft = pd_rows(&catalog::make_ftft(&g).unwrap());
    assert_eq!(ftft[1][0], -1.0);
    assert!((ftft[2][3] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn press_dyson_rows_sum_to_zero_and_stay_in_range() {
    let g = PdGame::standard();
    for e in catalog::CATALOG {
        let s = catalog::by_name(e.name, &g, 0.3).unwrap();
        for memory in s.memory()..=3 {
            let pd = press_dyson(&s.promote(memory).unwrap());
            assert!(pd.row_sum_residual() < 1e-15, "{}", e.name);
            for a in 0..2 {
                assert!(pd.slice(a).iter().all(|x| (-1.0..=1.0).contains(x)));
            }
        }
    }
}

#[test]
fn catalog_certificates_match_published_relations() {
    let g = PdGame::standard();
    let game = g.game();
    for name in ZD_NAMES {
        let s = catalog::by_name(name, &g, 0.0).unwrap();
        let outcome = detect_zd(&s, &game).unwrap();
        let cert = certificate(&outcome);
        assert!(cert.residual < 1e-9, "{name}: residual {}", cert.residual);
        assert!(!cert.basis_degenerate());
        let expected = enforced_relation(name, &g).unwrap();
        assert!(
            cert.relation.proportional_to(&expected, 1e-9),
            "{name}: got\n{}expected\n{}",
            cert.relation.gauge_fixed().render_coefficients(),
            expected.gauge_fixed().render_coefficients()
        );
        let cmax = cert.c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((cmax - 1.0).abs() < 1e-12);
        assert!((cert.c.iter().sum::<f64>()).abs() < 1e-12);
    }
}

#[test]
fn example1_and_ftft_coefficient_patterns() {
    let g = PdGame::standard();
    let game = g.game();

    let ex1 = detect_zd(&catalog::make_example1(&g).unwrap(), &game).unwrap();
    // 0 = ⟨s2(t+1)s1(t)⟩ − S⟨s2⟩ − P⟨s1⟩ + PS with S = 0, P = 1; first nonzero in
    // canonical order is α[0,1] = −P.
    let r = certificate(&ex1).relation.gauge_fixed();
    assert!((r.coeff(&[0, 1]) - 1.0).abs() < 1e-12);
    assert!((r.coeff(&[2, 1]) + 1.0).abs() < 1e-12);
    assert_eq!(r.coeff(&[2, 0]), 0.0);
    assert_eq!(r.coeff(&[0, 0]), 0.0);

    let ftft = detect_zd(&catalog::make_ftft(&g).unwrap(), &game).unwrap();
    let r = certificate(&ftft).relation.gauge_fixed();
    for (beta, v) in [([1, 1], 1.0), ([1, 2], 1.0), ([2, 1], -1.0), ([2, 2], -1.0)] {
        assert!((r.coeff(&beta) - v).abs() < 1e-12, "{beta:?}");
    }
    for beta in [[0, 0], [0, 1], [0, 2], [1, 0], [2, 0]] {
        assert_eq!(r.coeff(&beta), 0.0, "{beta:?}");
    }
}

#[test]
fn tft_enforces_equal_payoffs() {
    let game = PdGame::standard().game();
    let tft = catalog::make_tft();
    let r = certificate(&detect_zd(&tft, &game).unwrap()).relation.gauge_fixed();
    assert!((r.coeff(&[1, 0]) - 1.0).abs() < 1e-12);
    assert!((r.coeff(&[2, 0]) + 1.0).abs() < 1e-12);
    assert_eq!(r.render_relation(), "0 = ⟨s1(t+1)⟩ - ⟨s2(t+1)⟩");
}

#[test]
fn random_strategies_are_not_zd() {
    let game = PdGame::standard().game();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = Vec::with_capacity(32);
        for _ in 0..16 {
            let a: f64 = rng.gen();
            let b: f64 = rng.gen();
            table.push(a / (a + b));
            table.push(b / (a + b));
        }
        // Row normalization by division can be off by an ulp.
        for row in table.chunks_mut(2) {
            row[1] = 1.0 - row[0];
        }
        let layout = zd_core::HistoryLayout::new(2, 2, 2).unwrap();
        let s = Strategy::new(0, layout, table).unwrap();
        match detect_zd(&s, &game).unwrap() {
            ZdOutcome::NotZd { residual } => assert!(residual > 1e-3, "seed {seed}: {residual}"),
            other => panic!("seed {seed}: {other:?}"),
        }
    }
}

#[test]
fn detection_survives_affine_payoff_changes() {
    let g = PdGame::standard();
    let game = g.game();
    let random = Strategy::from_cooperation(
        0,
        2,
        2,
        &(0..16).map(|i| ((i * 5 + 3) % 16) as f64 / 16.0).collect::<Vec<_>>(),
    )
    .unwrap();
    for (u, v) in [(1.0, 0.0), (2.0, -7.0), (0.1, 3.0), (13.0, 0.5)] {
        let shifted = game.affine(u, v).unwrap();
        for name in ZD_NAMES {
            let s = catalog::by_name(name, &g, 0.0).unwrap();
            assert!(detect_zd(&s, &shifted).unwrap().is_zd(), "{name} at ({u},{v})");
        }
        assert!(!detect_zd(&random, &shifted).unwrap().is_zd());
        assert!(!detect_zd(&catalog::make_tft_atft(), &shifted).unwrap().is_zd());
    }
}

#[test]
fn memory_one_detection() {
    let g = PdGame::standard();
    let game = g.game();
    let zss = certificate(&detect_zd_memory_n(&catalog::make_zss(&g).unwrap(), &game, 1).unwrap()).clone();
    // ⟨s1⟩ + ⟨s2⟩ − (T + S) = 0
    let expected = PayoffRelation::from_terms(2, 1, &[(&[1], 1.0), (&[2], 1.0), (&[0], -5.0)]).unwrap();
    assert!(zss.relation.proportional_to(&expected, 1e-12));
    assert_eq!(zss.memory, 1);

    let tft = certificate(&detect_zd_memory_n(&catalog::make_tft(), &game, 1).unwrap()).clone();
    assert!(tft
        .relation
        .proportional_to(&enforced_relation("tft", &g).unwrap(), 1e-12));
    // WSLS is not a memory-one ZD strategy for (3,0,5,1).
    assert!(!detect_zd_memory_n(&catalog::make_wsls(), &game, 1).unwrap().is_zd());
}

#[test]
fn promotion_to_memory_three_only_adds_index_zero() {
    let g = PdGame::standard();
    let game = g.game();
    for name in ["example1", "etft", "etft2", "ftft", "ezss"] {
        let s = catalog::by_name(name, &g, 0.0).unwrap();
        let two = certificate(&detect_zd_memory_n(&s, &game, 2).unwrap()).clone();
        let three = certificate(&detect_zd_memory_n(&s, &game, 3).unwrap()).clone();
        let r = three.relation.gauge_fixed();
        for (i, &c) in r.coeffs().iter().enumerate() {
            if c != 0.0 {
                assert_eq!(i % 3, 0, "{name}: oldest slot used at index {i}");
            }
        }
        assert!(
            two.relation.promote(3).unwrap().proportional_to(&three.relation, 1e-9),
            "{name}\n{}\n{}",
            two.relation.promote(3).unwrap().gauge_fixed().render_coefficients(),
            r.render_coefficients()
        );
    }
}

#[test]
fn feasibility_round_trip_for_catalog() {
    let g = PdGame::standard();
    let game = g.game();
    for name in ZD_NAMES {
        let s = catalog::by_name(name, &g, 0.0).unwrap();
        let cert = certificate(&detect_zd(&s, &game).unwrap()).clone();
        match feasible_strategy_for(&cert.relation, &game, 0, &[1.0, 0.0]).unwrap() {
            Feasibility::Feasible(f) => {
                let again = detect_zd(&f.strategy, &game).unwrap();
                assert!(
                    certificate(&again).relation.proportional_to(&cert.relation, 1e-9),
                    "{name}"
                );
            }
            other => panic!("{name}: {other:?}"),
        }
    }
}

#[test]
fn feasibility_reproduces_example1() {
    let g = PdGame::standard();
    let game = g.game();
    let target = enforced_relation("example1", &g).unwrap();
    match feasible_strategy_for(&target, &game, 0, &[1.0, 0.0]).unwrap() {
        Feasibility::Feasible(f) => {
            // k = −1/((T−P)(T−S))
            assert!((f.k + 1.0 / 20.0).abs() < 1e-15);
            let expected = catalog::make_example1(&g).unwrap();
            for (a, b) in f.strategy.cooperation().iter().zip(expected.cooperation()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn reverse_target_is_infeasible() {
    let g = PdGame::standard();
    let game = g.game();
    // (s1' − P)(s2'' − S)
    let target = PayoffRelation::from_terms(
        2,
        2,
        &[(&[1, 2], 1.0), (&[1, 0], -g.s), (&[0, 2], -g.p), (&[0, 0], g.p * g.s)],
    )
    .unwrap();
    match feasible_strategy_for(&target, &game, 0, &[1.0, 0.0]).unwrap() {
        Feasibility::Infeasible { upper, lower } => {
            assert_eq!(upper.hi, 0.0);
            assert_eq!(lower.lo, 0.0);
            assert!(upper.lo < 0.0 && lower.hi > 0.0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn player_two_detection_uses_own_action() {
    let g = PdGame::standard();
    let game = g.game();
    let tft2 = catalog::as_player_two(&catalog::make_tft()).unwrap();
    let cert = certificate(&detect_zd(&tft2, &game).unwrap()).clone();
    // Mirrored TFT still enforces ⟨s1⟩ = ⟨s2⟩.
    assert!(cert
        .relation
        .proportional_to(&enforced_relation("tft", &g).unwrap(), 1e-12));
}

#[test]
fn three_player_games_are_supported() {
    // Public goods style payoffs; player 1 repeats its own action, so the
    // detector reports the vacuous relation.
    let states = zd_core::StateLayout::new(3, 2).unwrap();
    let payoffs: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            (0..states.state_count())
                .map(|s| {
                    let coop = (0..3).filter(|&p| states.action_digit(s, p) == 0).count() as f64;
                    1.5 * coop / 3.0 * 2.0 - if states.action_digit(s, a) == 0 { 1.0 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let game = GameSpec::new(3, 2, payoffs).unwrap();
    let repeat = Strategy::repeat(0, 3, 2, 1).unwrap();
    assert_eq!(detect_zd(&repeat, &game).unwrap(), ZdOutcome::Vacuous);
    let layout = zd_core::HistoryLayout::new(3, 2, 1).unwrap();
    let s = Strategy::new(
        0,
        layout,
        (0..8).flat_map(|i| [i as f64 / 8.0, 1.0 - i as f64 / 8.0]).collect(),
    )
    .unwrap();
    let _ = detect_zd_memory_n(&s, &game, 1).unwrap();
}

#[test]
fn constructed_strategies_are_detected() {
    // V = (s1' − s2')·W with W > 0 on older slots is always feasible for
    // player 1; detection must recover the same relation at n = 2 and 3.
    let game = PdGame::standard().game();
    for seed in 0..60u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed % 2) as usize;
        let older = 3usize.pow(n as u32 - 1);
        let mut coeffs = vec![0.0; 3 * older];
        for j in 0..older {
            let w = match j {
                0 => rng.gen_range(0.1..2.0),
                _ if rng.gen_bool(0.5) => rng.gen_range(0.0..2.0),
                _ => 0.0,
            };
            coeffs[older + j] += w;
            coeffs[2 * older + j] -= w;
        }
        let target = PayoffRelation::new(2, n, coeffs.clone()).unwrap();
        let Feasibility::Feasible(f) = zd_core::feasible_from_coefficients(&coeffs, n, &game, 0, &[1.0, 0.0]).unwrap()
        else {
            panic!("seed {seed}: not feasible");
        };
        let cert = certificate(&detect_zd_memory_n(&f.strategy, &game, n).unwrap()).clone();
        assert!(cert.relation.proportional_to(&target, 1e-8), "seed {seed}");
    }
}
