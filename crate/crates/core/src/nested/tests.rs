use super::*;
use crate::model::testutil::random_model;
use crate::model::{load_model_str, Belief, PosgModel, ProbTable};

/// Independent oracle: strategy-weighted expectimax over the joint-action
/// tree, written as a direct recursion over (state, steps-to-go).
fn expectimax_value(model: &PosgModel, seat: Perspective, strategy: &StrategyTable, s: usize, h: usize) -> f64 {
    if h == 0 {
        return 0.0;
    }
    let view = model.view(seat);
    let mut best = f64::NEG_INFINITY;
    for a in 0..view.num_own_actions() {
        let mut weighted = 0.0;
        for c in 0..view.num_other_actions() {
            let mut q = view.reward(s, a, c);
            let mut cont = 0.0;
            for &(s_next, p) in view.successors(s, a, c) {
                cont += p * expectimax_value(model, seat, strategy, s_next as usize, h - 1);
            }
            q += view.discount() * cont;
            weighted += strategy.prob(s, c) * q;
        }
        best = best.max(weighted);
    }
    best
}

fn one_state_model(reward: f64, discount: f64) -> PosgModel {
    let mut tb = ProbTable::builder(1);
    tb.push_dense_row(&[1.0]);
    let mut zb = ProbTable::builder(1);
    zb.push_dense_row(&[1.0]);
    PosgModel::new(
        1,
        1,
        1,
        1,
        tb.finish(),
        zb.finish(),
        None,
        vec![reward],
        discount,
        Belief::uniform(1),
        false,
    )
}

#[test]
fn zero_prev_values_give_immediate_reward() {
    let model = random_model(42, 3, 2, 2, 2, 0.9, -4.0, 4.0);
    let view = model.view(Perspective::Own);
    let strategy = StrategyTable::uniform(3, 2);
    let out = mdp_backup(&view, &strategy, &[0.0, 0.0, 0.0]).unwrap();
    for s in 0..3 {
        for u in 0..2 {
            for v in 0..2 {
                assert_eq!(out.q.value(s, u, v), model.reward(s, u, v));
            }
        }
    }
}

#[test]
fn one_state_closed_form() {
    let model = one_state_model(1.0, 0.5);
    let view = model.view(Perspective::Own);
    let strategy = StrategyTable::uniform(1, 1);
    let out = mdp_backup(&view, &strategy, &[2.0]).unwrap();
    assert_eq!(out.q.value(0, 0, 0), 2.0); // 1 + 0.5 * 2
    assert_eq!(out.values[0], 2.0);
}

#[test]
fn three_sweeps_match_brute_force_expectimax() {
    let model = random_model(7, 4, 2, 3, 2, 0.85, -3.0, 3.0);
    let strategy = StrategyTable::uniform(4, 3);
    let view = model.view(Perspective::Own);
    let solved = solve_mdp(&view, &strategy, 3).unwrap();
    for s in 0..4 {
        let oracle = expectimax_value(&model, Perspective::Own, &strategy, s, 3);
        assert!(
            (solved.values[s] - oracle).abs() < 1e-12,
            "state {s}: {} vs oracle {oracle}",
            solved.values[s]
        );
    }
}

#[test]
fn unnormalized_strategy_is_rejected() {
    let model = random_model(1, 2, 2, 2, 2, 0.9, 0.0, 1.0);
    let view = model.view(Perspective::Own);
    let bad = StrategyTable::uniform(2, 2); // wrong shape is also caught
    let err = mdp_backup(&view, &bad, &[0.0, 0.0]).unwrap_err();
    assert!(matches!(err, NestedError::StrategyShape(..)));
}

#[test]
fn q_magnitude_respects_discounted_sum_bound() {
    let model = random_model(13, 5, 3, 2, 2, 0.9, -6.0, 6.0);
    let view = model.view(Perspective::Own);
    let strategy = StrategyTable::uniform(5, 2);
    for h in [1usize, 3, 7] {
        let solved = solve_mdp(&view, &strategy, h).unwrap();
        let phi = model.discount;
        let bound = model.reward_bound() * (1.0 - phi.powi(h as i32)) / (1.0 - phi) + 1e-6;
        for q in solved.q.flat() {
            assert!(q.abs() <= bound, "|{q}| > {bound} at h={h}");
        }
    }
}

#[test]
fn reasoning_model_unique_maximizer_is_one_hot() {
    let model = random_model(21, 3, 3, 2, 2, 0.9, -1.0, 1.0);
    let view = model.view(Perspective::Own);
    let strategy = StrategyTable::uniform(3, 2);
    let solved = solve_mdp(&view, &strategy, 4).unwrap();
    let policy = reasoning_model_from_q(&solved.q, &strategy, OPT_TIE_TOL);
    for s in 0..3 {
        let row = policy.row(s);
        // Random continuous rewards: ties have probability zero.
        assert_eq!(row.iter().filter(|&&p| p == 1.0).count(), 1, "row {row:?}");
        assert_eq!(row.iter().filter(|&&p| p == 0.0).count(), 2);
    }
}

#[test]
fn reasoning_model_full_tie_is_uniform() {
    // Constant rewards make every action optimal.
    let model = one_state_model(1.0, 0.5);
    let view = model.view(Perspective::Own);
    let strategy = StrategyTable::uniform(1, 1);
    let solved = solve_mdp(&view, &strategy, 2).unwrap();
    let policy = reasoning_model_from_q(&solved.q, &strategy, OPT_TIE_TOL);
    assert_eq!(policy.row(0), &[1.0]);

    // Three-action single-state game, all rewards equal.
    let mut tb = ProbTable::builder(1);
    for _ in 0..3 {
        tb.push_dense_row(&[1.0]);
    }
    let mut zb = ProbTable::builder(1);
    zb.push_dense_row(&[1.0]);
    let m3 = PosgModel::new(
        1,
        3,
        1,
        1,
        tb.finish(),
        zb.finish(),
        None,
        vec![2.0, 2.0, 2.0],
        0.9,
        Belief::uniform(1),
        false,
    );
    let solved = solve_mdp(&m3.view(Perspective::Own), &StrategyTable::uniform(1, 1), 3).unwrap();
    let policy = reasoning_model_from_q(&solved.q, &StrategyTable::uniform(1, 1), OPT_TIE_TOL);
    for p in policy.row(0) {
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn reasoning_model_partial_tie_splits_mass() {
    // One state, three own actions with values 1.0, 1.0 + eps/2, 0.0.
    let mut tb = ProbTable::builder(1);
    for _ in 0..3 {
        tb.push_dense_row(&[1.0]);
    }
    let mut zb = ProbTable::builder(1);
    zb.push_dense_row(&[1.0]);
    let model = PosgModel::new(
        1,
        3,
        1,
        1,
        tb.finish(),
        zb.finish(),
        None,
        vec![1.0, 1.0 + 5e-10, 0.0],
        0.9,
        Belief::uniform(1),
        false,
    );
    let view = model.view(Perspective::Own);
    let strategy = StrategyTable::uniform(1, 1);
    let out = mdp_backup(&view, &strategy, &[0.0]).unwrap();
    let policy = reasoning_model_from_q(&out.q, &strategy, 1e-9);
    assert_eq!(policy.row(0), &[0.5, 0.5, 0.0]);
}

#[test]
fn prediction_level_zero_is_uniform() {
    let model = random_model(3, 2, 2, 5, 2, 0.9, -1.0, 1.0);
    let stack = solve_nested(&model, Perspective::Own, 0, 3, None).unwrap();
    let pred = predict_mixed_strategy(&stack, 0).unwrap();
    for s in 0..2 {
        for v in 0..5 {
            assert_eq!(pred.prob(s, v), 0.2);
        }
    }
}

#[test]
fn prediction_level_one_equals_level_zero_model() {
    let model = random_model(5, 3, 2, 2, 2, 0.9, -2.0, 2.0);
    let stack = solve_nested(&model, Perspective::Own, 1, 4, None).unwrap();
    let pred = predict_mixed_strategy(&stack, 1).unwrap();
    assert_eq!(pred, stack.opponent_models[0]);
}

#[test]
fn prediction_level_two_mixes_models() {
    // Hand-check on a 2-action game: pi0 uniform over both actions, pi1
    // one-hot, uniform p -> (0.75, 0.25) ordering depending on the one-hot.
    let pi0 = StrategyTable::from_flat(1, 2, vec![0.5, 0.5]).unwrap();
    let pi1 = StrategyTable::from_flat(1, 2, vec![1.0, 0.0]).unwrap();
    let mixed = StrategyTable::mixture(&[&pi0, &pi1], &[0.5, 0.5]).unwrap();
    assert_eq!(mixed.row(0), &[0.75, 0.25]);
}

#[test]
fn prediction_missing_level_errors() {
    let model = random_model(5, 3, 2, 2, 2, 0.9, -2.0, 2.0);
    let stack = solve_nested(&model, Perspective::Own, 1, 4, None).unwrap();
    let err = predict_mixed_strategy(&stack, 2).unwrap_err();
    assert!(matches!(err, NestedError::MissingLevel(1, 1)));
}

#[test]
fn level_zero_is_plain_value_iteration_against_uniform() {
    let model = random_model(17, 4, 3, 3, 2, 0.9, -5.0, 5.0);
    let stack = solve_nested(&model, Perspective::Own, 0, 6, None).unwrap();
    let direct = solve_mdp(&model.view(Perspective::Own), &StrategyTable::uniform(4, 3), 6).unwrap();
    assert_eq!(stack.top_q.flat(), direct.q.flat());
    assert_eq!(stack.top_values, direct.values);
}

/// Committed 3-state fixture; the expected numbers below are reproduced by
/// unrolling the two-step backup by hand in `hand_unrolled_level_one`.
const FIXTURE: &str = "\
posg-model v1
states 3
actions_self 2
actions_other 2
observations 1
discount 0.5
zero_sum true
T
1 0 0
0 1 0
0 0 1
0.5 0.5 0
1 0 0
0 0 1
0 1 0
0.2 0.3 0.5
0 0 1
1 0 0
0.5 0 0.5
0 1 0
Z
1
1
1
1
1
1
R
1 -1
0 2
-2 1
3 0
0 -1
1 1
b0
1 0 0
";

#[test]
fn hand_unrolled_level_one_matches_solver() {
    let model = load_model_str(FIXTURE).unwrap();
    let stack = solve_nested(&model, Perspective::Own, 1, 2, None).unwrap();

    // Step 1 of the unroll: the opponent's level-0 problem. From the
    // opponent seat, own action = v, other = u (uniform), reward negated.
    let ns = 3;
    let mut opp_q1 = vec![[[0.0f64; 2]; 2]; ns]; // [s][v][u]
    for s in 0..ns {
        for v in 0..2 {
            for u in 0..2 {
                opp_q1[s][v][u] = -model.reward(s, u, v);
            }
        }
    }
    let mut opp_val1 = [0.0f64; 3];
    for s in 0..ns {
        let mut best = f64::NEG_INFINITY;
        for v in 0..2 {
            let w = 0.5 * (opp_q1[s][v][0] + opp_q1[s][v][1]);
            best = best.max(w);
        }
        opp_val1[s] = best;
    }
    let mut opp_val2 = [0.0f64; 3];
    let mut opp_opt2: Vec<Vec<usize>> = Vec::new();
    for s in 0..ns {
        let mut weighted = [0.0f64; 2];
        for v in 0..2 {
            for u in 0..2 {
                let mut cont = 0.0;
                for s_next in 0..ns {
                    cont += model.transition_prob(s, u, v, s_next) * opp_val1[s_next];
                }
                let q = -model.reward(s, u, v) + 0.5 * cont;
                weighted[v] += 0.5 * q;
            }
        }
        let best = weighted[0].max(weighted[1]);
        opp_val2[s] = best;
        opp_opt2.push((0..2).filter(|&v| weighted[v] >= best - 1e-9).collect());
    }

    // The opponent's reasoning model at level 0 (its two-step Opt sets).
    for s in 0..ns {
        let row = stack.opponent_models[0].row(s);
        let share = 1.0 / opp_opt2[s].len() as f64;
        for v in 0..2 {
            let expected = if opp_opt2[s].contains(&v) { share } else { 0.0 };
            assert!((row[v] - expected).abs() < 1e-15, "s={s} v={v}: {row:?}");
        }
    }

    // Step 2: our two-step Q against that prediction.
    let pred = &stack.opponent_models[0];
    let mut our_val1 = [0.0f64; 3];
    for s in 0..ns {
        let mut best = f64::NEG_INFINITY;
        for u in 0..2 {
            let mut w = 0.0;
            for v in 0..2 {
                w += pred.prob(s, v) * model.reward(s, u, v);
            }
            best = best.max(w);
        }
        our_val1[s] = best;
    }
    for s in 0..ns {
        for u in 0..2 {
            for v in 0..2 {
                let mut cont = 0.0;
                for s_next in 0..ns {
                    cont += model.transition_prob(s, u, v, s_next) * our_val1[s_next];
                }
                let expected = model.reward(s, u, v) + 0.5 * cont;
                assert!(
                    (stack.top_q.value(s, u, v) - expected).abs() < 1e-15,
                    "q(s={s},u={u},v={v}) = {} expected {expected}",
                    stack.top_q.value(s, u, v)
                );
            }
        }
    }
}

#[test]
fn sweep_differences_contract_geometrically() {
    for seed in [1u64, 2, 3, 4, 5] {
        let model = random_model(seed, 5, 2, 3, 2, 0.8, -4.0, 4.0);
        let view = model.view(Perspective::Own);
        let strategy = StrategyTable::uniform(5, 3);
        let mut values = vec![0.0; 5];
        let mut diffs = Vec::new();
        for _ in 0..12 {
            let out = mdp_backup(&view, &strategy, &values).unwrap();
            let diff = out
                .values
                .iter()
                .zip(&values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            diffs.push(diff);
            values = out.values;
        }
        for w in diffs.windows(2).skip(1) {
            assert!(w[1] <= model.discount * w[0] + 1e-12, "{diffs:?}");
        }
    }
}

#[test]
fn strategy_rows_normalized_at_every_level() {
    let model = random_model(29, 4, 3, 3, 2, 0.9, -2.0, 2.0);
    let stack = solve_nested(&model, Perspective::Own, 3, 5, None).unwrap();
    for t in stack.opponent_models.iter().chain(&stack.own_models) {
        assert!(t.all_rows_normalized());
    }
    assert!(stack.top_policy.all_rows_normalized());
    assert!(stack.top_prediction().unwrap().all_rows_normalized());
}

#[test]
fn reward_shift_preserves_greedy_actions() {
    let base = random_model(31, 4, 3, 2, 2, 0.9, -2.0, 2.0);
    let shift = 5.0;
    let mut tb = ProbTable::builder(4);
    let mut reward = Vec::new();
    for s in 0..4 {
        for u in 0..3 {
            for v in 0..2 {
                tb.push_row(base.transition_row(s, u, v).to_vec());
                reward.push(base.reward(s, u, v) + shift);
            }
        }
    }
    let mut zb = ProbTable::builder(2);
    for s_next in 0..4 {
        for u in 0..3 {
            zb.push_row(base.observation_row(s_next, u).to_vec());
        }
    }
    let shifted = PosgModel::new(
        4,
        3,
        2,
        2,
        tb.finish(),
        zb.finish(),
        None,
        reward,
        base.discount,
        base.initial_belief.clone(),
        false,
    );

    // Long horizon so the value differences that matter dominate the
    // constant offset phi-tail mismatch at finite h.
    let a = solve_nested(&base, Perspective::Own, 0, 60, None).unwrap();
    let b = solve_nested(&shifted, Perspective::Own, 0, 60, None).unwrap();
    assert_eq!(a.top_policy, b.top_policy);
}

#[test]
fn higher_level_reproduces_lower_level_artifacts_bitwise() {
    let model = random_model(37, 4, 2, 2, 2, 0.9, -3.0, 3.0);
    let k2 = solve_nested(&model, Perspective::Own, 2, 5, None).unwrap();
    let k1 = solve_nested(&model, Perspective::Own, 1, 5, None).unwrap();
    assert_eq!(k2.opponent_models[0], k1.opponent_models[0]);
    assert_eq!(k2.own_models[0], k1.own_models[0]);
    // And the opponent's own level-1 solve seen from the flipped seat.
    let opp_k1 = solve_nested(&model, Perspective::Opponent, 2, 5, None).unwrap();
    assert_eq!(opp_k1.own_models[0], k2.opponent_models[0]);
    assert_eq!(opp_k1.own_models[1], k2.opponent_models[1]);
}

#[test]
fn stack_round_trips_through_text() {
    let model = random_model(41, 3, 2, 2, 2, 0.9, -1.0, 1.0);
    let stack = solve_nested(&model, Perspective::Own, 2, 4, None).unwrap();
    let text = save_stack_string(&stack);
    let loaded = load_stack_str(&text).unwrap();
    assert_eq!(loaded.top_q.flat(), stack.top_q.flat());
    assert_eq!(loaded.top_values, stack.top_values);
    assert_eq!(loaded.opponent_models, stack.opponent_models);
    assert_eq!(loaded.level_weights, stack.level_weights);
    assert_eq!(save_stack_string(&loaded), text);
}
