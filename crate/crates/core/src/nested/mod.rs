//! Level-k reasoning in fully observable two-agent games.
//!
//! Level 0 treats the other agent as uniform noise and solves a plain MDP.
//! Level k best-responds to a mixture of the opponent's reasoning models at
//! levels 0..k-1, each of which is the uniform-over-optimal-actions policy
//! induced by solving that level's own MDP. The recursion bottoms out after
//! O(k) solves because level i of one seat only needs levels below i of the
//! other seat.
//!
//! Backups use finite-horizon semantics: `h` sweeps from the zero value
//! function compute the h-step-to-go values. Infinite-horizon behaviour is
//! approximated by a large `h` (see [`PosgModel::horizon_for`]).

mod format;

pub use format::{load_stack, load_stack_str, save_stack, save_stack_string};

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{MdpView, Perspective, PosgModel, StrategyTable};

/// Tie tolerance when collecting optimal-action sets: strategy-weighted
/// action values within this absolute distance of the max count as optimal.
/// Exact ties are real in symmetric games, so an exact-equality rule would
/// be fragile under floating-point noise.
pub const OPT_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum NestedError {
    #[error("strategy row s={0} is not normalized (sum {1})")]
    UnnormalizedStrategy(usize, f64),
    #[error("strategy table shape ({0} states, {1} actions) does not match the view ({2} states, {3} actions)")]
    StrategyShape(usize, usize, usize, usize),
    #[error("previous values must hold one finite entry per state ({0} states, {1} entries)")]
    BadPrevValues(usize, usize),
    #[error("reasoning model for level {0} is not available (stack holds levels 0..{1})")]
    MissingLevel(usize, usize),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Parse(#[from] crate::textio::ParseError),
}

/// h-step action values `q[s][a][c]` for one seat at one reasoning level,
/// where `a` is the owning agent's action and `c` the other agent's.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub num_states: usize,
    pub num_own_actions: usize,
    pub num_other_actions: usize,
    pub horizon: usize,
    pub level: usize,
    pub agent: Perspective,
    q: Vec<f64>,
}

impl QTable {
    #[inline]
    pub fn value(&self, s: usize, a: usize, c: usize) -> f64 {
        self.q[(s * self.num_own_actions + a) * self.num_other_actions + c]
    }

    /// The (a,c) block for one state.
    #[inline]
    pub fn state_block(&self, s: usize) -> &[f64] {
        let w = self.num_own_actions * self.num_other_actions;
        &self.q[s * w..(s + 1) * w]
    }

    pub fn flat(&self) -> &[f64] {
        &self.q
    }

    /// Strategy-weighted value of own action `a` in state `s`.
    pub fn weighted_action_value(&self, s: usize, a: usize, strategy: &StrategyTable) -> f64 {
        let row = strategy.row(s);
        (0..self.num_other_actions)
            .map(|c| row[c] * self.value(s, a, c))
            .sum()
    }
}

/// One backup sweep: the fresh Q slice and the per-state values it induces
/// under the supplied opponent strategy.
#[derive(Debug, Clone)]
pub struct BackupOutcome {
    pub q: QTable,
    pub values: Vec<f64>,
}

fn check_inputs(view: &MdpView, strategy: &StrategyTable, prev: &[f64]) -> Result<(), NestedError> {
    if strategy.num_states() != view.num_states() || strategy.num_actions() != view.num_other_actions() {
        return Err(NestedError::StrategyShape(
            strategy.num_states(),
            strategy.num_actions(),
            view.num_states(),
            view.num_other_actions(),
        ));
    }
    for s in 0..strategy.num_states() {
        if !strategy.row_is_normalized(s) {
            let sum = strategy.row(s).iter().sum();
            return Err(NestedError::UnnormalizedStrategy(s, sum));
        }
    }
    if prev.len() != view.num_states() || prev.iter().any(|v| !v.is_finite()) {
        return Err(NestedError::BadPrevValues(view.num_states(), prev.len()));
    }
    Ok(())
}

/// One Bellman sweep of the strategy-weighted backup:
///
/// `q[s][a][c] = R(s,a,c) + phi * sum_s' T(s,a,c,s') prev[s']`
/// `value[s]  = max_a sum_c strategy(s,c) q[s][a][c]`
///
/// States are independent, so the sweep parallelizes over them.
pub fn mdp_backup(view: &MdpView, strategy: &StrategyTable, prev: &[f64]) -> Result<BackupOutcome, NestedError> {
    check_inputs(view, strategy, prev)?;
    let (ns, na, nc) = (view.num_states(), view.num_own_actions(), view.num_other_actions());
    let phi = view.discount();

    let per_state: Vec<(Vec<f64>, f64)> = (0..ns)
        .into_par_iter()
        .map(|s| {
            let mut block = vec![0.0; na * nc];
            let mut best = f64::NEG_INFINITY;
            let srow = strategy.row(s);
            for a in 0..na {
                let mut weighted = 0.0;
                for c in 0..nc {
                    let mut cont = 0.0;
                    for &(s_next, p) in view.successors(s, a, c) {
                        cont += p * prev[s_next as usize];
                    }
                    let q = view.reward(s, a, c) + phi * cont;
                    block[a * nc + c] = q;
                    weighted += srow[c] * q;
                }
                if weighted > best {
                    best = weighted;
                }
            }
            (block, best)
        })
        .collect();

    let mut q = Vec::with_capacity(ns * na * nc);
    let mut values = Vec::with_capacity(ns);
    for (block, best) in per_state {
        q.extend(block);
        values.push(best);
    }
    Ok(BackupOutcome {
        q: QTable {
            num_states: ns,
            num_own_actions: na,
            num_other_actions: nc,
            horizon: 1,
            level: 0,
            agent: view.seat(),
            q,
        },
        values,
    })
}

/// Runs exactly `h` backups from the zero value function and returns the
/// final Q table (tagged with `h`) and its induced state values.
pub fn solve_mdp(view: &MdpView, strategy: &StrategyTable, h: usize) -> Result<BackupOutcome, NestedError> {
    assert!(h >= 1, "horizon must be at least 1");
    let mut values = vec![0.0; view.num_states()];
    let mut outcome = None;
    for _ in 0..h {
        let step = mdp_backup(view, strategy, &values)?;
        values = step.values.clone();
        outcome = Some(step);
    }
    let mut outcome = outcome.expect("h >= 1");
    outcome.q.horizon = h;
    Ok(outcome)
}

/// Induces the uniform-over-optimal-actions reasoning model from a solved Q
/// table: per state, actions whose strategy-weighted value lies within `tol`
/// of the maximum share the mass equally and everything else gets zero.
pub fn reasoning_model_from_q(q: &QTable, strategy_below: &StrategyTable, tol: f64) -> StrategyTable {
    let (ns, na) = (q.num_states, q.num_own_actions);
    let mut probs = vec![0.0; ns * na];
    for s in 0..ns {
        let vals: Vec<f64> = (0..na)
            .map(|a| q.weighted_action_value(s, a, strategy_below))
            .collect();
        let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let opt: Vec<usize> = (0..na).filter(|&a| vals[a] >= best - tol).collect();
        let share = 1.0 / opt.len() as f64;
        for a in opt {
            probs[s * na + a] = share;
        }
    }
    StrategyTable::from_flat(ns, na, probs).expect("rows sum to 1 by construction")
}

/// Everything produced while solving one seat's level-k problem: the
/// opponent's reasoning models for levels 0..k-1 (the ingredients of the
/// mixed-strategy prediction), the intermediate own-seat models the recursion
/// visited, the level weights p(i), and the top-level Q table with its
/// induced values and greedy policy.
#[derive(Debug, Clone)]
pub struct NestedPolicyStack {
    pub agent: Perspective,
    pub level: usize,
    pub horizon: usize,
    /// p(i) over opponent levels 0..k-1; empty at level 0.
    pub level_weights: Vec<f64>,
    /// Opponent reasoning models, index = level.
    pub opponent_models: Vec<StrategyTable>,
    /// Own-seat reasoning models computed along the way (levels 0..k-1).
    pub own_models: Vec<StrategyTable>,
    pub top_q: QTable,
    pub top_values: Vec<f64>,
    /// Uniform-over-optimal policy at the top level (own reasoning model).
    pub top_policy: StrategyTable,
}

impl NestedPolicyStack {
    /// The mixed strategy the top level was solved against.
    pub fn top_prediction(&self) -> Result<StrategyTable, NestedError> {
        predict_mixed_strategy(self, self.level)
    }
}

/// The mixed-strategy prediction of the opponent at level `k`:
/// uniform over its actions at level 0, otherwise the p(i)-weighted mixture
/// of its reasoning models at levels 0..k-1.
pub fn predict_mixed_strategy(stack: &NestedPolicyStack, k: usize) -> Result<StrategyTable, NestedError> {
    if k == 0 {
        let num_actions = if stack.opponent_models.is_empty() {
            // Level-0 stack: the opponent model count is implicit in the top Q.
            stack.top_q.num_other_actions
        } else {
            stack.opponent_models[0].num_actions()
        };
        return Ok(StrategyTable::uniform(stack.top_q.num_states, num_actions));
    }
    if stack.opponent_models.len() < k {
        return Err(NestedError::MissingLevel(k - 1, stack.opponent_models.len()));
    }
    let tables: Vec<&StrategyTable> = stack.opponent_models[..k].iter().collect();
    let weights: Vec<f64> = if stack.level_weights.len() == k {
        stack.level_weights.clone()
    } else {
        vec![1.0 / k as f64; k]
    };
    Ok(StrategyTable::mixture(&tables, &weights)?)
}

/// Solves the level-k problem for one seat with `h` backups per level.
///
/// Reasoning models are memoized per (seat, level): each of the O(k) MDPs is
/// solved exactly once, and re-solving at a higher level reproduces the
/// lower-level artifacts bit for bit.
///
/// `level_weights`: p(i) over opponent levels 0..k-1; `None` means uniform.
pub fn solve_nested(
    model: &PosgModel,
    agent: Perspective,
    k: usize,
    h: usize,
    level_weights: Option<&[f64]>,
) -> Result<NestedPolicyStack, NestedError> {
    assert!(h >= 1, "horizon must be at least 1");
    let weights_for = |lvl: usize| -> Vec<f64> {
        match level_weights {
            Some(w) if w.len() >= lvl && lvl > 0 => {
                let mut w = w[..lvl].to_vec();
                let sum: f64 = w.iter().sum();
                for x in &mut w {
                    *x /= sum;
                }
                w
            }
            _ => vec![1.0 / lvl.max(1) as f64; lvl],
        }
    };

    // models[seat][level]; seat 0 = `agent`, seat 1 = its opponent.
    let mut models: [Vec<StrategyTable>; 2] = [Vec::new(), Vec::new()];
    let seat_of = |idx: usize| if idx == 0 { agent } else { agent.flipped() };

    // Level i of either seat needs the other seat's models below i, so
    // filling both seats level by level satisfies every dependency.
    for lvl in 0..k {
        for idx in 0..2 {
            let seat = seat_of(idx);
            let view = model.view(seat);
            let prediction = if lvl == 0 {
                StrategyTable::uniform(view.num_states(), view.num_other_actions())
            } else {
                let other = &models[1 - idx];
                let tables: Vec<&StrategyTable> = other[..lvl].iter().collect();
                StrategyTable::mixture(&tables, &weights_for(lvl))?
            };
            let solved = solve_mdp(&view, &prediction, h)?;
            let reasoning = reasoning_model_from_q(&solved.q, &prediction, OPT_TIE_TOL);
            models[idx].push(reasoning);
        }
    }

    let view = model.view(agent);
    let top_prediction = if k == 0 {
        StrategyTable::uniform(view.num_states(), view.num_other_actions())
    } else {
        let tables: Vec<&StrategyTable> = models[1][..k].iter().collect();
        StrategyTable::mixture(&tables, &weights_for(k))?
    };
    let mut solved = solve_mdp(&view, &top_prediction, h)?;
    solved.q.level = k;
    let top_policy = reasoning_model_from_q(&solved.q, &top_prediction, OPT_TIE_TOL);

    Ok(NestedPolicyStack {
        agent,
        level: k,
        horizon: h,
        level_weights: weights_for(k),
        opponent_models: std::mem::take(&mut models[1]),
        own_models: std::mem::take(&mut models[0]),
        top_q: solved.q,
        top_values: solved.values,
        top_policy,
    })
}

#[cfg(test)]
mod tests;
