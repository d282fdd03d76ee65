//! Bellman machinery: expected payoffs, joint action-observation branch
//! probabilities, belief updates, and the exact / point-based backups.

use rayon::prelude::*;

use super::{AlphaVector, PlanError, ValueFunction, ALPHA_DUP_TOL};
use crate::model::{Belief, PosgModel, StrategyTable};

fn check_shapes(b: &Belief, strategy: &StrategyTable, model: &PosgModel) -> Result<(), PlanError> {
    if b.len() != model.num_states {
        return Err(PlanError::Shape(format!(
            "belief over {} states, model has {}",
            b.len(),
            model.num_states
        )));
    }
    if strategy.num_states() != model.num_states || strategy.num_actions() != model.num_actions_other {
        return Err(PlanError::Shape(format!(
            "strategy is {}x{}, model needs {}x{}",
            strategy.num_states(),
            strategy.num_actions(),
            model.num_states,
            model.num_actions_other
        )));
    }
    Ok(())
}

/// Expected immediate payoff of playing `u` at belief `b`:
/// `sum_{s,v} R(s,u,v) Pr(v|s) b(s)`.
pub fn expected_payoff(b: &Belief, u: usize, strategy: &StrategyTable, model: &PosgModel) -> f64 {
    debug_assert!(check_shapes(b, strategy, model).is_ok());
    let mut total = 0.0;
    for (s, p) in b.support() {
        let row = strategy.row(s);
        for (v, &pv) in row.iter().enumerate() {
            if pv > 0.0 {
                total += model.reward(s, u, v) * pv * p;
            }
        }
    }
    total
}

/// Pushed-forward state mass after (u,v) from belief b, weighted by the
/// strategy: `m(s') = sum_s T(s,u,v,s') Pr(v|s) b(s)`.
fn forward_mass(b: &Belief, u: usize, v: usize, strategy: &StrategyTable, model: &PosgModel) -> Vec<f64> {
    let mut m = vec![0.0; model.num_states];
    for (s, p) in b.support() {
        let w = p * strategy.prob(s, v);
        if w == 0.0 {
            continue;
        }
        for &(s_next, tp) in model.transition_row(s, u, v) {
            m[s_next as usize] += w * tp;
        }
    }
    m
}

/// `Pr(v,o | b,u) = sum_{s'} Z(s',u,o) sum_s T(s,u,v,s') Pr(v|s) b(s)`.
/// Summing over all (v,o) gives 1.
pub fn joint_obs_prob(
    b: &Belief,
    u: usize,
    v: usize,
    o: usize,
    strategy: &StrategyTable,
    model: &PosgModel,
) -> f64 {
    let m = forward_mass(b, u, v, strategy, model);
    m.iter()
        .enumerate()
        .map(|(s_next, &mass)| mass * model.observation_prob(s_next, u, o))
        .sum()
}

/// All branch probabilities `Pr(v,o|b,u)` for a fixed action, laid out
/// `v * |O| + o`. One forward pass per opponent action.
pub fn observation_branches(b: &Belief, u: usize, strategy: &StrategyTable, model: &PosgModel) -> Vec<f64> {
    let (nv, no) = (model.num_actions_other, model.num_observations);
    let mut out = vec![0.0; nv * no];
    for v in 0..nv {
        let m = forward_mass(b, u, v, strategy, model);
        for (s_next, &mass) in m.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(o, zp) in model.observation_row(s_next, u) {
                out[v * no + o as usize] += mass * zp;
            }
        }
    }
    out
}

/// Bayes update after playing `u`, predicting the other agent played `v`,
/// and observing `o`. Errors on a zero-probability branch, which callers
/// skip (the branch contributes no mass to the Bellman sum).
pub fn belief_update(
    b: &Belief,
    u: usize,
    v: usize,
    o: usize,
    strategy: &StrategyTable,
    model: &PosgModel,
) -> Result<Belief, PlanError> {
    check_shapes(b, strategy, model)?;
    let m = forward_mass(b, u, v, strategy, model);
    let mut unnormalized = vec![0.0; model.num_states];
    let mut mass = 0.0;
    for (s_next, &fwd) in m.iter().enumerate() {
        if fwd == 0.0 {
            continue;
        }
        let f = fwd * model.observation_prob(s_next, u, o);
        unnormalized[s_next] = f;
        mass += f;
    }
    if mass <= 0.0 {
        return Err(PlanError::ImpossibleObservation { u, v, o });
    }
    Ok(Belief::from_weights(unnormalized)?)
}

/// Execution-time update when the other agent's action is not observed:
/// marginalizes `v` out under the prediction.
pub fn belief_update_marginal(
    b: &Belief,
    u: usize,
    o: usize,
    strategy: &StrategyTable,
    model: &PosgModel,
) -> Result<Belief, PlanError> {
    check_shapes(b, strategy, model)?;
    let mut unnormalized = vec![0.0; model.num_states];
    let mut mass = 0.0;
    for v in 0..model.num_actions_other {
        let m = forward_mass(b, u, v, strategy, model);
        for (s_next, &fwd) in m.iter().enumerate() {
            if fwd == 0.0 {
                continue;
            }
            let f = fwd * model.observation_prob(s_next, u, o);
            unnormalized[s_next] += f;
            mass += f;
        }
    }
    if mass <= 0.0 {
        return Err(PlanError::ImpossibleObservation { u, v: usize::MAX, o });
    }
    Ok(Belief::from_weights(unnormalized)?)
}

/// The projection vectors `Gamma^{u,v,o}_i` shared by both backup flavours:
///
/// `g(s) = phi * Pr(v|s) * sum_{s'} Z(s',u,o) T(s,u,v,s') alpha_i(s')`
///
/// Layout: `proj[((u * |V| + v) * |O| + o) * n + i]` where n = |vf|.
struct Projections {
    vectors: Vec<Vec<f64>>,
    n: usize,
    no: usize,
    nv: usize,
}

impl Projections {
    #[inline]
    fn get(&self, u: usize, v: usize, o: usize, i: usize) -> &[f64] {
        &self.vectors[((u * self.nv + v) * self.no + o) * self.n + i]
    }
}

fn project(vf: &ValueFunction, strategy: &StrategyTable, model: &PosgModel) -> Projections {
    let (ns, nu, nv, no) = (
        model.num_states,
        model.num_actions_self,
        model.num_actions_other,
        model.num_observations,
    );
    let n = vf.vectors.len();
    let phi = model.discount;
    let mut vectors = vec![vec![0.0; ns]; nu * nv * no * n];
    for u in 0..nu {
        for v in 0..nv {
            for s in 0..ns {
                let pv = strategy.prob(s, v);
                if pv == 0.0 {
                    continue;
                }
                for &(s_next, tp) in model.transition_row(s, u, v) {
                    let s_next = s_next as usize;
                    for &(o, zp) in model.observation_row(s_next, u) {
                        let coeff = phi * pv * tp * zp;
                        let base = ((u * nv + v) * no + o as usize) * n;
                        for (i, alpha) in vf.vectors.iter().enumerate() {
                            vectors[base + i][s] += coeff * alpha.weights[s_next];
                        }
                    }
                }
            }
        }
    }
    Projections { vectors, n, no, nv }
}

/// Immediate-payoff vectors `alpha^{u,*}(s) = sum_v R(s,u,v) Pr(v|s)`.
fn payoff_vectors(strategy: &StrategyTable, model: &PosgModel) -> Vec<Vec<f64>> {
    let (ns, nu, nv) = (model.num_states, model.num_actions_self, model.num_actions_other);
    (0..nu)
        .map(|u| {
            (0..ns)
                .map(|s| {
                    (0..nv)
                        .map(|v| model.reward(s, u, v) * strategy.prob(s, v))
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn dot(w: &[f64], b: &Belief) -> f64 {
    w.iter().zip(b.probs()).map(|(x, p)| x * p).sum()
}

/// Full cross-sum backup without pruning or deduplication: exactly
/// `|U| * |vf|^(|V||O|)` output vectors. Only usable on tiny problems; the
/// `cap` guards the combinatorial count and the error names the would-be
/// size.
pub fn exact_backup(
    vf: &ValueFunction,
    strategy: &StrategyTable,
    model: &PosgModel,
    cap: u64,
) -> Result<ValueFunction, PlanError> {
    if vf.vectors.is_empty() {
        return Err(PlanError::EmptyValueFunction);
    }
    let (nu, nv, no) = (model.num_actions_self, model.num_actions_other, model.num_observations);
    let n = vf.vectors.len() as u128;
    let branches = (nv * no) as u32;
    let would_be = n
        .checked_pow(branches)
        .and_then(|p| p.checked_mul(nu as u128));
    match would_be {
        Some(c) if c <= cap as u128 => {}
        Some(c) => {
            return Err(PlanError::CapExceeded { would_be: c.to_string(), cap });
        }
        None => {
            return Err(PlanError::CapExceeded {
                would_be: format!("{nu} * {n}^{branches} (overflows)"),
                cap,
            });
        }
    }

    let ns = model.num_states;
    let proj = project(vf, strategy, model);
    let payoffs = payoff_vectors(strategy, model);
    let combos = vf.vectors.len();
    let mut vectors = Vec::new();
    for u in 0..nu {
        // Mixed-radix counter over assignments (v,o) -> vector index.
        let mut assignment = vec![0usize; branches as usize];
        loop {
            let mut weights = payoffs[u].clone();
            for (branch, &i) in assignment.iter().enumerate() {
                let (v, o) = (branch / no, branch % no);
                let g = proj.get(u, v, o, i);
                for s in 0..ns {
                    weights[s] += g[s];
                }
            }
            vectors.push(AlphaVector { weights, action: u });

            // advance the mixed-radix counter
            let mut pos = 0;
            loop {
                if pos == assignment.len() {
                    break;
                }
                assignment[pos] += 1;
                if assignment[pos] < combos {
                    break;
                }
                assignment[pos] = 0;
                pos += 1;
            }
            if pos == assignment.len() {
                break;
            }
        }
    }
    Ok(ValueFunction {
        vectors,
        horizon: vf.horizon + 1,
        belief_set: None,
    })
}

/// Point-based backup: one maximizing vector per belief point.
///
/// Steps: (1) strategy-weighted immediate payoff vectors, (2) the
/// `Gamma^{u,v,o}` projections, (3) per-belief cross-sum picking the best
/// projection per branch, (4) per-belief argmax over actions. Output vectors
/// carry the chosen action; exact duplicates are merged. Beliefs are
/// processed in parallel and results reduced in belief order, so the output
/// does not depend on the worker count.
pub fn pbvi_backup(
    vf: &ValueFunction,
    beliefs: &[Belief],
    strategy: &StrategyTable,
    model: &PosgModel,
) -> Result<ValueFunction, PlanError> {
    if vf.vectors.is_empty() {
        return Err(PlanError::EmptyValueFunction);
    }
    if beliefs.is_empty() {
        return Err(PlanError::EmptyBeliefSet);
    }
    check_shapes(&beliefs[0], strategy, model)?;
    let (ns, nu, nv, no) = (
        model.num_states,
        model.num_actions_self,
        model.num_actions_other,
        model.num_observations,
    );
    let proj = project(vf, strategy, model);
    let payoffs = payoff_vectors(strategy, model);
    let n = vf.vectors.len();

    let per_belief: Vec<AlphaVector> = beliefs
        .par_iter()
        .map(|b| {
            let mut best: Option<(f64, AlphaVector)> = None;
            for u in 0..nu {
                let mut weights = payoffs[u].clone();
                for v in 0..nv {
                    for o in 0..no {
                        // argmax over projections at this belief, lowest
                        // index on ties.
                        let mut best_i = 0;
                        let mut best_val = f64::NEG_INFINITY;
                        for i in 0..n {
                            let val = dot(proj.get(u, v, o, i), b);
                            if val > best_val {
                                best_val = val;
                                best_i = i;
                            }
                        }
                        let g = proj.get(u, v, o, best_i);
                        for s in 0..ns {
                            weights[s] += g[s];
                        }
                    }
                }
                let val = dot(&weights, b);
                let better = match &best {
                    Some((bv, _)) => val > *bv,
                    None => true,
                };
                if better {
                    best = Some((val, AlphaVector { weights, action: u }));
                }
            }
            best.expect("at least one action").1
        })
        .collect();

    // Merge exact duplicates, keeping first occurrence (belief order).
    let mut vectors: Vec<AlphaVector> = Vec::with_capacity(per_belief.len());
    for cand in per_belief {
        let dup = vectors.iter().any(|kept| {
            kept.weights
                .iter()
                .zip(&cand.weights)
                .all(|(a, b)| (a - b).abs() <= ALPHA_DUP_TOL)
        });
        if !dup {
            vectors.push(cand);
        }
    }
    Ok(ValueFunction {
        vectors,
        horizon: vf.horizon + 1,
        belief_set: None,
    })
}
