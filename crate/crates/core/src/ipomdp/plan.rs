//! Offline planning (belief sampling plus backup sweeps) and online action
//! selection by one-step lookahead.

use std::time::Instant;

use super::{
    belief_update, expected_payoff, observation_branches, pbvi_backup, sample_beliefs, BeliefSet,
    PlanError, ValueFunction,
};
use crate::model::{Belief, PosgModel, StrategyTable};

/// Result of [`plan`]: the value function plus per-sweep wall time.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub value_function: ValueFunction,
    pub sweep_millis: Vec<f64>,
}

/// Samples `belief_count` reachable beliefs and runs `h` point-based backup
/// sweeps from the zero value function.
pub fn plan(
    model: &PosgModel,
    strategy: &StrategyTable,
    h: usize,
    belief_count: usize,
    seed: u64,
) -> Result<PlanOutcome, PlanError> {
    let beliefs = sample_beliefs(model, strategy, belief_count, seed)?;
    plan_with_beliefs(model, strategy, h, beliefs)
}

/// Like [`plan`] but over a caller-supplied belief set (dense enumerations,
/// reproducibility harnesses).
pub fn plan_with_beliefs(
    model: &PosgModel,
    strategy: &StrategyTable,
    h: usize,
    beliefs: BeliefSet,
) -> Result<PlanOutcome, PlanError> {
    assert!(h >= 1, "horizon must be at least 1");
    let mut vf = ValueFunction::zero(model.num_states);
    let mut sweep_millis = Vec::with_capacity(h);
    for _ in 0..h {
        let t0 = Instant::now();
        vf = pbvi_backup(&vf, &beliefs.points, strategy, model)?;
        sweep_millis.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    vf.belief_set = Some(beliefs);
    Ok(PlanOutcome { value_function: vf, sweep_millis })
}

/// One-step lookahead at `b`: maximizes expected payoff plus the discounted
/// branch-weighted value of the stored function at the updated beliefs.
/// Zero-probability branches are skipped; ties break to the lowest action.
pub fn act(
    vf: &ValueFunction,
    b: &Belief,
    strategy: &StrategyTable,
    model: &PosgModel,
) -> Result<usize, PlanError> {
    if vf.vectors.is_empty() {
        return Err(PlanError::EmptyValueFunction);
    }
    let no = model.num_observations;
    let mut best_u = 0;
    let mut best_q = f64::NEG_INFINITY;
    for u in 0..model.num_actions_self {
        let mut q = expected_payoff(b, u, strategy, model);
        let branches = observation_branches(b, u, strategy, model);
        for (idx, &p) in branches.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let (v, o) = (idx / no, idx % no);
            let updated = belief_update(b, u, v, o, strategy, model)?;
            q += model.discount * p * vf.value_of(&updated);
        }
        if q > best_q {
            best_q = q;
            best_u = u;
        }
    }
    Ok(best_u)
}
