//! Point-based planning under partial observability against a fixed
//! per-state prediction of the other agent's mixed strategy.
//!
//! The belief stays over physical states only: the prediction `Pr(v|s)`
//! factors the joint uncertainty, so the value function is a finite set of
//! alpha vectors over `S` exactly as in a single-agent POMDP. Exact backups
//! (full cross-sum, exponential growth) exist for verification; planning
//! uses point-based backups over a sampled belief set.

mod alpha;
mod backup;
mod beliefs;
mod plan;

pub use alpha::{load_value_function, load_value_function_str, save_value_function, save_value_function_string};
pub use alpha::{AlphaVector, ValueFunction};
pub use backup::{
    belief_update, belief_update_marginal, exact_backup, expected_payoff, joint_obs_prob,
    observation_branches, pbvi_backup,
};
pub use beliefs::{reachable_beliefs, sample_beliefs, BeliefSet};
pub use plan::{act, plan, plan_with_beliefs, PlanOutcome};

use thiserror::Error;

/// Two sampled beliefs closer than this (L1) count as the same point.
pub const BELIEF_DEDUP_L1: f64 = 1e-6;
/// Component-wise tolerance for dropping duplicate alpha vectors.
pub const ALPHA_DUP_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("observation branch (v={v}, o={o}) after action {u} has zero probability")]
    ImpossibleObservation { u: usize, v: usize, o: usize },
    #[error("exact backup would generate {would_be} vectors, beyond the cap of {cap}")]
    CapExceeded { would_be: String, cap: u64 },
    #[error("value function holds no vectors")]
    EmptyValueFunction,
    #[error("belief set holds no points")]
    EmptyBeliefSet,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Parse(#[from] crate::textio::ParseError),
}
