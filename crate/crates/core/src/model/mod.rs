//! Tabular two-agent game representation shared by every solver.
//!
//! A [`PosgModel`] is a partially observable stochastic game from one agent's
//! seat: joint-action transitions `T(s,u,v,s')`, our observation channel
//! `Z(s',u,o)`, our reward `R(s,u,v)`, a discount and an initial belief.
//! The other agent's reward is the negation when `zero_sum` is set.
//! Generated benchmark games also carry the opponent's observation channel so
//! the arena can feed each side its own observation stream.
//!
//! Probability tables are stored as sparse rows (one row per conditioning
//! tuple) because the intersection benchmark has tens of thousands of states
//! with near-deterministic dynamics; small models simply have full rows.

mod belief;
mod format;
mod strategy;
mod validate;

pub use belief::{belief_l1_distance, Belief};
pub use format::{load_model, load_model_str, save_model, save_model_string};
pub use strategy::StrategyTable;
pub use validate::{validate_model, ValidationReport, Violation};

use thiserror::Error;

/// Tolerance for probability rows summing to one.
pub const PROB_SUM_TOL: f64 = 1e-9;
/// Loaders re-normalize rows off by at most this much and reject beyond.
pub const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("probability row ({0}) sums to {1}, too far from 1 to re-normalize")]
    BadRow(String, f64),
    #[error("model has no opponent observation channel")]
    NoOpponentChannel,
    #[error(transparent)]
    Parse(#[from] crate::textio::ParseError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which seat a computation runs from. `Own` is the agent the model was
/// written for; `Opponent` swaps the action roles (and negates rewards in
/// zero-sum games).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Perspective {
    Own,
    Opponent,
}

impl Perspective {
    pub fn flipped(self) -> Self {
        match self {
            Perspective::Own => Perspective::Opponent,
            Perspective::Opponent => Perspective::Own,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Perspective::Own => "own",
            Perspective::Opponent => "opponent",
        }
    }
}

/// Sparse probability rows in CSR layout: row `i` holds `(index, prob)`
/// entries sorted by index, with zero entries omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    num_rows: usize,
    num_cols: usize,
    offsets: Vec<u32>,
    entries: Vec<(u32, f64)>,
}

impl ProbTable {
    pub fn builder(num_cols: usize) -> ProbTableBuilder {
        ProbTableBuilder {
            num_cols,
            offsets: vec![0],
            entries: Vec::new(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        let lo = self.offsets[i] as usize;
        let hi = self.offsets[i + 1] as usize;
        &self.entries[lo..hi]
    }

    pub fn prob(&self, row: usize, col: usize) -> f64 {
        let r = self.row(row);
        match r.binary_search_by_key(&(col as u32), |&(c, _)| c) {
            Ok(idx) => r[idx].1,
            Err(_) => 0.0,
        }
    }

    /// Expands row `i` to a dense vector of length `num_cols`.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.num_cols];
        for &(c, p) in self.row(i) {
            out[c as usize] = p;
        }
        out
    }
}

pub struct ProbTableBuilder {
    num_cols: usize,
    offsets: Vec<u32>,
    entries: Vec<(u32, f64)>,
}

impl ProbTableBuilder {
    /// Appends a row given as (index, prob) pairs; zeros are dropped and
    /// entries are sorted by index.
    pub fn push_row(&mut self, mut row: Vec<(u32, f64)>) {
        row.retain(|&(_, p)| p != 0.0);
        row.sort_unstable_by_key(|&(c, _)| c);
        self.entries.extend_from_slice(&row);
        self.offsets.push(self.entries.len() as u32);
    }

    pub fn push_dense_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.num_cols);
        let start = self.entries.len();
        for (c, &p) in row.iter().enumerate() {
            if p != 0.0 {
                self.entries.push((c as u32, p));
            }
        }
        let _ = start;
        self.offsets.push(self.entries.len() as u32);
    }

    pub fn finish(self) -> ProbTable {
        ProbTable {
            num_rows: self.offsets.len() - 1,
            num_cols: self.num_cols,
            offsets: self.offsets,
            entries: self.entries,
        }
    }
}

/// Tabular two-agent game. See the module docs for conventions.
#[derive(Debug, Clone)]
pub struct PosgModel {
    pub num_states: usize,
    /// |U|: actions of the agent this model is written for.
    pub num_actions_self: usize,
    /// |V|: actions of the other agent.
    pub num_actions_other: usize,
    pub num_observations: usize,
    /// Rows indexed (s,u,v), entries over next states.
    transition: ProbTable,
    /// Our channel: rows indexed (s',u), entries over observations.
    observation_self: ProbTable,
    /// Opponent channel: rows indexed (s',v). Present on generated games.
    observation_other: Option<ProbTable>,
    /// Dense, indexed (s,u,v).
    reward: Vec<f64>,
    pub discount: f64,
    pub initial_belief: Belief,
    /// Opponent reward is `-R` when set; paper experiments all use this.
    pub zero_sum: bool,
}

impl PosgModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_states: usize,
        num_actions_self: usize,
        num_actions_other: usize,
        num_observations: usize,
        transition: ProbTable,
        observation_self: ProbTable,
        observation_other: Option<ProbTable>,
        reward: Vec<f64>,
        discount: f64,
        initial_belief: Belief,
        zero_sum: bool,
    ) -> Self {
        let m = PosgModel {
            num_states,
            num_actions_self,
            num_actions_other,
            num_observations,
            transition,
            observation_self,
            observation_other,
            reward,
            discount,
            initial_belief,
            zero_sum,
        };
        debug_assert_eq!(m.transition.num_rows(), num_states * num_actions_self * num_actions_other);
        debug_assert_eq!(m.observation_self.num_rows(), num_states * num_actions_self);
        debug_assert_eq!(m.reward.len(), num_states * num_actions_self * num_actions_other);
        m
    }

    #[inline]
    fn trans_row_index(&self, s: usize, u: usize, v: usize) -> usize {
        (s * self.num_actions_self + u) * self.num_actions_other + v
    }

    /// Successor distribution for joint action (u,v) in state s.
    #[inline]
    pub fn transition_row(&self, s: usize, u: usize, v: usize) -> &[(u32, f64)] {
        self.transition.row(self.trans_row_index(s, u, v))
    }

    pub fn transition_prob(&self, s: usize, u: usize, v: usize, s_next: usize) -> f64 {
        self.transition.prob(self.trans_row_index(s, u, v), s_next)
    }

    /// Our observation distribution in next state s' after playing u.
    #[inline]
    pub fn observation_row(&self, s_next: usize, u: usize) -> &[(u32, f64)] {
        self.observation_self.row(s_next * self.num_actions_self + u)
    }

    pub fn observation_prob(&self, s_next: usize, u: usize, o: usize) -> f64 {
        self.observation_self.prob(s_next * self.num_actions_self + u, o)
    }

    /// The opponent's observation channel, if this model carries one.
    pub fn opponent_observation_row(&self, s_next: usize, v: usize) -> Result<&[(u32, f64)], ModelError> {
        let t = self.observation_other.as_ref().ok_or(ModelError::NoOpponentChannel)?;
        Ok(t.row(s_next * self.num_actions_other + v))
    }

    pub fn has_opponent_channel(&self) -> bool {
        self.observation_other.is_some()
    }

    #[inline]
    pub fn reward(&self, s: usize, u: usize, v: usize) -> f64 {
        self.reward[self.trans_row_index(s, u, v)]
    }

    pub(crate) fn transition_table(&self) -> &ProbTable {
        &self.transition
    }

    pub(crate) fn observation_self_table(&self) -> &ProbTable {
        &self.observation_self
    }

    pub(crate) fn observation_other_table(&self) -> Option<&ProbTable> {
        self.observation_other.as_ref()
    }

    /// Maximum immediate payoff R_max.
    pub fn max_reward(&self) -> f64 {
        self.reward.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum immediate payoff R_min.
    pub fn min_reward(&self) -> f64 {
        self.reward.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// max |R|; the usable constant for value-magnitude bounds when rewards
    /// may be negative.
    pub fn reward_bound(&self) -> f64 {
        self.max_reward().abs().max(self.min_reward().abs())
    }

    /// Bound on any discounted value magnitude: max|R| / (1 - discount).
    pub fn value_bound(&self) -> f64 {
        self.reward_bound() / (1.0 - self.discount)
    }

    /// Number of backups needed to approximate the infinite-horizon value to
    /// within `eps`: smallest h with `phi^h * max|R| / (1-phi) <= eps`.
    pub fn horizon_for(&self, eps: f64) -> usize {
        let bound = self.value_bound();
        if bound <= eps || bound == 0.0 {
            return 1;
        }
        let h = ((eps / bound).ln() / self.discount.ln()).ceil();
        (h.max(1.0)) as usize
    }

    /// Fully observable projection for one seat.
    pub fn view(&self, seat: Perspective) -> MdpView<'_> {
        MdpView { model: self, seat }
    }

    /// Materializes the game from the opponent's seat: action roles swapped,
    /// reward negated when zero-sum, observation channels exchanged.
    /// Requires the opponent channel.
    pub fn swap_perspective(&self) -> Result<PosgModel, ModelError> {
        let other = self.observation_other.as_ref().ok_or(ModelError::NoOpponentChannel)?;
        let n = self.num_states;
        let nu = self.num_actions_self;
        let nv = self.num_actions_other;

        let mut tb = ProbTable::builder(n);
        let mut reward = Vec::with_capacity(self.reward.len());
        for s in 0..n {
            for v in 0..nv {
                for u in 0..nu {
                    tb.push_row(self.transition_row(s, u, v).to_vec());
                    let r = self.reward(s, u, v);
                    reward.push(if self.zero_sum { -r } else { r });
                }
            }
        }
        Ok(PosgModel::new(
            n,
            nv,
            nu,
            self.num_observations,
            tb.finish(),
            other.clone(),
            Some(self.observation_self.clone()),
            reward,
            self.discount,
            self.initial_belief.clone(),
            self.zero_sum,
        ))
    }
}

/// Fully observable projection of a [`PosgModel`] for one seat: drops the
/// observation channels and the initial belief, and presents the viewing
/// agent's action as the first action index. Viewing the opponent of a
/// zero-sum game flips the reward sign.
#[derive(Clone, Copy)]
pub struct MdpView<'a> {
    model: &'a PosgModel,
    seat: Perspective,
}

impl<'a> MdpView<'a> {
    pub fn num_states(&self) -> usize {
        self.model.num_states
    }

    /// Actions of the viewing agent.
    pub fn num_own_actions(&self) -> usize {
        match self.seat {
            Perspective::Own => self.model.num_actions_self,
            Perspective::Opponent => self.model.num_actions_other,
        }
    }

    /// Actions of the agent being predicted.
    pub fn num_other_actions(&self) -> usize {
        match self.seat {
            Perspective::Own => self.model.num_actions_other,
            Perspective::Opponent => self.model.num_actions_self,
        }
    }

    pub fn discount(&self) -> f64 {
        self.model.discount
    }

    pub fn seat(&self) -> Perspective {
        self.seat
    }

    pub fn model(&self) -> &'a PosgModel {
        self.model
    }

    /// Successors under (own action a, other's action c).
    #[inline]
    pub fn successors(&self, s: usize, a: usize, c: usize) -> &'a [(u32, f64)] {
        match self.seat {
            Perspective::Own => self.model.transition_row(s, a, c),
            Perspective::Opponent => self.model.transition_row(s, c, a),
        }
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize, c: usize) -> f64 {
        match self.seat {
            Perspective::Own => self.model.reward(s, a, c),
            Perspective::Opponent => {
                let r = self.model.reward(s, c, a);
                if self.model.zero_sum {
                    -r
                } else {
                    r
                }
            }
        }
    }

    pub fn reward_bound(&self) -> f64 {
        self.model.reward_bound()
    }
}
