//! Per-state mixed strategies over the other agent's actions.

use super::{ModelError, PROB_SUM_TOL};

/// `probs[s][v]`: probability that the modeled agent plays action `v` in
/// state `s`. Every row is a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTable {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl StrategyTable {
    pub fn uniform(num_states: usize, num_actions: usize) -> StrategyTable {
        StrategyTable {
            num_states,
            num_actions,
            probs: vec![1.0 / num_actions as f64; num_states * num_actions],
        }
    }

    /// Builds from a flat (state-major) probability table, checking rows.
    pub fn from_flat(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<StrategyTable, ModelError> {
        if probs.len() != num_states * num_actions {
            return Err(ModelError::Dimension(format!(
                "strategy table needs {} entries, got {}",
                num_states * num_actions,
                probs.len()
            )));
        }
        let t = StrategyTable { num_states, num_actions, probs };
        for s in 0..num_states {
            let sum: f64 = t.row(s).iter().sum();
            if (sum - 1.0).abs() > PROB_SUM_TOL || t.row(s).iter().any(|&p| p < 0.0) {
                return Err(ModelError::BadRow(format!("strategy row s={s}"), sum));
            }
        }
        Ok(t)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.num_actions..(s + 1) * self.num_actions]
    }

    #[inline]
    pub fn prob(&self, s: usize, v: usize) -> f64 {
        self.probs[s * self.num_actions + v]
    }

    pub fn flat(&self) -> &[f64] {
        &self.probs
    }

    pub fn row_is_normalized(&self, s: usize) -> bool {
        let sum: f64 = self.row(s).iter().sum();
        (sum - 1.0).abs() <= PROB_SUM_TOL && self.row(s).iter().all(|&p| p >= 0.0)
    }

    pub fn all_rows_normalized(&self) -> bool {
        (0..self.num_states).all(|s| self.row_is_normalized(s))
    }

    /// Pointwise convex mixture of strategy tables with the given weights.
    pub fn mixture(tables: &[&StrategyTable], weights: &[f64]) -> Result<StrategyTable, ModelError> {
        if tables.is_empty() || tables.len() != weights.len() {
            return Err(ModelError::Dimension("mixture needs matching tables and weights".into()));
        }
        let (ns, na) = (tables[0].num_states, tables[0].num_actions);
        if tables.iter().any(|t| t.num_states != ns || t.num_actions != na) {
            return Err(ModelError::Dimension("mixture over differently shaped tables".into()));
        }
        let mut probs = vec![0.0; ns * na];
        for (t, &w) in tables.iter().zip(weights) {
            for (acc, &p) in probs.iter_mut().zip(&t.probs) {
                *acc += w * p;
            }
        }
        StrategyTable::from_flat(ns, na, probs)
    }
}
