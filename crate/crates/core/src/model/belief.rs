//! Beliefs: probability distributions over the state set.

use super::{ModelError, PROB_SUM_TOL};

/// A distribution over states. Construction normalizes; entries stay
/// non-negative and sum to one within [`PROB_SUM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    /// Builds a belief from non-negative weights, normalizing their sum to 1.
    pub fn from_weights(weights: Vec<f64>) -> Result<Belief, ModelError> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(ModelError::Dimension(format!(
                "belief weights must be non-negative with positive sum (sum = {sum})"
            )));
        }
        let probs = weights.into_iter().map(|w| w / sum).collect();
        Ok(Belief { probs })
    }

    pub fn uniform(num_states: usize) -> Belief {
        Belief {
            probs: vec![1.0 / num_states as f64; num_states],
        }
    }

    pub fn point_mass(num_states: usize, state: usize) -> Belief {
        let mut probs = vec![0.0; num_states];
        probs[state] = 1.0;
        Belief { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    #[inline]
    pub fn prob(&self, s: usize) -> f64 {
        self.probs[s]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().copied().enumerate()
    }

    /// States carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.iter().filter(|&(_, p)| p > 0.0)
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.sum() - 1.0).abs() <= PROB_SUM_TOL && self.probs.iter().all(|&p| p >= 0.0)
    }
}

/// L1 distance between two beliefs over the same state set.
pub fn belief_l1_distance(a: &Belief, b: &Belief) -> Result<f64, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::Dimension(format!(
            "beliefs over different state sets ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(a.probs
        .iter()
        .zip(&b.probs)
        .map(|(x, y)| (x - y).abs())
        .sum())
}
