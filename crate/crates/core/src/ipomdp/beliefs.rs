//! Reachable belief sets for point-based backups.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{belief_update, observation_branches, PlanError, BELIEF_DEDUP_L1};
use crate::model::{belief_l1_distance, Belief, PosgModel, StrategyTable};

/// A set of belief points with the provenance needed to reproduce it.
#[derive(Debug, Clone)]
pub struct BeliefSet {
    pub points: Vec<Belief>,
    /// Seed of the stochastic expansion (0 for exhaustive enumeration).
    pub seed: u64,
    /// How many points were asked for; fewer means the reachable set
    /// saturated before the target.
    pub requested: usize,
    pub dedup_threshold: f64,
}

impl BeliefSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn saturated(&self) -> bool {
        self.points.len() < self.requested
    }
}

fn min_distance(points: &[Belief], candidate: &Belief) -> f64 {
    points
        .iter()
        .map(|p| belief_l1_distance(p, candidate).expect("same state set"))
        .fold(f64::INFINITY, f64::min)
}

/// Stochastic forward expansion from the initial belief: repeatedly pick a
/// stored belief, a uniform own action, sample an (opponent action,
/// observation) branch, and keep the updated belief if it is at least the
/// dedup threshold away from everything stored. Deterministic per seed; may
/// return fewer points than requested when the reachable set saturates.
pub fn sample_beliefs(
    model: &PosgModel,
    strategy: &StrategyTable,
    target_count: usize,
    seed: u64,
) -> Result<BeliefSet, PlanError> {
    assert!(target_count >= 1, "target_count must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![model.initial_belief.clone()];
    let no = model.num_observations;

    let max_attempts = 60 * target_count.max(16);
    let mut attempts = 0;
    while points.len() < target_count && attempts < max_attempts {
        attempts += 1;
        let from = rng.gen_range(0..points.len());
        let u = rng.gen_range(0..model.num_actions_self);
        let branches = observation_branches(&points[from], u, strategy, model);
        let draw: f64 = rng.gen();
        let mut acc = 0.0;
        let mut picked = None;
        for (idx, &p) in branches.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            if draw < acc {
                picked = Some(idx);
                break;
            }
        }
        // Floating-point slack: fall back to the last positive branch.
        let idx = match picked.or_else(|| branches.iter().rposition(|&p| p > 0.0)) {
            Some(i) => i,
            None => continue,
        };
        let (v, o) = (idx / no, idx % no);
        let updated = belief_update(&points[from], u, v, o, strategy, model)?;
        if min_distance(&points, &updated) > BELIEF_DEDUP_L1 {
            points.push(updated);
        }
    }

    Ok(BeliefSet {
        points,
        seed,
        requested: target_count,
        dedup_threshold: BELIEF_DEDUP_L1,
    })
}

/// Exhaustive enumeration of every positive-probability belief reachable
/// from b0 within `depth` steps. Deduplication is essentially exact (1e-12),
/// so point-based backups over this set reproduce exact values at the root;
/// the verification suite leans on that. Guarded by `max_points`.
pub fn reachable_beliefs(
    model: &PosgModel,
    strategy: &StrategyTable,
    depth: usize,
    max_points: usize,
) -> Result<BeliefSet, PlanError> {
    let threshold = 1e-12;
    let mut points = vec![model.initial_belief.clone()];
    let mut frontier = vec![model.initial_belief.clone()];
    let no = model.num_observations;

    for _ in 0..depth {
        let mut next_frontier = Vec::new();
        for b in &frontier {
            for u in 0..model.num_actions_self {
                let branches = observation_branches(b, u, strategy, model);
                for (idx, &p) in branches.iter().enumerate() {
                    if p <= 0.0 {
                        continue;
                    }
                    let (v, o) = (idx / no, idx % no);
                    let updated = belief_update(b, u, v, o, strategy, model)?;
                    if min_distance(&points, &updated) > threshold {
                        if points.len() >= max_points {
                            return Err(PlanError::Shape(format!(
                                "reachable belief enumeration exceeded {max_points} points"
                            )));
                        }
                        points.push(updated.clone());
                        next_frontier.push(updated);
                    }
                }
            }
        }
        if next_frontier.is_empty() {
            break;
        }
        frontier = next_frontier;
    }

    let requested = points.len();
    Ok(BeliefSet {
        points,
        seed: 0,
        requested,
        dedup_threshold: threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::random_model;
    use crate::model::ProbTable;

    #[test]
    fn target_one_returns_initial_belief() {
        let model = random_model(3, 3, 2, 2, 2, 0.9, -1.0, 1.0);
        let strategy = StrategyTable::uniform(3, 2);
        let set = sample_beliefs(&model, &strategy, 1, 9).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.points[0], model.initial_belief);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let model = random_model(4, 4, 2, 2, 3, 0.9, -1.0, 1.0);
        let strategy = StrategyTable::uniform(4, 2);
        let a = sample_beliefs(&model, &strategy, 25, 123).unwrap();
        let b = sample_beliefs(&model, &strategy, 25, 123).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_beliefs(&model, &strategy, 25, 124).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn perfect_observation_yields_point_masses() {
        // Identity Z: every update collapses onto one state.
        let ns = 3;
        let mut tb = ProbTable::builder(ns);
        for s in 0..ns {
            for _u in 0..2 {
                for _v in 0..2 {
                    let mut row = vec![0.0; ns];
                    row[(s + 1) % ns] = 0.5;
                    row[s] = 0.5;
                    tb.push_dense_row(&row);
                }
            }
        }
        let mut zb = ProbTable::builder(ns);
        for s in 0..ns {
            for _u in 0..2 {
                let mut row = vec![0.0; ns];
                row[s] = 1.0;
                zb.push_dense_row(&row);
            }
        }
        let model = crate::model::PosgModel::new(
            ns,
            2,
            2,
            ns,
            tb.finish(),
            zb.finish(),
            None,
            vec![0.0; ns * 4],
            0.9,
            Belief::uniform(ns),
            false,
        );
        let strategy = StrategyTable::uniform(ns, 2);
        let set = sample_beliefs(&model, &strategy, 10, 5).unwrap();
        for b in set.points.iter().skip(1) {
            let maxp = b.probs().iter().cloned().fold(0.0, f64::max);
            assert!((maxp - 1.0).abs() < 1e-12, "not a point mass: {b:?}");
        }
        // 3 point masses + b0 at most.
        assert!(set.len() <= 4);
        assert!(set.saturated());
    }

    #[test]
    fn reachable_enumeration_contains_initial_belief() {
        let model = random_model(6, 3, 2, 2, 2, 0.9, -1.0, 1.0);
        let strategy = StrategyTable::uniform(3, 2);
        let set = reachable_beliefs(&model, &strategy, 2, 10_000).unwrap();
        assert_eq!(set.points[0], model.initial_belief);
        assert!(set.len() >= 1 + 2 * 2 * 2 - 1); // at least the depth-1 fanout minus merges
    }
}
