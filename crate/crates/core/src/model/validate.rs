//! Model linting: every probability row must be a distribution, the discount
//! must lie strictly inside (0,1), rewards must be finite.

use std::fmt;

use super::{PosgModel, PROB_SUM_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// T row (s,u,v) does not sum to 1; carries the actual sum.
    TransitionRowSum { s: usize, u: usize, v: usize, sum: f64 },
    /// Z row (s',a) of the named channel does not sum to 1.
    ObservationRowSum { channel: &'static str, s_next: usize, a: usize, sum: f64 },
    /// A probability entry outside [0,1].
    ProbOutOfRange { what: String, value: f64 },
    DiscountOutOfRange { value: f64 },
    InitialBeliefSum { sum: f64 },
    InitialBeliefLen { expected: usize, actual: usize },
    NonFiniteReward { s: usize, u: usize, v: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TransitionRowSum { s, u, v, sum } => write!(
                f,
                "T row (s={s}, u={u}, v={v}) sums to {sum} (deficit {})",
                1.0 - sum
            ),
            Violation::ObservationRowSum { channel, s_next, a, sum } => write!(
                f,
                "{channel} row (s'={s_next}, a={a}) sums to {sum} (deficit {})",
                1.0 - sum
            ),
            Violation::ProbOutOfRange { what, value } => {
                write!(f, "{what} holds probability {value} outside [0,1]")
            }
            Violation::DiscountOutOfRange { value } => {
                write!(f, "discount {value} is not strictly inside (0,1)")
            }
            Violation::InitialBeliefSum { sum } => write!(f, "initial belief sums to {sum}"),
            Violation::InitialBeliefLen { expected, actual } => {
                write!(f, "initial belief has {actual} entries, model has {expected} states")
            }
            Violation::NonFiniteReward { s, u, v, value } => {
                write!(f, "reward (s={s}, u={u}, v={v}) is not finite: {value}")
            }
        }
    }
}

/// Result of [`validate_model`]; empty means the model is well formed.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "model ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every stochasticity invariant of the model without mutating it.
pub fn validate_model(model: &PosgModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (ns, nu, nv) = (model.num_states, model.num_actions_self, model.num_actions_other);

    for s in 0..ns {
        for u in 0..nu {
            for v in 0..nv {
                let row = model.transition_row(s, u, v);
                let mut sum = 0.0;
                for &(s_next, p) in row {
                    sum += p;
                    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                        report.violations.push(Violation::ProbOutOfRange {
                            what: format!("T(s={s}, u={u}, v={v}, s'={s_next})"),
                            value: p,
                        });
                    }
                }
                if (sum - 1.0).abs() > PROB_SUM_TOL {
                    report.violations.push(Violation::TransitionRowSum { s, u, v, sum });
                }
                let r = model.reward(s, u, v);
                if !r.is_finite() {
                    report.violations.push(Violation::NonFiniteReward { s, u, v, value: r });
                }
            }
        }
    }

    let mut check_channel = |table: &super::ProbTable, channel: &'static str, num_actions: usize| {
        for s_next in 0..ns {
            for a in 0..num_actions {
                let row = table.row(s_next * num_actions + a);
                let mut sum = 0.0;
                for &(o, p) in row {
                    sum += p;
                    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                        report.violations.push(Violation::ProbOutOfRange {
                            what: format!("{channel}(s'={s_next}, a={a}, o={o})"),
                            value: p,
                        });
                    }
                }
                if (sum - 1.0).abs() > PROB_SUM_TOL {
                    report.violations.push(Violation::ObservationRowSum { channel, s_next, a, sum });
                }
            }
        }
    };
    check_channel(model.observation_self_table(), "Z", nu);
    if let Some(t) = model.observation_other_table() {
        check_channel(t, "Z2", nv);
    }

    if !(model.discount > 0.0 && model.discount < 1.0) {
        report.violations.push(Violation::DiscountOutOfRange { value: model.discount });
    }

    if model.initial_belief.len() != ns {
        report.violations.push(Violation::InitialBeliefLen {
            expected: ns,
            actual: model.initial_belief.len(),
        });
    } else {
        let sum = model.initial_belief.sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            report.violations.push(Violation::InitialBeliefSum { sum });
        }
        for (s, p) in model.initial_belief.iter() {
            if !(0.0..=1.0).contains(&p) {
                report.violations.push(Violation::ProbOutOfRange {
                    what: format!("b0({s})"),
                    value: p,
                });
            }
        }
    }

    report
}
