//! Alpha vectors and piecewise-linear convex value functions.

use std::path::Path;

use super::{BeliefSet, PlanError};
use crate::model::Belief;
use crate::textio::{fmt_f64_17, ParseError, Scanner};

/// One hyperplane of the value function: per-state values plus the action
/// whose one-step policy generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    pub weights: Vec<f64>,
    pub action: usize,
}

impl AlphaVector {
    #[inline]
    pub fn dot(&self, belief: &Belief) -> f64 {
        self.weights
            .iter()
            .zip(belief.probs())
            .map(|(w, p)| w * p)
            .sum()
    }
}

/// A finite set of alpha vectors; the value at a belief is the max over the
/// set. `belief_set` records the points a point-based backup maximized over
/// (`None` after exact backups).
#[derive(Debug, Clone)]
pub struct ValueFunction {
    pub vectors: Vec<AlphaVector>,
    /// Number of backups applied (n-step-to-go).
    pub horizon: usize,
    pub belief_set: Option<BeliefSet>,
}

impl ValueFunction {
    /// The zero value function (horizon 0) every backup sequence starts from.
    pub fn zero(num_states: usize) -> ValueFunction {
        ValueFunction {
            vectors: vec![AlphaVector {
                weights: vec![0.0; num_states],
                action: 0,
            }],
            horizon: 0,
            belief_set: None,
        }
    }

    pub fn num_states(&self) -> usize {
        self.vectors.first().map(|a| a.weights.len()).unwrap_or(0)
    }

    /// `max_alpha alpha . b`
    pub fn value_of(&self, belief: &Belief) -> f64 {
        self.vectors
            .iter()
            .map(|a| a.dot(belief))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The maximizing vector at `belief` (lowest index on ties).
    pub fn best_vector(&self, belief: &Belief) -> Result<&AlphaVector, PlanError> {
        let mut best: Option<(&AlphaVector, f64)> = None;
        for a in &self.vectors {
            let v = a.dot(belief);
            match best {
                Some((_, bv)) if v <= bv => {}
                _ => best = Some((a, v)),
            }
        }
        best.map(|(a, _)| a).ok_or(PlanError::EmptyValueFunction)
    }
}

const MAGIC: &str = "posg-value-function";
const VERSION: &str = "v1";

/// Header `{n, |S|, vector count}`, then one line per vector: the action
/// index followed by the per-state weights with 17 significant digits.
pub fn save_value_function_string(vf: &ValueFunction) -> String {
    let mut out = String::new();
    out.push_str(&format!("{MAGIC} {VERSION}\n"));
    out.push_str(&format!(
        "horizon {} states {} vectors {}\n",
        vf.horizon,
        vf.num_states(),
        vf.vectors.len()
    ));
    for a in &vf.vectors {
        out.push_str(&a.action.to_string());
        for w in &a.weights {
            out.push(' ');
            out.push_str(&fmt_f64_17(*w));
        }
        out.push('\n');
    }
    out
}

pub fn save_value_function(vf: &ValueFunction, path: &Path) -> Result<(), PlanError> {
    std::fs::write(path, save_value_function_string(vf)).map_err(ParseError::Io)?;
    Ok(())
}

pub fn load_value_function_str(text: &str) -> Result<ValueFunction, PlanError> {
    let mut sc = Scanner::new(text);
    sc.expect(MAGIC)?;
    let (line, version) = sc.next_token("version")?;
    if version != VERSION {
        return Err(ParseError::at(line, format!("unsupported value function version `{version}`")).into());
    }
    sc.expect("horizon")?;
    let horizon = sc.read_usize("horizon")?;
    sc.expect("states")?;
    let num_states = sc.read_usize("state count")?;
    sc.expect("vectors")?;
    let count = sc.read_usize("vector count")?;
    if count == 0 {
        return Err(PlanError::EmptyValueFunction);
    }
    let mut vectors = Vec::with_capacity(count);
    for _ in 0..count {
        let action = sc.read_usize("action index")?;
        let (_, weights) = sc.read_f64_row(num_states, "alpha weights")?;
        vectors.push(AlphaVector { weights, action });
    }
    if !sc.is_empty() {
        return Err(ParseError::at(sc.current_line(), "trailing content after vectors").into());
    }
    Ok(ValueFunction {
        vectors,
        horizon,
        belief_set: None,
    })
}

pub fn load_value_function(path: &Path) -> Result<ValueFunction, PlanError> {
    let text = std::fs::read_to_string(path).map_err(ParseError::Io)?;
    load_value_function_str(&text)
}
