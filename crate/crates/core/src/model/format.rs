//! The versioned model file format.
//!
//! ```text
//! posg-model v1
//! # comments allowed anywhere
//! states 3
//! actions_self 2
//! actions_other 2
//! observations 2
//! discount 0.95
//! zero_sum true
//! T
//! ... |S|*|U|*|V| rows of |S| probabilities, row-major (s,u,v,s') ...
//! Z
//! ... |S|*|U| rows of |O| probabilities, row-major (s',u,o) ...
//! Z2          # optional opponent channel, rows (s',v,o)
//! R
//! ... |S|*|U| rows of |V| rewards ...
//! b0
//! ... |S| probabilities ...
//! ```
//!
//! Numbers are printed in the shortest form that parses back to the same
//! float, so `load` followed by `save` reproduces a saved file byte for byte.
//! Probability rows whose sum is off by at most 1e-6 are re-normalized on
//! load (text round-tripping tolerance); anything worse is rejected with the
//! offending line.

use std::path::Path;

use super::{Belief, ModelError, PosgModel, ProbTable, RENORMALIZE_TOL};
use crate::textio::{fmt_f64, push_row, ParseError, Scanner};

const MAGIC: &str = "posg-model";
const VERSION: &str = "v1";

pub fn save_model_string(model: &PosgModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("{MAGIC} {VERSION}\n"));
    out.push_str(&format!("states {}\n", model.num_states));
    out.push_str(&format!("actions_self {}\n", model.num_actions_self));
    out.push_str(&format!("actions_other {}\n", model.num_actions_other));
    out.push_str(&format!("observations {}\n", model.num_observations));
    out.push_str(&format!("discount {}\n", fmt_f64(model.discount)));
    out.push_str(&format!("zero_sum {}\n", model.zero_sum));

    out.push_str("T\n");
    for s in 0..model.num_states {
        for u in 0..model.num_actions_self {
            for v in 0..model.num_actions_other {
                push_row(&mut out, dense(model.transition_row(s, u, v), model.num_states));
            }
        }
    }
    out.push_str("Z\n");
    for s_next in 0..model.num_states {
        for u in 0..model.num_actions_self {
            push_row(&mut out, dense(model.observation_row(s_next, u), model.num_observations));
        }
    }
    if model.has_opponent_channel() {
        out.push_str("Z2\n");
        for s_next in 0..model.num_states {
            for v in 0..model.num_actions_other {
                let row = model.opponent_observation_row(s_next, v).expect("channel present");
                push_row(&mut out, dense(row, model.num_observations));
            }
        }
    }
    out.push_str("R\n");
    for s in 0..model.num_states {
        for u in 0..model.num_actions_self {
            push_row(
                &mut out,
                (0..model.num_actions_other).map(|v| model.reward(s, u, v)),
            );
        }
    }
    out.push_str("b0\n");
    push_row(&mut out, model.initial_belief.probs().iter().copied());
    out
}

pub fn save_model(model: &PosgModel, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, save_model_string(model))?;
    Ok(())
}

fn dense(row: &[(u32, f64)], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for &(i, p) in row {
        out[i as usize] = p;
    }
    out
}

/// Reads a probability row of length `n`, re-normalizing small drift and
/// rejecting rows too far from stochastic.
fn read_prob_row(sc: &mut Scanner, n: usize, what: &str) -> Result<Vec<f64>, ParseError> {
    let (line, mut row) = sc.read_f64_row(n, what)?;
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > RENORMALIZE_TOL {
        return Err(ParseError::at(
            line,
            format!("{what} row sums to {sum}, beyond the re-normalization tolerance {RENORMALIZE_TOL}"),
        ));
    }
    if row.iter().any(|&p| p < 0.0) {
        return Err(ParseError::at(line, format!("{what} row holds a negative probability")));
    }
    if sum != 1.0 {
        for p in &mut row {
            *p /= sum;
        }
    }
    Ok(row)
}

pub fn load_model_str(text: &str) -> Result<PosgModel, ModelError> {
    let mut sc = Scanner::new(text);
    sc.expect(MAGIC)?;
    let (line, version) = sc.next_token("format version")?;
    if version != VERSION {
        return Err(ParseError::at(line, format!("unsupported model format version `{version}`")).into());
    }

    sc.expect("states")?;
    let ns = sc.read_usize("state count")?;
    sc.expect("actions_self")?;
    let nu = sc.read_usize("self action count")?;
    sc.expect("actions_other")?;
    let nv = sc.read_usize("other action count")?;
    sc.expect("observations")?;
    let no = sc.read_usize("observation count")?;
    sc.expect("discount")?;
    let discount = sc.read_f64("discount")?;
    sc.expect("zero_sum")?;
    let zero_sum = sc.read_bool("zero_sum flag")?;
    if ns == 0 || nu == 0 || nv == 0 || no == 0 {
        return Err(ModelError::Dimension("all set sizes must be positive".into()));
    }

    sc.expect("T")?;
    let mut tb = ProbTable::builder(ns);
    for _ in 0..ns * nu * nv {
        tb.push_dense_row(&read_prob_row(&mut sc, ns, "T")?);
    }

    sc.expect("Z")?;
    let mut zb = ProbTable::builder(no);
    for _ in 0..ns * nu {
        zb.push_dense_row(&read_prob_row(&mut sc, no, "Z")?);
    }

    let observation_other = if sc.peek() == Some("Z2") {
        sc.expect("Z2")?;
        let mut z2 = ProbTable::builder(no);
        for _ in 0..ns * nv {
            z2.push_dense_row(&read_prob_row(&mut sc, no, "Z2")?);
        }
        Some(z2.finish())
    } else {
        None
    };

    sc.expect("R")?;
    let mut reward = Vec::with_capacity(ns * nu * nv);
    for _ in 0..ns * nu {
        let (_, row) = sc.read_f64_row(nv, "R")?;
        reward.extend(row);
    }

    sc.expect("b0")?;
    let b0_row = read_prob_row(&mut sc, ns, "b0")?;
    let initial_belief = Belief::from_weights(b0_row)?;

    if !sc.is_empty() {
        return Err(ParseError::at(sc.current_line(), "trailing content after b0 section").into());
    }

    Ok(PosgModel::new(
        ns,
        nu,
        nv,
        no,
        tb.finish(),
        zb.finish(),
        observation_other,
        reward,
        discount,
        initial_belief,
        zero_sum,
    ))
}

pub fn load_model(path: &Path) -> Result<PosgModel, ModelError> {
    let text = std::fs::read_to_string(path)?;
    load_model_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::random_model;
    use crate::model::validate_model;

    #[test]
    fn save_load_save_is_byte_identical() {
        let m = random_model(11, 4, 2, 3, 2, 0.93, -5.0, 5.0);
        let text = save_model_string(&m);
        let reloaded = load_model_str(&text).unwrap();
        assert_eq!(save_model_string(&reloaded), text);
        assert!(validate_model(&reloaded).is_valid());
    }

    #[test]
    fn small_drift_is_renormalized() {
        let m = random_model(3, 2, 1, 1, 2, 0.9, 0.0, 1.0);
        let text = save_model_string(&m);
        // Perturb the first T row within tolerance.
        let text = text.replacen("T\n", "T\n0.20000000000000007 0.8000000000000004\n", 1);
        // Drop what was the original first row.
        let mut lines: Vec<&str> = text.lines().collect();
        let t_idx = lines.iter().position(|l| *l == "T").unwrap();
        lines.remove(t_idx + 2);
        let patched = lines.join("\n");
        let m2 = load_model_str(&patched).unwrap();
        assert!(validate_model(&m2).is_valid());
    }

    #[test]
    fn large_drift_is_rejected_with_line() {
        let m = random_model(3, 2, 1, 1, 2, 0.9, 0.0, 1.0);
        let text = save_model_string(&m);
        let bad = text.replacen("T\n", "T\n0.5 0.4\n", 1);
        let mut lines: Vec<&str> = bad.lines().collect();
        let t_idx = lines.iter().position(|l| *l == "T").unwrap();
        lines.remove(t_idx + 2);
        let err = load_model_str(&lines.join("\n")).unwrap_err();
        match err {
            ModelError::Parse(p) => assert_eq!(p.line(), Some(t_idx + 2)),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
