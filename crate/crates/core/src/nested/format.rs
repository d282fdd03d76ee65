//! Text format for solved policy stacks, so the arena can reload a policy
//! without re-solving.

use std::path::Path;

use super::{NestedError, NestedPolicyStack, QTable};
use crate::model::{Perspective, StrategyTable};
use crate::textio::{fmt_f64_17, ParseError, Scanner};

const MAGIC: &str = "posg-policy-stack";
const VERSION: &str = "v1";

pub fn save_stack_string(stack: &NestedPolicyStack) -> String {
    let mut out = String::new();
    out.push_str(&format!("{MAGIC} {VERSION}\n"));
    out.push_str(&format!("agent {}\n", stack.agent.label()));
    out.push_str(&format!("level {}\n", stack.level));
    out.push_str(&format!("horizon {}\n", stack.horizon));
    out.push_str(&format!(
        "states {} own_actions {} other_actions {}\n",
        stack.top_q.num_states, stack.top_q.num_own_actions, stack.top_q.num_other_actions
    ));
    out.push_str("level_weights");
    for w in &stack.level_weights {
        out.push(' ');
        out.push_str(&fmt_f64_17(*w));
    }
    out.push('\n');

    let write_table = |name: &str, idx: usize, t: &StrategyTable, out: &mut String| {
        out.push_str(&format!("{name} {idx} actions {}\n", t.num_actions()));
        for s in 0..t.num_states() {
            let row: Vec<String> = t.row(s).iter().map(|&p| fmt_f64_17(p)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    };
    for (i, t) in stack.opponent_models.iter().enumerate() {
        write_table("opponent_model", i, t, &mut out);
    }
    for (i, t) in stack.own_models.iter().enumerate() {
        write_table("own_model", i, t, &mut out);
    }
    write_table("top_policy", stack.level, &stack.top_policy, &mut out);

    out.push_str("top_q\n");
    for s in 0..stack.top_q.num_states {
        let row: Vec<String> = stack.top_q.state_block(s).iter().map(|&q| fmt_f64_17(q)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str("top_values\n");
    let row: Vec<String> = stack.top_values.iter().map(|&v| fmt_f64_17(v)).collect();
    out.push_str(&row.join(" "));
    out.push('\n');
    out
}

pub fn save_stack(stack: &NestedPolicyStack, path: &Path) -> Result<(), NestedError> {
    std::fs::write(path, save_stack_string(stack)).map_err(crate::textio::ParseError::Io)?;
    Ok(())
}

pub fn load_stack_str(text: &str) -> Result<NestedPolicyStack, NestedError> {
    let mut sc = Scanner::new(text);
    sc.expect(MAGIC)?;
    let (line, version) = sc.next_token("version")?;
    if version != VERSION {
        return Err(ParseError::at(line, format!("unsupported policy stack version `{version}`")).into());
    }
    sc.expect("agent")?;
    let (line, agent_tok) = sc.next_token("agent")?;
    let agent = match agent_tok {
        "own" => Perspective::Own,
        "opponent" => Perspective::Opponent,
        other => return Err(ParseError::at(line, format!("unknown agent `{other}`")).into()),
    };
    sc.expect("level")?;
    let level = sc.read_usize("level")?;
    sc.expect("horizon")?;
    let horizon = sc.read_usize("horizon")?;
    sc.expect("states")?;
    let ns = sc.read_usize("states")?;
    sc.expect("own_actions")?;
    let na = sc.read_usize("own actions")?;
    sc.expect("other_actions")?;
    let nc = sc.read_usize("other actions")?;
    sc.expect("level_weights")?;
    let mut level_weights = Vec::with_capacity(level);
    for _ in 0..level {
        level_weights.push(sc.read_f64("level weight")?);
    }

    let read_table = |sc: &mut Scanner, name: &str, expect_idx: usize| -> Result<StrategyTable, NestedError> {
        sc.expect(name)?;
        let (line, idx) = sc.next_token("table level")?;
        if idx != expect_idx.to_string() {
            return Err(ParseError::at(line, format!("expected {name} {expect_idx}, found {idx}")).into());
        }
        sc.expect("actions")?;
        let actions = sc.read_usize("table action count")?;
        let mut probs = Vec::with_capacity(ns * actions);
        for _ in 0..ns {
            let (_, row) = sc.read_f64_row(actions, name)?;
            probs.extend(row);
        }
        Ok(StrategyTable::from_flat(ns, actions, probs)?)
    };

    let mut opponent_models = Vec::with_capacity(level);
    for i in 0..level {
        opponent_models.push(read_table(&mut sc, "opponent_model", i)?);
    }
    let mut own_models = Vec::with_capacity(level);
    for i in 0..level {
        own_models.push(read_table(&mut sc, "own_model", i)?);
    }
    let top_policy = read_table(&mut sc, "top_policy", level)?;

    sc.expect("top_q")?;
    let mut q = Vec::with_capacity(ns * na * nc);
    for _ in 0..ns {
        let (_, row) = sc.read_f64_row(na * nc, "top_q")?;
        q.extend(row);
    }
    sc.expect("top_values")?;
    let (_, top_values) = sc.read_f64_row(ns, "top_values")?;

    Ok(NestedPolicyStack {
        agent,
        level,
        horizon,
        level_weights,
        opponent_models,
        own_models,
        top_q: QTable {
            num_states: ns,
            num_own_actions: na,
            num_other_actions: nc,
            horizon,
            level,
            agent,
            q,
        },
        top_values,
        top_policy,
    })
}

pub fn load_stack(path: &Path) -> Result<NestedPolicyStack, NestedError> {
    let text = std::fs::read_to_string(path).map_err(crate::textio::ParseError::Io)?;
    load_stack_str(&text)
}
