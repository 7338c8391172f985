//! The JSON problem format and the plain-text plan format.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{IapError, Result};
use crate::model::{Action, Iad, Plan, ProblemInstance, Situation};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    registers: Vec<String>,
    actions: Vec<ActionFile>,
    #[serde(default)]
    initial: IndexMap<String, i64>,
    goal: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionFile {
    name: String,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pre: IndexMap<String, BoundFile>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    eff: IndexMap<String, i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<serde_json::Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    defaults: Option<IndexMap<String, DefaultFile>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ge: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    le: Option<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultFile {
    delta: i8,
    rho: i64,
}

fn integral_cost(name: &str, n: &serde_json::Number) -> Result<i64> {
    if let Some(v) = n.as_i64() {
        return Ok(v);
    }
    match n.as_f64() {
        Some(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(f as i64),
        _ => Err(IapError::Schema(format!(
            "cost of `{name}` must be an integer, got {n}"
        ))),
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemInstance> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| IapError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let n = file.registers.len();
    let reg = |name: &str| {
        file.registers
            .iter()
            .position(|r| r == name)
            .ok_or_else(|| IapError::UnknownRegister(name.to_string()))
    };
    let mut actions = Vec::with_capacity(file.actions.len());
    for af in &file.actions {
        let mut a = Action::new(af.name.clone(), n);
        for (r, b) in &af.pre {
            let x = reg(r)?;
            a.lower[x] = b.ge;
            a.upper[x] = b.le;
        }
        for (r, &d) in &af.eff {
            a.effect[reg(r)?] = d;
        }
        if let Some(c) = &af.cost {
            a.cost = integral_cost(&af.name, c)?;
        }
        for (r, d) in af.defaults.iter().flatten() {
            if d.delta != 1 && d.delta != -1 {
                return Err(IapError::Schema(format!(
                    "default delta of `{}` must be 1 or -1",
                    af.name
                )));
            }
            if d.rho < 0 {
                return Err(IapError::Schema(format!(
                    "default rho of `{}` must be non-negative",
                    af.name
                )));
            }
            a = a.with_default(reg(r)?, d.delta, d.rho);
        }
        actions.push(a);
    }
    let mut initial = Situation::zero(n);
    for (r, &v) in &file.initial {
        initial.0[reg(r)?] = v;
    }
    let iad = Iad::new(file.registers.clone(), actions)?;
    let goal = iad
        .action_index(&file.goal)
        .ok_or_else(|| IapError::UnknownAction(file.goal.clone()))?;
    ProblemInstance::new(iad, initial, goal)
}

pub fn problem_to_json(pi: &ProblemInstance) -> String {
    let regs = pi.iad.registers();
    let actions = pi
        .iad
        .actions()
        .iter()
        .map(|a| {
            let mut pre = IndexMap::new();
            let mut eff = IndexMap::new();
            let mut defaults = IndexMap::new();
            for (x, r) in regs.iter().enumerate() {
                if a.lower[x].is_some() || a.upper[x].is_some() {
                    pre.insert(
                        r.clone(),
                        BoundFile {
                            ge: a.lower[x],
                            le: a.upper[x],
                        },
                    );
                }
                if a.effect[x] != 0 {
                    eff.insert(r.clone(), a.effect[x]);
                }
                if let Some(p) = a.defaults[x] {
                    defaults.insert(
                        r.clone(),
                        DefaultFile {
                            delta: p.delta,
                            rho: p.rho,
                        },
                    );
                }
            }
            ActionFile {
                name: a.name.clone(),
                pre,
                eff,
                cost: (a.cost != 1).then(|| a.cost.into()),
                defaults: (!defaults.is_empty()).then_some(defaults),
            }
        })
        .collect();
    let file = ProblemFile {
        registers: regs.to_vec(),
        actions,
        initial: regs
            .iter()
            .cloned()
            .zip(pi.initial.0.iter().copied())
            .collect(),
        goal: pi.name(pi.goal).to_string(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("problem serializes");
    out.push('\n');
    out
}

/// One action per line; `#` starts a comment.
pub fn parse_plan(pi: &ProblemInstance, text: &str) -> Result<Plan> {
    let mut steps = Vec::new();
    for line in text.lines() {
        let name = line.split('#').next().unwrap_or("").trim();
        if !name.is_empty() {
            steps.push(pi.action_id(name)?);
        }
    }
    Ok(Plan::new(steps))
}

pub fn format_plan(pi: &ProblemInstance, plan: &Plan) -> String {
    plan.steps
        .iter()
        .map(|&a| format!("{}\n", pi.name(a)))
        .collect()
}
