//! Forward simulation and an exhaustive shortest-plan search. Both are kept
//! deliberately naive: they are the reference the solver is checked against.

use std::collections::HashMap;
use std::fmt;

use crate::error::Result;
use crate::model::{ActionId, BoundSide, Plan, ProblemInstance, RegisterId, Situation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    Empty,
    /// Step `index` is not applicable.
    Precondition {
        index: usize,
        action: ActionId,
        register: RegisterId,
        side: BoundSide,
        value: i64,
        bound: i64,
    },
    /// The plan ends with `last`, not with the goal.
    MissingGoal {
        last: ActionId,
    },
    /// The goal appears before the end, at `index`.
    EarlyGoal {
        index: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub failure: Option<Failure>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }

    pub fn describe(&self, pi: &ProblemInstance) -> String {
        match &self.failure {
            None => "valid".to_string(),
            Some(f) => FailureDisplay(f, pi).to_string(),
        }
    }
}

struct FailureDisplay<'a>(&'a Failure, &'a ProblemInstance);

impl fmt::Display for FailureDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pi = self.1;
        match self.0 {
            Failure::Empty => write!(f, "empty plan"),
            Failure::Precondition {
                index,
                action,
                register,
                side,
                value,
                bound,
            } => write!(
                f,
                "step {index} ({}): register {} = {value} violates {side} bound {bound}",
                pi.name(*action),
                pi.iad.registers()[*register]
            ),
            Failure::MissingGoal { last } => {
                write!(
                    f,
                    "plan ends with {} instead of {}",
                    pi.name(*last),
                    pi.name(pi.goal)
                )
            }
            Failure::EarlyGoal { index } => {
                write!(f, "goal {} at step {index} is not last", pi.name(pi.goal))
            }
        }
    }
}

/// Simulates `plan` from the initial situation.
pub fn validate(plan: &Plan, pi: &ProblemInstance) -> Result<Validation> {
    let fail = |f| Ok(Validation { failure: Some(f) });
    let Some(&last) = plan.steps.last() else {
        return fail(Failure::Empty);
    };
    let mut s = pi.initial.clone();
    for (index, &a) in plan.steps.iter().enumerate() {
        if let Some((register, side)) = pi.iad.first_unsatisfied(&s, a)? {
            let bound = match side {
                BoundSide::Lower => pi.iad.lower(a, register),
                BoundSide::Upper => pi.iad.upper(a, register),
            }
            .expect("violated bound is finite");
            return fail(Failure::Precondition {
                index,
                action: a,
                register,
                side,
                value: s.get(register),
                bound,
            });
        }
        if a == pi.goal && index + 1 != plan.len() {
            return fail(Failure::EarlyGoal { index });
        }
        s = pi.iad.apply(&s, a)?;
    }
    if last != pi.goal {
        return fail(Failure::MissingGoal { last });
    }
    Ok(Validation { failure: None })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Found(Plan),
    NoneWithinDepth,
    /// The frontier outgrew the configured cap.
    Inconclusive,
}

pub const DEFAULT_FRONTIER_CAP: usize = 1_000_000;

/// Breadth-first search for a shortest valid plan of at most `max_depth`
/// steps, the goal included. Situations already reached are not expanded
/// again.
pub fn brute_force_shortest(
    pi: &ProblemInstance,
    max_depth: usize,
    frontier_cap: usize,
) -> Result<OracleResult> {
    let n = pi.iad.num_actions();
    let mut parent: HashMap<Situation, Option<(Situation, ActionId)>> = HashMap::new();
    parent.insert(pi.initial.clone(), None);
    let mut frontier = vec![pi.initial.clone()];
    for _depth in 1..=max_depth {
        for s in &frontier {
            if pi.iad.satisfies(s, pi.goal)? {
                let mut steps = vec![pi.goal];
                let mut cur = s.clone();
                while let Some(Some((prev, a))) = parent.get(&cur) {
                    steps.push(*a);
                    cur = prev.clone();
                }
                steps.reverse();
                return Ok(OracleResult::Found(Plan::new(steps)));
            }
        }
        let mut next = Vec::new();
        for s in &frontier {
            for a in 0..n {
                if a == pi.goal || !pi.iad.satisfies(s, a)? {
                    continue;
                }
                let t = pi.iad.apply(s, a)?;
                if parent.contains_key(&t) {
                    continue;
                }
                parent.insert(t.clone(), Some((s.clone(), a)));
                next.push(t);
                if parent.len() > frontier_cap {
                    return Ok(OracleResult::Inconclusive);
                }
            }
        }
        if next.is_empty() {
            return Ok(OracleResult::NoneWithinDepth);
        }
        frontier = next;
    }
    Ok(OracleResult::NoneWithinDepth)
}
