use std::collections::BTreeSet;
use std::fmt;

use crate::error::{IapError, Result};

pub type ActionId = usize;
pub type RegisterId = usize;

/// A soft precondition: `delta` says which way the register should lean at
/// the action, `rho` how much that matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Preference {
    pub delta: i8,
    pub rho: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub effect: Vec<i64>,
    /// `None` is minus infinity.
    pub lower: Vec<Option<i64>>,
    /// `None` is plus infinity.
    pub upper: Vec<Option<i64>>,
    pub cost: i64,
    pub defaults: Vec<Option<Preference>>,
}

impl Action {
    pub fn new(name: impl Into<String>, registers: usize) -> Self {
        Action {
            name: name.into(),
            effect: vec![0; registers],
            lower: vec![None; registers],
            upper: vec![None; registers],
            cost: 1,
            defaults: vec![None; registers],
        }
    }

    pub fn with_effect(mut self, x: RegisterId, delta: i64) -> Self {
        self.effect[x] = delta;
        self
    }

    pub fn with_ge(mut self, x: RegisterId, bound: i64) -> Self {
        self.lower[x] = Some(bound);
        self
    }

    pub fn with_le(mut self, x: RegisterId, bound: i64) -> Self {
        self.upper[x] = Some(bound);
        self
    }

    pub fn with_eq(self, x: RegisterId, value: i64) -> Self {
        self.with_ge(x, value).with_le(x, value)
    }

    pub fn with_cost(mut self, cost: i64) -> Self {
        self.cost = cost;
        self
    }

    pub fn with_default(mut self, x: RegisterId, delta: i8, rho: i64) -> Self {
        self.defaults[x] = Some(Preference { delta, rho });
        self
    }

    pub fn has_effects(&self) -> bool {
        self.effect.iter().any(|&e| e != 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundSide {
    Lower,
    Upper,
}

impl fmt::Display for BoundSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSide::Lower => "lower",
            BoundSide::Upper => "upper",
        })
    }
}

/// A valuation of every register.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Situation(pub Vec<i64>);

impl Situation {
    pub fn zero(registers: usize) -> Self {
        Situation(vec![0; registers])
    }

    pub fn get(&self, x: RegisterId) -> i64 {
        self.0[x]
    }
}

/// Actions with additive effects and interval preconditions over integer
/// registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iad {
    registers: Vec<String>,
    actions: Vec<Action>,
}

impl Iad {
    pub fn new(registers: Vec<String>, actions: Vec<Action>) -> Result<Self> {
        if registers.is_empty() {
            return Err(IapError::NoRegisters);
        }
        if actions.is_empty() {
            return Err(IapError::NoActions);
        }
        let mut seen = BTreeSet::new();
        for r in &registers {
            if !seen.insert(r.as_str()) {
                return Err(IapError::DuplicateName(r.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for a in &actions {
            if !seen.insert(a.name.as_str()) {
                return Err(IapError::DuplicateName(a.name.clone()));
            }
            let n = registers.len();
            if a.effect.len() != n
                || a.lower.len() != n
                || a.upper.len() != n
                || a.defaults.len() != n
            {
                return Err(IapError::Schema(format!(
                    "action `{}` does not cover all {n} registers",
                    a.name
                )));
            }
            for (x, (l, u)) in a.lower.iter().zip(&a.upper).enumerate() {
                if let (Some(l), Some(u)) = (l, u) {
                    if l > u {
                        return Err(IapError::EmptyBounds {
                            action: a.name.clone(),
                            register: registers[x].clone(),
                        });
                    }
                }
            }
        }
        Ok(Iad { registers, actions })
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, a: ActionId) -> &Action {
        &self.actions[a]
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_registers(&self) -> usize {
        self.registers.len()
    }

    pub fn action_index(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn register_index(&self, name: &str) -> Option<RegisterId> {
        self.registers.iter().position(|r| r == name)
    }

    pub fn sigma(&self, a: ActionId, x: RegisterId) -> i64 {
        self.actions[a].effect[x]
    }

    pub fn lower(&self, a: ActionId, x: RegisterId) -> Option<i64> {
        self.actions[a].lower[x]
    }

    pub fn upper(&self, a: ActionId, x: RegisterId) -> Option<i64> {
        self.actions[a].upper[x]
    }

    fn check(&self, s: &Situation, a: ActionId) -> Result<()> {
        if a >= self.actions.len() {
            return Err(IapError::UnknownAction(format!("#{a}")));
        }
        if s.0.len() != self.registers.len() {
            return Err(IapError::SituationSize {
                expected: self.registers.len(),
                got: s.0.len(),
            });
        }
        Ok(())
    }

    /// The first register whose bound `a` rejects in `s`.
    pub fn first_unsatisfied(
        &self,
        s: &Situation,
        a: ActionId,
    ) -> Result<Option<(RegisterId, BoundSide)>> {
        self.check(s, a)?;
        let act = &self.actions[a];
        for (x, &v) in s.0.iter().enumerate() {
            if act.lower[x].is_some_and(|l| v < l) {
                return Ok(Some((x, BoundSide::Lower)));
            }
            if act.upper[x].is_some_and(|u| v > u) {
                return Ok(Some((x, BoundSide::Upper)));
            }
        }
        Ok(None)
    }

    pub fn satisfies(&self, s: &Situation, a: ActionId) -> Result<bool> {
        Ok(self.first_unsatisfied(s, a)?.is_none())
    }

    /// `s + a`. Preconditions are not checked.
    pub fn apply(&self, s: &Situation, a: ActionId) -> Result<Situation> {
        self.check(s, a)?;
        let act = &self.actions[a];
        s.0.iter()
            .zip(&act.effect)
            .enumerate()
            .map(|(x, (&v, &d))| {
                v.checked_add(d).ok_or_else(|| {
                    IapError::Overflow(format!("{} on `{}`", act.name, self.registers[x]))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Situation)
    }

    pub fn violation_relation(&self) -> ViolationRelation {
        let mut rel = ViolationRelation::default();
        for (a, act) in self.actions.iter().enumerate() {
            for (x, &d) in act.effect.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                for (b, other) in self.actions.iter().enumerate() {
                    if d < 0 && other.lower[x].is_some() {
                        rel.lower.insert((a, b, x));
                    }
                    if d > 0 && other.upper[x].is_some() {
                        rel.upper.insert((a, b, x));
                    }
                }
            }
        }
        rel
    }

    /// Length of the longest simple cycle of the violation graph, 0 if it is
    /// acyclic. A self-loop has length 1.
    pub fn classify_k(&self) -> usize {
        let n = self.actions.len();
        let rel = self.violation_relation();
        let mut adj = vec![Vec::new(); n];
        for (a, b) in rel.edges() {
            adj[a].push(b);
        }
        let mut best = 0;
        // each simple cycle is found from its smallest node
        for start in 0..n {
            let mut on_path = vec![false; n];
            on_path[start] = true;
            longest_cycle_from(start, start, 1, &adj, &mut on_path, &mut best);
        }
        best
    }
}

fn longest_cycle_from(
    start: usize,
    v: usize,
    len: usize,
    adj: &[Vec<usize>],
    on_path: &mut [bool],
    best: &mut usize,
) {
    for &w in &adj[v] {
        if w == start {
            *best = (*best).max(len);
        } else if w > start && !on_path[w] {
            on_path[w] = true;
            longest_cycle_from(start, w, len + 1, adj, on_path, best);
            on_path[w] = false;
        }
    }
}

/// Which action can push which action's bound out of range, per register.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ViolationRelation {
    /// `(a, b, x)`: `a` lowers `x` and `b` has a lower bound on `x`.
    pub lower: BTreeSet<(ActionId, ActionId, RegisterId)>,
    /// `(a, b, x)`: `a` raises `x` and `b` has an upper bound on `x`.
    pub upper: BTreeSet<(ActionId, ActionId, RegisterId)>,
}

impl ViolationRelation {
    pub fn holds(&self, side: BoundSide, a: ActionId, b: ActionId, x: RegisterId) -> bool {
        match side {
            BoundSide::Lower => self.lower.contains(&(a, b, x)),
            BoundSide::Upper => self.upper.contains(&(a, b, x)),
        }
    }

    pub fn violates(&self, a: ActionId, b: ActionId) -> bool {
        self.lower
            .iter()
            .chain(&self.upper)
            .any(|&(p, q, _)| p == a && q == b)
    }

    pub fn edges(&self) -> BTreeSet<(ActionId, ActionId)> {
        self.lower
            .iter()
            .chain(&self.upper)
            .map(|&(a, b, _)| (a, b))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub iad: Iad,
    pub initial: Situation,
    pub goal: ActionId,
}

impl ProblemInstance {
    pub fn new(iad: Iad, initial: Situation, goal: ActionId) -> Result<Self> {
        if goal >= iad.num_actions() {
            return Err(IapError::UnknownAction(format!("#{goal}")));
        }
        if initial.0.len() != iad.num_registers() {
            return Err(IapError::SituationSize {
                expected: iad.num_registers(),
                got: initial.0.len(),
            });
        }
        if iad.action(goal).has_effects() {
            return Err(IapError::GoalHasEffects(iad.action(goal).name.clone()));
        }
        Ok(ProblemInstance { iad, initial, goal })
    }

    pub fn name(&self, a: ActionId) -> &str {
        &self.iad.action(a).name
    }

    pub fn action_id(&self, name: &str) -> Result<ActionId> {
        self.iad
            .action_index(name)
            .ok_or_else(|| IapError::UnknownAction(name.to_string()))
    }
}

/// Number of ordered copies per action. The goal always has exactly one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiSet {
    mult: Vec<usize>,
}

impl MultiSet {
    pub fn ones(pi: &ProblemInstance) -> Self {
        MultiSet {
            mult: vec![1; pi.iad.num_actions()],
        }
    }

    /// Copies counts may be zero, which removes the action from the encoding.
    pub fn from_counts(pi: &ProblemInstance, mult: Vec<usize>) -> Result<Self> {
        if mult.len() != pi.iad.num_actions() {
            return Err(IapError::InvalidMultiSet(format!(
                "{} entries for {} actions",
                mult.len(),
                pi.iad.num_actions()
            )));
        }
        if mult[pi.goal] != 1 {
            return Err(IapError::InvalidMultiSet(
                "the goal needs exactly one copy".into(),
            ));
        }
        Ok(MultiSet { mult })
    }

    pub fn get(&self, a: ActionId) -> usize {
        self.mult[a]
    }

    pub fn counts(&self) -> &[usize] {
        &self.mult
    }

    pub fn increment(&mut self, a: ActionId) {
        self.mult[a] += 1;
    }

    pub fn set(&mut self, a: ActionId, n: usize) {
        self.mult[a] = n;
    }

    /// Total number of ordered copies.
    pub fn total(&self) -> usize {
        self.mult.iter().sum()
    }

    pub fn named(&self, pi: &ProblemInstance) -> Vec<(String, usize)> {
        self.mult
            .iter()
            .enumerate()
            .map(|(a, &m)| (pi.name(a).to_string(), m))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plan {
    pub steps: Vec<ActionId>,
}

impl Plan {
    pub fn new(steps: Vec<ActionId>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn count(&self, a: ActionId) -> usize {
        self.steps.iter().filter(|&&s| s == a).count()
    }

    pub fn names<'a>(&self, pi: &'a ProblemInstance) -> Vec<&'a str> {
        self.steps.iter().map(|&a| pi.name(a)).collect()
    }
}
