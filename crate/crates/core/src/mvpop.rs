//! Multi-valued partial order plans.
//!
//! `P[b][a]` is the number of occurrences of copy `a` before the first
//! occurrence of copy `b`; the goal row holds each copy's total count.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write};
use std::rc::Rc;

use crate::error::{IapError, Result};
use crate::model::{ActionId, MultiSet, Plan, ProblemInstance};

/// Ordered copy `index` of `action`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CopyId {
    pub action: ActionId,
    pub index: usize,
}

/// Copies of a multi-set in action order, then copy index.
pub fn copy_layout(ms: &MultiSet) -> Vec<CopyId> {
    ms.counts()
        .iter()
        .enumerate()
        .flat_map(|(action, &m)| (0..m).map(move |index| CopyId { action, index }))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomViolation {
    Negative {
        b: usize,
        a: usize,
    },
    Reflexive {
        a: usize,
    },
    Asymmetric {
        a: usize,
        b: usize,
    },
    /// `P[c][b] > 0` but `P[c][a] < P[b][a]`.
    Transitive {
        c: usize,
        b: usize,
        a: usize,
    },
    /// Something is ordered after the goal.
    GoalColumn {
        a: usize,
    },
    /// `P[b][a]` exceeds the total count `P[g][a]`.
    Domination {
        b: usize,
        a: usize,
    },
    /// A copy with zero occurrences still orders other copies before it.
    UnusedOrdered {
        b: usize,
        a: usize,
    },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::Negative { b, a } => write!(f, "P[{b},{a}] is negative"),
            AxiomViolation::Reflexive { a } => write!(f, "P[{a},{a}] is not zero"),
            AxiomViolation::Asymmetric { a, b } => {
                write!(f, "P[{a},{b}] and P[{b},{a}] are both positive")
            }
            AxiomViolation::Transitive { c, b, a } => {
                write!(f, "P[{c},{b}] > 0 but P[{c},{a}] < P[{b},{a}]")
            }
            AxiomViolation::GoalColumn { a } => write!(f, "P[{a},g] is not zero"),
            AxiomViolation::Domination { b, a } => write!(f, "P[{b},{a}] exceeds P[g,{a}]"),
            AxiomViolation::UnusedOrdered { b, a } => {
                write!(f, "unused copy {b} has P[{b},{a}] > 0")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mvpop {
    copies: Vec<CopyId>,
    matrix: Vec<Vec<i64>>,
    goal: usize,
}

impl Mvpop {
    pub fn new(copies: Vec<CopyId>, matrix: Vec<Vec<i64>>, goal: usize) -> Result<Self> {
        let n = copies.len();
        let cols = matrix.first().map_or(0, |r| r.len());
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) || goal >= n {
            return Err(IapError::DimensionMismatch {
                rows: matrix.len(),
                cols,
                copies: n,
            });
        }
        Ok(Mvpop {
            copies,
            matrix,
            goal,
        })
    }

    pub fn copies(&self) -> &[CopyId] {
        &self.copies
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn size(&self) -> usize {
        self.copies.len()
    }

    pub fn entry(&self, b: usize, a: usize) -> i64 {
        self.matrix[b][a]
    }

    /// Total occurrences of copy `a`; the goal itself counts once.
    pub fn count(&self, a: usize) -> i64 {
        if a == self.goal {
            1
        } else {
            self.matrix[self.goal][a]
        }
    }

    fn used(&self, a: usize) -> bool {
        a == self.goal || self.matrix[self.goal][a] > 0
    }

    /// Total occurrences per action.
    pub fn action_counts(&self, actions: usize) -> Vec<i64> {
        let mut out = vec![0; actions];
        for (c, copy) in self.copies.iter().enumerate() {
            out[copy.action] += self.count(c);
        }
        out
    }

    pub fn find(&self, action: ActionId, index: usize) -> Option<usize> {
        self.copies
            .iter()
            .position(|c| c.action == action && c.index == index)
    }

    pub fn check_axioms(&self) -> Vec<AxiomViolation> {
        let n = self.size();
        let g = self.goal;
        let p = &self.matrix;
        let mut out = Vec::new();
        for b in 0..n {
            for a in 0..n {
                if p[b][a] < 0 {
                    out.push(AxiomViolation::Negative { b, a });
                }
            }
        }
        for a in 0..n {
            if p[a][a] != 0 {
                out.push(AxiomViolation::Reflexive { a });
            }
            if a != g && p[a][g] != 0 {
                out.push(AxiomViolation::GoalColumn { a });
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if p[a][b] > 0 && p[b][a] > 0 {
                    out.push(AxiomViolation::Asymmetric { a, b });
                }
            }
        }
        for c in 0..n {
            for b in 0..n {
                if p[c][b] <= 0 {
                    continue;
                }
                for a in 0..n {
                    if p[c][a] < p[b][a] {
                        out.push(AxiomViolation::Transitive { c, b, a });
                    }
                }
            }
        }
        for b in 0..n {
            if b == g {
                continue;
            }
            for a in 0..n {
                if a != g && p[b][a] > p[g][a] {
                    out.push(AxiomViolation::Domination { b, a });
                }
                if p[g][b] == 0 && p[b][a] > 0 {
                    out.push(AxiomViolation::UnusedOrdered { b, a });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.check_axioms().is_empty()
    }

    /// Worst-case number of occurrences of `a` that may fall on either side
    /// of the first occurrence of `b`.
    ///
    /// Occurrences of `a` already forced before `b` are fixed. The others are
    /// free, except when `a` starts only after every occurrence of `b`.
    pub fn incomparability(&self) -> Vec<Vec<i64>> {
        let n = self.size();
        let g = self.goal;
        let p = &self.matrix;
        let mut inc = vec![vec![0; n]; n];
        for b in 0..n {
            if b == g || !self.used(b) {
                continue;
            }
            for a in 0..n {
                if a == g || !self.used(a) {
                    continue;
                }
                inc[b][a] = if a == b {
                    (p[g][b] - 1).max(0)
                } else if p[a][b] >= p[g][b] {
                    0
                } else {
                    p[g][a] - p[b][a]
                };
            }
        }
        inc
    }

    /// The MvPOP whose only linearization is `plan`: one ordered copy per
    /// occurrence.
    pub fn from_plan(pi: &ProblemInstance, plan: &Plan) -> Result<(MultiSet, Mvpop)> {
        let n_actions = pi.iad.num_actions();
        if plan.steps.last() != Some(&pi.goal) {
            return Err(IapError::InvalidPlan(
                "the plan must end with the goal".into(),
            ));
        }
        if let Some(&bad) = plan.steps.iter().find(|&&a| a >= n_actions) {
            return Err(IapError::UnknownAction(format!("#{bad}")));
        }
        if plan.count(pi.goal) != 1 {
            return Err(IapError::InvalidPlan("the goal may occur only once".into()));
        }
        let mut counts = vec![0usize; n_actions];
        for &a in &plan.steps {
            counts[a] += 1;
        }
        let ms = MultiSet::from_counts(pi, counts)?;
        let copies = copy_layout(&ms);
        let mut position = vec![0usize; copies.len()];
        let mut seen = vec![0usize; n_actions];
        for (t, &a) in plan.steps.iter().enumerate() {
            let c = copies
                .iter()
                .position(|c| c.action == a && c.index == seen[a])
                .expect("layout covers every occurrence");
            position[c] = t;
            seen[a] += 1;
        }
        let n = copies.len();
        let mut matrix = vec![vec![0; n]; n];
        for b in 0..n {
            for a in 0..n {
                if position[a] < position[b] {
                    matrix[b][a] = 1;
                }
            }
        }
        let goal = copies.iter().position(|c| c.action == pi.goal).unwrap();
        Ok((
            ms,
            Mvpop {
                copies,
                matrix,
                goal,
            },
        ))
    }

    /// Topological order of the used non-goal copies, smallest index first
    /// among ready copies.
    fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.size();
        let nodes: Vec<usize> = (0..n).filter(|&c| c != self.goal && self.used(c)).collect();
        let mut indeg = vec![0usize; n];
        for &b in &nodes {
            for &a in &nodes {
                if a != b && self.matrix[b][a] > 0 {
                    indeg[b] += 1;
                }
            }
        }
        let mut ready: BTreeSet<usize> = nodes.iter().copied().filter(|&c| indeg[c] == 0).collect();
        let mut order = Vec::with_capacity(nodes.len());
        while let Some(a) = ready.pop_first() {
            order.push(a);
            for &b in &nodes {
                if b != a && self.matrix[b][a] > 0 {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        ready.insert(b);
                    }
                }
            }
        }
        if order.len() != nodes.len() {
            return Err(IapError::Axiom("order graph has a cycle".into()));
        }
        Ok(order)
    }

    /// One linearization, built earliest-first: each copy's first occurrence
    /// is preceded only by what its row demands, leftovers go just before
    /// the goal.
    pub fn linearize(&self) -> Result<Plan> {
        let n = self.size();
        let order = self.topological_order()?;
        let mut emitted = vec![0i64; n];
        let mut steps = Vec::new();
        for &b in &order {
            for a in 0..n {
                while emitted[a] < self.matrix[b][a] {
                    steps.push(self.copies[a].action);
                    emitted[a] += 1;
                }
            }
            steps.push(self.copies[b].action);
            emitted[b] += 1;
        }
        for &a in &order {
            while emitted[a] < self.matrix[self.goal][a] {
                steps.push(self.copies[a].action);
                emitted[a] += 1;
            }
        }
        steps.push(self.copies[self.goal].action);
        Ok(Plan::new(steps))
    }

    /// Every distinct action list that linearizes this MvPOP, sorted.
    pub fn enumerate_linearizations(&self, limit: usize) -> Result<Vec<Plan>> {
        let mut memo = HashMap::new();
        let start = vec![0i64; self.size()];
        let all = self.suffixes(start, limit, &mut memo)?;
        Ok(all.iter().map(|s| Plan::new(s.clone())).collect())
    }

    fn suffixes(
        &self,
        emitted: Vec<i64>,
        limit: usize,
        memo: &mut HashMap<Vec<i64>, Rc<BTreeSet<Vec<ActionId>>>>,
    ) -> Result<Rc<BTreeSet<Vec<ActionId>>>> {
        if let Some(hit) = memo.get(&emitted) {
            return Ok(hit.clone());
        }
        let n = self.size();
        let g = self.goal;
        let mut out = BTreeSet::new();
        let complete = (0..n).all(|a| a == g || emitted[a] >= self.matrix[g][a]);
        if complete {
            out.insert(vec![self.copies[g].action]);
        } else {
            for c in 0..n {
                if c == g || emitted[c] >= self.matrix[g][c] {
                    continue;
                }
                if emitted[c] == 0 && (0..n).any(|a| emitted[a] < self.matrix[c][a]) {
                    continue;
                }
                let mut next = emitted.clone();
                next[c] += 1;
                let tails = self.suffixes(next, limit, memo)?;
                let head = self.copies[c].action;
                for tail in tails.iter() {
                    let mut s = Vec::with_capacity(tail.len() + 1);
                    s.push(head);
                    s.extend_from_slice(tail);
                    out.insert(s);
                }
                if out.len() > limit {
                    return Err(IapError::EnumerationLimit {
                        limit,
                        found: out.len(),
                    });
                }
            }
        }
        let out = Rc::new(out);
        memo.insert(emitted, out.clone());
        Ok(out)
    }

    /// Graphviz digraph of the used copies with a transitively reduced order.
    pub fn to_dot(&self, pi: &ProblemInstance) -> String {
        let n = self.size();
        let nodes: Vec<usize> = (0..n).filter(|&c| self.used(c)).collect();
        let mut out = String::from("digraph mvpop {\n  rankdir=LR;\n");
        for &c in &nodes {
            let name = pi.name(self.copies[c].action).replace('"', "\\\"");
            let _ = writeln!(out, "  c{c} [label=\"{name} \u{d7}{}\"];", self.count(c));
        }
        for &b in &nodes {
            for &a in &nodes {
                if a == b || self.matrix[b][a] <= 0 {
                    continue;
                }
                let implied = nodes
                    .iter()
                    .any(|&c| c != a && c != b && self.matrix[c][a] > 0 && self.matrix[b][c] > 0);
                if !implied {
                    let _ = writeln!(out, "  c{a} -> c{b} [label=\"{}\"];", self.matrix[b][a]);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
