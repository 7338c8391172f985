//! The outer search over multi-sets of ordered copies.

use std::collections::{BTreeMap, BTreeSet};

use iap_ilp::{solve, IlpSolution, SolveConfig, SolveStatus};
use indexmap::IndexMap;
use serde::Serialize;

use crate::encoder::{
    default_cap, encode, worst_case_value, Encoding, EncodingConfig, Mode, ObjectiveKind,
};
use crate::error::{IapError, Result};
use crate::model::{ActionId, BoundSide, MultiSet, Plan, ProblemInstance, RegisterId};
use crate::mvpop::Mvpop;
use crate::oracle::validate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phi {
    Bfs,
    ViolationGuided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub phi: Phi,
    pub objective: ObjectiveKind,
    pub max_iterations: usize,
    pub ilp: SolveConfig,
    /// Occurrence cap; `None` derives one per multi-set.
    pub cap: Option<i64>,
    pub symmetry_breaking: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            phi: Phi::ViolationGuided,
            objective: ObjectiveKind::MinLength,
            max_iterations: 50,
            ilp: SolveConfig::default(),
            cap: None,
            symmetry_breaking: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Solved,
    ProvenUnsolvable,
    NoSolutionFound,
    Inconclusive,
}

/// Copy `violator` can push the `side` bound of copy `copy` on `register`
/// out of range in some linearization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Threat {
    pub violator: usize,
    pub copy: usize,
    pub register: RegisterId,
    pub side: BoundSide,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThreatRecord {
    pub violator: String,
    pub copy: String,
    pub register: String,
    pub side: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mu: IndexMap<String, usize>,
    pub cap: i64,
    pub full: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relaxed: Option<String>,
    pub phi: Vec<String>,
    pub threats: Vec<ThreatRecord>,
    pub notes: Vec<String>,
}

impl IterationRecord {
    fn new(iteration: usize, pi: &ProblemInstance, ms: &MultiSet) -> Self {
        IterationRecord {
            iteration,
            mu: ms.named(pi).into_iter().collect(),
            cap: 0,
            full: String::new(),
            relaxed: None,
            phi: Vec::new(),
            threats: Vec::new(),
            notes: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub plan: Option<Plan>,
    pub mvpop: Option<Mvpop>,
    pub multiset: MultiSet,
    pub trace: Vec<IterationRecord>,
}

impl SearchResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn trace_json(&self) -> String {
        serde_json::to_string_pretty(&self.trace).expect("trace serializes")
    }
}

fn status_name(s: SolveStatus) -> String {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Feasible => "feasible",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::LimitHit => "limit-hit",
    }
    .to_string()
}

/// One encode-and-solve of the fixed problem over `ms`.
pub fn solve_fixed(
    pi: &ProblemInstance,
    ms: &MultiSet,
    mode: Mode,
    objective: ObjectiveKind,
    cap: i64,
    cfg: &SearchConfig,
) -> Result<(Encoding, IlpSolution)> {
    let ecfg = EncodingConfig {
        occurrence_cap: cap,
        mode,
        objective,
        symmetry_breaking: cfg.symmetry_breaking,
    };
    let enc = encode(pi, ms, &ecfg)?;
    let sol = solve(&enc.model, &cfg.ilp)?;
    Ok((enc, sol))
}

fn hits_cap(enc: &Encoding, sol: &IlpSolution) -> Result<bool> {
    let p = enc.decode(sol)?;
    Ok((0..p.size()).any(|a| a != p.goal() && p.count(a) >= enc.cap))
}

/// Solves at the configured cap and, if some copy count sits on the cap,
/// once more at twice the cap.
fn solve_capped(
    pi: &ProblemInstance,
    ms: &MultiSet,
    mode: Mode,
    objective: ObjectiveKind,
    cfg: &SearchConfig,
    notes: &mut Vec<String>,
) -> Result<(Encoding, IlpSolution)> {
    let cap = cfg.cap.unwrap_or_else(|| default_cap(pi, ms));
    let (enc, sol) = solve_fixed(pi, ms, mode, objective, cap, cfg)?;
    if sol.has_solution() && hits_cap(&enc, &sol)? {
        notes.push(format!(
            "solution reaches cap {cap}; re-solving at {}",
            cap * 2
        ));
        let (enc2, sol2) = solve_fixed(pi, ms, mode, objective, cap * 2, cfg)?;
        if sol2.has_solution() {
            return Ok((enc2, sol2));
        }
    }
    Ok((enc, sol))
}

pub fn phi_bfs(pi: &ProblemInstance, ms: &MultiSet) -> BTreeSet<ActionId> {
    (0..pi.iad.num_actions())
        .filter(|&a| a != pi.goal)
        .min_by(|&a, &b| {
            ms.get(a)
                .cmp(&ms.get(b))
                .then_with(|| pi.name(a).cmp(pi.name(b)))
        })
        .into_iter()
        .collect()
}

/// Pairs of copies where the worst-case ordering of incomparable
/// occurrences breaks a bound that the earliest ordering satisfies.
pub fn threats(pi: &ProblemInstance, p: &Mvpop) -> Result<Vec<Threat>> {
    let inc = p.incomparability();
    let rel = pi.iad.violation_relation();
    let mut out = Vec::new();
    for b in 0..p.size() {
        if b == p.goal() || p.count(b) == 0 {
            continue;
        }
        let bact = p.copies()[b].action;
        for x in 0..pi.iad.num_registers() {
            for side in [BoundSide::Lower, BoundSide::Upper] {
                let bound = match side {
                    BoundSide::Lower => pi.iad.lower(bact, x),
                    BoundSide::Upper => pi.iad.upper(bact, x),
                };
                let Some(bound) = bound else { continue };
                let v = worst_case_value(pi, p, &inc, b, x, side)?;
                let violated = match side {
                    BoundSide::Lower => v < bound,
                    BoundSide::Upper => v > bound,
                };
                if !violated {
                    continue;
                }
                for a in 0..p.size() {
                    let i = inc[b][a];
                    if rel.holds(side, p.copies()[a].action, bact, x) && p.count(a) > i && i > 0 {
                        out.push(Threat {
                            violator: a,
                            copy: b,
                            register: x,
                            side,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn copy_label(pi: &ProblemInstance, p: &Mvpop, c: usize) -> String {
    let copy = p.copies()[c];
    format!("{}.{}", pi.name(copy.action), copy.index)
}

fn threat_records(pi: &ProblemInstance, p: &Mvpop, threats: &[Threat]) -> Vec<ThreatRecord> {
    threats
        .iter()
        .map(|t| ThreatRecord {
            violator: copy_label(pi, p, t.violator),
            copy: copy_label(pi, p, t.copy),
            register: pi.iad.registers()[t.register].clone(),
            side: t.side.to_string(),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum PhiOutcome {
    Flagged {
        actions: BTreeSet<ActionId>,
        threats: Vec<Threat>,
        relaxed: Mvpop,
    },
    /// No relaxed solution, even at twice the cap.
    RelaxedInfeasible,
    /// The relaxed solve hit a limit.
    Inconclusive,
}

/// The actions whose worst-case placement breaks a bound in the minimal
/// relaxed solution over `ms`.
pub fn phi_violation_guided(
    pi: &ProblemInstance,
    ms: &MultiSet,
    cfg: &SearchConfig,
) -> Result<PhiOutcome> {
    phi_violation_guided_noted(pi, ms, cfg, &mut Vec::new()).map(|(o, _)| o)
}

fn phi_violation_guided_noted(
    pi: &ProblemInstance,
    ms: &MultiSet,
    cfg: &SearchConfig,
    notes: &mut Vec<String>,
) -> Result<(PhiOutcome, String)> {
    let (mut enc, mut sol) =
        solve_capped(pi, ms, Mode::Relaxed, ObjectiveKind::MinLength, cfg, notes)?;
    if sol.status == SolveStatus::Infeasible {
        let cap = enc.cap * 2;
        notes.push(format!(
            "relaxed infeasible at cap {}; retrying at {cap}",
            enc.cap
        ));
        (enc, sol) = solve_fixed(pi, ms, Mode::Relaxed, ObjectiveKind::MinLength, cap, cfg)?;
    }
    let status = status_name(sol.status);
    let outcome = match sol.status {
        SolveStatus::Infeasible => PhiOutcome::RelaxedInfeasible,
        SolveStatus::LimitHit | SolveStatus::Unbounded => PhiOutcome::Inconclusive,
        SolveStatus::Optimal | SolveStatus::Feasible => {
            let relaxed = enc.decode(&sol)?;
            let threats = threats(pi, &relaxed)?;
            let actions = threats
                .iter()
                .map(|t| relaxed.copies()[t.violator].action)
                .collect();
            PhiOutcome::Flagged {
                actions,
                threats,
                relaxed,
            }
        }
    };
    Ok((outcome, status))
}

enum Full {
    Solved(Box<SearchResult>),
    Infeasible,
    Stop(SearchStatus),
}

/// Full solve for one iteration; on success the plan is linearized and
/// validated here.
fn full_step(
    pi: &ProblemInstance,
    ms: &MultiSet,
    cfg: &SearchConfig,
    rec: &mut IterationRecord,
) -> Result<Full> {
    let (enc, sol) = solve_capped(pi, ms, Mode::Full, cfg.objective, cfg, &mut rec.notes)?;
    rec.cap = enc.cap;
    rec.full = status_name(sol.status);
    match sol.status {
        SolveStatus::Optimal | SolveStatus::Feasible => {
            let mvpop = enc.decode(&sol)?;
            let plan = mvpop.linearize()?;
            let check = validate(&plan, pi)?;
            if !check.is_valid() {
                return Err(IapError::Soundness(format!(
                    "linearization {:?} of a full solution is invalid: {}",
                    plan.names(pi),
                    check.describe(pi)
                )));
            }
            Ok(Full::Solved(Box::new(SearchResult {
                status: SearchStatus::Solved,
                plan: Some(plan),
                mvpop: Some(mvpop),
                multiset: ms.clone(),
                trace: Vec::new(),
            })))
        }
        SolveStatus::Infeasible => Ok(Full::Infeasible),
        SolveStatus::LimitHit => {
            rec.notes.push("full solve hit a limit".into());
            Ok(Full::Stop(SearchStatus::Inconclusive))
        }
        SolveStatus::Unbounded => Err(IapError::Soundness(
            "capped model reported unbounded".into(),
        )),
    }
}

fn finish(status: SearchStatus, ms: MultiSet, trace: Vec<IterationRecord>) -> SearchResult {
    SearchResult {
        status,
        plan: None,
        mvpop: None,
        multiset: ms,
        trace,
    }
}

fn names(pi: &ProblemInstance, set: &BTreeSet<ActionId>) -> Vec<String> {
    set.iter().map(|&a| pi.name(a).to_string()).collect()
}

/// Grows the multi-set until the fixed problem becomes feasible.
pub fn solve_iap(pi: &ProblemInstance, cfg: &SearchConfig) -> Result<SearchResult> {
    if cfg.max_iterations == 0 {
        return Err(IapError::Precondition(
            "max_iterations must be at least 1".into(),
        ));
    }
    let mut ms = MultiSet::ones(pi);
    let mut trace = Vec::new();
    for iteration in 1..=cfg.max_iterations {
        let mut rec = IterationRecord::new(iteration, pi, &ms);
        match full_step(pi, &ms, cfg, &mut rec)? {
            Full::Solved(mut res) => {
                trace.push(rec);
                res.trace = trace;
                return Ok(*res);
            }
            Full::Stop(status) => {
                trace.push(rec);
                return Ok(finish(status, ms, trace));
            }
            Full::Infeasible => {}
        }
        let phi = match cfg.phi {
            Phi::Bfs => phi_bfs(pi, &ms),
            Phi::ViolationGuided => {
                let (outcome, status) = phi_violation_guided_noted(pi, &ms, cfg, &mut rec.notes)?;
                rec.relaxed = Some(status);
                match outcome {
                    PhiOutcome::RelaxedInfeasible => {
                        trace.push(rec);
                        return Ok(finish(SearchStatus::ProvenUnsolvable, ms, trace));
                    }
                    PhiOutcome::Inconclusive => {
                        rec.notes
                            .push("relaxed solve inconclusive; falling back to bfs".into());
                        phi_bfs(pi, &ms)
                    }
                    PhiOutcome::Flagged {
                        actions,
                        threats,
                        relaxed,
                    } => {
                        rec.threats = threat_records(pi, &relaxed, &threats);
                        if actions.is_empty() {
                            rec.notes
                                .push("no threatened bound; falling back to bfs".into());
                            phi_bfs(pi, &ms)
                        } else {
                            actions
                        }
                    }
                }
            }
        };
        rec.phi = names(pi, &phi);
        trace.push(rec);
        if phi.is_empty() {
            return Ok(finish(SearchStatus::NoSolutionFound, ms, trace));
        }
        for &a in &phi {
            ms.increment(a);
        }
    }
    Ok(finish(SearchStatus::Inconclusive, ms, trace))
}

/// Transitive closure of the action-level violation graph.
fn violation_closure(pi: &ProblemInstance) -> Vec<Vec<bool>> {
    let n = pi.iad.num_actions();
    let mut reach = vec![vec![false; n]; n];
    for (a, b) in pi.iad.violation_relation().edges() {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// Decision procedure for problems whose violation cycles have length at
/// most one.
pub fn solve_k01(pi: &ProblemInstance, cfg: &SearchConfig) -> Result<SearchResult> {
    let k = pi.iad.classify_k();
    if k >= 2 {
        return Err(IapError::Precondition(format!(
            "violation cycles of length {k}; use the general search"
        )));
    }
    if k == 0 {
        let cfg = SearchConfig {
            phi: Phi::ViolationGuided,
            ..cfg.clone()
        };
        return solve_iap(pi, &cfg);
    }
    if cfg.max_iterations == 0 {
        return Err(IapError::Precondition(
            "max_iterations must be at least 1".into(),
        ));
    }
    let reach = violation_closure(pi);
    let mut ms = MultiSet::ones(pi);
    let mut copy_caps: BTreeMap<ActionId, usize> = BTreeMap::new();
    let mut trace = Vec::new();
    for iteration in 1..=cfg.max_iterations {
        let mut rec = IterationRecord::new(iteration, pi, &ms);
        match full_step(pi, &ms, cfg, &mut rec)? {
            Full::Solved(mut res) => {
                trace.push(rec);
                res.trace = trace;
                return Ok(*res);
            }
            Full::Stop(status) => {
                trace.push(rec);
                return Ok(finish(status, ms, trace));
            }
            Full::Infeasible => {}
        }
        let (outcome, status) = phi_violation_guided_noted(pi, &ms, cfg, &mut rec.notes)?;
        rec.relaxed = Some(status);
        let (threats, relaxed) = match outcome {
            PhiOutcome::RelaxedInfeasible => {
                trace.push(rec);
                return Ok(finish(SearchStatus::ProvenUnsolvable, ms, trace));
            }
            PhiOutcome::Inconclusive => {
                rec.notes.push("relaxed solve hit a limit".into());
                trace.push(rec);
                return Ok(finish(SearchStatus::Inconclusive, ms, trace));
            }
            PhiOutcome::Flagged {
                threats, relaxed, ..
            } => (threats, relaxed),
        };
        rec.threats = threat_records(pi, &relaxed, &threats);
        let action_of = |c: usize| relaxed.copies()[c].action;

        // copies of other actions: promote by one more ordered copy
        let cross: BTreeSet<ActionId> = threats
            .iter()
            .filter(|t| action_of(t.violator) != action_of(t.copy))
            .map(|t| action_of(t.violator))
            .filter(|a| copy_caps.get(a).is_none_or(|&c| ms.get(*a) < c))
            .collect();
        if !cross.is_empty() {
            rec.phi = names(pi, &cross);
            trace.push(rec);
            for &a in &cross {
                ms.increment(a);
            }
            continue;
        }

        // self-violations: the relaxed count bounds the copies needed
        let selfish: BTreeSet<ActionId> = threats
            .iter()
            .filter(|t| action_of(t.violator) == action_of(t.copy))
            .map(|t| action_of(t.violator))
            .collect();
        if selfish.is_empty() {
            rec.notes
                .push("no threatened bound; falling back to bfs".into());
            let phi = phi_bfs(pi, &ms);
            rec.phi = names(pi, &phi);
            trace.push(rec);
            for &a in &phi {
                ms.increment(a);
            }
            continue;
        }
        let maximal = |b: ActionId| {
            !selfish
                .iter()
                .any(|&c| c != b && reach[b][c] && !reach[c][b])
        };
        let mut order: Vec<ActionId> = selfish.iter().copied().collect();
        order.sort_by(|&a, &b| {
            maximal(b)
                .cmp(&maximal(a))
                .then_with(|| pi.name(a).cmp(pi.name(b)))
        });
        let counts = relaxed.action_counts(pi.iad.num_actions());
        let mut progressed = None;
        for b in order {
            let total = counts[b].max(0) as usize;
            let cap = *copy_caps.entry(b).or_insert(total.max(1));
            let target = total.min(cap);
            if target > ms.get(b) {
                ms.set(b, target);
            } else if ms.get(b) < cap {
                ms.increment(b);
            } else {
                continue;
            }
            progressed = Some(b);
            break;
        }
        match progressed {
            Some(b) => {
                rec.phi = vec![pi.name(b).to_string()];
                rec.notes.push(format!(
                    "ordered copies of {} capped at {}",
                    pi.name(b),
                    copy_caps[&b]
                ));
                trace.push(rec);
            }
            None => {
                rec.notes
                    .push("every self-violating action is at its copy cap".into());
                trace.push(rec);
                return Ok(finish(SearchStatus::ProvenUnsolvable, ms, trace));
            }
        }
    }
    Ok(finish(SearchStatus::Inconclusive, ms, trace))
}
