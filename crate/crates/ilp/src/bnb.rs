use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::model::{IlpModel, Sense};
use crate::rational::Rational;
use crate::simplex::{Lp, LpFailure, LpStatus};
use crate::IlpError;

const LP_ITERATION_LIMIT: u64 = 5_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveConfig {
    pub node_limit: u64,
    pub time_limit: Duration,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            node_limit: 200_000,
            time_limit: Duration::from_secs(60),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Proven optimal, or any feasible point when there is no objective.
    Optimal,
    /// A feasible point was found but a limit stopped the proof of optimality.
    Feasible,
    Infeasible,
    /// The LP relaxation is unbounded in the objective direction.
    Unbounded,
    /// A limit was hit before any feasible point was found.
    LimitHit,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub pivots: u64,
    pub cold_starts: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IlpSolution {
    pub status: SolveStatus,
    /// One value per variable, empty unless `status` is `Optimal` or `Feasible`.
    pub values: Vec<i64>,
    pub objective_value: Option<i64>,
    pub stats: SolveStats,
}

impl IlpSolution {
    pub fn has_solution(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

/// Outcome of the continuous relaxation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal(Rational),
}

#[derive(Debug)]
struct Node {
    bound: Rational,
    depth: u32,
    seq: u64,
    /// Branching decisions from the root: (variable, lower, upper).
    path: Vec<(usize, Option<i64>, Option<i64>)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: best bound first, then deeper, then older
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

fn root_bounds(model: &IlpModel) -> (Vec<Option<i64>>, Vec<Option<i64>>) {
    model.variables().iter().map(|v| (v.lower, v.upper)).unzip()
}

fn lp_error(f: LpFailure) -> IlpError {
    match f {
        LpFailure::IterationLimit => IlpError::Internal("simplex iteration limit".into()),
        LpFailure::LostDualFeasibility => IlpError::Internal("dual feasibility lost".into()),
    }
}

/// Solves the continuous relaxation of `model`, ignoring integrality.
pub fn solve_relaxation(model: &IlpModel) -> Result<LpOutcome, IlpError> {
    let (lo, hi) = root_bounds(model);
    let (lp, status) =
        Lp::solve_from_scratch(model, &lo, &hi, LP_ITERATION_LIMIT).map_err(lp_error)?;
    Ok(match status {
        LpStatus::Infeasible => LpOutcome::Infeasible,
        LpStatus::Unbounded => LpOutcome::Unbounded,
        LpStatus::Optimal => LpOutcome::Optimal(signed_objective(model, lp.objective_value())),
    })
}

/// True iff the continuous relaxation is feasible and unbounded in the
/// objective direction.
pub fn unbounded_check(model: &IlpModel) -> Result<bool, IlpError> {
    Ok(solve_relaxation(model)? == LpOutcome::Unbounded)
}

fn signed_objective(model: &IlpModel, internal: Rational) -> Rational {
    match model.objective() {
        Some(obj) => {
            let v = match obj.sense {
                Sense::Minimize => internal,
                Sense::Maximize => -internal,
            };
            &v + &Rational::from_int(obj.constant)
        }
        None => Rational::ZERO,
    }
}

struct Search<'a> {
    model: &'a IlpModel,
    root_lo: Vec<Option<i64>>,
    root_hi: Vec<Option<i64>>,
    lp: Option<Lp>,
    stats: SolveStats,
}

impl Search<'_> {
    fn node_bounds(
        &self,
        path: &[(usize, Option<i64>, Option<i64>)],
    ) -> (Vec<Option<i64>>, Vec<Option<i64>>) {
        let mut lo = self.root_lo.clone();
        let mut hi = self.root_hi.clone();
        for &(v, l, u) in path {
            lo[v] = l;
            hi[v] = u;
        }
        (lo, hi)
    }

    /// Solves the LP at a node, warm when possible.
    fn evaluate(
        &mut self,
        path: &[(usize, Option<i64>, Option<i64>)],
    ) -> Result<LpStatus, IlpError> {
        let (lo, hi) = self.node_bounds(path);
        if let Some(lp) = self.lp.as_mut() {
            let before = lp.pivots;
            let mut warm = Ok(());
            for v in 0..lo.len() {
                if lp.bounds(v) != (lo[v], hi[v]) {
                    warm = lp.set_bounds(v, lo[v], hi[v]);
                    if warm.is_err() {
                        break;
                    }
                }
            }
            if warm.is_ok() {
                match lp.dual() {
                    Ok(status) => {
                        self.stats.pivots += lp.pivots - before;
                        return Ok(status);
                    }
                    Err(LpFailure::IterationLimit) => {}
                    Err(e) => return Err(lp_error(e)),
                }
            }
            self.stats.pivots += lp.pivots - before;
        }
        self.stats.cold_starts += 1;
        let (lp, status) =
            Lp::solve_from_scratch(self.model, &lo, &hi, LP_ITERATION_LIMIT).map_err(lp_error)?;
        self.stats.pivots += lp.pivots;
        // An infeasible cold solve leaves the phase one dictionary, which is
        // not a usable warm start.
        self.lp = if status == LpStatus::Optimal {
            Some(lp)
        } else {
            None
        };
        Ok(status)
    }
}

/// Branch and bound over exact rational LP relaxations. Every variable must
/// be integer.
pub fn solve(model: &IlpModel, config: &SolveConfig) -> Result<IlpSolution, IlpError> {
    if let Some(v) = model.variables().iter().find(|v| !v.integer) {
        return Err(IlpError::ContinuousVariable(v.name.clone()));
    }
    let start = Instant::now();
    let (root_lo, root_hi) = root_bounds(model);
    let mut search = Search {
        model,
        root_lo,
        root_hi,
        lp: None,
        stats: SolveStats::default(),
    };
    let has_objective = model.objective().is_some_and(|o| !o.terms.is_empty());

    let mut incumbent: Option<(i64, Vec<i64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: Rational::ZERO,
        depth: 0,
        seq,
        path: Vec::new(),
    });
    let mut limit_hit = false;

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound.ceil().is_some_and(|c| c >= *best) {
                continue;
            }
        }
        if search.stats.nodes >= config.node_limit || start.elapsed() >= config.time_limit {
            limit_hit = true;
            break;
        }
        search.stats.nodes += 1;

        let status = search.evaluate(&node.path)?;
        match status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if node.depth == 0 {
                    return Ok(IlpSolution {
                        status: SolveStatus::Unbounded,
                        values: Vec::new(),
                        objective_value: None,
                        stats: search.stats,
                    });
                }
                // cannot happen below an unbounded-free root; treat as no bound
                return Err(IlpError::Internal(
                    "unbounded node below bounded root".into(),
                ));
            }
            LpStatus::Optimal => {}
        }
        let lp = search.lp.as_ref().expect("optimal node keeps its LP");
        let bound = lp.objective_value();
        if let Some((best, _)) = &incumbent {
            if bound.ceil().is_some_and(|c| c >= *best) {
                continue;
            }
        }

        let mut branch: Option<(usize, Rational)> = None;
        for v in 0..model.num_variables() {
            let f = lp.value(v).fractionality();
            if f.is_zero() {
                continue;
            }
            if branch.as_ref().is_none_or(|(_, bf)| f > *bf) {
                branch = Some((v, f));
            }
        }

        let Some((v, _)) = branch else {
            let values: Vec<i64> = (0..model.num_variables())
                .map(|v| lp.value(v).to_i64())
                .collect::<Option<_>>()
                .ok_or_else(|| IlpError::Internal("integral value out of range".into()))?;
            if !model.is_feasible(&values) {
                return Err(IlpError::Internal(
                    "integral LP point fails exact check".into(),
                ));
            }
            let value = bound
                .to_i64()
                .ok_or_else(|| IlpError::Internal("objective out of range".into()))?;
            incumbent = Some((value, values));
            if !has_objective {
                break;
            }
            continue;
        };

        let x = lp.value(v).clone();
        let down = x
            .floor()
            .ok_or_else(|| IlpError::Internal("branch value out of range".into()))?;
        let up = down + 1;
        let (lo, hi) = search.node_bounds(&node.path);
        let mut down_path = node.path.clone();
        down_path.push((v, lo[v], Some(down)));
        let mut up_path = node.path;
        up_path.push((v, Some(up), hi[v]));
        // the child nearest the LP value is explored first among equals
        let frac_down = &x - &Rational::from_int(down);
        let children = if frac_down <= Rational::Small(1, 2) {
            [down_path, up_path]
        } else {
            [up_path, down_path]
        };
        for path in children {
            seq += 1;
            heap.push(Node {
                bound: bound.clone(),
                depth: node.depth + 1,
                seq,
                path,
            });
        }
    }

    let constant = model.objective().map_or(0, |o| o.constant);
    let sign = match model.objective().map(|o| o.sense) {
        Some(Sense::Maximize) => -1,
        _ => 1,
    };
    let stats = search.stats;
    Ok(match incumbent {
        Some((value, values)) => IlpSolution {
            status: if limit_hit && has_objective {
                SolveStatus::Feasible
            } else {
                SolveStatus::Optimal
            },
            objective_value: Some(sign * value + constant),
            values,
            stats,
        },
        None => IlpSolution {
            status: if limit_hit {
                SolveStatus::LimitHit
            } else {
                SolveStatus::Infeasible
            },
            values: Vec::new(),
            objective_value: None,
            stats,
        },
    })
}
