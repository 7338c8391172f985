//! Bounded-variable simplex over exact rationals, in dictionary form.
//!
//! Every variable (structural, row activity, artificial) carries its own
//! bounds. Rows are written as `activity_i - sum_j a_ij x_j = 0` and the
//! activity variable carries the row's right-hand side as a bound, so a
//! constraint is just a bounded variable. The dictionary keeps
//! `x_B = b - T x_N`; values are tracked incrementally, which is exact.
//!
//! The tableau and basis are reused between branch-and-bound nodes: bound
//! changes never disturb dual feasibility, so each node is one dual simplex
//! run from wherever the previous node left off.

use crate::model::{Comparator, IlpModel, Sense};
use crate::rational::Rational;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: u32 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pos {
    Basic(usize),
    NonBasic(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug)]
pub(crate) enum LpFailure {
    IterationLimit,
    /// A bound change left a nonbasic variable without a finite bound on the
    /// side its reduced cost requires; the caller should rebuild from scratch.
    LostDualFeasibility,
}

pub(crate) struct Lp {
    n_struct: usize,
    lo: Vec<Option<i64>>,
    hi: Vec<Option<i64>>,
    cost: Vec<Rational>,
    x: Vec<Rational>,
    basis: Vec<usize>,
    nonbasic: Vec<usize>,
    pos: Vec<Pos>,
    tab: Vec<Vec<Rational>>,
    d: Vec<Rational>,
    objective: Vec<Rational>,
    pub pivots: u64,
    pub iteration_limit: u64,
}

impl Lp {
    /// Builds the dictionary for `model` with structural bounds `lo`/`hi`,
    /// then runs phase one and phase two. Returns the LP and its status.
    pub fn solve_from_scratch(
        model: &IlpModel,
        lo: &[Option<i64>],
        hi: &[Option<i64>],
        iteration_limit: u64,
    ) -> Result<(Lp, LpStatus), LpFailure> {
        let mut lp = Lp::build(model, lo, hi, iteration_limit);
        let phase_one = lp.primal()?;
        debug_assert_eq!(phase_one, LpStatus::Optimal);
        let infeasibility = lp.current_cost();
        if infeasibility.is_positive() {
            return Ok((lp, LpStatus::Infeasible));
        }
        lp.retire_artificials();
        lp.install_costs(lp.objective.clone());
        let status = lp.primal()?;
        Ok((lp, status))
    }

    fn build(model: &IlpModel, lo: &[Option<i64>], hi: &[Option<i64>], iteration_limit: u64) -> Lp {
        let n = model.num_variables();
        let m = model.num_constraints();
        let mut objective = vec![Rational::ZERO; n];
        if let Some(obj) = model.objective() {
            let sign = match obj.sense {
                Sense::Minimize => 1,
                Sense::Maximize => -1,
            };
            for &(v, c) in &obj.terms {
                objective[v.0] = &objective[v.0] + &Rational::from_int(sign * c);
            }
        }

        let mut lp = Lp {
            n_struct: n,
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            cost: Vec::new(),
            x: Vec::with_capacity(n + m),
            basis: Vec::with_capacity(m),
            nonbasic: (0..n).collect(),
            pos: (0..n).map(Pos::NonBasic).collect(),
            tab: Vec::with_capacity(m),
            d: Vec::new(),
            objective,
            pivots: 0,
            iteration_limit,
        };
        for j in 0..n {
            let start = match (lo[j], hi[j]) {
                (Some(l), _) => l,
                (None, Some(u)) => u,
                (None, None) => 0,
            };
            lp.x.push(Rational::from_int(start));
        }

        // Row activities first, so artificials come strictly after them.
        let mut pending_art = Vec::new();
        for (i, c) in model.constraints().iter().enumerate() {
            let (rlo, rhi) = match c.cmp {
                Comparator::Le => (None, Some(c.rhs)),
                Comparator::Ge => (Some(c.rhs), None),
                Comparator::Eq => (Some(c.rhs), Some(c.rhs)),
            };
            let mut activity = Rational::ZERO;
            for &(v, a) in &c.terms {
                activity = &activity + &(&lp.x[v.0] * &Rational::from_int(a));
            }
            let s = n + i;
            lp.lo.push(rlo);
            lp.hi.push(rhi);
            let below = rlo.is_some_and(|l| activity < Rational::from_int(l));
            let above = rhi.is_some_and(|u| activity > Rational::from_int(u));
            if below || above {
                let beta = if below { rlo.unwrap() } else { rhi.unwrap() };
                lp.x.push(Rational::from_int(beta));
                pending_art.push((i, s, activity));
            } else {
                lp.x.push(activity);
            }
            let mut row = vec![Rational::ZERO; n];
            for &(v, a) in &c.terms {
                row[v.0] = Rational::from_int(-a);
            }
            lp.tab.push(row);
            lp.basis.push(s);
            lp.pos.push(Pos::Basic(i));
        }

        // Rows whose activity starts out of range get an artificial basic
        // variable; the activity variable moves to the nonbasic side.
        let mut cost = vec![Rational::ZERO; n + m];
        for (i, s, activity) in pending_art {
            let beta = lp.x[s].clone();
            let gap = &beta - &activity;
            let sign = Rational::from_int(gap.signum() as i64);
            let art = lp.x.len();
            lp.lo.push(Some(0));
            lp.hi.push(None);
            lp.x.push(gap.abs());
            cost.push(Rational::ONE);
            // art = (s - sum a x) / sign
            let col = lp.nonbasic.len();
            lp.nonbasic.push(s);
            lp.pos[s] = Pos::NonBasic(col);
            for row in lp.tab.iter_mut() {
                row.push(Rational::ZERO);
            }
            let row = &mut lp.tab[i];
            for entry in row.iter_mut().take(n) {
                if !entry.is_zero() {
                    // entry currently holds -a_ij
                    *entry = -&(&*entry / &sign);
                }
            }
            row[col] = -&sign.recip();
            lp.basis[i] = art;
            lp.pos.push(Pos::Basic(i));
        }
        lp.install_costs(cost);
        lp
    }

    fn install_costs(&mut self, mut cost: Vec<Rational>) {
        cost.resize(self.x.len(), Rational::ZERO);
        let mut d: Vec<Rational> = self.nonbasic.iter().map(|&v| cost[v].clone()).collect();
        for (i, row) in self.tab.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, t) in row.iter().enumerate() {
                if !t.is_zero() {
                    d[j] = &d[j] - &(cb * t);
                }
            }
        }
        self.cost = cost;
        self.d = d;
    }

    fn current_cost(&self) -> Rational {
        self.cost
            .iter()
            .zip(&self.x)
            .filter(|(c, _)| !c.is_zero())
            .fold(Rational::ZERO, |acc, (c, x)| &acc + &(c * x))
    }

    /// Fixes artificials at zero and drops the nonbasic ones from the tableau.
    fn retire_artificials(&mut self) {
        let first_art = self.n_struct + self.tab.len();
        for v in first_art..self.x.len() {
            self.lo[v] = Some(0);
            self.hi[v] = Some(0);
        }
        let mut col = 0;
        while col < self.nonbasic.len() {
            if self.nonbasic[col] >= first_art {
                let last = self.nonbasic.len() - 1;
                self.nonbasic.swap_remove(col);
                self.d.swap_remove(col);
                for row in self.tab.iter_mut() {
                    row.swap_remove(col);
                }
                if col < last {
                    let moved = self.nonbasic[col];
                    self.pos[moved] = Pos::NonBasic(col);
                }
            } else {
                col += 1;
            }
        }
    }

    pub fn objective_value(&self) -> Rational {
        self.objective
            .iter()
            .zip(&self.x)
            .filter(|(c, _)| !c.is_zero())
            .fold(Rational::ZERO, |acc, (c, x)| &acc + &(c * x))
    }

    pub fn value(&self, v: usize) -> &Rational {
        &self.x[v]
    }

    pub fn bounds(&self, v: usize) -> (Option<i64>, Option<i64>) {
        (self.lo[v], self.hi[v])
    }

    fn at_lower(&self, v: usize) -> bool {
        self.lo[v].is_some_and(|l| self.x[v] == Rational::from_int(l))
    }

    fn at_upper(&self, v: usize) -> bool {
        self.hi[v].is_some_and(|u| self.x[v] == Rational::from_int(u))
    }

    fn shift_nonbasic(&mut self, col: usize, delta: &Rational) {
        if delta.is_zero() {
            return;
        }
        let v = self.nonbasic[col];
        self.x[v] = &self.x[v] + delta;
        for i in 0..self.tab.len() {
            let t = &self.tab[i][col];
            if !t.is_zero() {
                let b = self.basis[i];
                self.x[b] = &self.x[b] - &(t * delta);
            }
        }
    }

    /// Changes the bounds of a structural variable, keeping the dictionary
    /// dual feasible.
    pub fn set_bounds(
        &mut self,
        v: usize,
        lo: Option<i64>,
        hi: Option<i64>,
    ) -> Result<(), LpFailure> {
        let was_lower = self.at_lower(v);
        let was_upper = self.at_upper(v);
        self.lo[v] = lo;
        self.hi[v] = hi;
        let col = match self.pos[v] {
            Pos::Basic(_) => return Ok(()),
            Pos::NonBasic(col) => col,
        };
        let dj = self.d[col].signum();
        let target = match dj {
            1 => lo.ok_or(LpFailure::LostDualFeasibility)?,
            -1 => hi.ok_or(LpFailure::LostDualFeasibility)?,
            _ => match (was_lower, was_upper, lo, hi) {
                (true, _, Some(l), _) => l,
                (_, true, _, Some(u)) => u,
                (_, _, Some(l), _) if self.x[v] < Rational::from_int(l) => l,
                (_, _, _, Some(u)) if self.x[v] > Rational::from_int(u) => u,
                _ => {
                    // value already inside the new range
                    return Ok(());
                }
            },
        };
        let delta = &Rational::from_int(target) - &self.x[v];
        self.shift_nonbasic(col, &delta);
        Ok(())
    }

    fn pivot(&mut self, r: usize, q: usize) {
        self.pivots += 1;
        let alpha = self.tab[r][q].clone();
        let inv = alpha.recip();
        let mut prow = std::mem::take(&mut self.tab[r]);
        for (j, t) in prow.iter_mut().enumerate() {
            if j == q {
                *t = inv.clone();
            } else if !t.is_zero() {
                *t = &*t * &inv;
            }
        }
        let nz: Vec<usize> = (0..prow.len())
            .filter(|&j| j != q && !prow[j].is_zero())
            .collect();
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q].clone();
            if f.is_zero() {
                continue;
            }
            for &j in &nz {
                row[j] = &row[j] - &(&f * &prow[j]);
            }
            row[q] = -&(&f * &inv);
        }
        let f = self.d[q].clone();
        if !f.is_zero() {
            for &j in &nz {
                self.d[j] = &self.d[j] - &(&f * &prow[j]);
            }
            self.d[q] = -&(&f * &inv);
        }
        self.tab[r] = prow;

        let leaving = self.basis[r];
        let entering = self.nonbasic[q];
        self.basis[r] = entering;
        self.nonbasic[q] = leaving;
        self.pos[entering] = Pos::Basic(r);
        self.pos[leaving] = Pos::NonBasic(q);
    }

    /// Primal simplex from a primal feasible dictionary.
    fn primal(&mut self) -> Result<LpStatus, LpFailure> {
        let mut streak = 0u32;
        let mut iterations = 0u64;
        loop {
            iterations += 1;
            if iterations > self.iteration_limit {
                return Err(LpFailure::IterationLimit);
            }
            let bland = streak >= DEGENERATE_STREAK;

            let mut entering: Option<(usize, i32)> = None;
            for col in 0..self.nonbasic.len() {
                let dj = &self.d[col];
                if dj.is_zero() {
                    continue;
                }
                let v = self.nonbasic[col];
                let dir = if dj.is_negative() && !self.at_upper(v) {
                    1
                } else if dj.is_positive() && !self.at_lower(v) {
                    -1
                } else {
                    continue;
                };
                let better = match entering {
                    None => true,
                    Some((best, _)) => {
                        if bland {
                            v < self.nonbasic[best]
                        } else {
                            let (a, b) = (dj.abs(), self.d[best].abs());
                            a > b || (a == b && v < self.nonbasic[best])
                        }
                    }
                };
                if better {
                    entering = Some((col, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let v = self.nonbasic[q];
            let sdir = Rational::from_int(dir as i64);

            // bound flip of the entering variable itself
            let mut theta: Option<Rational> = match (dir, self.lo[v], self.hi[v]) {
                (1, _, Some(u)) => Some(&Rational::from_int(u) - &self.x[v]),
                (-1, Some(l), _) => Some(&self.x[v] - &Rational::from_int(l)),
                _ => None,
            };
            let mut leave: Option<(usize, i64)> = None;
            for i in 0..self.tab.len() {
                let t = &self.tab[i][q];
                if t.is_zero() {
                    continue;
                }
                let b = self.basis[i];
                let rate = -&(t * &sdir);
                let (limit, bound) = if rate.is_negative() {
                    match self.lo[b] {
                        Some(l) => ((&self.x[b] - &Rational::from_int(l)) / -&rate, l),
                        None => continue,
                    }
                } else {
                    match self.hi[b] {
                        Some(u) => ((&Rational::from_int(u) - &self.x[b]) / rate, u),
                        None => continue,
                    }
                };
                let take = match (&theta, leave) {
                    (None, _) => true,
                    (Some(th), None) => limit < *th,
                    (Some(th), Some((r, _))) => {
                        limit < *th
                            || (limit == *th && {
                                if bland {
                                    b < self.basis[r]
                                } else {
                                    let (a, c) = (t.abs(), self.tab[r][q].abs());
                                    a > c || (a == c && b < self.basis[r])
                                }
                            })
                    }
                };
                if take {
                    theta = Some(limit);
                    leave = Some((i, bound));
                }
            }
            let Some(theta) = theta else {
                return Ok(LpStatus::Unbounded);
            };
            if theta.is_zero() {
                streak += 1;
            } else {
                streak = 0;
            }
            let delta = &theta * &sdir;
            self.shift_nonbasic(q, &delta);
            if let Some((r, bound)) = leave {
                let leaving = self.basis[r];
                self.pivot(r, q);
                self.x[leaving] = Rational::from_int(bound);
            }
        }
    }

    /// Dual simplex from a dual feasible dictionary.
    pub fn dual(&mut self) -> Result<LpStatus, LpFailure> {
        let mut streak = 0u32;
        let mut iterations = 0u64;
        loop {
            iterations += 1;
            if iterations > self.iteration_limit {
                return Err(LpFailure::IterationLimit);
            }
            let bland = streak >= DEGENERATE_STREAK;

            let mut leave: Option<(usize, Rational, i64)> = None;
            for i in 0..self.tab.len() {
                let b = self.basis[i];
                let (gap, bound) = match (self.lo[b], self.hi[b]) {
                    (Some(l), _) if self.x[b] < Rational::from_int(l) => {
                        (&Rational::from_int(l) - &self.x[b], l)
                    }
                    (_, Some(u)) if self.x[b] > Rational::from_int(u) => {
                        (&self.x[b] - &Rational::from_int(u), u)
                    }
                    _ => continue,
                };
                let better = match &leave {
                    None => true,
                    Some((r, g, _)) => {
                        if bland {
                            b < self.basis[*r]
                        } else {
                            gap > *g || (gap == *g && b < self.basis[*r])
                        }
                    }
                };
                if better {
                    leave = Some((i, gap, bound));
                }
            }
            let Some((r, _, target)) = leave else {
                return Ok(LpStatus::Optimal);
            };
            let b = self.basis[r];
            let increase = self.x[b] < Rational::from_int(target);

            let mut entering: Option<(usize, Rational)> = None;
            for col in 0..self.nonbasic.len() {
                let t = &self.tab[r][col];
                if t.is_zero() {
                    continue;
                }
                let v = self.nonbasic[col];
                // x_b moves by -t per unit increase of x_v
                let needs_increase = t.is_negative() == increase;
                let movable = if needs_increase {
                    !self.at_upper(v)
                } else {
                    !self.at_lower(v)
                };
                if !movable {
                    continue;
                }
                let ratio = &self.d[col].abs() / &t.abs();
                let better = match &entering {
                    None => true,
                    Some((best, br)) => {
                        let w = self.nonbasic[*best];
                        ratio < *br
                            || (ratio == *br && {
                                if bland {
                                    v < w
                                } else {
                                    let (a, c) = (t.abs(), self.tab[r][*best].abs());
                                    a > c || (a == c && v < w)
                                }
                            })
                    }
                };
                if better {
                    entering = Some((col, ratio));
                }
            }
            let Some((q, ratio)) = entering else {
                return Ok(LpStatus::Infeasible);
            };
            if ratio.is_zero() {
                streak += 1;
            } else {
                streak = 0;
            }
            let delta = &(&Rational::from_int(target) - &self.x[b]) / &(-&self.tab[r][q]);
            self.shift_nonbasic(q, &delta);
            self.pivot(r, q);
            self.x[b] = Rational::from_int(target);
        }
    }
}
