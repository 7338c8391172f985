//! Integer-linear systems whose solutions are MvPOPs over a fixed multi-set.

use std::collections::BTreeMap;

use iap_ilp::{unbounded_check, Comparator, IlpModel, IlpSolution, Objective, VarId};

use crate::error::{IapError, Result};
use crate::model::{ActionId, BoundSide, MultiSet, ProblemInstance, RegisterId};
use crate::mvpop::{copy_layout, CopyId, Mvpop};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Preconditions must hold in every linearization.
    Full,
    /// Preconditions only at the earliest first occurrence of each copy.
    Relaxed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    None,
    /// Number of non-goal occurrences.
    MinLength,
    /// Occurrences weighted by action cost.
    Cost,
    /// Length plus soft-precondition penalties.
    Defaults,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingConfig {
    /// Upper bound on the occurrences of any one ordered copy.
    pub occurrence_cap: i64,
    pub mode: Mode,
    pub objective: ObjectiveKind,
    /// Orders interchangeable copies of one action.
    pub symmetry_breaking: bool,
}

impl EncodingConfig {
    pub fn new(occurrence_cap: i64, mode: Mode, objective: ObjectiveKind) -> Self {
        EncodingConfig {
            occurrence_cap,
            mode,
            objective,
            symmetry_breaking: true,
        }
    }
}

/// `2 * (widest register range among initial values and finite bounds) + |copies|`.
pub fn default_cap(pi: &ProblemInstance, ms: &MultiSet) -> i64 {
    let iad = &pi.iad;
    let mut widest = 0i64;
    for x in 0..iad.num_registers() {
        let mut lo = pi.initial.get(x);
        let mut hi = lo;
        for a in iad.actions() {
            for v in [a.lower[x], a.upper[x]].into_iter().flatten() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        widest = widest.max(hi.saturating_sub(lo));
    }
    widest
        .saturating_mul(2)
        .saturating_add(ms.total() as i64)
        .max(1)
}

/// Per-copy effect, bound and initial-value rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedMatrices {
    pub sigma: Vec<Vec<i64>>,
    pub pi_lower: Vec<Vec<Option<i64>>>,
    pub pi_upper: Vec<Vec<Option<i64>>>,
    pub s0: Vec<Vec<i64>>,
}

pub fn matrices(pi: &ProblemInstance, ms: &MultiSet) -> EncodedMatrices {
    let copies = copy_layout(ms);
    let act = |c: &CopyId| pi.iad.action(c.action);
    EncodedMatrices {
        sigma: copies.iter().map(|c| act(c).effect.clone()).collect(),
        pi_lower: copies.iter().map(|c| act(c).lower.clone()).collect(),
        pi_upper: copies.iter().map(|c| act(c).upper.clone()).collect(),
        s0: copies.iter().map(|_| pi.initial.0.clone()).collect(),
    }
}

/// `S0(x) + sum_a P[b,a] sigma(a,x)`, the register value at the earliest
/// first occurrence of copy `b`.
pub fn relaxed_value(pi: &ProblemInstance, p: &Mvpop, b: usize, x: RegisterId) -> Result<i64> {
    let mut v = pi.initial.get(x) as i128;
    for (a, copy) in p.copies().iter().enumerate() {
        v += p.entry(b, a) as i128 * pi.iad.sigma(copy.action, x) as i128;
    }
    i64::try_from(v).map_err(|_| IapError::Overflow("register value".into()))
}

/// The worst value of `x` at the first occurrence of `b` over all
/// linearizations, for the bound on `side`: every incomparable occurrence
/// that pushes towards that bound is counted before `b`.
pub fn worst_case_value(
    pi: &ProblemInstance,
    p: &Mvpop,
    inc: &[Vec<i64>],
    b: usize,
    x: RegisterId,
    side: BoundSide,
) -> Result<i64> {
    let mut v = relaxed_value(pi, p, b, x)? as i128;
    if b != p.goal() {
        for (a, copy) in p.copies().iter().enumerate() {
            let s = pi.iad.sigma(copy.action, x);
            let pushes = match side {
                BoundSide::Lower => s < 0,
                BoundSide::Upper => s > 0,
            };
            if pushes {
                v += inc[b][a] as i128 * s as i128;
            }
        }
    }
    i64::try_from(v).map_err(|_| IapError::Overflow("register value".into()))
}

fn within(pi: &ProblemInstance, action: ActionId, x: RegisterId, side: BoundSide, v: i64) -> bool {
    match side {
        BoundSide::Lower => pi.iad.lower(action, x).is_none_or(|l| v >= l),
        BoundSide::Upper => pi.iad.upper(action, x).is_none_or(|u| v <= u),
    }
}

/// Checks the precondition inequality of every used copy by direct matrix
/// arithmetic, with or without the incomparability terms.
pub fn satisfies_inequality(pi: &ProblemInstance, p: &Mvpop, mode: Mode) -> Result<bool> {
    let inc = p.incomparability();
    for b in 0..p.size() {
        if b != p.goal() && p.count(b) == 0 {
            continue;
        }
        let action = p.copies()[b].action;
        for x in 0..pi.iad.num_registers() {
            for side in [BoundSide::Lower, BoundSide::Upper] {
                let v = match mode {
                    Mode::Relaxed => relaxed_value(pi, p, b, x)?,
                    Mode::Full => worst_case_value(pi, p, &inc, b, x, side)?,
                };
                if !within(pi, action, x, side, v) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// An encoded fixed problem together with the variable map needed to read
/// MvPOPs back out of solutions.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub model: IlpModel,
    pub copies: Vec<CopyId>,
    pub goal: usize,
    pub cap: i64,
    pub mode: Mode,
    p: Vec<Vec<Option<VarId>>>,
    o: Vec<Vec<Option<VarId>>>,
    used: Vec<Option<VarId>>,
    t: BTreeMap<(usize, usize), VarId>,
    z: BTreeMap<(usize, usize), VarId>,
}

fn label(pi: &ProblemInstance, c: &CopyId) -> String {
    format!("{}.{}", pi.name(c.action), c.index)
}

fn checked(v: i128, what: &str) -> Result<i64> {
    i64::try_from(v).map_err(|_| IapError::Encoding(format!("coefficient overflow in {what}")))
}

pub fn encode(pi: &ProblemInstance, ms: &MultiSet, cfg: &EncodingConfig) -> Result<Encoding> {
    if ms.counts().len() != pi.iad.num_actions() || ms.get(pi.goal) != 1 {
        return Err(IapError::InvalidMultiSet(
            "multi-set does not match the problem".into(),
        ));
    }
    if cfg.occurrence_cap < 1 {
        return Err(IapError::Encoding(
            "occurrence cap must be at least 1".into(),
        ));
    }
    let cap = cfg.occurrence_cap;
    let copies = copy_layout(ms);
    let n = copies.len();
    let g = copies.iter().position(|c| c.action == pi.goal).unwrap();
    let mut m = IlpModel::new();
    let names: Vec<String> = copies.iter().map(|c| label(pi, c)).collect();

    let mut used = vec![None; n];
    for b in 0..n {
        if b != g {
            used[b] = Some(m.add_binary(format!("used[{}]", names[b]))?);
        }
    }
    let mut p = vec![vec![None; n]; n];
    let mut o = vec![vec![None; n]; n];
    for b in 0..n {
        for a in 0..n {
            if a == b || a == g {
                continue;
            }
            p[b][a] = Some(m.add_integer(format!("P[{},{}]", names[b], names[a]), 0, cap)?);
            // the goal row is ordered exactly by usage
            o[b][a] = if b == g {
                used[a]
            } else {
                Some(m.add_binary(format!("o[{},{}]", names[b], names[a]))?)
            };
        }
    }
    let pv = |b: usize, a: usize| p[b][a].expect("P variable");
    let ov = |b: usize, a: usize| o[b][a].expect("o variable");
    let uv = |b: usize| used[b].expect("used variable");

    for b in 0..n {
        for a in 0..n {
            if a == b || a == g {
                continue;
            }
            let tag = format!("{},{}", names[b], names[a]);
            m.add_constraint(
                format!("link_lo[{tag}]"),
                [(ov(b, a), 1), (pv(b, a), -1)],
                Comparator::Le,
                0,
            )?;
            m.add_constraint(
                format!("link_hi[{tag}]"),
                [(pv(b, a), 1), (ov(b, a), -cap)],
                Comparator::Le,
                0,
            )?;
            if b != g {
                m.add_constraint(
                    format!("dom[{tag}]"),
                    [(pv(b, a), 1), (pv(g, a), -1)],
                    Comparator::Le,
                    0,
                )?;
                m.add_constraint(
                    format!("use_b[{tag}]"),
                    [(ov(b, a), 1), (uv(b), -1)],
                    Comparator::Le,
                    0,
                )?;
                m.add_constraint(
                    format!("use_a[{tag}]"),
                    [(ov(b, a), 1), (uv(a), -1)],
                    Comparator::Le,
                    0,
                )?;
                if a < b {
                    m.add_constraint(
                        format!("asym[{tag}]"),
                        [(ov(b, a), 1), (ov(a, b), 1)],
                        Comparator::Le,
                        1,
                    )?;
                }
            }
        }
    }
    for c in 0..n {
        for b in 0..n {
            for a in 0..n {
                if c == g || b == g || a == g || c == b || b == a || a == c {
                    continue;
                }
                // P[c,b] > 0 implies P[c,a] >= P[b,a]
                m.add_constraint(
                    format!("trans[{},{},{}]", names[c], names[b], names[a]),
                    [(pv(c, a), 1), (pv(b, a), -1), (ov(c, b), -cap)],
                    Comparator::Ge,
                    -cap,
                )?;
            }
        }
    }

    if cfg.symmetry_breaking {
        for i in 0..n {
            for j in i + 1..n {
                if i == g || j == g || copies[i].action != copies[j].action {
                    continue;
                }
                m.set_bounds(ov(i, j), Some(0), Some(0));
                if copies[j].index == copies[i].index + 1 {
                    m.add_constraint(
                        format!("sym_used[{},{}]", names[j], names[i]),
                        [(uv(j), 1), (uv(i), -1)],
                        Comparator::Le,
                        0,
                    )?;
                }
            }
        }
    }

    let rel = pi.iad.violation_relation();
    let mut t: BTreeMap<(usize, usize), VarId> = BTreeMap::new();
    let mut z: BTreeMap<(usize, usize), VarId> = BTreeMap::new();
    for b in 0..n {
        let bact = copies[b].action;
        for x in 0..pi.iad.num_registers() {
            for side in [BoundSide::Lower, BoundSide::Upper] {
                let bound = match side {
                    BoundSide::Lower => pi.iad.lower(bact, x),
                    BoundSide::Upper => pi.iad.upper(bact, x),
                };
                let Some(bound) = bound else { continue };
                let tag = format!("{},{},{}", names[b], pi.iad.registers()[x], side);
                let mut terms: Vec<(VarId, i64)> = Vec::new();
                for a in 0..n {
                    let s = pi.iad.sigma(copies[a].action, x);
                    if s == 0 {
                        continue;
                    }
                    if let Some(v) = p[b][a] {
                        terms.push((v, s));
                    }
                    let inc_term = cfg.mode == Mode::Full
                        && b != g
                        && rel.holds(side, copies[a].action, bact, x);
                    if !inc_term {
                        continue;
                    }
                    let tv = match t.get(&(b, a)) {
                        Some(&v) => v,
                        None => {
                            let v =
                                incomparability_var(&mut m, &names, cap, g, b, a, &p, &o, &mut z)?;
                            t.insert((b, a), v);
                            v
                        }
                    };
                    terms.push((tv, s));
                }
                let rhs = checked(bound as i128 - pi.initial.get(x) as i128, &tag)?;
                let cap128 = cap as i128;
                let lo: i128 = terms
                    .iter()
                    .map(|&(_, c)| (c as i128 * cap128).min(0))
                    .sum();
                let hi: i128 = terms
                    .iter()
                    .map(|&(_, c)| (c as i128 * cap128).max(0))
                    .sum();
                let (cmp, slack) = match side {
                    BoundSide::Lower => (Comparator::Ge, (rhs as i128 - lo).max(0)),
                    BoundSide::Upper => (Comparator::Le, (hi - rhs as i128).max(0)),
                };
                if b == g || slack == 0 {
                    m.add_constraint(format!("pre[{tag}]"), terms, cmp, rhs)?;
                    continue;
                }
                let big_m = checked(slack, &tag)?;
                // used[b] = 0 relaxes the row by its worst-case slack
                let (coef, shifted) = match side {
                    BoundSide::Lower => (-big_m, rhs as i128 - slack),
                    BoundSide::Upper => (big_m, rhs as i128 + slack),
                };
                terms.push((uv(b), coef));
                m.add_constraint(format!("pre[{tag}]"), terms, cmp, checked(shifted, &tag)?)?;
            }
        }
    }

    let mut enc = Encoding {
        model: m,
        copies,
        goal: g,
        cap,
        mode: cfg.mode,
        p,
        o,
        used,
        t,
        z,
    };
    set_objective(&mut enc, pi, cfg.objective)?;
    Ok(enc)
}

/// Adds `t[b,a]`, an upper envelope of the incomparability of `a` w.r.t. `b`.
#[allow(clippy::too_many_arguments)]
fn incomparability_var(
    m: &mut IlpModel,
    names: &[String],
    cap: i64,
    g: usize,
    b: usize,
    a: usize,
    p: &[Vec<Option<VarId>>],
    o: &[Vec<Option<VarId>>],
    z: &mut BTreeMap<(usize, usize), VarId>,
) -> Result<VarId> {
    let tag = format!("{},{}", names[b], names[a]);
    let tv = m.add_integer(format!("t[{tag}]"), 0, cap)?;
    let pga = p[g][a].expect("goal row variable");
    if a == b {
        m.add_constraint(
            format!("inc_self[{tag}]"),
            [(tv, 1), (pga, -1)],
            Comparator::Ge,
            -1,
        )?;
        return Ok(tv);
    }
    let zv = m.add_binary(format!("z[{tag}]"))?;
    let oab = o[a][b].expect("order variable");
    m.add_constraint(
        format!("z_order[{tag}]"),
        [(zv, 1), (oab, -1)],
        Comparator::Le,
        0,
    )?;
    let (pab, pgb) = (
        p[a][b].expect("order count variable"),
        p[g][b].expect("goal row variable"),
    );
    m.add_constraint(
        format!("z_cover[{tag}]"),
        [(pab, 1), (pgb, -1), (zv, -cap)],
        Comparator::Ge,
        -cap,
    )?;
    let pba = p[b][a].expect("order count variable");
    m.add_constraint(
        format!("inc[{tag}]"),
        [(tv, 1), (pba, 1), (pga, -1), (zv, cap)],
        Comparator::Ge,
        0,
    )?;
    z.insert((b, a), zv);
    Ok(tv)
}

fn defaults_terms(
    pi: &ProblemInstance,
    copies: &[CopyId],
    p: &[Vec<Option<VarId>>],
    g: usize,
) -> Result<Vec<(VarId, i64)>> {
    let mut terms: BTreeMap<VarId, i128> = BTreeMap::new();
    for a in 0..copies.len() {
        if let Some(v) = p[g][a] {
            *terms.entry(v).or_default() += 1;
        }
    }
    for (b, cb) in copies.iter().enumerate() {
        for (x, pref) in pi.iad.action(cb.action).defaults.iter().enumerate() {
            let Some(pref) = pref else { continue };
            for (a, ca) in copies.iter().enumerate() {
                let Some(v) = p[b][a] else { continue };
                let s = pi.iad.sigma(ca.action, x) as i128;
                *terms.entry(v).or_default() -= 2 * pref.rho as i128 * pref.delta as i128 * s;
            }
        }
    }
    terms
        .into_iter()
        .filter(|&(_, c)| c != 0)
        .map(|(v, c)| Ok((v, checked(c, "defaults objective")?)))
        .collect()
}

/// Installs an objective on an encoding. The defaults objective is
/// rejected when it is unbounded once the occurrence cap is lifted.
pub fn set_objective(enc: &mut Encoding, pi: &ProblemInstance, kind: ObjectiveKind) -> Result<()> {
    let g = enc.goal;
    let goal_row = |weight: &dyn Fn(&CopyId) -> i64| -> Vec<(VarId, i64)> {
        (0..enc.copies.len())
            .filter_map(|a| enc.p[g][a].map(|v| (v, weight(&enc.copies[a]))))
            .filter(|&(_, c)| c != 0)
            .collect()
    };
    let objective = match kind {
        ObjectiveKind::None => None,
        ObjectiveKind::MinLength => Some(Objective::minimize(goal_row(&|_| 1))),
        ObjectiveKind::Cost => Some(Objective::minimize(goal_row(&|c| {
            pi.iad.action(c.action).cost
        }))),
        ObjectiveKind::Defaults => {
            if defaults_unbounded(pi, &enc.copies, g)? {
                return Err(IapError::UnboundedDefaults);
            }
            Some(Objective::minimize(defaults_terms(
                pi,
                &enc.copies,
                &enc.p,
                g,
            )?))
        }
    };
    enc.model.set_objective(objective)?;
    Ok(())
}

/// Minimizes the defaults objective over the relaxed count system with no
/// occurrence cap and reports whether it runs off to minus infinity.
fn defaults_unbounded(pi: &ProblemInstance, copies: &[CopyId], g: usize) -> Result<bool> {
    let n = copies.len();
    let mut m = IlpModel::new();
    let mut p = vec![vec![None; n]; n];
    for b in 0..n {
        for a in 0..n {
            if a != b && a != g {
                p[b][a] = Some(m.add_variable(format!("P[{b},{a}]"), Some(0), None, false)?);
            }
        }
    }
    for b in 0..n {
        if b == g {
            continue;
        }
        for a in 0..n {
            if let (Some(v), Some(w)) = (p[b][a], p[g][a]) {
                m.add_constraint("dom", [(v, 1), (w, -1)], Comparator::Le, 0)?;
            }
        }
    }
    for (b, cb) in copies.iter().enumerate() {
        for x in 0..pi.iad.num_registers() {
            let row: Vec<(VarId, i64)> = (0..n)
                .filter_map(|a| p[b][a].map(|v| (v, pi.iad.sigma(copies[a].action, x))))
                .collect();
            let s0 = pi.initial.get(x) as i128;
            if let Some(l) = pi.iad.lower(cb.action, x) {
                m.add_constraint(
                    "pre",
                    row.clone(),
                    Comparator::Ge,
                    checked(l as i128 - s0, "probe")?,
                )?;
            }
            if let Some(u) = pi.iad.upper(cb.action, x) {
                m.add_constraint(
                    "pre",
                    row,
                    Comparator::Le,
                    checked(u as i128 - s0, "probe")?,
                )?;
            }
        }
    }
    m.set_objective(Some(Objective::minimize(defaults_terms(
        pi, copies, &p, g,
    )?)))?;
    Ok(unbounded_check(&m)?)
}

impl Encoding {
    pub fn num_copies(&self) -> usize {
        self.copies.len()
    }

    /// Reads the MvPOP out of a solution and re-checks its axioms.
    pub fn decode(&self, sol: &IlpSolution) -> Result<Mvpop> {
        if !sol.has_solution() {
            return Err(IapError::Encoding(format!(
                "cannot decode a {:?} solution",
                sol.status
            )));
        }
        let n = self.copies.len();
        let mut matrix = vec![vec![0; n]; n];
        for b in 0..n {
            for a in 0..n {
                if let Some(v) = self.p[b][a] {
                    matrix[b][a] = sol.values[v.0];
                }
            }
        }
        let mvpop = Mvpop::new(self.copies.clone(), matrix, self.goal)?;
        let violations = mvpop.check_axioms();
        if let Some(v) = violations.first() {
            return Err(IapError::Soundness(format!(
                "decoded MvPOP breaks an axiom: {v}"
            )));
        }
        Ok(mvpop)
    }

    /// The variable assignment that represents `p`, which must be laid out
    /// over the same copies.
    pub fn assignment_for(&self, p: &Mvpop) -> Result<Vec<i64>> {
        if p.copies() != self.copies.as_slice() || p.goal() != self.goal {
            return Err(IapError::Encoding(
                "MvPOP copies do not match the encoding".into(),
            ));
        }
        let n = self.copies.len();
        let g = self.goal;
        let mut values = vec![0i64; self.model.num_variables()];
        for b in 0..n {
            if let Some(u) = self.used[b] {
                values[u.0] = i64::from(p.entry(g, b) > 0);
            }
        }
        for b in 0..n {
            for a in 0..n {
                if let Some(v) = self.p[b][a] {
                    values[v.0] = p.entry(b, a);
                }
                if b != g {
                    if let Some(v) = self.o[b][a] {
                        values[v.0] = i64::from(p.entry(b, a) > 0);
                    }
                }
            }
        }
        for (&(b, a), &zv) in &self.z {
            values[zv.0] = i64::from(p.entry(a, b) > 0 && p.entry(a, b) >= p.entry(g, b));
        }
        for (&(b, a), &tv) in &self.t {
            let env = if a == b {
                p.entry(g, b) - 1
            } else {
                let zb = self.z.get(&(b, a)).map_or(0, |zv| values[zv.0]);
                p.entry(g, a) - p.entry(b, a) - self.cap * zb
            };
            values[tv.0] = env.max(0);
        }
        Ok(values)
    }
}
