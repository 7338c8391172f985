use iap_ilp::{
    solve, solve_relaxation, unbounded_check, Comparator, IlpModel, LpOutcome, Objective, Rational,
    Sense, SolveConfig, SolveStatus,
};
use proptest::prelude::*;

fn cfg() -> SolveConfig {
    SolveConfig::default()
}

#[test]
fn contradictory_bounds_are_infeasible() {
    let mut m = IlpModel::new();
    let x = m.add_integer("x", 0, 10).unwrap();
    m.add_constraint("lo", [(x, 1)], Comparator::Ge, 2).unwrap();
    m.add_constraint("hi", [(x, 1)], Comparator::Le, 1).unwrap();
    let s = solve(&m, &cfg()).unwrap();
    assert_eq!(s.status, SolveStatus::Infeasible);
    assert!(s.values.is_empty());
}

#[test]
fn rounds_up_fractional_optimum() {
    let mut m = IlpModel::new();
    let x = m.add_integer("x", 0, 100).unwrap();
    m.add_constraint("c", [(x, 2)], Comparator::Ge, 3).unwrap();
    m.set_objective(Some(Objective::minimize(vec![(x, 1)])))
        .unwrap();
    let s = solve(&m, &cfg()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert_eq!(s.values, vec![2]);
    assert_eq!(s.objective_value, Some(2));
    assert_eq!(
        solve_relaxation(&m).unwrap(),
        LpOutcome::Optimal(Rational::from_int(3) / Rational::from_int(2))
    );
}

#[test]
fn maximize_knapsack() {
    // max 5a + 4b + 3c s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
    let mut m = IlpModel::new();
    let a = m.add_variable("a", Some(0), None, true).unwrap();
    let b = m.add_variable("b", Some(0), None, true).unwrap();
    let c = m.add_variable("c", Some(0), None, true).unwrap();
    m.add_constraint("r1", [(a, 2), (b, 3), (c, 1)], Comparator::Le, 5)
        .unwrap();
    m.add_constraint("r2", [(a, 4), (b, 1), (c, 2)], Comparator::Le, 11)
        .unwrap();
    m.add_constraint("r3", [(a, 3), (b, 4), (c, 2)], Comparator::Le, 8)
        .unwrap();
    m.set_objective(Some(Objective {
        sense: Sense::Maximize,
        terms: vec![(a, 5), (b, 4), (c, 3)],
        constant: 1,
    }))
    .unwrap();
    let s = solve(&m, &cfg()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert_eq!(s.objective_value, Some(14));
    assert!(m.is_feasible(&s.values));
}

#[test]
fn equality_and_free_variables() {
    let mut m = IlpModel::new();
    let x = m.add_variable("x", None, None, true).unwrap();
    let y = m.add_variable("y", None, None, true).unwrap();
    m.add_constraint("e", [(x, 3), (y, -5)], Comparator::Eq, 1)
        .unwrap();
    m.add_constraint("bx", [(x, 1)], Comparator::Ge, -20)
        .unwrap();
    m.set_objective(Some(Objective::minimize(vec![(x, 1)])))
        .unwrap();
    let s = solve(&m, &cfg()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    // 3x - 5y = 1 has x = 2 mod 5; smallest x >= -20 is -18
    assert_eq!(s.values[0], -18);
}

#[test]
fn unbounded_relaxation_detected() {
    let mut m = IlpModel::new();
    let x = m.add_variable("x", Some(0), None, true).unwrap();
    let y = m.add_variable("y", Some(0), None, true).unwrap();
    m.add_constraint("c", [(x, 1), (y, -1)], Comparator::Le, 3)
        .unwrap();
    m.set_objective(Some(Objective {
        sense: Sense::Maximize,
        terms: vec![(x, 1)],
        constant: 0,
    }))
    .unwrap();
    assert!(unbounded_check(&m).unwrap());
    assert_eq!(solve(&m, &cfg()).unwrap().status, SolveStatus::Unbounded);

    m.add_constraint("cap", [(y, 1)], Comparator::Le, 4)
        .unwrap();
    assert!(!unbounded_check(&m).unwrap());
    assert_eq!(solve(&m, &cfg()).unwrap().objective_value, Some(7));
}

#[test]
fn feasibility_model_returns_first_point() {
    let mut m = IlpModel::new();
    let x = m.add_integer("x", 0, 9).unwrap();
    let y = m.add_integer("y", 0, 9).unwrap();
    m.add_constraint("c", [(x, 2), (y, 2)], Comparator::Eq, 7)
        .unwrap();
    assert_eq!(solve(&m, &cfg()).unwrap().status, SolveStatus::Infeasible);
    let mut m2 = IlpModel::new();
    let x = m2.add_integer("x", 0, 9).unwrap();
    let y = m2.add_integer("y", 0, 9).unwrap();
    m2.add_constraint("c", [(x, 2), (y, 3)], Comparator::Eq, 7)
        .unwrap();
    let s = solve(&m2, &cfg()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!(m2.is_feasible(&s.values));
}

#[test]
fn node_limit_reports_limit() {
    let mut m = IlpModel::new();
    let vars: Vec<_> = (0..6)
        .map(|i| m.add_integer(format!("x{i}"), 0, 5).unwrap())
        .collect();
    m.add_constraint("parity", vars.iter().map(|&v| (v, 2)), Comparator::Eq, 11)
        .unwrap();
    m.set_objective(Some(Objective::minimize(
        vars.iter().map(|&v| (v, 1)).collect(),
    )))
    .unwrap();
    let s = solve(
        &m,
        &SolveConfig {
            node_limit: 3,
            ..cfg()
        },
    )
    .unwrap();
    assert_eq!(s.status, SolveStatus::LimitHit);
    assert_eq!(solve(&m, &cfg()).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn continuous_variables_rejected_by_branch_and_bound() {
    let mut m = IlpModel::new();
    m.add_variable("x", Some(0), Some(1), false).unwrap();
    assert!(solve(&m, &cfg()).is_err());
}

#[test]
fn lp_format_dump() {
    let mut m = IlpModel::new();
    let x = m.add_integer("x", 0, 3).unwrap();
    let y = m.add_binary("y").unwrap();
    m.add_constraint("c1", [(x, 1), (y, -2)], Comparator::Ge, -1)
        .unwrap();
    m.set_objective(Some(Objective::minimize(vec![(x, 1)])))
        .unwrap();
    let text = iap_ilp::to_lp_format(&m);
    assert!(text.starts_with("Minimize\n obj: x\nSubject To\n c1: x - 2 y >= -1\n"));
    assert!(text.contains(" 0 <= y <= 1\n"));
    assert!(text.ends_with("General\n x y\nEnd\n"));
}

/// A random bounded ILP together with its brute-force optimum.
#[derive(Debug, Clone)]
struct Case {
    boxes: Vec<(i64, i64)>,
    rows: Vec<(Vec<i64>, u8, i64)>,
    obj: Vec<i64>,
    maximize: bool,
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..=4).prop_flat_map(|n| {
        let boxes = prop::collection::vec((-3i64..=2).prop_flat_map(|l| (Just(l), l..=l + 5)), n);
        let rows = prop::collection::vec(
            (prop::collection::vec(-4i64..=4, n), 0u8..3, -10i64..=10),
            0..=4,
        );
        let obj = prop::collection::vec(-5i64..=5, n);
        (boxes, rows, obj, any::<bool>()).prop_map(|(boxes, rows, obj, maximize)| Case {
            boxes,
            rows,
            obj,
            maximize,
        })
    })
}

fn build(c: &Case) -> IlpModel {
    let mut m = IlpModel::new();
    let vars: Vec<_> = c
        .boxes
        .iter()
        .enumerate()
        .map(|(i, &(l, u))| m.add_integer(format!("x{i}"), l, u).unwrap())
        .collect();
    for (k, (coefs, cmp, rhs)) in c.rows.iter().enumerate() {
        let cmp = [Comparator::Le, Comparator::Ge, Comparator::Eq][*cmp as usize];
        m.add_constraint(
            format!("r{k}"),
            vars.iter().copied().zip(coefs.iter().copied()),
            cmp,
            *rhs,
        )
        .unwrap();
    }
    m.set_objective(Some(Objective {
        sense: if c.maximize {
            Sense::Maximize
        } else {
            Sense::Minimize
        },
        terms: vars.iter().copied().zip(c.obj.iter().copied()).collect(),
        constant: 0,
    }))
    .unwrap();
    m
}

fn brute_force(m: &IlpModel, c: &Case) -> Option<i64> {
    let n = c.boxes.len();
    let mut point: Vec<i64> = c.boxes.iter().map(|b| b.0).collect();
    let mut best: Option<i64> = None;
    loop {
        if m.is_feasible(&point) {
            let v = m.objective().unwrap().value(&point).unwrap();
            best = Some(match best {
                None => v,
                Some(b) if c.maximize => b.max(v),
                Some(b) => b.min(v),
            });
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            if point[i] < c.boxes[i].1 {
                point[i] += 1;
                break;
            }
            point[i] = c.boxes[i].0;
            i += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_grid_enumeration(c in case()) {
        let m = build(&c);
        let s = solve(&m, &cfg()).unwrap();
        match brute_force(&m, &c) {
            None => prop_assert_eq!(s.status, SolveStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(s.status, SolveStatus::Optimal);
                prop_assert_eq!(s.objective_value, Some(best));
                prop_assert!(m.is_feasible(&s.values));
            }
        }
    }

    #[test]
    fn deterministic(c in case()) {
        let m = build(&c);
        let a = solve(&m, &cfg()).unwrap();
        let b = solve(&m, &cfg()).unwrap();
        prop_assert_eq!(a, b);
    }
}
