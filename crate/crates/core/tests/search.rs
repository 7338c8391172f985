mod common;

use common::*;
use iap_core::domains::{gen_drinking_water, gen_from_ilp};
use iap_core::encoder::ObjectiveKind;
use iap_core::oracle::{brute_force_shortest, validate, OracleResult, DEFAULT_FRONTIER_CAP};
use iap_core::search::{
    phi_bfs, phi_violation_guided, solve_iap, solve_k01, threats, Phi, PhiOutcome, SearchConfig,
    SearchStatus,
};
use iap_core::{IapError, MultiSet};

fn vg() -> SearchConfig {
    SearchConfig::default()
}

fn bfs() -> SearchConfig {
    SearchConfig {
        phi: Phi::Bfs,
        ..SearchConfig::default()
    }
}

#[test]
fn elevator_examples_solve_to_shortest_plans() {
    for (k, len) in [(1, 8), (2, 7), (3, 8), (4, 5), (5, 6)] {
        let pi = elevator(k);
        let r = solve_iap(&pi, &vg()).unwrap();
        assert_eq!(r.status, SearchStatus::Solved, "E{k}");
        let plan = r.plan.unwrap();
        assert!(validate(&plan, &pi).unwrap().is_valid());
        assert_eq!(plan.len(), len, "E{k}: {:?}", plan.names(&pi));
        match brute_force_shortest(&pi, 12, DEFAULT_FRONTIER_CAP).unwrap() {
            OracleResult::Found(best) => assert_eq!(best.len(), len, "E{k}"),
            other => panic!("E{k}: {other:?}"),
        }
    }
}

#[test]
fn e2_trace_ends_with_two_copies_of_u() {
    let pi = elevator(2);
    let r = solve_iap(&pi, &vg()).unwrap();
    assert_eq!(r.iterations(), 2);
    let last = r.trace.last().unwrap();
    assert_eq!(last.mu["u"], 2);
    assert_eq!(last.full, "optimal");
    assert_eq!(r.trace[0].full, "infeasible");
    assert_eq!(r.trace[0].phi, ["u"]);
    assert_eq!(r.multiset.get(pi.action_id("u").unwrap()), 2);
    let json: serde_json::Value = serde_json::from_str(&r.trace_json()).unwrap();
    assert_eq!(json[1]["mu"]["u"], 2);
    assert_eq!(json[0]["threats"][0]["violator"], "u.0");
}

#[test]
fn e5_violation_guided_flags_u() {
    let pi = elevator(5);
    let ms = MultiSet::ones(&pi);
    let PhiOutcome::Flagged {
        actions,
        threats: ts,
        relaxed,
    } = phi_violation_guided(&pi, &ms, &vg()).unwrap()
    else {
        panic!("relaxed E5 must be feasible");
    };
    assert_eq!(
        actions.into_iter().collect::<Vec<_>>(),
        [pi.action_id("u").unwrap()]
    );
    assert!(!ts.is_empty());
    assert_eq!(threats(&pi, &relaxed).unwrap(), ts);
    let lin = relaxed.enumerate_linearizations(200).unwrap();
    assert_eq!(lin.len(), 3);
    assert_eq!(
        lin.iter()
            .filter(|l| validate(l, &pi).unwrap().is_valid())
            .count(),
        1
    );
}

#[test]
fn bfs_picks_the_least_copied_action() {
    let pi = elevator(5);
    let mut ms = MultiSet::ones(&pi);
    let d = pi.action_id("d").unwrap();
    assert_eq!(phi_bfs(&pi, &ms).into_iter().collect::<Vec<_>>(), [d]);
    ms.increment(d);
    let e = pi.action_id("e(1,3)").unwrap();
    assert_eq!(phi_bfs(&pi, &ms).into_iter().collect::<Vec<_>>(), [e]);
}

#[test]
fn violation_guided_needs_no_more_iterations_than_bfs() {
    for k in 1..=5 {
        let pi = elevator(k);
        let a = solve_iap(&pi, &vg()).unwrap();
        let b = solve_iap(&pi, &bfs()).unwrap();
        assert_eq!(a.status, SearchStatus::Solved);
        assert_eq!(b.status, SearchStatus::Solved);
        assert!(a.iterations() <= b.iterations(), "E{k}");
    }
}

#[test]
fn unreachable_floor_is_proven_unsolvable() {
    let pi = elevator(6);
    let r = solve_k01(&pi, &vg()).unwrap();
    assert_eq!(r.status, SearchStatus::ProvenUnsolvable);
    assert!(r.plan.is_none());
    // The relaxed problem is feasible, so the general search cannot decide.
    let cfg = SearchConfig {
        max_iterations: 4,
        ..vg()
    };
    assert_eq!(
        solve_iap(&pi, &cfg).unwrap().status,
        SearchStatus::Inconclusive
    );
}

#[test]
fn zero_one_procedure_solves_elevators() {
    for k in 1..=5 {
        let pi = elevator(k);
        let r = solve_k01(&pi, &vg()).unwrap();
        assert_eq!(r.status, SearchStatus::Solved, "E{k}");
        assert!(validate(r.plan.as_ref().unwrap(), &pi).unwrap().is_valid());
    }
}

#[test]
fn zero_one_procedure_refuses_longer_cycles() {
    let pi = gen_drinking_water(2).unwrap();
    assert!(matches!(
        solve_k01(&pi, &vg()),
        Err(IapError::Precondition(_))
    ));
    // Extra copies of d are never put to use by the minimal relaxed solution.
    let cfg = SearchConfig {
        max_iterations: 4,
        ..vg()
    };
    let r = solve_iap(&pi, &cfg).unwrap();
    assert_eq!(r.status, SearchStatus::Inconclusive);
    assert_eq!(r.iterations(), 4);
    assert!(r.plan.is_none());
}

#[test]
fn satisfied_goal_gives_the_one_step_plan() {
    let pi = gen_from_ilp(&[vec![1]], &[0]).unwrap();
    let r = solve_iap(&pi, &vg()).unwrap();
    assert_eq!(r.status, SearchStatus::Solved);
    assert_eq!(r.iterations(), 1);
    assert_eq!(r.plan.unwrap().names(&pi), ["g"]);
}

#[test]
fn multiset_grows_monotonically_and_flags_static_violators() {
    for k in 1..=5 {
        let pi = elevator(k);
        let edges = pi.iad.violation_relation().edges();
        for cfg in [vg(), bfs()] {
            let r = solve_iap(&pi, &cfg).unwrap();
            for w in r.trace.windows(2) {
                for (name, m) in &w[0].mu {
                    assert!(w[1].mu[name] >= *m);
                }
                assert_eq!(w[1].mu["g"], 1);
            }
            if cfg.phi == Phi::ViolationGuided {
                for rec in &r.trace {
                    for name in &rec.phi {
                        let a = pi.action_id(name).unwrap();
                        assert!(edges.iter().any(|&(x, _)| x == a), "E{k}: {name}");
                    }
                }
            }
        }
    }
}

#[test]
fn iteration_budget_is_reported_as_inconclusive() {
    let pi = elevator(2);
    let cfg = SearchConfig {
        max_iterations: 1,
        ..vg()
    };
    assert_eq!(
        solve_iap(&pi, &cfg).unwrap().status,
        SearchStatus::Inconclusive
    );
    let cfg = SearchConfig {
        max_iterations: 0,
        ..vg()
    };
    assert!(solve_iap(&pi, &cfg).is_err());
}

#[test]
fn node_limit_is_inconclusive() {
    let pi = elevator(3);
    let mut cfg = vg();
    cfg.ilp.node_limit = 1;
    let r = solve_iap(&pi, &cfg).unwrap();
    assert_eq!(r.status, SearchStatus::Inconclusive);
}

#[test]
fn cost_objective_prefers_cheap_actions() {
    // Reach y = 2 either with two cheap steps or one expensive step.
    let pi = gen_from_ilp(&[vec![-1, -2]], &[-2]).unwrap();
    let actions: Vec<_> = pi
        .iad
        .actions()
        .iter()
        .map(|a| {
            let c = if a.name == "x2" { 5 } else { 1 };
            a.clone().with_cost(c)
        })
        .collect();
    let iad = iap_core::Iad::new(pi.iad.registers().to_vec(), actions).unwrap();
    let pi = iap_core::ProblemInstance::new(iad, pi.initial.clone(), pi.goal).unwrap();
    let cfg = SearchConfig {
        objective: ObjectiveKind::Cost,
        ..vg()
    };
    assert_eq!(
        solve_iap(&pi, &cfg).unwrap().plan.unwrap().names(&pi),
        ["x1", "x1", "g"]
    );
    let r = solve_iap(&pi, &vg()).unwrap();
    assert_eq!(r.plan.unwrap().names(&pi), ["x2", "g"]);
}

#[test]
fn infeasible_integer_system_is_proven_unsolvable() {
    let pi = gen_from_ilp(&[vec![1, 1]], &[-1]).unwrap();
    assert_eq!(
        solve_iap(&pi, &vg()).unwrap().status,
        SearchStatus::ProvenUnsolvable
    );
    assert_eq!(
        solve_k01(&pi, &vg()).unwrap().status,
        SearchStatus::ProvenUnsolvable
    );
}

#[test]
fn search_is_deterministic() {
    for k in 1..=5 {
        let pi = elevator(k);
        let a = solve_iap(&pi, &vg()).unwrap();
        let b = solve_iap(&pi, &vg()).unwrap();
        assert_eq!(a.trace_json(), b.trace_json());
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.mvpop, b.mvpop);
    }
}
