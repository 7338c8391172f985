mod common;

use common::*;
use iap_core::domains::{
    example_elevator, gen_drinking_water, gen_elevator, gen_from_ilp, ElevatorSpec,
};
use iap_core::oracle::validate;

#[test]
fn elevator_layout() {
    let pi = elevator(3);
    assert_eq!(
        pi.iad.registers(),
        ["f", "in(0,2)", "dlvd(0,2)", "in(2,1)", "dlvd(2,1)"]
    );
    let names: Vec<&str> = pi.iad.actions().iter().map(|a| a.name.as_str()).collect();
    assert_eq!(
        names,
        ["u", "d", "e(0,2)", "l(0,2)", "e(2,1)", "l(2,1)", "g"]
    );
    assert_eq!(pi.name(pi.goal), "g");
    let u = pi.action_id("u").unwrap();
    assert_eq!(pi.iad.upper(u, 0), Some(1));
    assert_eq!(pi.iad.lower(pi.action_id("d").unwrap(), 0), Some(1));
    let l = pi.action_id("l(2,1)").unwrap();
    assert_eq!((pi.iad.lower(l, 0), pi.iad.upper(l, 0)), (Some(1), Some(1)));
    assert_eq!(pi.iad.sigma(l, 3), -1);
    assert_eq!(pi.iad.sigma(l, 4), 1);
    assert!(pi.initial.0.iter().all(|&v| v == 0));
    assert!(validate(
        &plan(
            &pi,
            &["e(0,2)", "u", "u", "e(2,1)", "l(0,2)", "d", "l(2,1)", "g"]
        ),
        &pi
    )
    .unwrap()
    .is_valid());
}

#[test]
fn elevator_examples_exist() {
    for k in 1..=6 {
        assert!(example_elevator(k).is_some());
    }
    assert!(example_elevator(7).is_none());
    assert!(gen_elevator(&ElevatorSpec::new(1, 3, [(1, 2)])).is_err());
}

#[test]
fn elevators_are_one_iap() {
    for k in 1..=6 {
        assert_eq!(elevator(k).iad.classify_k(), 1, "E{k}");
    }
}

#[test]
fn integer_systems_become_effect_only_problems() {
    let pi = gen_from_ilp(&[vec![1, -2], vec![0, 3]], &[4, 5]).unwrap();
    assert_eq!(pi.iad.registers(), ["y1", "y2"]);
    let x2 = pi.action_id("x2").unwrap();
    assert_eq!(pi.iad.sigma(x2, 0), -2);
    assert_eq!(pi.iad.sigma(x2, 1), 3);
    assert_eq!(pi.iad.upper(pi.goal, 1), Some(5));
    assert_eq!(pi.iad.classify_k(), 0);
    assert!(gen_from_ilp(&[vec![1, 2], vec![1]], &[0, 0]).is_err());
    assert!(gen_from_ilp(&[vec![1]], &[0, 0]).is_err());
    assert!(gen_from_ilp(&[], &[]).is_err());
}

#[test]
fn drinking_water() {
    let pi = gen_drinking_water(2).unwrap();
    assert!(validate(&plan(&pi, &["f", "d", "f", "d", "g"]), &pi)
        .unwrap()
        .is_valid());
    assert!(!validate(&plan(&pi, &["f", "f", "d", "d", "g"]), &pi)
        .unwrap()
        .is_valid());
    assert!(gen_drinking_water(0).is_err());
}
