use std::collections::BTreeSet;

use crate::error::{IapError, Result};
use crate::model::{Action, Iad, ProblemInstance, Situation};

/// An offline elevator problem: floors `min_floor..=max_floor`, the car at
/// floor 0, and passengers travelling `(from, to)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElevatorSpec {
    pub min_floor: i64,
    pub max_floor: i64,
    pub passengers: BTreeSet<(i64, i64)>,
}

impl ElevatorSpec {
    pub fn new(
        min_floor: i64,
        max_floor: i64,
        passengers: impl IntoIterator<Item = (i64, i64)>,
    ) -> Self {
        ElevatorSpec {
            min_floor,
            max_floor,
            passengers: passengers.into_iter().collect(),
        }
    }
}

pub fn gen_elevator(spec: &ElevatorSpec) -> Result<ProblemInstance> {
    if spec.min_floor > 0 || spec.max_floor < 0 {
        return Err(IapError::Schema(format!(
            "floor range {}..={} must contain floor 0",
            spec.min_floor, spec.max_floor
        )));
    }
    let mut registers = vec!["f".to_string()];
    for (a, b) in &spec.passengers {
        registers.push(format!("in({a},{b})"));
        registers.push(format!("dlvd({a},{b})"));
    }
    let n = registers.len();
    let f = 0;
    let mut actions = vec![
        Action::new("u", n)
            .with_le(f, spec.max_floor - 1)
            .with_effect(f, 1),
        Action::new("d", n)
            .with_ge(f, spec.min_floor + 1)
            .with_effect(f, -1),
    ];
    let mut goal = Action::new("g", n);
    for (k, (a, b)) in spec.passengers.iter().enumerate() {
        let (inside, delivered) = (1 + 2 * k, 2 + 2 * k);
        actions.push(
            Action::new(format!("e({a},{b})"), n)
                .with_eq(f, *a)
                .with_effect(inside, 1),
        );
        actions.push(
            Action::new(format!("l({a},{b})"), n)
                .with_eq(f, *b)
                .with_eq(inside, 1)
                .with_effect(inside, -1)
                .with_effect(delivered, 1),
        );
        goal = goal.with_eq(delivered, 1);
    }
    actions.push(goal);
    let goal = actions.len() - 1;
    ProblemInstance::new(Iad::new(registers, actions)?, Situation::zero(n), goal)
}

/// Feasibility of `M x <= rhs` over the naturals as a planning problem:
/// one effect-only action per variable, one register per row, and a goal
/// that checks every row.
pub fn gen_from_ilp(matrix: &[Vec<i64>], rhs: &[i64]) -> Result<ProblemInstance> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Err(IapError::Schema("empty constraint matrix".into()));
    }
    if matrix.iter().any(|r| r.len() != cols) || rhs.len() != rows {
        return Err(IapError::Schema(
            "ragged constraint matrix or right-hand side".into(),
        ));
    }
    let registers: Vec<String> = (0..rows).map(|j| format!("y{}", j + 1)).collect();
    let mut actions: Vec<Action> = (0..cols)
        .map(|i| {
            (0..rows).fold(Action::new(format!("x{}", i + 1), rows), |a, j| {
                a.with_effect(j, matrix[j][i])
            })
        })
        .collect();
    actions.push((0..rows).fold(Action::new("g", rows), |a, j| a.with_le(j, rhs[j])));
    ProblemInstance::new(Iad::new(registers, actions)?, Situation::zero(rows), cols)
}

/// Fill a glass and drink from it `i` times.
pub fn gen_drinking_water(i: i64) -> Result<ProblemInstance> {
    if i < 1 {
        return Err(IapError::Schema(
            "the drink count must be at least 1".into(),
        ));
    }
    let (filled, drunk) = (0, 1);
    let actions = vec![
        Action::new("f", 2)
            .with_eq(filled, 0)
            .with_effect(filled, 1),
        Action::new("d", 2)
            .with_eq(filled, 1)
            .with_effect(filled, -1)
            .with_effect(drunk, 1),
        Action::new("g", 2).with_ge(drunk, i),
    ];
    ProblemInstance::new(
        Iad::new(vec!["filled".into(), "drunk".into()], actions)?,
        Situation::zero(2),
        2,
    )
}

/// The worked elevator instances `E1` to `E6`, as `(min, max, passengers)`.
pub fn example_elevator(k: usize) -> Option<ElevatorSpec> {
    Some(match k {
        1 => ElevatorSpec::new(0, 3, [(3, 1)]),
        2 => ElevatorSpec::new(0, 4, [(2, 4)]),
        3 => ElevatorSpec::new(0, 2, [(0, 2), (2, 1)]),
        4 => ElevatorSpec::new(0, 2, [(0, 2)]),
        5 => ElevatorSpec::new(0, 3, [(1, 3)]),
        6 => ElevatorSpec::new(0, 1, [(0, 2)]),
        _ => return None,
    })
}
