//! Exact integer linear programming: a rational bounded-variable simplex and
//! best-bound branch and bound on top of it.

mod bnb;
mod dump;
mod model;
mod rational;
mod simplex;

pub use bnb::{
    solve, solve_relaxation, unbounded_check, IlpSolution, LpOutcome, SolveConfig, SolveStats,
    SolveStatus,
};
pub use dump::to_lp_format;
pub use model::{Comparator, Constraint, IlpModel, Objective, Sense, VarId, Variable};
pub use rational::Rational;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IlpError {
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("variable `{0}` has lower bound above upper bound")]
    EmptyDomain(String),
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("integer overflow in `{0}`")]
    Overflow(String),
    #[error("variable `{0}` is continuous; branch and bound needs integer variables")]
    ContinuousVariable(String),
    #[error("internal solver error: {0}")]
    Internal(String),
}
