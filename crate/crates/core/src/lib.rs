//! Integer addition planning: actions with additive integer effects and
//! interval preconditions, solved by searching over multi-sets of ordered
//! action copies and solving one integer program per multi-set.

#![allow(clippy::needless_range_loop)]

pub mod domains;
pub mod encoder;
pub mod error;
pub mod io;
pub mod model;
pub mod mvpop;
pub mod oracle;
pub mod search;

pub use error::{IapError, Result};
pub use model::{
    Action, ActionId, BoundSide, Iad, MultiSet, Plan, Preference, ProblemInstance, RegisterId,
    Situation, ViolationRelation,
};
pub use mvpop::{AxiomViolation, CopyId, Mvpop};
