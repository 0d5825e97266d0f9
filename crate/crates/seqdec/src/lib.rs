//! A generic solver for finite-horizon sequential decision problems.
//!
//! The state and control spaces may change from one decision step to the
//! next, and a transition may return one state, a set of states or a
//! finite distribution over states. Problems implement [`problem::SdpProblem`];
//! [`solver::backwards_induction`] produces a policy sequence that is
//! optimal over the reachable-and-viable states, [`trajectory::state_ctrl_trj`]
//! unfolds the container of every path a policy sequence can realize, and
//! [`oracle`] certifies desk-scale solutions by exhaustive enumeration.

pub mod error;
pub mod examples;
pub mod laws;
pub mod oracle;
pub mod problem;
pub mod problemfile;
mod rng;
pub mod solver;
pub mod trajectory;
pub mod uncertainty;
pub mod viability;

pub use error::Error;
pub use problem::{CtrlValue, Measure, SdpProblem, StateValue};
pub use solver::{backwards_induction, PolicySeq, SolveOptions, Solution};
pub use uncertainty::{Container, UncertaintyKind};
