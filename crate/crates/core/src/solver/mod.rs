//! Groundstate solvers: the radial oracle, the resolvent and the Nehari descent.

mod minimize;
mod radial;
mod resolvent;

pub use minimize::{
    initial_field, minimize_from, minimize_groundstate, solve_decoupled, GroundstateResult,
    GroundstateSummary, Init, SolverConfig, StepRule,
};
pub use radial::{solve_radial, RadialProfile};
pub(crate) use resolvent::{conjugate_gradient, default_cg_cap};
pub use resolvent::{resolvent_solve, shifted_apply, CgStats};
