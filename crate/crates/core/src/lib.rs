//! Monotone travelling fronts of FPU-type lattices.
//!
//! Fronts are computed as minimizers of an action functional by an explicit
//! Euler gradient flow on the normalized fixed-point problem
//! `W = A Phi_hat'(A W)`. Supporting modules cover the shock algebra of the
//! p-system, tail-rate analysis and direct simulation of the chain.

pub mod analysis;
pub mod chain;
pub mod error;
pub mod potential;
pub mod profile;
pub mod psystem;
pub mod solver;

pub use analysis::{decay_rate, fit_tail, verify_front, DecayReport, Side, VerificationReport};
pub use chain::{ChainState, Front, Snapshot, TWDeviation};
pub use error::{Error, Result};
pub use potential::{
    build_normalized, builtin, check_assumptions, g_area, AssumptionReport, Builtin,
    NormalizedPotential, Potential, PotentialSpec, TrigKind, TrigTerm,
};
pub use profile::{Grid, Profile};
pub use psystem::{Branch, ShockCurve, ShockData, ShockType, TraceOptions, TurningKind, TurningPoint};
pub use solver::{solve_front, solve_front_from, FrontResult, Outcome, SolverConfig};
