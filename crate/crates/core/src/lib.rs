//! Greedy randomized nonlinear Bregman–Kaczmarz solvers.
//!
//! The crate solves constrained nonlinear systems `F(x) = 0, x ∈ C` by row-action
//! iterations: each step linearizes one component equation `F_i` at the current iterate
//! and moves onto the resulting hyperplane by a Bregman projection (or a relaxed step)
//! with respect to a distance-generating function whose domain encodes `C`.
//!
//! * [`dgf`]: distance-generating functions, conjugates, mirror maps, Bregman distances.
//! * [`project`]: exact one-dimensional dual solves and the relaxed fallback.
//! * [`problems`]: the nonlinear-system abstraction and seeded instance generators.
//! * [`solver`]: index samplers and the iteration loop.
//! * [`diagnostics`]: rate bounds, condition estimates and descent audits.

pub mod dgf;
pub mod diagnostics;
pub mod error;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;
pub mod problems;
pub mod project;
pub mod rng;
pub mod simplex;
pub mod solver;

pub use dgf::{DistanceGenerator, ExtendedReal, Geometry, PrimalDualState, PrimalNorm};
pub use error::{Error, Result};
pub use problems::{NonlinearProblem, ProblemData};
pub use project::{Hyperplane, StepKind, StepOutcome};
pub use solver::{Method, RunRecord, SamplerKind, SolverConfig, StepRule, TerminalStatus, TraceRow};
