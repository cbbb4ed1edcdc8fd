//! K-level policy gradients for N-player differentiable games.
//!
//! Each update step of the k-level scheme replays every agent's single
//! gradient step against progressively deeper models of what the other
//! agents are about to do: level 0 is the pre-update joint policy, level 1
//! the naive simultaneous step, and level k responds to the others' level
//! k-1 parameters while always re-anchoring at the agent's own initial
//! parameters. Driving k to infinity yields a semi-proximal fixed point in
//! which every agent's step is mutually consistent with the others'.
//!
//! The crate provides:
//!
//! - [`game`]: the differentiable-game abstraction, joint parameter
//!   handling, and finite-difference oracles for gradients and Hessian
//!   blocks;
//! - [`games`]: concrete instances — the two-player meet-up game with
//!   closed-form gradients, quadratic games with known Nash points, and a
//!   cooperative matrix-game builder;
//! - [`engine`]: the finite-k update, the fixed-point solver, training
//!   loops, and optimizers with snapshot/reset semantics;
//! - [`theory`]: constant estimation, Hessian block assembly, contraction
//!   ratios, and the three convergence certificates checked against traces;
//! - [`tabular`]: exact policy evaluation on finite Markov games and the
//!   k-level clipped-surrogate and exact-critic gradient estimators;
//! - [`trace`]: the flat trace-row format shared by every experiment.

pub mod engine;
pub mod error;
pub mod game;
pub mod games;
pub mod linalg;
pub mod tabular;
pub mod theory;
pub mod trace;

pub use error::{Error, Result};
pub use game::{DifferentiableGame, JointParams};
