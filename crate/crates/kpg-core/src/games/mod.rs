//! Concrete game instances.
//!
//! - [`MeetupGame`]: two walkers pick step directions trying to meet; smooth,
//!   periodic, with a closed-form gradient and a known optimum.
//! - [`QuadraticGame`]: coupled concave quadratics with exact gradients,
//!   exact Hessian blocks, and the Nash point at the origin — the analytic
//!   testbed for every convergence certificate.
//! - [`matrix_game_make`]: single-state cooperative matrix games for the
//!   tabular estimators.

mod matrix;
mod meetup;
mod quadratic;

pub use matrix::matrix_game_make;
pub use meetup::MeetupGame;
pub use quadratic::QuadraticGame;
