//! Two-player meet-up game.
//!
//! Each agent stands at a fixed position and picks a step direction as an
//! angle; both take one unit-length step simultaneously. An agent is
//! rewarded by the cosine similarity between its own step and the direction
//! toward where the other agent ends up, shifted by -1 so the best
//! achievable value is 0: walking straight at the other agent's landing spot
//! is optimal, walking away is worst. The objective for agent `i` at angles
//! `(θ₁, θ₂)` is
//!
//! ```text
//! aᵢ = (cos θᵢ, sin θᵢ)            (unit step)
//! s'₋ᵢ = ι₋ᵢ + a₋ᵢ                 (other agent's landing position)
//! Jᵢ = aᵢ · unit(s'₋ᵢ - ιᵢ) - 1    ∈ [-2, 0]
//! ```
//!
//! which has gradient `dJᵢ/dθᵢ = (-sin θᵢ, cos θᵢ) · unit(s'₋ᵢ - ιᵢ)`. Both
//! agents' objectives peak at 0 exactly when they walk toward each other
//! along the line through the two start positions.

use crate::error::{Error, Result};
use crate::game::{DifferentiableGame, JointParams};

/// Fixed length of each agent's single step.
const STEP_LENGTH: f64 = 1.0;

/// Two agents at fixed positions choosing step directions to meet.
#[derive(Debug, Clone)]
pub struct MeetupGame {
    iota1: [f64; 2],
    iota2: [f64; 2],
}

impl MeetupGame {
    /// Game with the given start positions. The positions must differ.
    pub fn new(iota1: [f64; 2], iota2: [f64; 2]) -> Result<Self> {
        if iota1 == iota2 {
            return Err(Error::InvalidInput(
                "meet-up start positions must differ".into(),
            ));
        }
        Ok(MeetupGame { iota1, iota2 })
    }

    /// Positions of the two agents.
    pub fn positions(&self) -> ([f64; 2], [f64; 2]) {
        (self.iota1, self.iota2)
    }

    fn position(&self, i: usize) -> [f64; 2] {
        if i == 0 {
            self.iota1
        } else {
            self.iota2
        }
    }

    /// Unit vector from agent `i`'s position to the other agent's
    /// post-step position, or a degenerate-geometry error if they coincide.
    fn toward_other_landing(&self, i: usize, theta_other: f64) -> Result<[f64; 2]> {
        let own = self.position(i);
        let other = self.position(1 - i);
        let landing = [
            other[0] + STEP_LENGTH * theta_other.cos(),
            other[1] + STEP_LENGTH * theta_other.sin(),
        ];
        let diff = [landing[0] - own[0], landing[1] - own[1]];
        let norm = (diff[0] * diff[0] + diff[1] * diff[1]).sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateGeometry(format!(
                "agent {} lands on agent {i}'s position; the meeting direction is undefined",
                1 - i
            )));
        }
        Ok([diff[0] / norm, diff[1] / norm])
    }

    /// Both objectives at once.
    pub fn objectives(&self, theta1: f64, theta2: f64) -> Result<(f64, f64)> {
        let theta = JointParams::pack(&[vec![theta1], vec![theta2]])?;
        Ok((self.objective(0, &theta)?, self.objective(1, &theta)?))
    }

    /// Both closed-form gradients at once.
    pub fn gradients(&self, theta1: f64, theta2: f64) -> Result<(f64, f64)> {
        let theta = JointParams::pack(&[vec![theta1], vec![theta2]])?;
        Ok((self.gradient(0, &theta)?[0], self.gradient(1, &theta)?[0]))
    }
}

impl Default for MeetupGame {
    /// Standard instance: agent 1 at the origin, agent 2 at (3, 2).
    fn default() -> Self {
        MeetupGame { iota1: [0.0, 0.0], iota2: [3.0, 2.0] }
    }
}

/// Wrap an angle difference into `[-π, π]`.
fn wrap_angle(d: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = d.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

impl DifferentiableGame for MeetupGame {
    fn n_agents(&self) -> usize {
        2
    }

    fn dims(&self) -> Vec<usize> {
        vec![1, 1]
    }

    fn objective(&self, i: usize, theta: &JointParams) -> Result<f64> {
        let own_angle = theta.segment(i)[0];
        let other_angle = theta.segment(1 - i)[0];
        let dir = self.toward_other_landing(i, other_angle)?;
        Ok(own_angle.cos() * dir[0] + own_angle.sin() * dir[1] - 1.0)
    }

    fn gradient(&self, i: usize, theta: &JointParams) -> Result<Vec<f64>> {
        let own_angle = theta.segment(i)[0];
        let other_angle = theta.segment(1 - i)[0];
        let dir = self.toward_other_landing(i, other_angle)?;
        Ok(vec![-own_angle.sin() * dir[0] + own_angle.cos() * dir[1]])
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    /// Angle-wrapped Euclidean distance, so parameter identifications at
    /// multiples of 2π do not inflate distances.
    fn param_distance(&self, a: &JointParams, b: &JointParams) -> f64 {
        a.flat()
            .iter()
            .zip(b.flat())
            .map(|(x, y)| {
                let d = wrap_angle(x - y);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Both agents walking straight at each other along the line through
    /// the start positions. Only defined when the positions are more than
    /// one step apart, so the straight walk cannot overshoot into a
    /// degenerate meeting.
    fn known_optimum(&self) -> Option<JointParams> {
        let dx = self.iota2[0] - self.iota1[0];
        let dy = self.iota2[1] - self.iota1[1];
        if (dx * dx + dy * dy).sqrt() <= STEP_LENGTH {
            return None;
        }
        let toward = dy.atan2(dx);
        JointParams::pack(&[vec![toward], vec![toward - std::f64::consts::PI]]).ok()
    }
}
