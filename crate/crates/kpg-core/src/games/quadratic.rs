//! Coupled concave quadratic games.
//!
//! Agent `i` maximizes `Jᵢ(θ) = ½ θᵢᵀ Pᵢ θᵢ + θᵢᵀ Mᵢ θ₋ᵢ` with `Pᵢ`
//! symmetric negative definite and `Mᵢ` an arbitrary coupling matrix, so
//!
//! - the gradient `∇ᵢJᵢ = Pᵢθᵢ + Mᵢθ₋ᵢ` is linear,
//! - the Hessian blocks are exactly `Aᵢ = Pᵢ`, `Bᵢ = Mᵢ`, `Cᵢ = 0`, and
//! - the origin is the unique Nash point.
//!
//! Because every level of the k-level recursion is affine here, closed-form
//! fixed points and contraction ratios exist, making this the ground-truth
//! testbed for the convergence certificates.

use crate::error::{Error, Result};
use crate::game::{complement_indices, DifferentiableGame, JointParams};
use crate::linalg::{symmetric_eigenvalues, Mat};

/// N-player quadratic game with per-agent curvature `Pᵢ` and coupling `Mᵢ`.
#[derive(Debug, Clone)]
pub struct QuadraticGame {
    dims: Vec<usize>,
    p: Vec<Mat>,
    m: Vec<Mat>,
}

impl QuadraticGame {
    /// Build from per-agent blocks.
    ///
    /// `p[i]` must be square, symmetric, and negative definite; `m[i]` must
    /// have shape `dᵢ × (Σd − dᵢ)` with columns ordered over the other
    /// agents' coordinates in agent order.
    pub fn new(p: Vec<Mat>, m: Vec<Mat>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 agents, got {}",
                p.len()
            )));
        }
        if p.len() != m.len() {
            return Err(Error::DimensionMismatch(format!(
                "got {} curvature blocks but {} coupling blocks",
                p.len(),
                m.len()
            )));
        }
        let dims: Vec<usize> = p.iter().map(Mat::rows).collect();
        let total: usize = dims.iter().sum();
        for (i, pi) in p.iter().enumerate() {
            if !pi.is_square() {
                return Err(Error::DimensionMismatch(format!(
                    "curvature block {i} is {}x{}, expected square",
                    pi.rows(),
                    pi.cols()
                )));
            }
            if pi.max_abs_diff(&pi.transpose()) > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "curvature block {i} is not symmetric"
                )));
            }
            let eig = symmetric_eigenvalues(pi)?;
            if eig.last().copied().unwrap_or(0.0) >= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "curvature block {i} is not negative definite (largest eigenvalue {})",
                    eig.last().unwrap()
                )));
            }
        }
        for (i, mi) in m.iter().enumerate() {
            let want_cols = total - dims[i];
            if mi.rows() != dims[i] || mi.cols() != want_cols {
                return Err(Error::DimensionMismatch(format!(
                    "coupling block {i} is {}x{}, expected {}x{want_cols}",
                    mi.rows(),
                    mi.cols(),
                    dims[i]
                )));
            }
        }
        Ok(QuadraticGame { dims, p, m })
    }

    /// Two scalar agents with identical curvature `p < 0` and symmetric
    /// coupling `c`: `Jᵢ = ½ p θᵢ² + c θᵢ θ₋ᵢ`.
    pub fn two_player_scalar(p: f64, c: f64) -> Result<Self> {
        let p1 = Mat::from_rows(&[vec![p]])?;
        let m1 = Mat::from_rows(&[vec![c]])?;
        QuadraticGame::new(vec![p1.clone(), p1], vec![m1.clone(), m1])
    }

    /// Agent `i`'s curvature block `Pᵢ`.
    pub fn curvature(&self, i: usize) -> &Mat {
        &self.p[i]
    }

    /// Agent `i`'s coupling block `Mᵢ`.
    pub fn coupling(&self, i: usize) -> &Mat {
        &self.m[i]
    }

    fn others(&self, i: usize, theta: &JointParams) -> Vec<f64> {
        complement_indices(&self.dims, i)
            .into_iter()
            .map(|idx| theta.flat()[idx])
            .collect()
    }
}

impl DifferentiableGame for QuadraticGame {
    fn n_agents(&self) -> usize {
        self.dims.len()
    }

    fn dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn objective(&self, i: usize, theta: &JointParams) -> Result<f64> {
        let own = theta.segment(i);
        let others = self.others(i, theta);
        let p_own = self.p[i].matvec(own);
        let m_others = self.m[i].matvec(&others);
        let mut acc = 0.0;
        for j in 0..own.len() {
            acc += 0.5 * own[j] * p_own[j] + own[j] * m_others[j];
        }
        Ok(acc)
    }

    fn gradient(&self, i: usize, theta: &JointParams) -> Result<Vec<f64>> {
        let own = theta.segment(i);
        let others = self.others(i, theta);
        let p_own = self.p[i].matvec(own);
        let m_others = self.m[i].matvec(&others);
        Ok(p_own.iter().zip(m_others.iter()).map(|(a, b)| a + b).collect())
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn analytic_hessian_blocks(&self, i: usize, _theta: &JointParams) -> Option<(Mat, Mat, Mat)> {
        let other_dim: usize = self.dims.iter().sum::<usize>() - self.dims[i];
        Some((
            self.p[i].clone(),
            self.m[i].clone(),
            Mat::zeros(other_dim, other_dim),
        ))
    }

    fn known_optimum(&self) -> Option<JointParams> {
        let segments: Vec<Vec<f64>> = self.dims.iter().map(|&d| vec![0.0; d]).collect();
        JointParams::pack(&segments).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{fd_gradient, fd_hessian_blocks, FdOnly};
    use approx::assert_relative_eq;

    #[test]
    fn gradient_matches_hand_calculation() {
        // P = [-1], M = [0.5]: ∇₁J₁(1, 1) = -1 + 0.5 = -0.5.
        let game = QuadraticGame::two_player_scalar(-1.0, 0.5).unwrap();
        let theta = JointParams::pack(&[vec![1.0], vec![1.0]]).unwrap();
        let g = game.gradient(0, &theta).unwrap();
        assert_relative_eq!(g[0], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn origin_is_stationary_for_every_agent() {
        let game = QuadraticGame::two_player_scalar(-1.0, 0.5).unwrap();
        let origin = game.known_optimum().unwrap();
        for i in 0..2 {
            assert_eq!(game.gradient(i, &origin).unwrap(), vec![0.0]);
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences_in_higher_dims() {
        // 3 agents with mixed dimensions and asymmetric couplings.
        let p0 = Mat::from_rows(&[vec![-2.0, 0.3], vec![0.3, -1.0]]).unwrap();
        let p1 = Mat::from_rows(&[vec![-1.5]]).unwrap();
        let p2 = Mat::from_rows(&[vec![-1.0, 0.0], vec![0.0, -3.0]]).unwrap();
        let m0 = Mat::from_rows(&[vec![0.1, -0.2, 0.3], vec![0.0, 0.4, -0.1]]).unwrap();
        let m1 = Mat::from_rows(&[vec![0.2, -0.3, 0.1, 0.5]]).unwrap();
        let m2 = Mat::from_rows(&[vec![-0.1, 0.2, 0.3], vec![0.4, 0.0, -0.2]]).unwrap();
        let game = QuadraticGame::new(vec![p0, p1, p2], vec![m0, m1, m2]).unwrap();

        let theta =
            JointParams::pack(&[vec![0.7, -0.3], vec![1.2], vec![-0.5, 0.9]]).unwrap();
        for i in 0..3 {
            let analytic = game.gradient(i, &theta).unwrap();
            let fd = fd_gradient(&FdOnly(game.clone()), i, &theta, None).unwrap();
            for (a, f) in analytic.iter().zip(fd.iter()) {
                assert_relative_eq!(a, f, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn hessian_blocks_are_exactly_the_defining_matrices() {
        let game = QuadraticGame::two_player_scalar(-1.0, 0.5).unwrap();
        let theta = JointParams::pack(&[vec![0.3], vec![-1.7]]).unwrap();
        let (a, b, c) = game.analytic_hessian_blocks(0, &theta).unwrap();
        assert_eq!(a[(0, 0)], -1.0);
        assert_eq!(b[(0, 0)], 0.5);
        assert_eq!(c[(0, 0)], 0.0);
        // The finite-difference oracle agrees.
        let (fa, fb, fc) = fd_hessian_blocks(&game, 0, &theta, None).unwrap();
        assert_relative_eq!(fa[(0, 0)], -1.0, epsilon = 1e-5);
        assert_relative_eq!(fb[(0, 0)], 0.5, epsilon = 1e-5);
        assert_relative_eq!(fc[(0, 0)], 0.0, epsilon = 1e-4);
    }

    #[test]
    fn positive_or_semidefinite_curvature_is_rejected() {
        assert!(matches!(
            QuadraticGame::two_player_scalar(1.0, 0.5),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            QuadraticGame::two_player_scalar(0.0, 0.5),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn mismatched_coupling_shape_is_rejected() {
        let p = Mat::from_rows(&[vec![-1.0]]).unwrap();
        let bad_m = Mat::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            QuadraticGame::new(vec![p.clone(), p.clone()], vec![bad_m.clone(), bad_m]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
