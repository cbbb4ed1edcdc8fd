//! N-player differentiable game abstraction and finite-difference oracles.
//!
//! A game exposes one scalar objective per agent over a joint parameter
//! vector. Parameters are held as [`JointParams`]: an ordered list of
//! per-agent segments packed into one flat vector. Gradients come either
//! from a game's closed form or from the central-difference oracle
//! [`fd_gradient`]; [`fd_hessian_blocks`] differentiates the gradient once
//! more to produce the per-agent Hessian blocks the convergence certificates
//! consume.

use crate::error::{Error, Result};
use crate::linalg::{dist2, norm2, Mat};

/// Joint parameters of all agents: per-agent segments in agent order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointParams {
    dims: Vec<usize>,
    flat: Vec<f64>,
}

impl JointParams {
    /// Pack per-agent segments (agent order) into a joint vector.
    ///
    /// Requires at least two segments and every segment non-empty.
    pub fn pack(segments: &[Vec<f64>]) -> Result<Self> {
        if segments.len() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "need at least 2 agent segments, got {}",
                segments.len()
            )));
        }
        let mut dims = Vec::with_capacity(segments.len());
        let mut flat = Vec::new();
        for (i, seg) in segments.iter().enumerate() {
            if seg.is_empty() {
                return Err(Error::DimensionMismatch(format!("agent {i} has an empty segment")));
            }
            dims.push(seg.len());
            flat.extend_from_slice(seg);
        }
        Ok(JointParams { dims, flat })
    }

    /// Reassemble a joint vector from a flat slice and per-agent dimensions.
    pub fn from_flat(dims: &[usize], flat: &[f64]) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::DimensionMismatch(
                "need at least 2 agents with non-empty segments".into(),
            ));
        }
        let total: usize = dims.iter().sum();
        if total != flat.len() {
            return Err(Error::DimensionMismatch(format!(
                "flat vector has length {}, expected {total}",
                flat.len()
            )));
        }
        Ok(JointParams { dims: dims.to_vec(), flat: flat.to_vec() })
    }

    /// Split back into per-agent segments. Inverse of [`JointParams::pack`].
    pub fn unpack(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dims.len());
        let mut offset = 0;
        for &d in &self.dims {
            out.push(self.flat[offset..offset + d].to_vec());
            offset += d;
        }
        out
    }

    pub fn n_agents(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.flat.len()
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.flat
    }

    /// Offset of agent `i`'s segment inside the flat vector.
    pub fn offset(&self, i: usize) -> usize {
        self.dims[..i].iter().sum()
    }

    /// Agent `i`'s segment.
    pub fn segment(&self, i: usize) -> &[f64] {
        let o = self.offset(i);
        &self.flat[o..o + self.dims[i]]
    }

    /// Overwrite agent `i`'s segment.
    pub fn set_segment(&mut self, i: usize, values: &[f64]) {
        assert_eq!(values.len(), self.dims[i], "segment length must match agent dimension");
        let o = self.offset(i);
        self.flat[o..o + self.dims[i]].copy_from_slice(values);
    }

    /// Euclidean distance between two joint vectors of identical layout.
    pub fn dist2(&self, other: &JointParams) -> f64 {
        assert_eq!(self.dims, other.dims, "layouts must match");
        dist2(&self.flat, &other.flat)
    }
}

/// Flat indices belonging to every agent except `i`, in agent order.
///
/// This single ordering is shared by the Hessian oracle's cross blocks and
/// the complement-selection matrix, so the two always line up.
pub fn complement_indices(dims: &[usize], i: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (j, &d) in dims.iter().enumerate() {
        if j != i {
            out.extend(offset..offset + d);
        }
        offset += d;
    }
    out
}

/// An N-player game with one differentiable objective per agent.
///
/// `objective(i, θ)` is agent `i`'s payoff at the joint parameters θ; each
/// agent ascends its own objective. Games with a closed-form gradient
/// override [`DifferentiableGame::gradient`] (the default falls back to
/// central differences) and report it via `has_analytic_gradient` so oracle
/// cross-checks know what they are testing.
pub trait DifferentiableGame {
    /// Number of agents (at least 2).
    fn n_agents(&self) -> usize;

    /// Per-agent parameter dimensions.
    fn dims(&self) -> Vec<usize>;

    /// Agent `i`'s scalar objective at θ.
    fn objective(&self, i: usize, theta: &JointParams) -> Result<f64>;

    /// Gradient of agent `i`'s objective with respect to its own segment.
    ///
    /// Defaults to the central-difference oracle; games with closed forms
    /// override this.
    fn gradient(&self, i: usize, theta: &JointParams) -> Result<Vec<f64>> {
        fd_gradient(self, i, theta, None)
    }

    /// Whether [`DifferentiableGame::gradient`] is a closed form rather than
    /// the finite-difference fallback.
    fn has_analytic_gradient(&self) -> bool {
        false
    }

    /// Closed-form Hessian blocks `(A_i, B_i, C_i)` when the game knows them.
    fn analytic_hessian_blocks(&self, _i: usize, _theta: &JointParams) -> Option<(Mat, Mat, Mat)> {
        None
    }

    /// Axis-aligned box over which constants are estimated, one
    /// `(low, high)` pair per flat coordinate. Defaults to `[-5, 5]` per
    /// coordinate.
    fn region(&self) -> Vec<(f64, f64)> {
        vec![(-5.0, 5.0); self.dims().iter().sum()]
    }

    /// Distance between two joint parameter vectors.
    ///
    /// Defaults to the Euclidean metric; games with periodic parameters
    /// override this so distances respect the identification.
    fn param_distance(&self, a: &JointParams, b: &JointParams) -> f64 {
        a.dist2(b)
    }

    /// Joint parameters of a known stationary point, when the game has one
    /// in closed form.
    fn known_optimum(&self) -> Option<JointParams> {
        None
    }
}

/// Central-difference step for first derivatives at coordinate value `x`:
/// cube root of machine epsilon, scaled by the coordinate magnitude.
pub fn fd_step_gradient(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Central-difference step for second derivatives at coordinate value `x`:
/// fourth root of machine epsilon, scaled by the coordinate magnitude.
pub fn fd_step_hessian(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * x.abs().max(1.0)
}

/// Central-difference gradient of agent `i`'s objective over its own
/// coordinates: `(J_i(θ + h e_j) - J_i(θ - h e_j)) / 2h`.
///
/// `h` overrides the per-coordinate default step when given. Returns a
/// numeric error naming the offending coordinate if the objective evaluates
/// non-finite.
pub fn fd_gradient<G: DifferentiableGame + ?Sized>(
    game: &G,
    i: usize,
    theta: &JointParams,
    h: Option<f64>,
) -> Result<Vec<f64>> {
    let offset = theta.offset(i);
    let dim = theta.dims()[i];
    let mut grad = vec![0.0; dim];
    let mut probe = theta.clone();
    for (j, slot) in grad.iter_mut().enumerate() {
        let x = theta.flat()[offset + j];
        let step = h.unwrap_or_else(|| fd_step_gradient(x));
        probe.flat_mut()[offset + j] = x + step;
        let plus = game.objective(i, &probe)?;
        probe.flat_mut()[offset + j] = x - step;
        let minus = game.objective(i, &probe)?;
        probe.flat_mut()[offset + j] = x;
        let d = (plus - minus) / (2.0 * step);
        if !d.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite difference quotient for agent {i} coordinate {j}"
            )));
        }
        *slot = d;
    }
    Ok(grad)
}

/// Hessian blocks of agent `i`'s objective by central differences of its
/// gradient: `A_i` over the agent's own coordinates, `B_i` over (own x
/// others'), and `C_i` over the others' coordinates. Columns of `B_i` and
/// `C_i` follow [`complement_indices`] order.
pub fn fd_hessian_blocks<G: DifferentiableGame + ?Sized>(
    game: &G,
    i: usize,
    theta: &JointParams,
    h: Option<f64>,
) -> Result<(Mat, Mat, Mat)> {
    let dims = theta.dims().to_vec();
    let offset = theta.offset(i);
    let own_dim = dims[i];
    let others = complement_indices(&dims, i);
    let other_dim = others.len();

    // One central difference of the (possibly analytic) gradient per flat
    // coordinate: own coordinates feed A_i, the rest feed B_i.
    let mut d_grad_own: Vec<Vec<f64>> = Vec::with_capacity(own_dim);
    let mut d_grad_other: Vec<Vec<f64>> = Vec::with_capacity(other_dim);
    let mut probe = theta.clone();
    let diff_of_gradient = |flat_idx: usize, probe: &mut JointParams| -> Result<Vec<f64>> {
        let x = theta.flat()[flat_idx];
        let step = h.unwrap_or_else(|| fd_step_hessian(x));
        probe.flat_mut()[flat_idx] = x + step;
        let plus = game.gradient(i, probe)?;
        probe.flat_mut()[flat_idx] = x - step;
        let minus = game.gradient(i, probe)?;
        probe.flat_mut()[flat_idx] = x;
        let col: Vec<f64> = plus
            .iter()
            .zip(minus.iter())
            .map(|(p, m)| (p - m) / (2.0 * step))
            .collect();
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite second difference at flat coordinate {flat_idx} for agent {i}"
            )));
        }
        Ok(col)
    };
    for j in 0..own_dim {
        d_grad_own.push(diff_of_gradient(offset + j, &mut probe)?);
    }
    for &idx in &others {
        d_grad_other.push(diff_of_gradient(idx, &mut probe)?);
    }

    let mut a = Mat::zeros(own_dim, own_dim);
    for (col, dg) in d_grad_own.iter().enumerate() {
        for row in 0..own_dim {
            a[(row, col)] = dg[row];
        }
    }
    let mut b = Mat::zeros(own_dim, other_dim);
    for col in 0..other_dim {
        for row in 0..own_dim {
            b[(row, col)] = d_grad_other[col][row];
        }
    }

    // C_i needs second differences of the objective over pairs of the
    // others' coordinates.
    let mut c = Mat::zeros(other_dim, other_dim);
    for (r, &ir) in others.iter().enumerate() {
        for (s, &is) in others.iter().enumerate().skip(r) {
            let xr = theta.flat()[ir];
            let xs = theta.flat()[is];
            let hr = h.unwrap_or_else(|| fd_step_hessian(xr));
            let hs = h.unwrap_or_else(|| fd_step_hessian(xs));
            let value = if ir == is {
                // Diagonal: standard three-point second difference.
                let f0 = game.objective(i, &probe)?;
                probe.flat_mut()[ir] = xr + hr;
                let fp = game.objective(i, &probe)?;
                probe.flat_mut()[ir] = xr - hr;
                let fm = game.objective(i, &probe)?;
                probe.flat_mut()[ir] = xr;
                (fp - 2.0 * f0 + fm) / (hr * hr)
            } else {
                // Off-diagonal: four-point mixed difference.
                let eval = |dr: f64, ds: f64, probe: &mut JointParams| -> Result<f64> {
                    probe.flat_mut()[ir] = xr + dr;
                    probe.flat_mut()[is] = xs + ds;
                    let v = game.objective(i, probe);
                    probe.flat_mut()[ir] = xr;
                    probe.flat_mut()[is] = xs;
                    v
                };
                let fpp = eval(hr, hs, &mut probe)?;
                let fpm = eval(hr, -hs, &mut probe)?;
                let fmp = eval(-hr, hs, &mut probe)?;
                let fmm = eval(-hr, -hs, &mut probe)?;
                (fpp - fpm - fmp + fmm) / (4.0 * hr * hs)
            };
            if !value.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite second difference over others' coordinates ({ir}, {is}) for agent {i}"
                )));
            }
            c[(r, s)] = value;
            c[(s, r)] = value;
        }
    }

    Ok((a, b, c))
}

/// Wrapper that hides a game's closed-form gradient so oracle comparisons
/// can force the pure finite-difference path.
pub struct FdOnly<G>(pub G);

impl<G: DifferentiableGame> DifferentiableGame for FdOnly<G> {
    fn n_agents(&self) -> usize {
        self.0.n_agents()
    }
    fn dims(&self) -> Vec<usize> {
        self.0.dims()
    }
    fn objective(&self, i: usize, theta: &JointParams) -> Result<f64> {
        self.0.objective(i, theta)
    }
    fn region(&self) -> Vec<(f64, f64)> {
        self.0.region()
    }
    fn param_distance(&self, a: &JointParams, b: &JointParams) -> f64 {
        self.0.param_distance(a, b)
    }
    fn known_optimum(&self) -> Option<JointParams> {
        self.0.known_optimum()
    }
}

/// Mean objective across agents at θ — the scalar summary recorded as
/// `return` in trace rows.
pub fn mean_objective<G: DifferentiableGame + ?Sized>(game: &G, theta: &JointParams) -> Result<f64> {
    let n = game.n_agents();
    let mut acc = 0.0;
    for i in 0..n {
        acc += game.objective(i, theta)?;
    }
    Ok(acc / n as f64)
}

/// Joint gradient norm `max_i ||∇_i J_i(θ)||` — zero exactly at a local
/// Nash point.
pub fn max_gradient_norm<G: DifferentiableGame + ?Sized>(game: &G, theta: &JointParams) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..game.n_agents() {
        worst = worst.max(norm2(&game.gradient(i, theta)?));
    }
    Ok(worst)
}
