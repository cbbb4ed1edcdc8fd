//! Exact desk-scale instantiations of the deep k-level estimators.
//!
//! On a finite Markov game every quantity the deep estimators approximate
//! can be computed in closed form: values by solving a linear system,
//! occupancies likewise, and expectations by enumerating states and joint
//! actions. That turns the estimator definitions themselves into testable
//! objects, with no sampling noise anywhere:
//!
//! - [`exact_policy_eval`] — V, Q, advantages, and the discounted state
//!   occupancy of a joint softmax policy;
//! - [`kmappo_gradient`] — the clipped-surrogate gradient with the k-level
//!   importance ratio `r = [πᵢ/πᵢ⁰]·[π₋ᵢᵏ/π₋ᵢ⁰]`, the expectation taken
//!   exactly under the level-0 occupancy and joint policy;
//! - [`kmaddpg_gradient`] — the deterministic-policy gradient through an
//!   exact critic, i.e. the level gradient of a one-shot differentiable
//!   game with the other agents' parameters replaced by their level-k
//!   values;
//! - [`kpg_tabular_train`] — the k-level training loop over softmax policy
//!   tables, every level re-anchored at the update's initial logits.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::LearningRates;
use crate::error::{Error, Result};
use crate::game::{DifferentiableGame, JointParams};
use crate::linalg::{lu_solve, Mat};
use crate::trace::{ConvergenceTrace, TraceRow};

/// Finite N-player Markov game with dense transition and reward tensors.
#[derive(Debug, Clone)]
pub struct TabularMarkovGame {
    n_states: usize,
    n_actions: Vec<usize>,
    /// `P(s'|s, a)` flattened as `[s][joint action][s']`.
    transition: Vec<f64>,
    /// Per-agent rewards flattened as `[s][joint action]`.
    rewards: Vec<Vec<f64>>,
    gamma: f64,
    /// Initial state distribution.
    initial: Vec<f64>,
}

impl TabularMarkovGame {
    pub fn new(
        n_states: usize,
        n_actions: Vec<usize>,
        transition: Vec<f64>,
        rewards: Vec<Vec<f64>>,
        gamma: f64,
        initial: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::InvalidInput("need at least one state".into()));
        }
        if n_actions.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 agents, got {}",
                n_actions.len()
            )));
        }
        if n_actions.contains(&0) {
            return Err(Error::InvalidInput("every agent needs at least one action".into()));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidInput(format!(
                "discount must lie in [0, 1), got {gamma}"
            )));
        }
        let joint: usize = n_actions.iter().product();
        if transition.len() != n_states * joint * n_states {
            return Err(Error::DimensionMismatch(format!(
                "transition tensor has {} entries, expected {}",
                transition.len(),
                n_states * joint * n_states
            )));
        }
        for (i, r) in rewards.iter().enumerate() {
            if r.len() != n_states * joint {
                return Err(Error::DimensionMismatch(format!(
                    "reward tensor for agent {i} has {} entries, expected {}",
                    r.len(),
                    n_states * joint
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite reward for agent {i}")));
            }
        }
        if initial.len() != n_states {
            return Err(Error::DimensionMismatch(format!(
                "initial distribution has {} entries, expected {n_states}",
                initial.len()
            )));
        }
        for s in 0..n_states {
            for ja in 0..joint {
                let row = &transition[(s * joint + ja) * n_states..(s * joint + ja + 1) * n_states];
                if row.iter().any(|&p| p < -1e-15) {
                    return Err(Error::InvalidInput(format!(
                        "negative transition probability at state {s}, joint action {ja}"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "transition probabilities at state {s}, joint action {ja} sum to {sum}"
                    )));
                }
            }
        }
        if initial.iter().any(|&p| p < -1e-15) {
            return Err(Error::InvalidInput("negative initial probability".into()));
        }
        let iota_sum: f64 = initial.iter().sum();
        if (iota_sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "initial distribution sums to {iota_sum}"
            )));
        }
        Ok(TabularMarkovGame { n_states, n_actions, transition, rewards, gamma, initial })
    }

    pub fn n_agents(&self) -> usize {
        self.n_actions.len()
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> &[usize] {
        &self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn joint_action_count(&self) -> usize {
        self.n_actions.iter().product()
    }

    /// Per-agent actions of a joint-action index (first agent varies
    /// slowest).
    pub fn decode_joint(&self, mut ja: usize) -> Vec<usize> {
        let mut actions = vec![0; self.n_actions.len()];
        for i in (0..self.n_actions.len()).rev() {
            actions[i] = ja % self.n_actions[i];
            ja /= self.n_actions[i];
        }
        actions
    }

    pub fn reward(&self, agent: usize, s: usize, ja: usize) -> f64 {
        self.rewards[agent][s * self.joint_action_count() + ja]
    }

    pub fn transition_prob(&self, s: usize, ja: usize, s_next: usize) -> f64 {
        self.transition[(s * self.joint_action_count() + ja) * self.n_states + s_next]
    }
}

/// One agent's tabular softmax policy: logits over (state, action).
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxPolicyTable {
    logits: Vec<Vec<f64>>,
}

impl SoftmaxPolicyTable {
    /// All-zero logits: the uniform policy.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        SoftmaxPolicyTable { logits: vec![vec![0.0; n_actions]; n_states] }
    }

    pub fn from_logits(logits: Vec<Vec<f64>>) -> Result<Self> {
        if logits.is_empty() || logits.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInput("logit table must be non-empty".into()));
        }
        let width = logits[0].len();
        if logits.iter().any(|row| row.len() != width) {
            return Err(Error::DimensionMismatch(
                "every state needs the same number of action logits".into(),
            ));
        }
        if logits.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite logit".into()));
        }
        Ok(SoftmaxPolicyTable { logits })
    }

    pub fn n_states(&self) -> usize {
        self.logits.len()
    }

    pub fn n_actions(&self) -> usize {
        self.logits[0].len()
    }

    pub fn logits(&self) -> &[Vec<f64>] {
        &self.logits
    }

    /// Action distribution at a state (max-shifted softmax; strictly
    /// positive, sums to one).
    pub fn probs(&self, state: usize) -> Vec<f64> {
        let row = &self.logits[state];
        let peak = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|l| (l - peak).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }

    /// Add `scale` times `delta` (same shape) to the logits.
    pub fn step(&self, delta: &[Vec<f64>], scale: f64) -> Result<Self> {
        if delta.len() != self.logits.len()
            || delta.iter().zip(&self.logits).any(|(d, l)| d.len() != l.len())
        {
            return Err(Error::DimensionMismatch("logit step has the wrong shape".into()));
        }
        let logits = self
            .logits
            .iter()
            .zip(delta)
            .map(|(row, drow)| row.iter().zip(drow).map(|(l, d)| l + scale * d).collect())
            .collect();
        SoftmaxPolicyTable::from_logits(logits)
    }

    /// Squared Euclidean distance between two tables' logits.
    fn sq_dist(&self, other: &SoftmaxPolicyTable) -> f64 {
        self.logits
            .iter()
            .flatten()
            .zip(other.logits.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

fn check_policy_shapes(game: &TabularMarkovGame, policies: &[SoftmaxPolicyTable]) -> Result<()> {
    if policies.len() != game.n_agents() {
        return Err(Error::DimensionMismatch(format!(
            "got {} policies for {} agents",
            policies.len(),
            game.n_agents()
        )));
    }
    for (i, p) in policies.iter().enumerate() {
        if p.n_states() != game.n_states() || p.n_actions() != game.n_actions()[i] {
            return Err(Error::DimensionMismatch(format!(
                "policy {i} is {}x{}, expected {}x{}",
                p.n_states(),
                p.n_actions(),
                game.n_states(),
                game.n_actions()[i]
            )));
        }
    }
    Ok(())
}

/// Exact evaluation of a joint softmax policy.
#[derive(Debug, Clone)]
pub struct PolicyEval {
    /// `v[agent][state]`.
    pub v: Vec<Vec<f64>>,
    /// `q[agent][state * joint_actions + ja]`.
    pub q: Vec<Vec<f64>>,
    /// `adv[agent][state * joint_actions + ja] = q - v`.
    pub adv: Vec<Vec<f64>>,
    /// Discounted state occupancy under the initial distribution,
    /// normalized by `(1 - γ)` so it sums to one.
    pub occupancy: Vec<f64>,
}

/// Solve the evaluation equations exactly: `(I - γPᵖᵒˡ) Vᵢ = Rᵢᵖᵒˡ`,
/// `Qᵢ(s,a) = Rᵢ(s,a) + γ E[Vᵢ(s')]`, `Aᵢ = Qᵢ - Vᵢ`, and the normalized
/// discounted occupancy `(I - γPᵖᵒˡᵀ) d = (1-γ) ι`.
pub fn exact_policy_eval(
    game: &TabularMarkovGame,
    policies: &[SoftmaxPolicyTable],
) -> Result<PolicyEval> {
    check_policy_shapes(game, policies)?;
    let s_count = game.n_states();
    let joint = game.joint_action_count();
    let n = game.n_agents();

    // Per-state action distributions and the induced joint probabilities.
    let probs: Vec<Vec<Vec<f64>>> =
        (0..n).map(|i| (0..s_count).map(|s| policies[i].probs(s)).collect()).collect();
    let mut joint_prob = vec![0.0; s_count * joint];
    for s in 0..s_count {
        for ja in 0..joint {
            let actions = game.decode_joint(ja);
            let mut p = 1.0;
            for i in 0..n {
                p *= probs[i][s][actions[i]];
            }
            joint_prob[s * joint + ja] = p;
        }
    }

    // Policy-averaged transition matrix and rewards.
    let mut p_pol = Mat::zeros(s_count, s_count);
    for s in 0..s_count {
        for ja in 0..joint {
            let w = joint_prob[s * joint + ja];
            for s_next in 0..s_count {
                p_pol[(s, s_next)] += w * game.transition_prob(s, ja, s_next);
            }
        }
    }

    let system = Mat::identity(s_count).add_scaled(&p_pol, -game.gamma());
    let mut v = Vec::with_capacity(n);
    for agent in 0..n {
        let r_pol: Vec<f64> = (0..s_count)
            .map(|s| {
                (0..joint)
                    .map(|ja| joint_prob[s * joint + ja] * game.reward(agent, s, ja))
                    .sum()
            })
            .collect();
        v.push(lu_solve(&system, &r_pol)?);
    }

    let mut q = vec![vec![0.0; s_count * joint]; n];
    let mut adv = vec![vec![0.0; s_count * joint]; n];
    for agent in 0..n {
        for s in 0..s_count {
            for ja in 0..joint {
                let future: f64 = (0..s_count)
                    .map(|s_next| game.transition_prob(s, ja, s_next) * v[agent][s_next])
                    .sum();
                let q_val = game.reward(agent, s, ja) + game.gamma() * future;
                q[agent][s * joint + ja] = q_val;
                adv[agent][s * joint + ja] = q_val - v[agent][s];
            }
        }
    }

    let occupancy = {
        let system_t = Mat::identity(s_count).add_scaled(&p_pol.transpose(), -game.gamma());
        let rhs: Vec<f64> =
            game.initial().iter().map(|&p| (1.0 - game.gamma()) * p).collect();
        lu_solve(&system_t, &rhs)?
    };

    Ok(PolicyEval { v, q, adv, occupancy })
}

/// Exact return of the evaluated policy for one agent:
/// `Σ_s ι(s) Vᵢ(s)`.
pub fn exact_return(game: &TabularMarkovGame, eval: &PolicyEval, agent: usize) -> f64 {
    game.initial()
        .iter()
        .zip(eval.v[agent].iter())
        .map(|(p, v)| p * v)
        .sum()
}

/// How the clip interacts with the advantage weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipMode {
    /// `min(r·A, clip(r)·A)` — the usual pessimistic surrogate, clipping
    /// whichever branch is worse for the objective.
    Standard,
    /// `min(r, clip(r))·A` — clips the ratio itself before weighting; for
    /// negative advantages this behaves differently from `Standard`. Kept
    /// for fidelity experiments.
    LiteralRatio,
}

/// Gradient of the k-level clipped surrogate over agent `agent`'s logits.
///
/// The surrogate's expectation runs over the level-0 occupancy and joint
/// policy, with the k-level importance ratio
/// `r = [πᵢ(aᵢ|s)/πᵢ⁰(aᵢ|s)] · Π_{j≠i} [πⱼᵏ(aⱼ|s)/πⱼ⁰(aⱼ|s)]` and the
/// level-0 advantage as weight, scaled by `1/(1-γ)` so that with all
/// ratios equal to one the result is exactly the policy gradient of the
/// true return. `agent_table` holds the logits the gradient is taken at
/// (the agent's anchor); `level_k[j]` supplies the other agents' level-k
/// tables (`level_k[agent]` is ignored). Everything is enumerated — no
/// sampling.
pub fn kmappo_gradient(
    game: &TabularMarkovGame,
    level0: &[SoftmaxPolicyTable],
    agent: usize,
    agent_table: &SoftmaxPolicyTable,
    level_k: &[SoftmaxPolicyTable],
    eps_clip: f64,
    mode: ClipMode,
) -> Result<Vec<Vec<f64>>> {
    check_policy_shapes(game, level0)?;
    check_policy_shapes(game, level_k)?;
    if agent >= game.n_agents() {
        return Err(Error::InvalidInput(format!("agent {agent} out of range")));
    }
    if agent_table.n_states() != game.n_states()
        || agent_table.n_actions() != game.n_actions()[agent]
    {
        return Err(Error::DimensionMismatch("anchor table has the wrong shape".into()));
    }
    if eps_clip.is_nan() || eps_clip < 0.0 {
        return Err(Error::InvalidInput(format!(
            "clip range must be non-negative, got {eps_clip}"
        )));
    }

    let eval0 = exact_policy_eval(game, level0)?;
    let s_count = game.n_states();
    let joint = game.joint_action_count();
    let n = game.n_agents();
    let prefactor = 1.0 / (1.0 - game.gamma());

    let mut grad = vec![vec![0.0; game.n_actions()[agent]]; s_count];
    for (s, grad_row) in grad.iter_mut().enumerate() {
        let weight_s = prefactor * eval0.occupancy[s];
        if weight_s == 0.0 {
            continue;
        }
        let probs0: Vec<Vec<f64>> = (0..n).map(|j| level0[j].probs(s)).collect();
        let probs_k: Vec<Vec<f64>> = (0..n).map(|j| level_k[j].probs(s)).collect();
        let probs_i = agent_table.probs(s);
        for ja in 0..joint {
            let actions = game.decode_joint(ja);
            let mut p0 = 1.0;
            for j in 0..n {
                p0 *= probs0[j][actions[j]];
            }
            // k-level importance ratio.
            let mut ratio = probs_i[actions[agent]] / probs0[agent][actions[agent]];
            for j in 0..n {
                if j != agent {
                    ratio *= probs_k[j][actions[j]] / probs0[j][actions[j]];
                }
            }
            if !ratio.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite importance ratio at state {s}, joint action {ja}"
                )));
            }
            let a_val = eval0.adv[agent][s * joint + ja];
            let clipped = ratio.clamp(1.0 - eps_clip, 1.0 + eps_clip);
            // The surrogate takes the unclipped branch exactly when it is
            // the minimum; otherwise the clip is binding and the derivative
            // in `ratio` is zero.
            let unclipped_active = match mode {
                ClipMode::Standard => ratio * a_val <= clipped * a_val,
                ClipMode::LiteralRatio => ratio <= clipped,
            };
            if !unclipped_active {
                continue;
            }
            // d surrogate / d logits = A · ∇r, and ∇r = r · ∇log πᵢ(aᵢ|s).
            let factor = weight_s * p0 * a_val * ratio;
            for (b, g) in grad_row.iter_mut().enumerate() {
                let indicator = if b == actions[agent] { 1.0 } else { 0.0 };
                *g += factor * (indicator - probs_i[b]);
            }
        }
    }
    Ok(grad)
}

/// Deterministic-policy gradient through an exact critic: the gradient of
/// agent `agent`'s objective with its own parameters at the anchor and the
/// other agents' replaced by their level-k values.
///
/// On a one-shot differentiable game the exact action value *is* the
/// objective, so this equals the k-level update's per-level gradient.
pub fn kmaddpg_gradient<G: DifferentiableGame + ?Sized>(
    game: &G,
    agent: usize,
    anchor: &JointParams,
    others_level_k: &JointParams,
) -> Result<Vec<f64>> {
    if anchor.dims() != others_level_k.dims() {
        return Err(Error::DimensionMismatch(
            "anchor and level-k parameters have different layouts".into(),
        ));
    }
    let mut eval_point = others_level_k.clone();
    eval_point.set_segment(agent, anchor.segment(agent));
    game.gradient(agent, &eval_point)
}

/// K-level training over softmax policy tables with the clipped-surrogate
/// gradient.
///
/// Each update freezes the current tables as level 0, runs `k_levels`
/// rounds in which every agent re-anchors at its level-0 logits and steps
/// against the others' previous-level tables, then commits the final
/// level. Initial logits are jittered uniformly in `[-0.05, 0.05]` from
/// the seed; everything else is exact enumeration, so identical inputs
/// reproduce identical curves.
///
/// Trace rows carry the joint logit movement per level and, on each
/// update's final level, the exact mean return of the committed policy.
pub fn kpg_tabular_train(
    game: &TabularMarkovGame,
    k_levels: usize,
    rates: &LearningRates,
    steps: usize,
    eps_clip: f64,
    mode: ClipMode,
    seed: u64,
) -> Result<(Vec<SoftmaxPolicyTable>, ConvergenceTrace)> {
    if steps == 0 {
        return Err(Error::InvalidInput("training needs at least one update step".into()));
    }
    if k_levels == 0 {
        return Err(Error::InvalidInput("reasoning depth must be at least 1".into()));
    }
    if rates.n_agents() != game.n_agents() {
        return Err(Error::DimensionMismatch(format!(
            "got {} learning rates for {} agents",
            rates.n_agents(),
            game.n_agents()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tables: Vec<SoftmaxPolicyTable> = (0..game.n_agents())
        .map(|i| {
            let logits: Vec<Vec<f64>> = (0..game.n_states())
                .map(|_| {
                    (0..game.n_actions()[i]).map(|_| rng.gen_range(-0.05..0.05)).collect()
                })
                .collect();
            SoftmaxPolicyTable::from_logits(logits)
        })
        .collect::<Result<_>>()?;

    let mut trace = ConvergenceTrace::new();
    for update in 0..steps {
        let level0 = tables.clone();
        let mut prev = tables.clone();
        for k in 1..=k_levels {
            let mut next = Vec::with_capacity(game.n_agents());
            for i in 0..game.n_agents() {
                let g = kmappo_gradient(game, &level0, i, &level0[i], &prev, eps_clip, mode)?;
                next.push(level0[i].step(&g, rates.eta(i))?);
            }
            let sq: f64 = next.iter().zip(prev.iter()).map(|(a, b)| a.sq_dist(b)).sum();
            let mut row = TraceRow::new(update, k);
            row.step_dist = Some(sq.sqrt());
            trace.push(row);
            prev = next;
        }
        tables = prev;
        let eval = exact_policy_eval(game, &tables)?;
        let mean_return = (0..game.n_agents())
            .map(|i| exact_return(game, &eval, i))
            .sum::<f64>()
            / game.n_agents() as f64;
        if let Some(row) = trace.rows.last_mut() {
            row.ret = Some(mean_return);
        }
    }
    Ok((tables, trace))
}
