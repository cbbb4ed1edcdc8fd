//! Single-state matrix games for the tabular estimators.

use crate::error::{Error, Result};
use crate::tabular::TabularMarkovGame;

/// Build a single-state matrix game from a flat payoff tensor.
///
/// `action_counts` gives each agent's number of actions (at least two
/// agents). `payoffs` is the joint-action payoff tensor flattened in
/// row-major agent order (the first agent's action varies slowest). With
/// `shared` set, one tensor of `Π action_counts` entries is copied to every
/// agent (fully cooperative); otherwise `payoffs` holds one such tensor per
/// agent, concatenated in agent order.
///
/// The result is a Markov game with one state, discount 0, and a
/// deterministic self-loop, so the exact return is the expected payoff of
/// the joint policy.
pub fn matrix_game_make(
    action_counts: &[usize],
    payoffs: &[f64],
    shared: bool,
) -> Result<TabularMarkovGame> {
    if action_counts.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "matrix games need at least 2 agents, got {}",
            action_counts.len()
        )));
    }
    let joint: usize = action_counts.iter().product();
    let n = action_counts.len();
    let rewards: Vec<Vec<f64>> = if shared {
        if payoffs.len() != joint {
            return Err(Error::DimensionMismatch(format!(
                "shared payoff tensor has {} entries, expected {joint}",
                payoffs.len()
            )));
        }
        vec![payoffs.to_vec(); n]
    } else {
        if payoffs.len() != n * joint {
            return Err(Error::DimensionMismatch(format!(
                "per-agent payoff tensor has {} entries, expected {}",
                payoffs.len(),
                n * joint
            )));
        }
        payoffs.chunks(joint).map(<[f64]>::to_vec).collect()
    };
    // One state looping onto itself with probability 1 for every joint
    // action; discount 0 makes the game effectively one-shot.
    let transition = vec![1.0; joint];
    TabularMarkovGame::new(1, action_counts.to_vec(), transition, rewards, 0.0, vec![1.0])
}
