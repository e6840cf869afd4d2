use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{check_action, feasible_actions};
use crate::reward::Reward;
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

/// Rollout attempts [`reset`] makes before giving up on a level.
pub const RESET_ATTEMPTS: usize = 100;

/// Environment observation: the indicator vector over connections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EnvState {
    key: StateKey,
}

impl EnvState {
    pub fn from_key(key: StateKey) -> Self {
        EnvState { key }
    }

    pub fn from_vector(bits: &[bool]) -> Self {
        EnvState {
            key: StateKey::from_bools(bits),
        }
    }

    pub fn key(&self) -> StateKey {
        self.key
    }

    pub fn vector(&self) -> Vec<bool> {
        self.key.to_bools()
    }

    /// Connections still present.
    pub fn remaining(&self) -> usize {
        self.key.count_ones()
    }

    pub fn is_terminal(&self) -> bool {
        self.key.is_empty()
    }
}

impl From<StateKey> for EnvState {
    fn from(key: StateKey) -> Self {
        EnvState { key }
    }
}

/// A reachable state with exactly `level_k` connections left, reached by a
/// uniform random rollout from the full structure.
pub fn reset<G: Rng + ?Sized>(
    graph: &AssemblyGraph,
    level_k: usize,
    rng: &mut G,
) -> Result<EnvState> {
    let e = graph.connection_count();
    if level_k == 0 || level_k > e {
        return Err(Error::InvalidArgument(format!(
            "level_k must be in 1..={e}, got {level_k}"
        )));
    }
    'attempt: for _ in 0..RESET_ATTEMPTS {
        let mut state = graph.full_state();
        while state.count_ones() > level_k {
            let actions = feasible_actions(graph, &state);
            let Some(&a) = actions.choose(rng) else {
                continue 'attempt;
            };
            state.clear(a);
        }
        return Ok(EnvState { key: state });
    }
    Err(Error::Infeasible(format!(
        "{RESET_ATTEMPTS} rollouts dead-ended before reaching {level_k} remaining connections"
    )))
}

/// Removes connection `action`, returning `(next, reward, done)`.
pub fn step<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
    state: &EnvState,
    action: usize,
) -> Result<(EnvState, f64, bool)> {
    if state.key.width() != graph.connection_count() {
        return Err(Error::InvalidArgument(format!(
            "state has width {}, structure has {} connections",
            state.key.width(),
            graph.connection_count()
        )));
    }
    if check_action(graph, &state.key, action).is_err() {
        return Err(Error::MaskedAction {
            state: state.key.to_hex(),
            action,
        });
    }
    let r = reward.reward(graph, &state.key, action);
    let next = state.key.without(action);
    Ok((EnvState { key: next }, r, next.is_empty()))
}

/// `mask[j]` is true iff connection `j` can be removed from `state`.
pub fn action_mask(graph: &AssemblyGraph, state: &EnvState) -> Vec<bool> {
    let mut mask = vec![false; graph.connection_count()];
    for a in feasible_actions(graph, &state.key) {
        mask[a] = true;
    }
    mask
}
