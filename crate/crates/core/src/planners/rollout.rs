use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feasibility::feasible_actions;
use crate::planners::{Step, Trajectory};
use crate::reward::Reward;
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

#[derive(Clone, Debug, PartialEq)]
pub enum RolloutOutcome {
    Complete(Trajectory),
    /// Stopped in a non-empty state with no feasible removal.
    DeadEnd {
        steps: Vec<Step>,
        state: StateKey,
    },
}

impl RolloutOutcome {
    pub fn into_trajectory(self) -> Result<Trajectory> {
        match self {
            RolloutOutcome::Complete(t) => Ok(t),
            RolloutOutcome::DeadEnd { state, steps } => Err(Error::Infeasible(format!(
                "random rollout dead-ended in state {state} after {} steps",
                steps.len()
            ))),
        }
    }

    pub fn total(&self) -> Option<f64> {
        match self {
            RolloutOutcome::Complete(t) => Some(t.total()),
            RolloutOutcome::DeadEnd { .. } => None,
        }
    }
}

/// Disassembles by picking uniformly among the feasible removals at each step.
pub fn random_rollout<R: Reward, G: Rng + ?Sized>(
    graph: &AssemblyGraph,
    reward: &R,
    rng: &mut G,
) -> RolloutOutcome {
    let mut state = graph.full_state();
    let mut steps = Vec::with_capacity(graph.connection_count());
    while !state.is_empty() {
        let actions = feasible_actions(graph, &state);
        let Some(&a) = actions.choose(rng) else {
            return RolloutOutcome::DeadEnd { steps, state };
        };
        steps.push(Step {
            state,
            action: a,
            reward: reward.reward(graph, &state, a),
        });
        state.clear(a);
    }
    RolloutOutcome::Complete(Trajectory::from_steps(steps))
}

/// `samples` rollouts drawn from one stream seeded with `seed`.
pub fn baseline<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
    samples: usize,
    seed: u64,
) -> Vec<RolloutOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| random_rollout(graph, reward, &mut rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::validate_sequence;
    use crate::presets::generate_preset;
    use crate::reward::RewardModel;

    #[test]
    fn seeded_rollouts_repeat() {
        let g = generate_preset("4brick", 0).unwrap();
        let a = baseline(&g, &RewardModel::completion(), 10, 42);
        let b = baseline(&g, &RewardModel::completion(), 10, 42);
        assert_eq!(a, b);
        for r in &a {
            assert_eq!(r.total(), Some(-3.0));
        }
    }

    #[test]
    fn rollouts_are_valid() {
        let g = generate_preset("iss", 0).unwrap();
        for r in baseline(&g, &RewardModel::cubesat_fuel(), 20, 1) {
            let t = r.into_trajectory().unwrap();
            assert!(validate_sequence(&g, &t.disassembly_order()).valid);
        }
    }

    #[test]
    fn dead_end_is_reported() {
        use crate::structure::{ConstraintSet, Precedence, Upc};
        let g = generate_preset("4brick", 0)
            .unwrap()
            .with_constraints(ConstraintSet {
                precedence: vec![
                    Precedence {
                        before: 1,
                        after: 0,
                    },
                    Precedence {
                        before: 1,
                        after: 2,
                    },
                ],
                upc: Some(Upc {
                    max_subassemblies: 1,
                    max_new_size: 1,
                }),
            })
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match random_rollout(&g, &RewardModel::completion(), &mut rng) {
            RolloutOutcome::DeadEnd { steps, state } => {
                assert!(steps.is_empty());
                assert!(state.is_full());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
