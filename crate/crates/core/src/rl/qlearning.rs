use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feasibility::feasible_actions;
use crate::planners::{Step, Trajectory};
use crate::reward::Reward;
use crate::rl::env::{reset, step};
use crate::rl::spec::{Curriculum, EnvSpec, EpsilonSchedule};
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

/// Largest connection count the table (`2^E x E` entries) is built for.
pub const TABLE_CAP: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QLearningConfig {
    pub episodes: usize,
    pub learning_rate: f64,
    pub curriculum: Curriculum,
    /// Unlike [`EnvSpec`], `end = 0` is allowed here for pure greedy runs.
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
}

impl QLearningConfig {
    pub fn for_budget(connections: usize, episodes: usize, seed: u64) -> Self {
        QLearningConfig {
            episodes,
            learning_rate: 0.5,
            curriculum: Curriculum::for_budget(connections, episodes),
            epsilon: EpsilonSchedule::for_budget(episodes),
            seed,
        }
    }
}

/// Learned action values, `Q(s, a)` at `values[s * E + a]`.
#[derive(Clone, Debug)]
pub struct QTable {
    width: usize,
    values: Vec<f64>,
}

impl QTable {
    fn new(width: usize) -> Self {
        QTable {
            width,
            values: vec![0.0; (1usize << width) * width],
        }
    }

    fn slot(&self, state: &StateKey, action: usize) -> usize {
        // Width is at most TABLE_CAP, so the key fits in its lowest word.
        let index = state.ones().fold(0usize, |acc, j| acc | 1 << j);
        index * self.width + action
    }

    pub fn get(&self, state: &StateKey, action: usize) -> f64 {
        self.values[self.slot(state, action)]
    }

    /// Highest-valued action among `actions`, lowest index on ties.
    fn best(&self, state: &StateKey, actions: &[usize]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &a in actions {
            let q = self.get(state, a);
            if best.is_none_or(|(_, b)| q > b) {
                best = Some((a, q));
            }
        }
        best
    }
}

/// The greedy policy of a trained table.
#[derive(Clone, Debug)]
pub struct GreedyPolicy {
    table: QTable,
}

impl GreedyPolicy {
    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn action(&self, graph: &AssemblyGraph, state: &StateKey) -> Option<usize> {
        self.table
            .best(state, &feasible_actions(graph, state))
            .map(|(a, _)| a)
    }

    /// Follows the policy from the full structure.
    pub fn rollout<R: Reward>(&self, graph: &AssemblyGraph, reward: &R) -> Result<Trajectory> {
        let mut state = graph.full_state();
        let mut steps = Vec::with_capacity(graph.connection_count());
        while !state.is_empty() {
            let a = self.action(graph, &state).ok_or_else(|| {
                Error::Infeasible(format!("greedy policy dead-ended in state {state}"))
            })?;
            steps.push(Step {
                state,
                action: a,
                reward: reward.reward(graph, &state, a),
            });
            state.clear(a);
        }
        Ok(Trajectory::from_steps(steps))
    }
}

/// Undiscounted tabular Q-learning with epsilon-greedy exploration over the
/// feasible actions and curriculum resets.
pub fn tabular_q_learning<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
    config: &QLearningConfig,
) -> Result<GreedyPolicy> {
    let e = graph.connection_count();
    if e > TABLE_CAP {
        return Err(Error::CapExceeded {
            what: "connections",
            value: e,
            cap: TABLE_CAP,
            hint: "; the Q table has 2^E rows",
        });
    }
    if e == 0 {
        return Ok(GreedyPolicy {
            table: QTable::new(0),
        });
    }
    let alpha = config.learning_rate;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be in (0, 1], got {alpha}"
        )));
    }
    let mut q = QTable::new(e);
    for episode in 0..config.episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(episode as u64);
        let eps = config.epsilon.at(episode);
        let mut state = reset(graph, config.curriculum.level(e, episode), &mut rng)?;
        let mut actions = feasible_actions(graph, &state.key());
        while !actions.is_empty() {
            let s = state.key();
            let a = if rng.gen_bool(eps.clamp(0.0, 1.0)) {
                *actions.choose(&mut rng).expect("non-empty")
            } else {
                q.best(&s, &actions).expect("non-empty").0
            };
            let (next, r, done) = step(graph, reward, &state, a)?;
            let next_actions = feasible_actions(graph, &next.key());
            let future = if done {
                0.0
            } else {
                // A dead end can never complete the disassembly.
                q.best(&next.key(), &next_actions)
                    .map_or(f64::NEG_INFINITY, |(_, v)| v)
            };
            let target = r + future;
            let slot = q.slot(&s, a);
            if target == f64::NEG_INFINITY {
                q.values[slot] = f64::NEG_INFINITY;
            } else {
                q.values[slot] += alpha * (target - q.values[slot]);
            }
            state = next;
            actions = next_actions;
        }
    }
    Ok(GreedyPolicy { table: q })
}

/// Q-learning driven by an exported spec's reward, schedules and seed.
pub fn tabular_q_learning_spec(spec: &EnvSpec, episodes: usize) -> Result<GreedyPolicy> {
    let config = QLearningConfig {
        episodes,
        learning_rate: 0.5,
        curriculum: spec.curriculum,
        epsilon: spec.epsilon,
        seed: spec.seed,
    };
    tabular_q_learning(&spec.structure, &spec.reward, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planners::brute_force_oracle;
    use crate::presets::generate_preset;
    use crate::reward::RewardModel;

    fn crafted(_: &AssemblyGraph, s: &StateKey, a: usize) -> f64 {
        if a == 1 && s.is_full() {
            -5.0
        } else {
            -1.0
        }
    }

    #[test]
    fn four_brick_completion() {
        let g = generate_preset("4brick", 0).unwrap();
        let cfg = QLearningConfig::for_budget(3, 2000, 0);
        let p = tabular_q_learning(&g, &RewardModel::completion(), &cfg).unwrap();
        assert_eq!(
            p.rollout(&g, &RewardModel::completion()).unwrap().total(),
            -3.0
        );
    }

    #[test]
    fn four_brick_crafted_matches_oracle() {
        let g = generate_preset("4brick", 0).unwrap();
        let cfg = QLearningConfig::for_budget(3, 5000, 0);
        let p = tabular_q_learning(&g, &crafted, &cfg).unwrap();
        let want = brute_force_oracle(&g, &crafted).unwrap().total();
        assert_eq!(p.rollout(&g, &crafted).unwrap().total(), want);
        assert_eq!(want, -3.0);
    }

    #[test]
    fn zero_epsilon_is_deterministic_greedy() {
        let g = generate_preset("2x3", 0).unwrap();
        let mut cfg = QLearningConfig::for_budget(7, 50, 3);
        cfg.epsilon = EpsilonSchedule {
            start: 0.0,
            end: 0.0,
            decay: 1.0,
        };
        // Full-length episodes only, so nothing is left to chance.
        cfg.curriculum = Curriculum {
            k_start: 7,
            k_step: 1,
            episodes_per_level: 1,
        };
        let r = RewardModel::min_time();
        let a = tabular_q_learning(&g, &r, &cfg)
            .unwrap()
            .rollout(&g, &r)
            .unwrap();
        cfg.seed = 99;
        let b = tabular_q_learning(&g, &r, &cfg)
            .unwrap()
            .rollout(&g, &r)
            .unwrap();
        assert_eq!(a.disassembly_order(), b.disassembly_order());
    }

    #[test]
    fn cap_is_enforced() {
        let g = generate_preset("hubble", 0).unwrap();
        let cfg = QLearningConfig::for_budget(19, 10, 0);
        assert!(matches!(
            tabular_q_learning(&g, &RewardModel::completion(), &cfg),
            Err(Error::CapExceeded { cap: TABLE_CAP, .. })
        ));
    }
}
