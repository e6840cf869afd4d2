use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::check_action;
use crate::reward::Reward;
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

/// One removal: the state it was taken in, the connection, and its reward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Step {
    pub state: StateKey,
    pub action: usize,
    pub reward: f64,
}

/// A disassembly from the full structure; `total` is the left-to-right sum
/// of step rewards.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    steps: Vec<Step>,
    total: f64,
}

impl Trajectory {
    pub fn from_steps(steps: Vec<Step>) -> Self {
        let total = steps.iter().fold(0.0, |acc, s| acc + s.reward);
        Trajectory { steps, total }
    }

    /// Replays `order` from the full state, checking feasibility at each step.
    pub fn simulate<R: Reward>(graph: &AssemblyGraph, reward: &R, order: &[usize]) -> Result<Self> {
        let mut state = graph.full_state();
        let mut steps = Vec::with_capacity(order.len());
        for (i, &a) in order.iter().enumerate() {
            check_action(graph, &state, a).map_err(|why| {
                Error::InvalidTrajectory(format!("step {i}: action {a} infeasible: {why:?}"))
            })?;
            steps.push(Step {
                state,
                action: a,
                reward: reward.reward(graph, &state, a),
            });
            state.clear(a);
        }
        if !state.is_empty() {
            return Err(Error::InvalidTrajectory(format!(
                "connections {:?} are never removed",
                state.ones().collect::<Vec<_>>()
            )));
        }
        Ok(Self::from_steps(steps))
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn disassembly_order(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.action).collect()
    }

    pub fn assembly_order(&self) -> Vec<usize> {
        reverse_to_assembly(self)
    }
}

/// The disassembly order reversed: the order in which to attach connections.
pub fn reverse_to_assembly(traj: &Trajectory) -> Vec<usize> {
    traj.steps.iter().rev().map(|s| s.action).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::generate_preset;
    use crate::reward::RewardModel;

    #[test]
    fn reverse_cases() {
        let g = generate_preset("4brick", 0).unwrap();
        let t = Trajectory::simulate(&g, &RewardModel::completion(), &[2, 1, 0]).unwrap();
        assert_eq!(reverse_to_assembly(&t), vec![0, 1, 2]);
        assert_eq!(t.total(), -3.0);
        assert!(reverse_to_assembly(&Trajectory::from_steps(vec![])).is_empty());

        // Attaching in assembly order from the empty state rebuilds everything.
        let mut s = g.empty_state();
        for a in t.assembly_order() {
            assert!(!s.contains(a));
            s.set(a);
        }
        assert!(s.is_full());
    }

    #[test]
    fn simulate_rejects_incomplete_or_infeasible() {
        let g = crate::presets::four_brick_with_precedence();
        assert!(Trajectory::simulate(&g, &RewardModel::completion(), &[0, 1, 2]).is_err());
        assert!(Trajectory::simulate(&g, &RewardModel::completion(), &[1, 0]).is_err());
    }
}
