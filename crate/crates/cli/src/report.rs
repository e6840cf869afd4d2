use asmplan::feasibility::Violation;
use asmplan::planners::Step;
use asmplan::{RewardModel, Trajectory};
use serde::{Deserialize, Serialize};

#[derive(Serialize)]
pub struct Plan {
    pub structure: String,
    pub reward: RewardModel,
    pub planner: String,
    pub disassembly: Vec<usize>,
    pub assembly: Vec<usize>,
    pub total_reward: f64,
    pub per_step: Vec<Step>,
    pub expanded_nodes: usize,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replan: Option<ReplanInfo>,
}

#[derive(Serialize)]
pub struct ReplanInfo {
    pub blocked: Vec<String>,
    pub repaired: usize,
}

impl Plan {
    pub fn new(
        structure: &str,
        reward: RewardModel,
        planner: &str,
        traj: &Trajectory,
        expanded_nodes: usize,
        runtime_ms: f64,
    ) -> Self {
        Plan {
            structure: structure.to_string(),
            reward,
            planner: planner.to_string(),
            disassembly: traj.disassembly_order(),
            assembly: traj.assembly_order(),
            total_reward: traj.total(),
            per_step: traj.steps().to_vec(),
            expanded_nodes,
            runtime_ms,
            replan: None,
        }
    }
}

#[derive(Serialize)]
pub struct Comparison {
    pub optimal_total: f64,
    pub baseline_mean: f64,
    pub baseline_min: f64,
    pub baseline_max: f64,
}

#[derive(Serialize)]
pub struct RunReport {
    pub plan: Plan,
    /// Totals of completed rollouts; dead ends are left out.
    pub baseline: Vec<f64>,
    pub comparison: Option<Comparison>,
}

/// Sequence file accepted by `validate`.
#[derive(Deserialize)]
pub struct SequenceDoc {
    pub disassembly: Option<Vec<usize>>,
    pub assembly: Option<Vec<usize>>,
}

#[derive(Serialize)]
pub struct ValidationOutput {
    pub structure: String,
    pub reward: RewardModel,
    pub disassembly: Vec<usize>,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
    pub total_reward: Option<f64>,
}
