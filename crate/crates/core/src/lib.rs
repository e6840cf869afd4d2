//! Optimal assembly sequence planning by disassembly.
//!
//! A structure is a graph of parts joined by connections. Planning works
//! backwards: starting with every connection present, remove one connection
//! per step until none remain, then reverse the order. States are bitsets
//! over connections ([`StateKey`]), feasibility comes from connectivity,
//! precedence and part-count rules ([`feasibility`]), and every removal is
//! scored by a non-positive [`Reward`].
//!
//! ```
//! use asmplan::{expand_consolidated, dijkstra_plan, generate_preset, RewardModel};
//!
//! let graph = generate_preset("4brick", 0).unwrap();
//! let reward = RewardModel::completion();
//! let h = expand_consolidated(&graph, &reward).unwrap();
//! assert_eq!(h.node_count(), 8);
//! assert_eq!(dijkstra_plan(&h).unwrap().total(), -3.0);
//! ```

pub mod error;
pub mod feasibility;
pub mod planners;
pub mod presets;
pub mod reward;
pub mod rl;
pub mod state_key;
pub mod statespace;
pub mod structure;

pub use error::{Error, Result};
pub use feasibility::{
    apply_action, check_action, connected_components, feasible_actions, validate_sequence,
    Infeasibility, ValidationReport,
};
pub use planners::{
    baseline, bellman_ford_all, brute_force_oracle, dijkstra_plan, forward_optimal, orasp_search,
    random_rollout, replan_blocked, reverse_to_assembly, simulate_assembly, value_iteration,
    Trajectory,
};
pub use presets::{generate_preset, random_connected, PRESET_NAMES};
pub use reward::{total_reward, Reward, RewardKind, RewardModel};
pub use state_key::StateKey;
pub use statespace::{expand_consolidated, expand_with_cap, ConsolidatedGraph};
pub use structure::{AssemblyGraph, Connection, ConstraintSet, Part, PartId, Precedence, Upc};
