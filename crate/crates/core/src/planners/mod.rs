//! Optimal planners over the consolidated graph, the graph-free branch and
//! bound search, and the reference and baseline planners used to check them.

mod forward;
mod oracle;
mod orasp;
mod replan;
mod rollout;
mod shortest_path;
mod trajectory;
mod value_iteration;

pub use forward::{forward_optimal, simulate_assembly};
pub use oracle::{
    brute_force_oracle, brute_force_oracle_blocked, brute_force_oracle_counted, ORACLE_CAP,
};
pub use orasp::{orasp_search, OraspStats};
pub use replan::{replan_blocked, ReplanOutcome};
pub use rollout::{baseline, random_rollout, RolloutOutcome};
pub use shortest_path::{
    bellman_ford_all, bellman_ford_plan, dijkstra_distances, dijkstra_plan, Distances,
};
pub use trajectory::{reverse_to_assembly, Step, Trajectory};
pub use value_iteration::{value_iteration, value_iteration_synchronous, ValueTable};
