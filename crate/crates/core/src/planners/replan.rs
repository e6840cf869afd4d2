use std::collections::BTreeSet;

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::planners::shortest_path::backtrack;
use crate::planners::{Distances, Trajectory};
use crate::state_key::StateKey;
use crate::statespace::ConsolidatedGraph;

#[derive(Clone, Debug)]
pub struct ReplanOutcome {
    pub trajectory: Trajectory,
    pub distances: Distances,
    /// Nodes whose distance was recomputed.
    pub repaired: usize,
}

/// Re-plans around blocked transitions using distances already computed on
/// `graph`.
///
/// Blocked edges are masked out, not deleted; only the descendants of their
/// targets are recomputed, in topological order, and propagation stops at
/// nodes whose distance does not change.
pub fn replan_blocked(
    graph: &ConsolidatedGraph,
    distances: &Distances,
    blocked: &[(StateKey, usize)],
) -> Result<ReplanOutcome> {
    if distances.dist.len() != graph.node_count() {
        return Err(Error::InvalidArgument(
            "distances were computed on a different graph".into(),
        ));
    }
    let mut masked: FxHashSet<u32> = FxHashSet::default();
    let mut worklist: BTreeSet<u32> = BTreeSet::new();
    for &(state, action) in blocked {
        let node = graph.index_of(&state).ok_or_else(|| {
            Error::InvalidArgument(format!("blocked state {state} is not in the graph"))
        })?;
        let edge = graph
            .edge_range(node)
            .find(|&ei| graph.edge(ei as u32).action as usize == action)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "state {state} has no transition for connection {action}"
                ))
            })?;
        masked.insert(edge as u32);
        worklist.insert(graph.edge(edge as u32).target);
    }

    let mut dist = distances.clone();
    let mut repaired = 0;
    while let Some(node) = worklist.pop_first() {
        repaired += 1;
        let fresh = graph
            .in_edges(node)
            .iter()
            .filter(|ie| !masked.contains(&ie.edge))
            .map(|ie| dist.at(ie.source) + graph.edge(ie.edge).weight)
            .fold(f64::NEG_INFINITY, f64::max);
        if fresh != dist.at(node) {
            dist.dist[node as usize] = fresh;
            worklist.extend(graph.out_edges(node).iter().map(|e| e.target));
        }
    }

    let trajectory = backtrack(graph, &dist, Some(&masked))?;
    Ok(ReplanOutcome {
        trajectory,
        distances: dist,
        repaired,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planners::{bellman_ford_all, brute_force_oracle_blocked, dijkstra_plan};
    use crate::presets::generate_preset;
    use crate::reward::RewardModel;
    use crate::statespace::expand_consolidated;
    use crate::structure::AssemblyGraph;

    fn crafted(_: &AssemblyGraph, s: &StateKey, a: usize) -> f64 {
        if a == 1 && s.is_full() {
            -5.0
        } else {
            -1.0
        }
    }

    #[test]
    fn uniform_costs_survive_a_block() {
        let g = generate_preset("4brick", 0).unwrap();
        let h = expand_consolidated(&g, &RewardModel::completion()).unwrap();
        let d = bellman_ford_all(&h);
        let out = replan_blocked(&h, &d, &[(g.full_state(), 0)]).unwrap();
        assert_eq!(out.trajectory.total(), -3.0);
        assert_ne!(out.trajectory.steps()[0].action, 0);
    }

    #[test]
    fn forced_expensive_first_move() {
        let g = generate_preset("4brick", 0).unwrap();
        let h = expand_consolidated(&g, &crafted).unwrap();
        let d = bellman_ford_all(&h);
        let blocked = [(g.full_state(), 0), (g.full_state(), 2)];
        let out = replan_blocked(&h, &d, &blocked).unwrap();
        assert_eq!(out.trajectory.steps()[0].action, 1);
        assert_eq!(out.trajectory.total(), -7.0);
        let oracle =
            brute_force_oracle_blocked(&g, &crafted, &blocked.iter().copied().collect()).unwrap();
        assert_eq!(oracle.total(), -7.0);
    }

    #[test]
    fn no_block_matches_dijkstra() {
        let g = generate_preset("lattice", 0).unwrap();
        let h = expand_consolidated(&g, &RewardModel::cubesat_fuel()).unwrap();
        let d = bellman_ford_all(&h);
        let out = replan_blocked(&h, &d, &[]).unwrap();
        assert_eq!(out.trajectory, dijkstra_plan(&h).unwrap());
        assert_eq!(out.repaired, 0);
    }

    #[test]
    fn blocking_everything_is_infeasible() {
        let g = generate_preset("4brick", 0).unwrap();
        let h = expand_consolidated(&g, &RewardModel::completion()).unwrap();
        let d = bellman_ford_all(&h);
        let full = g.full_state();
        let all = [(full, 0), (full, 1), (full, 2)];
        assert!(matches!(
            replan_blocked(&h, &d, &all),
            Err(Error::Infeasible(_))
        ));
        assert!(replan_blocked(&h, &d, &[(g.empty_state(), 0)]).is_err());
    }
}
