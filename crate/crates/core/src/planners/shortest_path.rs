use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::planners::{Step, Trajectory};
use crate::state_key::StateKey;
use crate::statespace::ConsolidatedGraph;

/// Best accumulated reward from the root to every node (`-inf` when
/// unreachable), indexed like the graph's nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Distances {
    pub(crate) dist: Vec<f64>,
}

impl Distances {
    pub fn at(&self, node: u32) -> f64 {
        self.dist[node as usize]
    }

    pub fn get(&self, graph: &ConsolidatedGraph, key: &StateKey) -> Option<f64> {
        graph.index_of(key).map(|n| self.at(n))
    }

    /// Distance of the all-zeros state, `-inf` when it is unreachable.
    pub fn sink_value(&self, graph: &ConsolidatedGraph) -> f64 {
        graph.sink().map_or(f64::NEG_INFINITY, |s| self.at(s))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.dist
    }
}

/// Single-source best rewards in one relaxation pass over the levels.
///
/// Node order is topological, so each node's distance is final before its
/// out-edges are relaxed.
pub fn bellman_ford_all(graph: &ConsolidatedGraph) -> Distances {
    let mut dist = vec![f64::NEG_INFINITY; graph.node_count()];
    if dist.is_empty() {
        return Distances { dist };
    }
    dist[graph.root() as usize] = 0.0;
    for node in 0..graph.node_count() as u32 {
        let d = dist[node as usize];
        if d == f64::NEG_INFINITY {
            continue;
        }
        for e in graph.out_edges(node) {
            let cand = d + e.weight;
            if cand > dist[e.target as usize] {
                dist[e.target as usize] = cand;
            }
        }
    }
    Distances { dist }
}

#[derive(Clone, Copy, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra on costs `-R(s,a)`, reported back as rewards.
///
/// Fails on the first positive reward it relaxes.
pub fn dijkstra_distances(graph: &ConsolidatedGraph) -> Result<Distances> {
    let n = graph.node_count();
    let mut cost = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    if n > 0 {
        cost[graph.root() as usize] = 0.0;
        heap.push(Reverse((Cost(0.0), graph.root())));
    }
    while let Some(Reverse((Cost(c), node))) = heap.pop() {
        if done[node as usize] {
            continue;
        }
        done[node as usize] = true;
        for e in graph.out_edges(node) {
            if e.weight > 0.0 {
                return Err(Error::PositiveReward {
                    state: graph.key(node).to_hex(),
                    action: e.action as usize,
                    reward: e.weight,
                });
            }
            let cand = c + -e.weight;
            if cand < cost[e.target as usize] {
                cost[e.target as usize] = cand;
                heap.push(Reverse((Cost(cand), e.target)));
            }
        }
    }
    Ok(Distances {
        dist: cost.into_iter().map(|c| -c).collect(),
    })
}

/// Minimum-cost root-to-sink path with cost `-R(s,a)`.
pub fn dijkstra_plan(graph: &ConsolidatedGraph) -> Result<Trajectory> {
    let dist = dijkstra_distances(graph)?;
    backtrack(graph, &dist, None)
}

/// Best root-to-sink path from [`bellman_ford_all`].
pub fn bellman_ford_plan(graph: &ConsolidatedGraph) -> Result<Trajectory> {
    backtrack(graph, &bellman_ford_all(graph), None)
}

/// Walks back from the sink along in-edges that realize each node's
/// distance, preferring the lowest connection index among ties.
pub(crate) fn backtrack(
    graph: &ConsolidatedGraph,
    dist: &Distances,
    blocked: Option<&FxHashSet<u32>>,
) -> Result<Trajectory> {
    let Some(sink) = graph.sink() else {
        return Err(Error::Infeasible(
            "the fully disassembled state is unreachable".into(),
        ));
    };
    if dist.at(sink) == f64::NEG_INFINITY {
        return Err(Error::Infeasible(
            "every path to the fully disassembled state is blocked".into(),
        ));
    }
    let mut steps = Vec::with_capacity(graph.width());
    let mut node = sink;
    while node != graph.root() {
        let target = dist.at(node);
        let pick = graph
            .in_edges(node)
            .iter()
            .filter(|ie| blocked.is_none_or(|b| !b.contains(&ie.edge)))
            .filter(|ie| dist.at(ie.source) + graph.edge(ie.edge).weight == target)
            .min_by_key(|ie| graph.edge(ie.edge).action)
            .expect("a finite distance is realized by some in-edge");
        let e = graph.edge(pick.edge);
        steps.push(Step {
            state: graph.key(pick.source),
            action: e.action as usize,
            reward: e.weight,
        });
        node = pick.source;
    }
    steps.reverse();
    let traj = Trajectory::from_steps(steps);
    debug_assert_eq!(traj.total(), dist.at(sink));
    Ok(traj)
}
