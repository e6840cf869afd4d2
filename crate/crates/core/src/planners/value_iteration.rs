use crate::error::{Error, Result};
use crate::planners::{Step, Trajectory};
use crate::state_key::StateKey;
use crate::statespace::ConsolidatedGraph;

/// State values indexed like the nodes of the graph they were computed on.
///
/// Dead ends (non-empty states with no feasible removal) hold `-inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    values: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl ValueTable {
    pub fn at(&self, node: u32) -> f64 {
        self.values[node as usize]
    }

    pub fn get(&self, graph: &ConsolidatedGraph, key: &StateKey) -> Option<f64> {
        graph.index_of(key).map(|n| self.at(n))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Sweep {
    /// Values updated in place, deepest level first.
    InPlace,
    /// Every sweep reads only the previous sweep's values.
    Synchronous,
}

/// Bellman backups `V(s) = max_a [R(s,a) + V(s')]` until the largest change
/// in a sweep drops below `epsilon`, then a greedy rollout from the root.
///
/// Values start at zero. Sweeps run deepest level first and update in place,
/// so the first sweep is already exact and the second confirms it.
pub fn value_iteration(
    graph: &ConsolidatedGraph,
    epsilon: f64,
    max_iter: usize,
) -> Result<(ValueTable, Trajectory)> {
    run(graph, epsilon, max_iter, Sweep::InPlace)
}

/// Same backup with synchronous sweeps (each sweep reads the previous
/// table). Needs up to `E + 2` sweeps on a graph of depth `E`.
pub fn value_iteration_synchronous(
    graph: &ConsolidatedGraph,
    epsilon: f64,
    max_iter: usize,
) -> Result<(ValueTable, Trajectory)> {
    run(graph, epsilon, max_iter, Sweep::Synchronous)
}

fn backup(graph: &ConsolidatedGraph, node: u32, values: &[f64], sink: Option<u32>) -> f64 {
    let edges = graph.out_edges(node);
    if edges.is_empty() {
        return if Some(node) == sink {
            0.0
        } else {
            f64::NEG_INFINITY
        };
    }
    edges
        .iter()
        .map(|e| e.weight + values[e.target as usize])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn change(old: f64, new: f64) -> f64 {
    if old == new {
        0.0
    } else {
        (new - old).abs()
    }
}

fn run(
    graph: &ConsolidatedGraph,
    epsilon: f64,
    max_iter: usize,
    sweep: Sweep,
) -> Result<(ValueTable, Trajectory)> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} must be > 0"
        )));
    }
    let n = graph.node_count();
    let sink = graph.sink();
    let mut values = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    while iterations < max_iter {
        delta = 0.0;
        match sweep {
            Sweep::InPlace => {
                for node in (0..n as u32).rev() {
                    let new = backup(graph, node, &values, sink);
                    delta = delta.max(change(values[node as usize], new));
                    values[node as usize] = new;
                }
            }
            Sweep::Synchronous => {
                for node in 0..n as u32 {
                    let new = backup(graph, node, &values, sink);
                    delta = delta.max(change(values[node as usize], new));
                    scratch[node as usize] = new;
                }
                std::mem::swap(&mut values, &mut scratch);
            }
        }
        iterations += 1;
        if delta < epsilon {
            break;
        }
    }
    if delta.is_nan() || delta >= epsilon {
        return Err(Error::NotConverged { iterations, delta });
    }
    let table = ValueTable {
        values,
        iterations_used: iterations,
        converged: true,
    };
    let traj = greedy_rollout(graph, &table)?;
    Ok((table, traj))
}

/// Follows `argmax_a [R(s,a) + V(s')]` from the root; ties go to the lowest
/// connection index.
fn greedy_rollout(graph: &ConsolidatedGraph, table: &ValueTable) -> Result<Trajectory> {
    let root = graph.root();
    if table.at(root) == f64::NEG_INFINITY {
        return Err(Error::Infeasible(
            "no complete disassembly exists from the full structure".into(),
        ));
    }
    let mut node = root;
    let mut steps = Vec::with_capacity(graph.width());
    loop {
        let edges = graph.out_edges(node);
        let mut best: Option<(f64, usize)> = None;
        for (i, e) in edges.iter().enumerate() {
            let q = e.weight + table.at(e.target);
            if best.is_none_or(|(b, _)| q > b) {
                best = Some((q, i));
            }
        }
        let Some((_, i)) = best else { break };
        let e = edges[i];
        steps.push(Step {
            state: graph.key(node),
            action: e.action as usize,
            reward: e.weight,
        });
        node = e.target;
    }
    debug_assert!(graph.key(node).is_empty());
    Ok(Trajectory::from_steps(steps))
}
