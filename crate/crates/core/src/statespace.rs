//! The consolidated state-action graph.
//!
//! Every removal order that reaches the same set of remaining connections
//! lands on one node, so the graph has at most `2^E` nodes instead of the
//! `sum_k E!/(E-k)!` of the order-sensitive tree. Nodes are stored level by
//! level (level `d` holds the states with `d` connections removed) and sorted
//! by key within a level, so node indices are a canonical topological order.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::feasibility::feasible_actions;
use crate::reward::Reward;
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

/// Largest connection count [`expand_consolidated`] accepts by default.
pub const DEFAULT_EXPANSION_CAP: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub action: u16,
    pub target: u32,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InEdge {
    pub source: u32,
    /// Position of the edge in the forward edge array.
    pub edge: u32,
}

#[derive(Debug)]
struct InEdges {
    start: Vec<u32>,
    edges: Vec<InEdge>,
}

#[derive(Debug)]
pub struct ConsolidatedGraph {
    width: usize,
    keys: Vec<StateKey>,
    index: FxHashMap<StateKey, u32>,
    edge_start: Vec<u32>,
    edges: Vec<Edge>,
    level_start: Vec<u32>,
    in_edges: OnceLock<InEdges>,
}

impl Clone for ConsolidatedGraph {
    fn clone(&self) -> Self {
        ConsolidatedGraph {
            width: self.width,
            keys: self.keys.clone(),
            index: self.index.clone(),
            edge_start: self.edge_start.clone(),
            edges: self.edges.clone(),
            level_start: self.level_start.clone(),
            in_edges: OnceLock::new(),
        }
    }
}

/// Expands every state reachable from the full assembly under the graph's
/// constraints, weighting edges with `reward`.
pub fn expand_consolidated<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
) -> Result<ConsolidatedGraph> {
    expand_with_cap(graph, reward, DEFAULT_EXPANSION_CAP)
}

pub fn expand_with_cap<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
    cap: usize,
) -> Result<ConsolidatedGraph> {
    let width = graph.connection_count();
    if width > cap {
        return Err(Error::CapExceeded {
            what: "connection count for full expansion",
            value: width,
            cap,
            hint: "; use the orasp planner or the RL path for larger structures",
        });
    }

    let root = graph.full_state();
    let mut keys = vec![root];
    let mut index: FxHashMap<StateKey, u32> = FxHashMap::default();
    index.insert(root, 0);
    let mut level_start = vec![0u32];
    let mut edge_start = Vec::new();
    let mut edges = Vec::new();
    let mut pending: Vec<(u16, StateKey, f64)> = Vec::new();
    let mut spans: Vec<(usize, usize)> = Vec::new();

    let mut level = 0..1usize;
    while !level.is_empty() {
        pending.clear();
        spans.clear();
        let mut next: FxHashSet<StateKey> = FxHashSet::default();
        for node in level.clone() {
            let state = keys[node];
            let begin = pending.len();
            for a in feasible_actions(graph, &state) {
                let succ = state.without(a);
                pending.push((a as u16, succ, reward.reward(graph, &state, a)));
                next.insert(succ);
            }
            spans.push((begin, pending.len()));
        }

        let mut next: Vec<StateKey> = next.into_iter().collect();
        next.sort_unstable();
        let next_begin = keys.len();
        for (i, k) in next.iter().enumerate() {
            index.insert(*k, (next_begin + i) as u32);
        }
        keys.extend_from_slice(&next);

        for &(begin, end) in &spans {
            edge_start.push(edges.len() as u32);
            edges.extend(
                pending[begin..end]
                    .iter()
                    .map(|&(action, succ, weight)| Edge {
                        action,
                        target: index[&succ],
                        weight,
                    }),
            );
        }
        level_start.push(next_begin as u32);
        level = next_begin..keys.len();
    }
    edge_start.push(edges.len() as u32);

    Ok(ConsolidatedGraph {
        width,
        keys,
        index,
        edge_start,
        edges,
        level_start,
        in_edges: OnceLock::new(),
    })
}

impl ConsolidatedGraph {
    /// Number of connections in the underlying structure.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn root(&self) -> u32 {
        0
    }

    /// Index of the all-zeros state, when reachable.
    pub fn sink(&self) -> Option<u32> {
        self.index_of(&StateKey::empty(self.width))
    }

    pub fn key(&self, node: u32) -> StateKey {
        self.keys[node as usize]
    }

    pub fn keys(&self) -> &[StateKey] {
        &self.keys
    }

    pub fn index_of(&self, key: &StateKey) -> Option<u32> {
        self.index.get(key).copied()
    }

    /// Connections removed on the way from the root to `node`.
    pub fn depth(&self, node: u32) -> usize {
        self.width - self.keys[node as usize].count_ones()
    }

    pub fn out_edges(&self, node: u32) -> &[Edge] {
        let (s, e) = (
            self.edge_start[node as usize] as usize,
            self.edge_start[node as usize + 1] as usize,
        );
        &self.edges[s..e]
    }

    pub(crate) fn edge_range(&self, node: u32) -> Range<usize> {
        self.edge_start[node as usize] as usize..self.edge_start[node as usize + 1] as usize
    }

    pub fn edge(&self, edge: u32) -> &Edge {
        &self.edges[edge as usize]
    }

    /// Node index ranges per level, root level first.
    pub fn levels(&self) -> impl DoubleEndedIterator<Item = Range<u32>> + '_ {
        self.level_start
            .windows(2)
            .map(|w| w[0]..w[1])
            .chain(std::iter::once(
                *self.level_start.last().unwrap()..self.keys.len() as u32,
            ))
            .filter(|r| !r.is_empty())
    }

    pub fn in_edges(&self, node: u32) -> &[InEdge] {
        let inc = self.in_edges.get_or_init(|| self.build_in_edges());
        let (s, e) = (
            inc.start[node as usize] as usize,
            inc.start[node as usize + 1] as usize,
        );
        &inc.edges[s..e]
    }

    fn build_in_edges(&self) -> InEdges {
        let n = self.keys.len();
        let mut count = vec![0u32; n + 1];
        for e in &self.edges {
            count[e.target as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let start = count.clone();
        let mut fill = count;
        let mut edges = vec![InEdge { source: 0, edge: 0 }; self.edges.len()];
        for node in 0..n as u32 {
            for ei in self.edge_range(node) {
                let t = self.edges[ei].target as usize;
                edges[fill[t] as usize] = InEdge {
                    source: node,
                    edge: ei as u32,
                };
                fill[t] += 1;
            }
        }
        InEdges { start, edges }
    }

    /// Rewrites every edge weight under a new reward without re-expanding.
    pub fn reweight<R: Reward>(&mut self, graph: &AssemblyGraph, reward: &R) {
        assert_eq!(graph.connection_count(), self.width);
        for node in 0..self.keys.len() as u32 {
            let state = self.keys[node as usize];
            for ei in self.edge_range(node) {
                let a = self.edges[ei].action as usize;
                self.edges[ei].weight = reward.reward(graph, &state, a);
            }
        }
    }

    /// Edge list, one `srcHex actionIdx dstHex weight` line per edge.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        for node in 0..self.keys.len() as u32 {
            let src = self.keys[node as usize].to_hex();
            for e in self.out_edges(node) {
                let dst = self.keys[e.target as usize].to_hex();
                let _ = writeln!(out, "{src} {} {dst} {:?}", e.action, e.weight);
            }
        }
        out
    }

    pub fn write_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_dump()).map_err(|e| Error::io(path, e))
    }

    /// Rebuilds a graph from its edge-list dump. `width` is the structure's
    /// connection count.
    pub fn from_dump(text: &str, width: usize) -> Result<Self> {
        let mut adjacency: FxHashMap<StateKey, Vec<(u16, StateKey, f64)>> = FxHashMap::default();
        let root = StateKey::full(width);
        adjacency.insert(root, Vec::new());
        let mut nodes: FxHashSet<StateKey> = FxHashSet::default();
        nodes.insert(root);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Parse {
                location: format!("graph dump line {}", lineno + 1),
                message: msg,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", fields.len())));
            }
            let src = StateKey::from_hex(width, fields[0]).map_err(|e| bad(e.to_string()))?;
            let action: usize = fields[1]
                .parse()
                .map_err(|_| bad(format!("bad action index {:?}", fields[1])))?;
            let dst = StateKey::from_hex(width, fields[2]).map_err(|e| bad(e.to_string()))?;
            let weight: f64 = fields[3]
                .parse()
                .map_err(|_| bad(format!("bad weight {:?}", fields[3])))?;
            if action >= width || !src.contains(action) || src.without(action) != dst {
                return Err(bad(format!(
                    "edge {src} -{action}-> {dst} is not a single removal"
                )));
            }
            nodes.insert(src);
            nodes.insert(dst);
            adjacency
                .entry(src)
                .or_default()
                .push((action as u16, dst, weight));
        }

        let mut by_level: Vec<Vec<StateKey>> = vec![Vec::new(); width + 1];
        for k in nodes {
            by_level[width - k.count_ones()].push(k);
        }
        let mut keys = Vec::new();
        let mut level_start = Vec::new();
        for mut level in by_level {
            if level.is_empty() {
                continue;
            }
            level.sort_unstable();
            level_start.push(keys.len() as u32);
            keys.extend(level);
        }
        let index: FxHashMap<StateKey, u32> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (*k, i as u32))
            .collect();
        let mut edge_start = Vec::with_capacity(keys.len() + 1);
        let mut edges = Vec::new();
        for k in &keys {
            edge_start.push(edges.len() as u32);
            if let Some(out) = adjacency.get_mut(k) {
                out.sort_by_key(|e| e.0);
                if out.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(Error::Parse {
                        location: "graph dump".into(),
                        message: format!("duplicate edge out of state {k}"),
                    });
                }
                edges.extend(out.iter().map(|&(action, dst, weight)| Edge {
                    action,
                    target: index[&dst],
                    weight,
                }));
            }
        }
        edge_start.push(edges.len() as u32);
        // The last entry of level_start marks where the final level begins;
        // levels() appends the tail itself.
        Ok(ConsolidatedGraph {
            width,
            keys,
            index,
            edge_start,
            edges,
            level_start,
            in_edges: OnceLock::new(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    pub connections: usize,
    pub consolidated_nodes: u128,
    pub consolidated_edges: u128,
    pub tree_nodes: u128,
}

/// Largest `E` accepted by [`growth_stats`].
pub const GROWTH_MAX: usize = 20;

/// Closed-form state counts for `E = 1..=max_connections`, assuming every
/// removal order is feasible.
pub fn growth_stats(max_connections: usize) -> Result<Vec<GrowthRow>> {
    if max_connections > GROWTH_MAX {
        return Err(Error::CapExceeded {
            what: "growth table size",
            value: max_connections,
            cap: GROWTH_MAX,
            hint: "",
        });
    }
    Ok((1..=max_connections)
        .map(|e| {
            let e128 = e as u128;
            let mut tree = 0u128;
            let mut falling = 1u128;
            for k in 0..=e128 {
                tree += falling;
                falling *= e128 - k;
            }
            GrowthRow {
                connections: e,
                consolidated_nodes: 1u128 << e,
                consolidated_edges: e128 << (e - 1),
                tree_nodes: tree,
            }
        })
        .collect())
}

pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut out = String::from("E,consolidated_nodes,consolidated_edges,tree_nodes\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.connections, r.consolidated_nodes, r.consolidated_edges, r.tree_nodes
        );
    }
    out
}
