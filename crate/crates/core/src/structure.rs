//! Assembly graphs: parts, indexed connections and sequencing constraints.
//!
//! An [`AssemblyGraph`] is always validated. The serde representation is the
//! structure JSON document; deserializing runs the same checks as
//! [`AssemblyGraph::new`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state_key::{StateKey, MAX_WIDTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartId(pub u32);

impl fmt::Display for PartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub id: PartId,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub mass: f64,
    #[serde(default)]
    pub position: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub index: usize,
    pub a: PartId,
    pub b: PartId,
    #[serde(default)]
    pub attrs: BTreeMap<String, f64>,
}

impl Connection {
    pub fn attr(&self, name: &str) -> Option<f64> {
        self.attrs.get(name).copied()
    }
}

/// Connection `before` must be removed before connection `after` can be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precedence {
    pub before: usize,
    pub after: usize,
}

/// Unconnected-parts constraint.
///
/// `max_subassemblies` bounds the number of multi-part components that may
/// coexist; `max_new_size` bounds the part count of the piece split off by a
/// removal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Upc {
    pub max_subassemblies: usize,
    pub max_new_size: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub precedence: Vec<Precedence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upc: Option<Upc>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.precedence.is_empty() && self.upc.is_none()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct StructureDoc {
    name: String,
    parts: Vec<Part>,
    #[serde(default)]
    connections: Vec<Connection>,
    #[serde(default, skip_serializing_if = "ConstraintSet::is_empty")]
    constraints: ConstraintSet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "StructureDoc", into = "StructureDoc")]
pub struct AssemblyGraph {
    name: String,
    parts: Vec<Part>,
    connections: Vec<Connection>,
    constraints: ConstraintSet,
    /// Dense part positions of each connection's endpoints.
    ends: Vec<(u32, u32)>,
    /// Per connection, the set of connections that must be gone first.
    prerequisites: Vec<StateKey>,
}

impl AssemblyGraph {
    pub fn new(
        name: impl Into<String>,
        parts: Vec<Part>,
        mut connections: Vec<Connection>,
        constraints: ConstraintSet,
    ) -> Result<Self> {
        let invalid = |msg: String| Error::InvalidStructure(msg);

        if parts.is_empty() {
            return Err(invalid("parts: structure has no parts".into()));
        }
        let mut dense: FxHashMap<PartId, u32> = FxHashMap::default();
        for (i, p) in parts.iter().enumerate() {
            if dense.insert(p.id, i as u32).is_some() {
                return Err(invalid(format!("parts[{i}]: duplicate part id {}", p.id)));
            }
            if !(p.mass.is_finite() && p.mass >= 0.0) {
                return Err(invalid(format!(
                    "parts[{i}]: mass {} must be finite and non-negative",
                    p.mass
                )));
            }
            if p.position.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("parts[{i}]: position must be finite")));
            }
        }

        let e = connections.len();
        if e > MAX_WIDTH {
            return Err(Error::CapExceeded {
                what: "connection count",
                value: e,
                cap: MAX_WIDTH,
                hint: "",
            });
        }
        connections.sort_by_key(|c| c.index);
        let mut ends = Vec::with_capacity(e);
        for (pos, c) in connections.iter().enumerate() {
            if c.index != pos {
                return Err(invalid(format!(
                    "connections: indices must be exactly 0..{e} without gaps or repeats (found index {} at sorted position {pos})",
                    c.index
                )));
            }
            let end = |id: PartId| {
                dense.get(&id).copied().ok_or_else(|| {
                    invalid(format!(
                        "connections[{}]: endpoint {id} does not reference a part",
                        c.index
                    ))
                })
            };
            let (a, b) = (end(c.a)?, end(c.b)?);
            if a == b {
                return Err(invalid(format!(
                    "connections[{}]: self-loop on part {}",
                    c.index, c.a
                )));
            }
            for (name, v) in &c.attrs {
                if !(v.is_finite() && *v >= 0.0) {
                    return Err(invalid(format!(
                        "connections[{}].attrs.{name}: {v} must be finite and non-negative",
                        c.index
                    )));
                }
            }
            ends.push((a, b));
        }

        let mut prerequisites = vec![StateKey::empty(e); e];
        for (i, p) in constraints.precedence.iter().enumerate() {
            for idx in [p.before, p.after] {
                if idx >= e {
                    return Err(invalid(format!(
                        "constraints.precedence[{i}]: connection {idx} does not exist"
                    )));
                }
            }
            prerequisites[p.after].set(p.before);
        }
        if let Some(cycle) = precedence_cycle(&prerequisites) {
            let path: Vec<String> = cycle.iter().map(|c| c.to_string()).collect();
            return Err(invalid(format!(
                "constraints.precedence: cyclic precedence among connections {}",
                path.join(" -> ")
            )));
        }
        if let Some(upc) = constraints.upc {
            if upc.max_subassemblies < 1 || upc.max_new_size < 1 {
                return Err(invalid(
                    "constraints.upc: max_subassemblies and max_new_size must be >= 1".into(),
                ));
            }
        }

        let graph = AssemblyGraph {
            name: name.into(),
            parts,
            connections,
            constraints,
            ends,
            prerequisites,
        };
        let comps = graph.components_dense(&StateKey::full(e));
        if comps.len() > 1 {
            let stray: BTreeSet<PartId> = comps[1..]
                .iter()
                .flatten()
                .map(|&i| graph.parts[i as usize].id)
                .collect();
            return Err(invalid(format!(
                "connections: fully assembled structure is disconnected; parts {stray:?} are not connected to part {}",
                graph.parts[comps[0][0] as usize].id
            )));
        }
        Ok(graph)
    }

    pub fn from_json_str(text: &str, location: &str) -> Result<Self> {
        let doc: StructureDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("{location}:{}:{}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        AssemblyGraph::try_from(doc)
    }

    /// Reads and validates a structure JSON file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("structure serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_pretty() + "\n").map_err(|e| Error::io(path, e))
    }

    /// Same parts and connections with a different constraint set.
    pub fn with_constraints(&self, constraints: ConstraintSet) -> Result<Self> {
        AssemblyGraph::new(
            self.name.clone(),
            self.parts.clone(),
            self.connections.clone(),
            constraints,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    /// Number of connections, the width of every state key.
    pub fn connection_count(&self) -> usize {
        self.connections.len()
    }

    pub fn full_state(&self) -> StateKey {
        StateKey::full(self.connection_count())
    }

    pub fn empty_state(&self) -> StateKey {
        StateKey::empty(self.connection_count())
    }

    /// Dense endpoint positions (into [`AssemblyGraph::parts`]) of a connection.
    #[inline]
    pub fn endpoints(&self, connection: usize) -> (usize, usize) {
        let (a, b) = self.ends[connection];
        (a as usize, b as usize)
    }

    /// Connections that must already be removed before `connection` is removable.
    #[inline]
    pub fn prerequisites(&self, connection: usize) -> &StateKey {
        &self.prerequisites[connection]
    }

    /// Components as lists of dense part positions, ordered by smallest member.
    pub(crate) fn components_dense(&self, state: &StateKey) -> Vec<Vec<u32>> {
        let mut dsu = crate::feasibility::Dsu::new(self.parts.len());
        for j in state.ones() {
            let (a, b) = self.ends[j];
            dsu.union(a, b);
        }
        let mut by_root: FxHashMap<u32, usize> = FxHashMap::default();
        let mut out: Vec<Vec<u32>> = Vec::new();
        for i in 0..self.parts.len() as u32 {
            let root = dsu.find(i);
            let slot = *by_root.entry(root).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[slot].push(i);
        }
        out
    }
}

impl TryFrom<StructureDoc> for AssemblyGraph {
    type Error = Error;

    fn try_from(doc: StructureDoc) -> Result<Self> {
        AssemblyGraph::new(doc.name, doc.parts, doc.connections, doc.constraints)
    }
}

impl From<AssemblyGraph> for StructureDoc {
    fn from(g: AssemblyGraph) -> Self {
        StructureDoc {
            name: g.name,
            parts: g.parts,
            connections: g.connections,
            constraints: g.constraints,
        }
    }
}

impl PartialEq for AssemblyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.parts == other.parts
            && self.connections == other.connections
            && self.constraints == other.constraints
    }
}

/// Returns one cycle of the "must precede" relation, if any exists.
fn precedence_cycle(prerequisites: &[StateKey]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        node: usize,
        prerequisites: &[StateKey],
        marks: &mut [Mark],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        marks[node] = Mark::Active;
        stack.push(node);
        for before in prerequisites[node].ones() {
            match marks[before] {
                Mark::Active => {
                    let start = stack.iter().position(|&n| n == before).unwrap();
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(before);
                    cycle.reverse();
                    return Some(cycle);
                }
                Mark::New => {
                    if let Some(c) = visit(before, prerequisites, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks[node] = Mark::Done;
        None
    }

    let mut marks = vec![Mark::New; prerequisites.len()];
    let mut stack = Vec::new();
    (0..prerequisites.len()).find_map(|n| {
        if marks[n] == Mark::New {
            visit(n, prerequisites, &mut marks, &mut stack)
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn doc(connections: &str, constraints: &str) -> String {
        format!(
            r#"{{"name":"t","parts":[{{"id":1,"label":"a","mass":1,"position":[0,0,0]}},
                {{"id":2,"label":"b","mass":1,"position":[1,0,0]}},
                {{"id":3,"label":"c","mass":1,"position":[2,0,0]}}],
              "connections":{connections},
              "constraints":{constraints}}}"#
        )
    }

    const CHAIN: &str = r#"[{"index":0,"a":1,"b":2,"attrs":{"time":1}},{"index":1,"a":2,"b":3,"attrs":{"time":2}}]"#;

    #[test]
    fn loads_valid_document() {
        let g = AssemblyGraph::from_json_str(&doc(CHAIN, "{}"), "mem").unwrap();
        assert_eq!(g.connection_count(), 2);
        assert_eq!(g.part_count(), 3);
        assert_eq!(g.connections()[1].attr("time"), Some(2.0));
    }

    #[test]
    fn rejects_cyclic_precedence() {
        let err = AssemblyGraph::from_json_str(
            &doc(
                CHAIN,
                r#"{"precedence":[{"before":0,"after":1},{"before":1,"after":0}]}"#,
            ),
            "mem",
        )
        .unwrap_err();
        assert!(err.to_string().contains("cyclic precedence"), "{err}");
    }

    #[test]
    fn rejects_self_precedence() {
        let err = AssemblyGraph::from_json_str(
            &doc(CHAIN, r#"{"precedence":[{"before":1,"after":1}]}"#),
            "mem",
        )
        .unwrap_err();
        assert!(err.to_string().contains("cyclic precedence"), "{err}");
    }

    #[test]
    fn rejects_dangling_endpoint() {
        let err = AssemblyGraph::from_json_str(
            &doc(r#"[{"index":0,"a":1,"b":9},{"index":1,"a":2,"b":3}]"#, "{}"),
            "mem",
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("connections[0]: endpoint 9"),
            "{err}"
        );
    }

    #[test]
    fn rejects_disconnected_assembly() {
        let err = AssemblyGraph::from_json_str(&doc(r#"[{"index":0,"a":1,"b":2}]"#, "{}"), "mem")
            .unwrap_err();
        assert!(err.to_string().contains("disconnected"), "{err}");
    }

    #[test]
    fn rejects_index_gap_and_duplicates() {
        let err = AssemblyGraph::from_json_str(
            &doc(r#"[{"index":0,"a":1,"b":2},{"index":2,"a":2,"b":3}]"#, "{}"),
            "mem",
        )
        .unwrap_err();
        assert!(err.to_string().contains("without gaps"), "{err}");

        let text = r#"{"name":"t","parts":[{"id":1},{"id":1}],"connections":[]}"#;
        let err = AssemblyGraph::from_json_str(text, "mem").unwrap_err();
        assert!(err.to_string().contains("duplicate part id 1"), "{err}");
    }

    #[test]
    fn parse_error_carries_location() {
        let err = AssemblyGraph::from_json_str("{\"name\": ", "file.json").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.starts_with("file.json:1:")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parallel_connections_are_allowed() {
        let g = AssemblyGraph::from_json_str(
            &doc(
                r#"[{"index":0,"a":1,"b":2},{"index":1,"a":2,"b":1},{"index":2,"a":2,"b":3}]"#,
                "{}",
            ),
            "mem",
        )
        .unwrap();
        assert_eq!(g.connection_count(), 3);
    }

    #[test]
    fn json_roundtrip_preserves_graph() {
        let g = presets::generate_preset("hubble", 3).unwrap();
        let back = AssemblyGraph::from_json_str(&g.to_json_pretty(), "mem").unwrap();
        assert_eq!(g, back);
    }
}
