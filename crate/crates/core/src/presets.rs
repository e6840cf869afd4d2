//! Built-in structures.
//!
//! The small presets have fixed topologies with unit attributes. The space
//! structures (`hubble`, `iss`, `jwst`) are seeded random connected graphs
//! with the published part and connection counts: their real topologies are
//! not available, so these are stand-ins of the right size.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::structure::{AssemblyGraph, Connection, ConstraintSet, Part, PartId, Precedence};

pub const PRESET_NAMES: [&str; 7] = ["4brick", "2x3", "lattice", "table", "hubble", "iss", "jwst"];

/// Builds a preset structure. Deterministic in `(name, seed)`; the fixed
/// presets ignore the seed.
pub fn generate_preset(name: &str, seed: u64) -> Result<AssemblyGraph> {
    match name {
        "4brick" => Ok(chain("4brick", 4)),
        "2x3" => Ok(grid("2x3", 2, 3)),
        "lattice" => Ok(grid("lattice", 3, 3)),
        "table" => Ok(table()),
        "hubble" => Ok(random_connected("hubble", 20, 19, seed)),
        "iss" => Ok(random_connected("iss", 32, 31, seed)),
        "jwst" => Ok(random_connected("jwst", 180, 256, seed)),
        other => Err(Error::InvalidArgument(format!(
            "unknown preset {other:?}; expected one of {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// 4brick with "(2,3) must be removed before (1,2)".
pub fn four_brick_with_precedence() -> AssemblyGraph {
    chain("4brick", 4)
        .with_constraints(ConstraintSet {
            precedence: vec![Precedence {
                before: 1,
                after: 0,
            }],
            upc: None,
        })
        .expect("4brick precedence is acyclic")
}

/// Four parts joined in a ring by four connections.
pub fn four_piece() -> AssemblyGraph {
    let parts = (1..=4)
        .map(|i| unit_part(i, [i as f64, 0.0, 0.0]))
        .collect();
    let connections = [(1, 2), (2, 3), (3, 4), (4, 1)]
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| unit_connection(i, a, b))
        .collect();
    AssemblyGraph::new("4piece", parts, connections, ConstraintSet::default())
        .expect("4piece is valid")
}

fn unit_part(id: u32, position: [f64; 3]) -> Part {
    Part {
        id: PartId(id),
        label: format!("p{id}"),
        mass: 1.0,
        position,
    }
}

fn unit_attrs() -> BTreeMap<String, f64> {
    [("time", 1.0), ("travel", 1.0), ("fuel_base", 1.0)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn unit_connection(index: usize, a: u32, b: u32) -> Connection {
    Connection {
        index,
        a: PartId(a),
        b: PartId(b),
        attrs: unit_attrs(),
    }
}

/// Parts `1..=n` in a path; connection `i` joins parts `i+1` and `i+2`.
fn chain(name: &str, n: u32) -> AssemblyGraph {
    let parts = (1..=n)
        .map(|i| unit_part(i, [i as f64, 0.0, 0.0]))
        .collect();
    let connections = (1..n)
        .map(|i| unit_connection(i as usize - 1, i, i + 1))
        .collect();
    AssemblyGraph::new(name, parts, connections, ConstraintSet::default()).expect("chain is valid")
}

/// `rows x cols` grid; horizontal connections first, then vertical.
fn grid(name: &str, rows: u32, cols: u32) -> AssemblyGraph {
    let id = |r: u32, c: u32| r * cols + c + 1;
    let mut parts = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            parts.push(unit_part(id(r, c), [c as f64, r as f64, 0.0]));
        }
    }
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols - 1 {
            pairs.push((id(r, c), id(r, c + 1)));
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols {
            pairs.push((id(r, c), id(r + 1, c)));
        }
    }
    let connections = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| unit_connection(i, a, b))
        .collect();
    AssemblyGraph::new(name, parts, connections, ConstraintSet::default()).expect("grid is valid")
}

/// Tabletop, four legs and a foot under each leg.
fn table() -> AssemblyGraph {
    let corners = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
    let mut parts = vec![Part {
        label: "top".into(),
        ..unit_part(1, [0.0, 0.0, 1.0])
    }];
    let mut connections = Vec::new();
    for (k, &(x, y)) in corners.iter().enumerate() {
        let leg = 2 + k as u32;
        let foot = 6 + k as u32;
        parts.push(Part {
            label: format!("leg{}", k + 1),
            ..unit_part(leg, [x, y, 0.5])
        });
        parts.push(Part {
            label: format!("foot{}", k + 1),
            ..unit_part(foot, [x, y, 0.0])
        });
        connections.push(unit_connection(k, 1, leg));
        connections.push(unit_connection(4 + k, leg, foot));
    }
    parts.sort_by_key(|p| p.id);
    AssemblyGraph::new("table", parts, connections, ConstraintSet::default())
        .expect("table is valid")
}

fn round(x: f64, places: i32) -> f64 {
    let scale = 10f64.powi(places);
    (x * scale).round() / scale
}

/// Seeded random connected graph with `parts` parts and `connections`
/// connections: a random recursive tree plus distinct extra edges.
///
/// Attributes are drawn per connection (time in [0.5, 2], fuel_base in
/// [0.5, 1.5], travel = endpoint distance) and per part (mass in [0.5, 2],
/// position in [-5, 5]^3).
///
/// # Panics
/// If `connections < parts - 1` or exceeds the number of distinct pairs.
pub fn random_connected(name: &str, parts: usize, connections: usize, seed: u64) -> AssemblyGraph {
    assert!(parts >= 1);
    assert!(
        connections + 1 >= parts && connections <= parts * (parts - 1) / 2,
        "cannot build a simple connected graph with {parts} parts and {connections} connections"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let part_list: Vec<Part> = (1..=parts as u32)
        .map(|id| Part {
            id: PartId(id),
            label: format!("p{id}"),
            mass: round(rng.gen_range(0.5..2.0), 3),
            position: [
                round(rng.gen_range(-5.0..5.0), 2),
                round(rng.gen_range(-5.0..5.0), 2),
                round(rng.gen_range(-5.0..5.0), 2),
            ],
        })
        .collect();

    let mut order: Vec<u32> = (1..=parts as u32).collect();
    order.shuffle(&mut rng);
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(connections);
    let mut used: FxHashSet<(u32, u32)> = FxHashSet::default();
    let key = |a: u32, b: u32| (a.min(b), a.max(b));
    for i in 1..parts {
        let j = rng.gen_range(0..i);
        let (a, b) = (order[j], order[i]);
        used.insert(key(a, b));
        pairs.push((a, b));
    }
    while pairs.len() < connections {
        let a = rng.gen_range(1..=parts as u32);
        let b = rng.gen_range(1..=parts as u32);
        if a != b && used.insert(key(a, b)) {
            pairs.push((a, b));
        }
    }
    pairs.shuffle(&mut rng);

    let conn_list = pairs
        .into_iter()
        .enumerate()
        .map(|(index, (a, b))| {
            let pa = part_list[a as usize - 1].position;
            let pb = part_list[b as usize - 1].position;
            let dist = pa
                .iter()
                .zip(pb.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            let attrs = [
                ("time", round(rng.gen_range(0.5..2.0), 3)),
                ("travel", round(dist, 3)),
                ("fuel_base", round(rng.gen_range(0.5..1.5), 3)),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
            Connection {
                index,
                a: PartId(a),
                b: PartId(b),
                attrs,
            }
        })
        .collect();
    AssemblyGraph::new(name, part_list, conn_list, ConstraintSet::default())
        .expect("random connected graph is valid")
}
