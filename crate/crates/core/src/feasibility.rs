//! State transitions and constraint checks on an [`AssemblyGraph`].

use std::collections::BTreeSet;

use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::state_key::StateKey;
use crate::structure::{AssemblyGraph, PartId};

/// Small union-find over dense part positions.
pub(crate) struct Dsu {
    parent: SmallVec<[u32; 64]>,
    size: SmallVec<[u32; 64]>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n as u32).collect(),
            size: smallvec::smallvec![1; n],
        }
    }

    #[inline]
    pub(crate) fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    #[inline]
    pub(crate) fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    #[inline]
    fn size_of_root(&self, root: u32) -> u32 {
        self.size[root as usize]
    }
}

/// Part ids grouped into maximal connected sets under the present connections.
///
/// Singleton parts are their own components. Components are ordered by their
/// smallest dense part position.
pub fn connected_components(graph: &AssemblyGraph, state: &StateKey) -> Vec<BTreeSet<PartId>> {
    debug_assert_eq!(state.width(), graph.connection_count());
    graph
        .components_dense(state)
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|i| graph.parts()[i as usize].id)
                .collect()
        })
        .collect()
}

/// One side of a split produced by removing a connection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Side {
    pub parts: usize,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemovalEffect {
    /// `[smaller, larger]` by part count (ties: lighter first) when the
    /// removal disconnects its endpoints.
    pub split: Option<[Side; 2]>,
    /// Components with at least two parts after the removal.
    pub subassemblies_after: usize,
}

/// Structural consequence of removing connection `action` from `state`.
pub fn removal_effect(graph: &AssemblyGraph, state: &StateKey, action: usize) -> RemovalEffect {
    let n = graph.part_count();
    let mut dsu = Dsu::new(n);
    for j in state.ones() {
        if j != action {
            let (a, b) = graph.endpoints(j);
            dsu.union(a as u32, b as u32);
        }
    }
    let mut subassemblies_after = 0;
    for i in 0..n as u32 {
        if dsu.find(i) == i && dsu.size_of_root(i) >= 2 {
            subassemblies_after += 1;
        }
    }
    let (a, b) = graph.endpoints(action);
    let (ra, rb) = (dsu.find(a as u32), dsu.find(b as u32));
    let split = if ra == rb {
        None
    } else {
        let mut sides = [
            Side {
                parts: 0,
                mass: 0.0,
            },
            Side {
                parts: 0,
                mass: 0.0,
            },
        ];
        for (i, part) in graph.parts().iter().enumerate() {
            let r = dsu.find(i as u32);
            let slot = if r == ra {
                0
            } else if r == rb {
                1
            } else {
                continue;
            };
            sides[slot].parts += 1;
            sides[slot].mass += part.mass;
        }
        let swap = (sides[1].parts, sides[1].mass) < (sides[0].parts, sides[0].mass);
        if swap {
            sides.swap(0, 1);
        }
        Some(sides)
    };
    RemovalEffect {
        split,
        subassemblies_after,
    }
}

/// Why a removal is not allowed in a given state.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Infeasibility {
    OutOfRange { width: usize },
    NotPresent,
    Precedence { blocking: usize },
    UpcCount { subassemblies: usize, max: usize },
    UpcSize { size: usize, max: usize },
}

/// Checks whether connection `action` may be removed from `state`.
pub fn check_action(
    graph: &AssemblyGraph,
    state: &StateKey,
    action: usize,
) -> std::result::Result<(), Infeasibility> {
    if action >= graph.connection_count() {
        return Err(Infeasibility::OutOfRange {
            width: graph.connection_count(),
        });
    }
    if !state.contains(action) {
        return Err(Infeasibility::NotPresent);
    }
    let prereq = graph.prerequisites(action);
    if prereq.intersects(state) {
        let blocking = prereq.ones().find(|&b| state.contains(b)).unwrap();
        return Err(Infeasibility::Precedence { blocking });
    }
    if let Some(upc) = graph.constraints().upc {
        let effect = removal_effect(graph, state, action);
        if effect.subassemblies_after > upc.max_subassemblies {
            return Err(Infeasibility::UpcCount {
                subassemblies: effect.subassemblies_after,
                max: upc.max_subassemblies,
            });
        }
        if let Some([smaller, _]) = effect.split {
            // With equal halves the "smaller" side is as large as the other,
            // so this bounds both.
            if smaller.parts > upc.max_new_size {
                return Err(Infeasibility::UpcSize {
                    size: smaller.parts,
                    max: upc.max_new_size,
                });
            }
        }
    }
    Ok(())
}

/// Connections removable from `state`, ascending.
pub fn feasible_actions(graph: &AssemblyGraph, state: &StateKey) -> Vec<usize> {
    debug_assert_eq!(state.width(), graph.connection_count());
    state
        .ones()
        .filter(|&a| check_action(graph, state, a).is_ok())
        .collect()
}

/// Removes connection `action`; the input key is untouched.
pub fn apply_action(state: &StateKey, action: usize) -> Result<StateKey> {
    if !state.contains(action) {
        return Err(Error::ActionNotPresent {
            state: state.to_hex(),
            action,
        });
    }
    Ok(state.without(action))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum ViolationReason {
    OutOfRange,
    Repeat,
    Precedence { blocking: usize },
    UpcCount { subassemblies: usize, max: usize },
    UpcSize { size: usize, max: usize },
    MissingEdges { remaining: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub step: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<usize>,
    #[serde(flatten)]
    pub reason: ViolationReason,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

/// Checks that `sequence` is a complete, feasible disassembly order.
///
/// Reports the first violating step; an invalid sequence is not an error.
pub fn validate_sequence(graph: &AssemblyGraph, sequence: &[usize]) -> ValidationReport {
    let mut state = graph.full_state();
    let mut seen = StateKey::empty(graph.connection_count());
    let fail = |step, action, reason| ValidationReport {
        valid: false,
        violation: Some(Violation {
            step,
            action,
            reason,
        }),
    };
    for (step, &a) in sequence.iter().enumerate() {
        if a >= graph.connection_count() {
            return fail(step, Some(a), ViolationReason::OutOfRange);
        }
        if seen.contains(a) {
            return fail(step, Some(a), ViolationReason::Repeat);
        }
        seen.set(a);
        if let Err(why) = check_action(graph, &state, a) {
            let reason = match why {
                Infeasibility::Precedence { blocking } => ViolationReason::Precedence { blocking },
                Infeasibility::UpcCount { subassemblies, max } => {
                    ViolationReason::UpcCount { subassemblies, max }
                }
                Infeasibility::UpcSize { size, max } => ViolationReason::UpcSize { size, max },
                Infeasibility::OutOfRange { .. } => ViolationReason::OutOfRange,
                Infeasibility::NotPresent => ViolationReason::Repeat,
            };
            return fail(step, Some(a), reason);
        }
        state.clear(a);
    }
    if !state.is_empty() {
        return fail(
            sequence.len(),
            None,
            ViolationReason::MissingEdges {
                remaining: state.ones().collect(),
            },
        );
    }
    ValidationReport {
        valid: true,
        violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{self, generate_preset};
    use crate::structure::{ConstraintSet, Precedence, Upc};
    use proptest::prelude::*;

    fn ids(ids: &[u32]) -> BTreeSet<PartId> {
        ids.iter().map(|&i| PartId(i)).collect()
    }

    fn brick_fig8() -> AssemblyGraph {
        presets::four_brick_with_precedence()
    }

    #[test]
    fn components_of_four_brick() {
        let g = generate_preset("4brick", 0).unwrap();
        assert_eq!(
            connected_components(&g, &g.full_state()),
            vec![ids(&[1, 2, 3, 4])]
        );
        let mid_removed = StateKey::from_indices(3, [0, 2]);
        assert_eq!(
            connected_components(&g, &mid_removed),
            vec![ids(&[1, 2]), ids(&[3, 4])]
        );
        assert_eq!(
            connected_components(&g, &g.empty_state()),
            vec![ids(&[1]), ids(&[2]), ids(&[3]), ids(&[4])]
        );
    }

    #[test]
    fn precedence_masks_after_connection() {
        let g = brick_fig8();
        assert_eq!(feasible_actions(&g, &g.full_state()), vec![1, 2]);
        let plain = generate_preset("4brick", 0).unwrap();
        assert_eq!(feasible_actions(&plain, &plain.full_state()), vec![0, 1, 2]);
    }

    #[test]
    fn lattice_upc_matches_single_removal_enumeration() {
        let base = generate_preset("lattice", 0).unwrap();
        let g = base
            .with_constraints(ConstraintSet {
                precedence: vec![],
                upc: Some(Upc {
                    max_subassemblies: 2,
                    max_new_size: 1,
                }),
            })
            .unwrap();
        let full = g.full_state();
        // Brute force: remove each edge and inspect the component partition.
        let mut expected = Vec::new();
        for a in 0..12 {
            let before = connected_components(&g, &full);
            let after = connected_components(&g, &full.without(a));
            let multi = after.iter().filter(|c| c.len() >= 2).count();
            let new_piece_ok = if after.len() > before.len() {
                after.iter().map(|c| c.len()).min().unwrap() <= 1
            } else {
                true
            };
            if multi <= 2 && new_piece_ok {
                expected.push(a);
            }
        }
        // A 3x3 grid has no bridges, so every single removal keeps it whole.
        assert_eq!(expected, (0..12).collect::<Vec<_>>());
        assert_eq!(feasible_actions(&g, &full), expected);

        // Once the corner part 1 hangs by a single edge, only removals that
        // isolate at most one part remain feasible.
        let corner_edges: Vec<usize> = (0..12)
            .filter(|&j| {
                let (a, b) = g.endpoints(j);
                a == 0 || b == 0
            })
            .collect();
        let state = full.without(corner_edges[0]);
        let feas = feasible_actions(&g, &state);
        assert!(feas.contains(&corner_edges[1]));
    }

    #[test]
    fn upc_size_blocks_large_split() {
        let g = generate_preset("4brick", 0)
            .unwrap()
            .with_constraints(ConstraintSet {
                precedence: vec![],
                upc: Some(Upc {
                    max_subassemblies: 4,
                    max_new_size: 1,
                }),
            })
            .unwrap();
        // e1 splits 2|2: both halves exceed size 1.
        assert_eq!(
            check_action(&g, &g.full_state(), 1),
            Err(Infeasibility::UpcSize { size: 2, max: 1 })
        );
        assert_eq!(feasible_actions(&g, &g.full_state()), vec![0, 2]);
    }

    #[test]
    fn upc_count_counts_multi_part_components() {
        let g = generate_preset("4brick", 0)
            .unwrap()
            .with_constraints(ConstraintSet {
                precedence: vec![],
                upc: Some(Upc {
                    max_subassemblies: 1,
                    max_new_size: 4,
                }),
            })
            .unwrap();
        // e1 leaves {1,2} and {3,4}: two subassemblies.
        assert_eq!(
            check_action(&g, &g.full_state(), 1),
            Err(Infeasibility::UpcCount {
                subassemblies: 2,
                max: 1
            })
        );
        // e0 leaves a loose part and one subassembly.
        assert_eq!(check_action(&g, &g.full_state(), 0), Ok(()));
        // Loose parts never count, so full disassembly stays possible.
        assert!(validate_sequence(&g, &[0, 1, 2]).valid);
        assert_eq!(
            removal_effect(&g, &StateKey::from_indices(3, [2]), 2).subassemblies_after,
            0
        );
    }

    #[test]
    fn apply_action_cases() {
        let full = StateKey::full(3);
        assert_eq!(
            apply_action(&full, 1).unwrap(),
            StateKey::from_indices(3, [0, 2])
        );
        assert_eq!(full, StateKey::full(3));
        let only0 = StateKey::from_indices(3, [0]);
        assert!(apply_action(&only0, 0).unwrap().is_empty());
        assert!(matches!(
            apply_action(&only0, 2),
            Err(Error::ActionNotPresent { action: 2, .. })
        ));
    }

    #[test]
    fn validate_sequence_cases() {
        let g = brick_fig8();
        assert!(validate_sequence(&g, &[2, 1, 0]).valid);
        let bad = validate_sequence(&g, &[0, 1, 2]);
        assert_eq!(
            bad.violation,
            Some(Violation {
                step: 0,
                action: Some(0),
                reason: ViolationReason::Precedence { blocking: 1 }
            })
        );
        let plain = generate_preset("4brick", 0).unwrap();
        let rep = validate_sequence(&plain, &[0, 0, 1]);
        assert_eq!(rep.violation.unwrap().reason, ViolationReason::Repeat);
        let short = validate_sequence(&plain, &[0, 1]);
        assert_eq!(
            short.violation.unwrap().reason,
            ViolationReason::MissingEdges { remaining: vec![2] }
        );
        let oob = validate_sequence(&plain, &[7]);
        assert_eq!(oob.violation.unwrap().reason, ViolationReason::OutOfRange);
    }

    fn small_graph_strategy() -> impl Strategy<Value = AssemblyGraph> {
        (3usize..=7, 0usize..=4, any::<u64>()).prop_map(|(n, extra, seed)| {
            presets::random_connected("prop", n, (n - 1 + extra).min(n * (n - 1) / 2), seed)
        })
    }

    fn all_states(width: usize) -> impl Iterator<Item = StateKey> {
        (0u64..(1 << width)).map(move |m| {
            StateKey::from_indices(width, (0..width).filter(move |j| m & (1 << j) != 0))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn feasible_subset_and_component_sizes(g in small_graph_strategy()) {
            let e = g.connection_count();
            for s in all_states(e) {
                let feas = feasible_actions(&g, &s);
                prop_assert!(feas.iter().all(|&a| s.contains(a)));
                let total: usize = connected_components(&g, &s).iter().map(|c| c.len()).sum();
                prop_assert_eq!(total, g.part_count());
                for a in feas {
                    prop_assert_eq!(apply_action(&s, a).unwrap().count_ones(), s.count_ones() - 1);
                }
            }
        }

        #[test]
        fn constraints_never_enlarge_feasible_sets(
            g in small_graph_strategy(),
            seed in any::<u64>(),
            m_num in 1usize..4,
            m_size in 1usize..4,
        ) {
            let e = g.connection_count();
            let mut x = seed | 1;
            let mut next = || { x ^= x << 13; x ^= x >> 7; x ^= x << 17; x };
            let mut precedence = Vec::new();
            for _ in 0..3 {
                let (p, q) = ((next() % e as u64) as usize, (next() % e as u64) as usize);
                if p < q { precedence.push(Precedence { before: p, after: q }); }
            }
            let constrained = g.with_constraints(ConstraintSet {
                precedence,
                upc: Some(Upc { max_subassemblies: m_num, max_new_size: m_size }),
            }).unwrap();
            for s in all_states(e) {
                let loose: BTreeSet<usize> = feasible_actions(&g, &s).into_iter().collect();
                let tight: BTreeSet<usize> = feasible_actions(&constrained, &s).into_iter().collect();
                prop_assert!(tight.is_subset(&loose));
            }
        }

        #[test]
        fn accepted_sequences_visit_distinct_states(g in small_graph_strategy(), seed in any::<u64>()) {
            let e = g.connection_count();
            let mut order: Vec<usize> = (0..e).collect();
            let mut x = seed | 1;
            for i in (1..e).rev() {
                x ^= x << 13; x ^= x >> 7; x ^= x << 17;
                order.swap(i, (x % (i as u64 + 1)) as usize);
            }
            prop_assert!(validate_sequence(&g, &order).valid);
            let mut seen = BTreeSet::new();
            let mut s = g.full_state();
            seen.insert(s);
            for &a in &order {
                s = apply_action(&s, a).unwrap();
                seen.insert(s);
            }
            prop_assert_eq!(seen.len(), e + 1);
            prop_assert!(s.is_empty());
        }
    }
}
