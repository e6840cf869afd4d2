use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::feasibility::check_action;
use crate::planners::oracle::ORACLE_CAP;
use crate::reward::Reward;
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

/// Builds up from the empty state, attaching connections in `order`.
///
/// Attaching `a` to `t` is allowed when removing `a` from `t ∪ {a}` would be,
/// and costs the mirrored reward `R(t ∪ {a}, a)`. Returns the final state and
/// the total.
pub fn simulate_assembly<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
    order: &[usize],
) -> Result<(StateKey, f64)> {
    let mut state = graph.empty_state();
    let mut total = 0.0;
    for (i, &a) in order.iter().enumerate() {
        if a >= graph.connection_count() || state.contains(a) {
            return Err(Error::InvalidTrajectory(format!(
                "step {i}: connection {a} cannot be attached to {state}"
            )));
        }
        let next = state.with(a);
        check_action(graph, &next, a).map_err(|why| {
            Error::InvalidTrajectory(format!("step {i}: attaching {a} is infeasible: {why:?}"))
        })?;
        total += reward.reward(graph, &next, a);
        state = next;
    }
    Ok((state, total))
}

/// Best assembly order found by dynamic programming forward from the empty
/// state, without reference to the disassembly graph.
///
/// Returns the order and its total under the mirrored reward.
pub fn forward_optimal<R: Reward>(graph: &AssemblyGraph, reward: &R) -> Result<(Vec<usize>, f64)> {
    let e = graph.connection_count();
    if e > ORACLE_CAP {
        return Err(Error::CapExceeded {
            what: "connections",
            value: e,
            cap: ORACLE_CAP,
            hint: "; forward search enumerates every subset",
        });
    }
    // state -> (best total from empty, last connection attached)
    let mut best: FxHashMap<StateKey, (f64, usize)> = FxHashMap::default();
    let empty = graph.empty_state();
    best.insert(empty, (0.0, usize::MAX));
    let mut frontier = vec![empty];
    for _ in 0..e {
        let mut next_frontier = Vec::new();
        for t in &frontier {
            let g = best[t].0;
            for a in 0..e {
                if t.contains(a) {
                    continue;
                }
                let next = t.with(a);
                if check_action(graph, &next, a).is_err() {
                    continue;
                }
                let cand = g + reward.reward(graph, &next, a);
                match best.get_mut(&next) {
                    Some(slot) => {
                        if cand > slot.0 || (cand == slot.0 && a < slot.1) {
                            *slot = (cand, a);
                        }
                    }
                    None => {
                        best.insert(next, (cand, a));
                        next_frontier.push(next);
                    }
                }
            }
        }
        frontier = next_frontier;
    }
    let full = graph.full_state();
    let Some(&(total, _)) = best.get(&full) else {
        return Err(Error::Infeasible(
            "the full structure cannot be assembled".into(),
        ));
    };
    let mut order = Vec::with_capacity(e);
    let mut state = full;
    while !state.is_empty() {
        let a = best[&state].1;
        order.push(a);
        state.clear(a);
    }
    order.reverse();
    Ok((order, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planners::{brute_force_oracle, reverse_to_assembly};
    use crate::presets::{four_brick_with_precedence, generate_preset};
    use crate::reward::RewardModel;

    #[test]
    fn reversed_disassembly_rebuilds_the_structure() {
        let g = generate_preset("table", 0).unwrap();
        let reward = RewardModel::cubesat_fuel();
        let t = brute_force_oracle(&g, &reward).unwrap();
        let (state, total) = simulate_assembly(&g, &reward, &reverse_to_assembly(&t)).unwrap();
        assert!(state.is_full());
        assert!((total - t.total()).abs() <= 1e-9);
    }

    #[test]
    fn forward_optimum_equals_backward_optimum() {
        for name in ["4brick", "2x3", "lattice"] {
            let g = generate_preset(name, 0).unwrap();
            let reward = RewardModel::cubesat_fuel();
            let (order, total) = forward_optimal(&g, &reward).unwrap();
            let back = brute_force_oracle(&g, &reward).unwrap();
            assert!((total - back.total()).abs() <= 1e-9, "{name}");
            let (state, replay) = simulate_assembly(&g, &reward, &order).unwrap();
            assert!(state.is_full());
            assert!((replay - total).abs() <= 1e-9);
        }
    }

    #[test]
    fn forward_respects_precedence() {
        // Disassembly removes 1 before 0, so assembly attaches 0 before 1.
        let g = four_brick_with_precedence();
        assert!(simulate_assembly(&g, &RewardModel::completion(), &[2, 1, 0]).is_err());
        let (state, total) = simulate_assembly(&g, &RewardModel::completion(), &[2, 0, 1]).unwrap();
        assert!(state.is_full());
        assert_eq!(total, -3.0);
    }

    #[test]
    fn bad_orders_are_rejected() {
        let g = generate_preset("4brick", 0).unwrap();
        let r = RewardModel::completion();
        assert!(simulate_assembly(&g, &r, &[0, 0]).is_err());
        assert!(simulate_assembly(&g, &r, &[5]).is_err());
        let (state, _) = simulate_assembly(&g, &r, &[0, 1]).unwrap();
        assert!(!state.is_full());
    }
}
