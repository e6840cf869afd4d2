use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::feasibility::feasible_actions;
use crate::planners::{Step, Trajectory};
use crate::reward::Reward;
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

pub const ORACLE_CAP: usize = 20;

/// Exhaustive optimum over every complete disassembly sequence.
///
/// Memoizes the best value-to-go per state; ties go to the lowest connection
/// index.
pub fn brute_force_oracle<R: Reward>(graph: &AssemblyGraph, reward: &R) -> Result<Trajectory> {
    brute_force_oracle_blocked(graph, reward, &FxHashSet::default())
}

/// [`brute_force_oracle`] plus the number of non-terminal states it evaluated.
pub fn brute_force_oracle_counted<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
) -> Result<(Trajectory, usize)> {
    search(graph, reward, &FxHashSet::default())
}

/// Like [`brute_force_oracle`], but never takes a `(state, action)` pair in
/// `blocked`.
pub fn brute_force_oracle_blocked<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
    blocked: &FxHashSet<(StateKey, usize)>,
) -> Result<Trajectory> {
    search(graph, reward, blocked).map(|(t, _)| t)
}

fn search<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
    blocked: &FxHashSet<(StateKey, usize)>,
) -> Result<(Trajectory, usize)> {
    let e = graph.connection_count();
    if e > ORACLE_CAP {
        return Err(Error::CapExceeded {
            what: "connections",
            value: e,
            cap: ORACLE_CAP,
            hint: "; use the dijkstra or orasp planner",
        });
    }
    let mut oracle = Oracle {
        graph,
        reward,
        blocked,
        memo: FxHashMap::default(),
    };
    let mut state = graph.full_state();
    if oracle.value(state) == f64::NEG_INFINITY {
        return Err(Error::Infeasible(
            "no complete disassembly sequence exists".into(),
        ));
    }
    let mut steps = Vec::with_capacity(e);
    while !state.is_empty() {
        let (_, action, r) = oracle.memo[&state];
        steps.push(Step {
            state,
            action,
            reward: r,
        });
        state.clear(action);
    }
    Ok((Trajectory::from_steps(steps), oracle.memo.len()))
}

struct Oracle<'a, R> {
    graph: &'a AssemblyGraph,
    reward: &'a R,
    blocked: &'a FxHashSet<(StateKey, usize)>,
    /// state -> (value-to-go, best action, its reward)
    memo: FxHashMap<StateKey, (f64, usize, f64)>,
}

impl<R: Reward> Oracle<'_, R> {
    fn value(&mut self, state: StateKey) -> f64 {
        if state.is_empty() {
            return 0.0;
        }
        if let Some(&(v, _, _)) = self.memo.get(&state) {
            return v;
        }
        let mut best = (f64::NEG_INFINITY, usize::MAX, 0.0);
        for a in feasible_actions(self.graph, &state) {
            if self.blocked.contains(&(state, a)) {
                continue;
            }
            let r = self.reward.reward(self.graph, &state, a);
            let v = r + self.value(state.without(a));
            if v > best.0 {
                best = (v, a, r);
            }
        }
        self.memo.insert(state, best);
        best.0
    }
}
