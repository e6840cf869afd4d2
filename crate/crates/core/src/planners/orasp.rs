use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::feasible_actions;
use crate::planners::rollout::{random_rollout, RolloutOutcome};
use crate::planners::{Step, Trajectory};
use crate::reward::Reward;
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

/// How many rollouts are tried for a starting incumbent before searching
/// without one.
const SEED_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OraspStats {
    /// Distinct non-terminal states whose children were generated.
    pub expanded: usize,
    /// Child generations, counting repeats.
    pub visits: usize,
    pub pruned_bound: usize,
    pub pruned_memo: usize,
    pub incumbent_updates: usize,
    /// Total of the seeding rollout, `None` if every attempt dead-ended.
    pub initial_bound: Option<f64>,
}

/// Depth-first branch and bound over removal orders.
///
/// Requires non-positive rewards: the running total `g` can then only fall,
/// so a branch is dropped once `g + reward.bound_to_go(child) <= best`, and a
/// revisit of a state reached before with at least the same `g` is dropped.
/// With the default bound of `0` this is the plain `g <= best` rule.
pub fn orasp_search<R: Reward>(
    graph: &AssemblyGraph,
    reward: &R,
    rng_seed: u64,
) -> Result<(Trajectory, OraspStats)> {
    let mut stats = OraspStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut incumbent = None;
    for _ in 0..SEED_ATTEMPTS {
        if let RolloutOutcome::Complete(t) = random_rollout(graph, reward, &mut rng) {
            incumbent = Some(t);
            break;
        }
    }
    if let Some(t) = &incumbent {
        if let Some(s) = t.steps().iter().find(|s| s.reward > 0.0) {
            return Err(positive(s.state, s.action, s.reward));
        }
    }
    stats.initial_bound = incumbent.as_ref().map(Trajectory::total);

    let mut search = Search {
        graph,
        reward,
        best: stats.initial_bound.unwrap_or(f64::NEG_INFINITY),
        incumbent,
        memo: FxHashMap::default(),
        path: Vec::with_capacity(graph.connection_count()),
        stats,
    };
    search.descend(graph.full_state(), 0.0)?;
    let Search {
        incumbent, stats, ..
    } = search;
    match incumbent {
        Some(t) => Ok((t, stats)),
        None => Err(Error::Infeasible(
            "no complete disassembly sequence exists".into(),
        )),
    }
}

fn positive(state: StateKey, action: usize, reward: f64) -> Error {
    Error::PositiveReward {
        state: state.to_hex(),
        action,
        reward,
    }
}

struct Search<'a, R> {
    graph: &'a AssemblyGraph,
    reward: &'a R,
    best: f64,
    incumbent: Option<Trajectory>,
    memo: FxHashMap<StateKey, f64>,
    path: Vec<Step>,
    stats: OraspStats,
}

impl<R: Reward> Search<'_, R> {
    fn descend(&mut self, state: StateKey, g: f64) -> Result<()> {
        if state.is_empty() {
            if g > self.best {
                self.best = g;
                self.incumbent = Some(Trajectory::from_steps(self.path.clone()));
                self.stats.incumbent_updates += 1;
            }
            return Ok(());
        }
        match self.memo.get_mut(&state) {
            Some(seen) if g <= *seen => {
                self.stats.pruned_memo += 1;
                return Ok(());
            }
            Some(seen) => *seen = g,
            None => {
                self.memo.insert(state, g);
                self.stats.expanded += 1;
            }
        }
        self.stats.visits += 1;

        let mut children: Vec<(usize, f64)> = feasible_actions(self.graph, &state)
            .into_iter()
            .map(|a| (a, self.reward.reward(self.graph, &state, a)))
            .collect();
        if let Some(&(a, r)) = children.iter().find(|c| c.1 > 0.0) {
            return Err(positive(state, a, r));
        }
        children.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

        for (a, r) in children {
            let next = g + r;
            let child = state.without(a);
            if next + self.reward.bound_to_go(self.graph, &child) <= self.best {
                self.stats.pruned_bound += 1;
                continue;
            }
            self.path.push(Step {
                state,
                action: a,
                reward: r,
            });
            self.descend(child, next)?;
            self.path.pop();
        }
        Ok(())
    }
}
