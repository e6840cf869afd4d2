//! Reward models `R(s, a)` used as edge weights.
//!
//! All built-in models are non-positive: they are costs written as negative
//! rewards. A model's `shift` is subtracted after evaluation, which lets a
//! custom model with positive values be pushed below zero.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{feasible_actions, removal_effect, validate_sequence};
use crate::planners::Trajectory;
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

/// Anything that scores the removal of connection `action` from `state`.
pub trait Reward {
    fn reward(&self, graph: &AssemblyGraph, state: &StateKey, action: usize) -> f64;

    /// Upper bound on the total any complete disassembly from `state` can
    /// still collect. `0` is valid for every non-positive reward.
    fn bound_to_go(&self, _graph: &AssemblyGraph, _state: &StateKey) -> f64 {
        0.0
    }
}

impl<F> Reward for F
where
    F: Fn(&AssemblyGraph, &StateKey, usize) -> f64,
{
    fn reward(&self, graph: &AssemblyGraph, state: &StateKey, action: usize) -> f64 {
        self(graph, state, action)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RewardKind {
    /// `-time` of the removed connection.
    MinTime,
    /// `-2 * |depot - midpoint(connection)| * travel_rate`.
    MinTravel { depot: [f64; 3], travel_rate: f64 },
    /// `-(fuel_base + alpha * carried_mass^beta)`.
    CubesatFuel { alpha: f64, beta: f64 },
    /// `-1` per removal.
    Completion,
}

impl RewardKind {
    pub fn name(&self) -> &'static str {
        match self {
            RewardKind::MinTime => "min_time",
            RewardKind::MinTravel { .. } => "min_travel",
            RewardKind::CubesatFuel { .. } => "cubesat_fuel",
            RewardKind::Completion => "completion",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Param {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RewardDoc {
    kind: String,
    #[serde(default)]
    params: BTreeMap<String, Param>,
    #[serde(default)]
    shift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RewardDoc", into = "RewardDoc")]
pub struct RewardModel {
    pub kind: RewardKind,
    pub shift: f64,
}

impl RewardModel {
    pub fn new(kind: RewardKind) -> Self {
        RewardModel { kind, shift: 0.0 }
    }

    pub fn min_time() -> Self {
        Self::new(RewardKind::MinTime)
    }

    pub fn min_travel() -> Self {
        Self::new(RewardKind::MinTravel {
            depot: [0.0; 3],
            travel_rate: 1.0,
        })
    }

    pub fn cubesat_fuel() -> Self {
        Self::new(RewardKind::CubesatFuel {
            alpha: 1.0,
            beta: 1.5,
        })
    }

    pub fn completion() -> Self {
        Self::new(RewardKind::Completion)
    }

    /// Default-parameter model for a kind name.
    pub fn from_kind_name(name: &str) -> Result<Self> {
        Self::try_from(RewardDoc {
            kind: name.to_string(),
            params: BTreeMap::new(),
            shift: 0.0,
        })
    }

    /// Parses either a kind name (`"completion"`) or a JSON config object.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.starts_with('{') {
            serde_json::from_str(trimmed).map_err(|e| Error::InvalidReward(e.to_string()))
        } else {
            Self::from_kind_name(trimmed)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn with_shift(mut self, shift: f64) -> Result<Self> {
        if !(shift.is_finite() && shift >= 0.0) {
            return Err(Error::InvalidReward(format!(
                "shift {shift} must be finite and >= 0"
            )));
        }
        self.shift = shift;
        Ok(self)
    }

    /// Verifies that every connection carries the attributes this model reads.
    pub fn check(&self, graph: &AssemblyGraph) -> Result<()> {
        let needed = match self.kind {
            RewardKind::MinTime => Some("time"),
            RewardKind::CubesatFuel { .. } => Some("fuel_base"),
            _ => None,
        };
        if let Some(attr) = needed {
            if let Some(c) = graph.connections().iter().find(|c| c.attr(attr).is_none()) {
                return Err(Error::InvalidReward(format!(
                    "{} needs attrs.{attr}, missing on connection {}",
                    self.kind.name(),
                    c.index
                )));
            }
        }
        Ok(())
    }

    /// Largest raw reward removing `action` can earn in any state.
    fn raw_upper(&self, graph: &AssemblyGraph, action: usize) -> f64 {
        match self.kind {
            RewardKind::CubesatFuel { alpha, beta } => {
                // The carried side holds one endpoint, so it weighs at least
                // the lighter endpoint.
                let (a, b) = graph.endpoints(action);
                let lightest = graph.parts()[a].mass.min(graph.parts()[b].mass);
                let fuel = graph.connections()[action].attr("fuel_base").unwrap_or(0.0);
                if alpha >= 0.0 && beta >= 0.0 {
                    -(fuel + alpha * lightest.powf(beta))
                } else if alpha >= 0.0 {
                    -fuel
                } else {
                    f64::INFINITY
                }
            }
            // The other kinds do not depend on the state.
            _ => self.raw(graph, &graph.full_state(), action),
        }
    }

    fn raw(&self, graph: &AssemblyGraph, state: &StateKey, action: usize) -> f64 {
        let conn = &graph.connections()[action];
        match self.kind {
            RewardKind::MinTime => -conn.attr("time").unwrap_or(0.0),
            RewardKind::MinTravel { depot, travel_rate } => {
                let (a, b) = graph.endpoints(action);
                let (pa, pb) = (graph.parts()[a].position, graph.parts()[b].position);
                let dist = (0..3)
                    .map(|k| {
                        let mid = 0.5 * (pa[k] + pb[k]);
                        (mid - depot[k]) * (mid - depot[k])
                    })
                    .sum::<f64>()
                    .sqrt();
                -(2.0 * dist) * travel_rate
            }
            RewardKind::CubesatFuel { alpha, beta } => {
                let carried = match removal_effect(graph, state, action).split {
                    Some([smaller, _]) => smaller.mass,
                    None => {
                        let (a, b) = graph.endpoints(action);
                        graph.parts()[a].mass.min(graph.parts()[b].mass)
                    }
                };
                -(conn.attr("fuel_base").unwrap_or(0.0) + alpha * carried.powf(beta))
            }
            RewardKind::Completion => -1.0,
        }
    }
}

impl Reward for RewardModel {
    #[inline]
    fn reward(&self, graph: &AssemblyGraph, state: &StateKey, action: usize) -> f64 {
        self.raw(graph, state, action) - self.shift
    }

    fn bound_to_go(&self, graph: &AssemblyGraph, state: &StateKey) -> f64 {
        state
            .ones()
            .map(|j| self.raw_upper(graph, j) - self.shift)
            .sum()
    }
}

/// `R(s, a)` for a feasible removal.
pub fn evaluate_reward(
    model: &RewardModel,
    graph: &AssemblyGraph,
    state: &StateKey,
    action: usize,
) -> f64 {
    model.reward(graph, state, action)
}

/// Re-scores a trajectory and checks it against its stored total.
pub fn total_reward<R: Reward>(
    reward: &R,
    graph: &AssemblyGraph,
    traj: &Trajectory,
) -> Result<f64> {
    let order = traj.disassembly_order();
    let report = validate_sequence(graph, &order);
    if !report.valid {
        return Err(Error::InvalidTrajectory(format!(
            "sequence {order:?} fails validation: {:?}",
            report.violation
        )));
    }
    let mut state = graph.full_state();
    let mut total = 0.0;
    for step in traj.steps() {
        if step.state != state {
            return Err(Error::InvalidTrajectory(format!(
                "recorded state {} does not match simulated state {}",
                step.state, state
            )));
        }
        total += reward.reward(graph, &state, step.action);
        state.clear(step.action);
    }
    let tol = 1e-9 * total.abs().max(1.0);
    if (total - traj.total()).abs() > tol {
        return Err(Error::InvalidTrajectory(format!(
            "stored total {} differs from re-scored total {total}",
            traj.total()
        )));
    }
    Ok(total)
}

/// Smallest shift making every sampled transition non-positive.
///
/// Samples `rollouts` uniform random disassemblies and returns
/// `max_reward + margin` when some reward is positive, else `0`.
pub fn calibrate_shift<R: Reward>(
    reward: &R,
    graph: &AssemblyGraph,
    rollouts: usize,
    margin: f64,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_seen = f64::NEG_INFINITY;
    for _ in 0..rollouts {
        let mut state = graph.full_state();
        loop {
            let actions = feasible_actions(graph, &state);
            let Some(&a) = actions.choose(&mut rng) else {
                break;
            };
            max_seen = max_seen.max(reward.reward(graph, &state, a));
            state.clear(a);
        }
    }
    if max_seen > 0.0 {
        max_seen + margin
    } else {
        0.0
    }
}

impl TryFrom<RewardDoc> for RewardModel {
    type Error = Error;

    fn try_from(doc: RewardDoc) -> Result<Self> {
        let mut params = doc.params;
        let mut scalar = |name: &str, default: f64| -> Result<f64> {
            match params.remove(name) {
                None => Ok(default),
                Some(Param::Scalar(v)) if v.is_finite() => Ok(v),
                Some(other) => Err(Error::InvalidReward(format!(
                    "params.{name} must be a finite number, got {other:?}"
                ))),
            }
        };
        let kind = match doc.kind.as_str() {
            "min_time" => RewardKind::MinTime,
            "completion" => RewardKind::Completion,
            "min_travel" => {
                let travel_rate = scalar("travel_rate", 1.0)?;
                let depot = match params.remove("depot") {
                    None => [0.0; 3],
                    Some(Param::Vector(v)) if v.len() == 3 && v.iter().all(|x| x.is_finite()) => {
                        [v[0], v[1], v[2]]
                    }
                    Some(other) => {
                        return Err(Error::InvalidReward(format!(
                            "params.depot must be a 3-vector, got {other:?}"
                        )))
                    }
                };
                if travel_rate < 0.0 {
                    return Err(Error::InvalidReward("params.travel_rate must be >= 0".into()));
                }
                RewardKind::MinTravel { depot, travel_rate }
            }
            "cubesat_fuel" => {
                let alpha = scalar("alpha", 1.0)?;
                let beta = scalar("beta", 1.5)?;
                if alpha < 0.0 {
                    return Err(Error::InvalidReward("params.alpha must be >= 0".into()));
                }
                RewardKind::CubesatFuel { alpha, beta }
            }
            other => {
                return Err(Error::InvalidReward(format!(
                    "unknown reward kind {other:?}; expected min_time, min_travel, cubesat_fuel or completion"
                )))
            }
        };
        if let Some(name) = params.keys().next() {
            return Err(Error::InvalidReward(format!(
                "unknown parameter {name:?} for {}",
                kind.name()
            )));
        }
        RewardModel::new(kind).with_shift(doc.shift)
    }
}

impl From<RewardModel> for RewardDoc {
    fn from(m: RewardModel) -> Self {
        let mut params = BTreeMap::new();
        match m.kind {
            RewardKind::MinTravel { depot, travel_rate } => {
                params.insert("depot".into(), Param::Vector(depot.to_vec()));
                params.insert("travel_rate".into(), Param::Scalar(travel_rate));
            }
            RewardKind::CubesatFuel { alpha, beta } => {
                params.insert("alpha".into(), Param::Scalar(alpha));
                params.insert("beta".into(), Param::Scalar(beta));
            }
            RewardKind::MinTime | RewardKind::Completion => {}
        }
        RewardDoc {
            kind: m.kind.name().to_string(),
            params,
            shift: m.shift,
        }
    }
}
