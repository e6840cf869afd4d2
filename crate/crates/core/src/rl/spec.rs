use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reward::RewardModel;
use crate::rl::env::{action_mask, reset, step, EnvState};
use crate::state_key::StateKey;
use crate::structure::AssemblyGraph;

/// Number of sampled transitions stored with every exported spec.
pub const CONFORMANCE_VECTORS: usize = 32;

/// Episodes start with `k_start` connections left; the level grows by
/// `k_step` every `episodes_per_level` episodes, up to all of them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curriculum {
    pub k_start: usize,
    pub k_step: usize,
    pub episodes_per_level: usize,
}

impl Curriculum {
    /// Starts at 2 connections and reaches the full structure by the middle
    /// of `episodes`, so at least half of training runs full-length episodes.
    pub fn for_budget(connections: usize, episodes: usize) -> Self {
        let k_start = connections.clamp(1, 2);
        let levels = connections.saturating_sub(k_start);
        let episodes_per_level = (episodes / 2)
            .checked_div(levels)
            .unwrap_or(episodes)
            .max(1);
        Curriculum {
            k_start,
            k_step: 1,
            episodes_per_level,
        }
    }

    pub fn level(&self, connections: usize, episode: usize) -> usize {
        let advanced = self.k_start + self.k_step * (episode / self.episodes_per_level);
        advanced.min(connections)
    }
}

/// Exploration rate `max(end, start * decay^episode)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay: f64,
}

impl EpsilonSchedule {
    /// Decays from 1 to 0.05 over the first 60% of `episodes`.
    pub fn for_budget(episodes: usize) -> Self {
        let (start, end) = (1.0, 0.05);
        let span = (episodes as f64 * 0.6).max(1.0);
        EpsilonSchedule {
            start,
            end,
            decay: (end / start).powf(1.0 / span),
        }
    }

    pub fn at(&self, episode: usize) -> f64 {
        (self.start * self.decay.powi(episode.min(i32::MAX as usize) as i32)).max(self.end)
    }
}

/// One recorded environment transition, states as hex keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformanceVector {
    pub state: String,
    pub action: usize,
    pub next: String,
    pub reward: f64,
    pub done: bool,
}

/// Everything an external trainer needs to rebuild the environment, plus
/// sampled transitions it can check itself against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSpec {
    pub structure: AssemblyGraph,
    pub reward: RewardModel,
    pub curriculum: Curriculum,
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
    pub conformance: Vec<ConformanceVector>,
}

impl EnvSpec {
    /// Validates the settings and samples the conformance vectors.
    pub fn new(
        structure: AssemblyGraph,
        reward: RewardModel,
        curriculum: Curriculum,
        epsilon: EpsilonSchedule,
        seed: u64,
    ) -> Result<Self> {
        reward.check(&structure)?;
        let mut spec = EnvSpec {
            structure,
            reward,
            curriculum,
            epsilon,
            seed,
            conformance: Vec::new(),
        };
        spec.check_settings()?;
        spec.conformance = spec.sample_conformance()?;
        Ok(spec)
    }

    fn check_settings(&self) -> Result<()> {
        let e = self.structure.connection_count();
        let c = &self.curriculum;
        if c.k_start == 0 || c.k_start > e {
            return Err(Error::InvalidArgument(format!(
                "curriculum.k_start must be in 1..={e}, got {}",
                c.k_start
            )));
        }
        if c.k_step == 0 || c.episodes_per_level == 0 {
            return Err(Error::InvalidArgument(
                "curriculum.k_step and curriculum.episodes_per_level must be positive".into(),
            ));
        }
        let eps = &self.epsilon;
        if !(0.0 < eps.end && eps.end <= eps.start && eps.start <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon needs 0 < end <= start <= 1, got start {} end {}",
                eps.start, eps.end
            )));
        }
        if !(eps.decay > 0.0 && eps.decay <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon.decay must be in (0, 1], got {}",
                eps.decay
            )));
        }
        Ok(())
    }

    fn sample_conformance(&self) -> Result<Vec<ConformanceVector>> {
        let g = &self.structure;
        let e = g.connection_count();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::MAX);
        let mut out = Vec::with_capacity(CONFORMANCE_VECTORS);
        let mut tries = 0;
        while out.len() < CONFORMANCE_VECTORS {
            tries += 1;
            if tries > CONFORMANCE_VECTORS * 100 {
                return Err(Error::Infeasible(
                    "could not sample conformance transitions".into(),
                ));
            }
            let state = reset(g, rng.gen_range(1..=e), &mut rng)?;
            let valid: Vec<usize> = action_mask(g, &state)
                .iter()
                .enumerate()
                .filter_map(|(j, &m)| m.then_some(j))
                .collect();
            let Some(&a) = valid.choose(&mut rng) else {
                continue;
            };
            let (next, reward, done) = step(g, &self.reward, &state, a)?;
            out.push(ConformanceVector {
                state: state.key().to_hex(),
                action: a,
                next: next.key().to_hex(),
                reward,
                done,
            });
        }
        Ok(out)
    }

    /// Replays every conformance vector and reports the first mismatch.
    pub fn verify_conformance(&self) -> Result<()> {
        let g = &self.structure;
        for (i, v) in self.conformance.iter().enumerate() {
            let state = EnvState::from_key(StateKey::from_hex(g.connection_count(), &v.state)?);
            let (next, reward, done) = step(g, &self.reward, &state, v.action)?;
            if next.key().to_hex() != v.next
                || reward.to_bits() != v.reward.to_bits()
                || done != v.done
            {
                return Err(Error::InvalidArgument(format!(
                    "conformance vector {i} disagrees: recorded ({}, {}, {}), stepped ({}, {reward}, {done})",
                    v.next,
                    v.reward,
                    v.done,
                    next.key().to_hex()
                )));
            }
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("env spec serializes")
    }

    pub fn from_json_str(text: &str, location: &str) -> Result<Self> {
        let spec: EnvSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: location.to_string(),
            message: e.to_string(),
        })?;
        spec.check_settings()?;
        Ok(spec)
    }

    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_pretty() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, &path.display().to_string())
    }
}

/// Builds a spec, conformance vectors included, and writes it to `path`.
pub fn export_env_spec(
    graph: &AssemblyGraph,
    reward: &RewardModel,
    curriculum: Curriculum,
    epsilon: EpsilonSchedule,
    seed: u64,
    path: impl AsRef<Path>,
) -> Result<EnvSpec> {
    let spec = EnvSpec::new(graph.clone(), *reward, curriculum, epsilon, seed)?;
    spec.export(path)?;
    Ok(spec)
}
