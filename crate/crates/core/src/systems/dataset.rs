use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{observe, Dynamics, System};
use crate::error::{Error, Result};
use crate::rng::{rng_for, SimRng};

/// One episode: `T + 1` states, `T` actions, and optionally noisy observations
/// of every state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub observations: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Observation channel when present, true states otherwise.
    pub fn channel(&self, use_true_state: bool) -> &[Vec<f64>] {
        match (&self.observations, use_true_state) {
            (Some(o), false) => o,
            _ => &self.states,
        }
    }

    pub fn validate(&self, d_s: usize, d_a: usize) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::InvalidArgument("trajectory has no states".into()));
        }
        if self.actions.len() + 1 != self.states.len() {
            return Err(Error::InvalidArgument(format!(
                "trajectory has {} states but {} actions",
                self.states.len(),
                self.actions.len()
            )));
        }
        let rows = self.states.iter().chain(self.observations.iter().flatten());
        for r in rows {
            if r.len() != d_s {
                return Err(Error::DimMismatch { expected: d_s, got: r.len() });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState);
            }
        }
        if let Some(o) = &self.observations {
            if o.len() != self.states.len() {
                return Err(Error::InvalidArgument("observation count differs from state count".into()));
            }
        }
        for a in &self.actions {
            if a.len() != d_a {
                return Err(Error::DimMismatch { expected: d_a, got: a.len() });
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub env: String,
    pub d_s: usize,
    pub d_a: usize,
    /// Observation noise as a fraction of each dimension's width.
    pub noise_percent: f64,
    pub seed: u64,
    pub state_min: Vec<f64>,
    pub state_max: Vec<f64>,
    /// Number of states stored for each episode.
    pub episode_lengths: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryDataset {
    pub meta: DatasetMeta,
    pub trajectories: Vec<Trajectory>,
}

impl TrajectoryDataset {
    /// Build a dataset, computing bounds and lengths from the trajectories.
    pub fn new(env: impl Into<String>, d_s: usize, d_a: usize, noise_percent: f64, seed: u64, trajectories: Vec<Trajectory>) -> Result<Self> {
        for t in &trajectories {
            t.validate(d_s, d_a)?;
        }
        let mut state_min = vec![f64::INFINITY; d_s];
        let mut state_max = vec![f64::NEG_INFINITY; d_s];
        for s in trajectories.iter().flat_map(|t| &t.states) {
            for j in 0..d_s {
                state_min[j] = state_min[j].min(s[j]);
                state_max[j] = state_max[j].max(s[j]);
            }
        }
        if trajectories.is_empty() {
            state_min = vec![0.0; d_s];
            state_max = vec![0.0; d_s];
        }
        let episode_lengths = trajectories.iter().map(|t| t.states.len()).collect();
        let meta = DatasetMeta { env: env.into(), d_s, d_a, noise_percent, seed, state_min, state_max, episode_lengths };
        Ok(Self { meta, trajectories })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Episodes at `indices`, keeping the parent's bounds.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let trajectories: Vec<Trajectory> = indices.iter().map(|&i| self.trajectories[i].clone()).collect();
        let mut meta = self.meta.clone();
        meta.episode_lengths = trajectories.iter().map(|t| t.states.len()).collect();
        Self { meta, trajectories }
    }

    /// Total number of transitions.
    pub fn transitions(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }
}

/// `sigma_abs[j] = percent · (max[j] − min[j])`.
pub fn noise_scale_to_sigma(meta: &DatasetMeta, percent: f64) -> Result<Vec<f64>> {
    if !(percent >= 0.0) || !percent.is_finite() {
        return Err(Error::InvalidArgument(format!("noise percent must be >= 0, got {percent}")));
    }
    Ok(meta.state_min.iter().zip(&meta.state_max).map(|(lo, hi)| percent * (hi - lo)).collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    #[default]
    RandomUniform,
    /// Slow sinusoidal pumping with a weak pull back toward the rail centre.
    Scripted,
}

impl std::str::FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random-uniform" | "random" => Ok(Self::RandomUniform),
            "scripted" => Ok(Self::Scripted),
            other => Err(format!("unknown policy `{other}` (expected random-uniform or scripted)")),
        }
    }
}

impl Policy {
    fn act(self, d_a: usize, t: usize, state: &[f64], phase: f64, rng: &mut SimRng) -> Vec<f64> {
        match self {
            Policy::RandomUniform => (0..d_a).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            Policy::Scripted => (0..d_a)
                .map(|_| {
                    let pump = (0.05 * t as f64 + phase).sin();
                    let pull = -0.5 * state.first().copied().unwrap_or(0.0);
                    (0.8 * pump + pull + 0.2 * rng.gen_range(-1.0..=1.0)).clamp(-1.0, 1.0)
                })
                .collect(),
        }
    }
}

fn simulate(system: &System, policy: Policy, horizon: usize, seed: u64, episode: usize) -> Result<Trajectory> {
    let mut rng = rng_for(seed, &[episode as u64, 0]);
    let d_a = system.action_dim();
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut states = Vec::with_capacity(horizon + 1);
    let mut actions = Vec::with_capacity(horizon);
    states.push(system.initial_state(&mut rng));
    for t in 0..horizon {
        let s = &states[t];
        let a = policy.act(d_a, t, s, phase, &mut rng);
        let next = system.step(s, &a).map_err(|e| match e {
            Error::NonFiniteState => Error::Diverged { episode, step: t },
            other => other,
        })?;
        if next.iter().any(|v| !v.is_finite() || v.abs() > 1e12) {
            return Err(Error::Diverged { episode, step: t });
        }
        actions.push(a);
        states.push(next);
    }
    Ok(Trajectory { states, actions, observations: None })
}

/// Simulate `episodes` episodes of `horizon` transitions and add an
/// observation channel with noise scaled to the state-space width.
///
/// Each episode draws from its own stream derived from `seed`, so the result
/// does not depend on scheduling.
pub fn generate_dataset(
    system: &System,
    policy: Policy,
    episodes: usize,
    horizon: usize,
    seed: u64,
    noise_percent: f64,
) -> Result<TrajectoryDataset> {
    if episodes == 0 {
        return Err(Error::InvalidArgument("episodes must be >= 1".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let trajectories: Vec<Trajectory> = (0..episodes)
        .into_par_iter()
        .map(|e| simulate(system, policy, horizon, seed, e))
        .collect::<Result<_>>()?;
    let mut ds = TrajectoryDataset::new(system.name(), system.state_dim(), system.action_dim(), noise_percent, seed, trajectories)?;
    let sigma = noise_scale_to_sigma(&ds.meta, noise_percent)?;
    ds.trajectories.par_iter_mut().enumerate().for_each(|(e, t)| {
        let mut rng = rng_for(seed, &[e as u64, 1]);
        t.observations = Some(t.states.iter().map(|s| observe(s, &sigma, &mut rng)).collect());
    });
    Ok(ds)
}

/// Episode indices of a train/valid/test partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeSplit {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffle episodes with `seed` and cut them 72/8/20, which gives 36/4/10
/// for 50 episodes. Valid and test get at least one episode when `n >= 3`.
pub fn split_episodes(n: usize, seed: u64) -> EpisodeSplit {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_for(seed, &[0x5917]));
    let mut n_valid = (n as f64 * 0.08).round() as usize;
    let mut n_test = (n as f64 * 0.2).round() as usize;
    if n >= 3 {
        n_valid = n_valid.max(1);
        n_test = n_test.max(1);
    }
    let n_train = n.saturating_sub(n_valid + n_test);
    EpisodeSplit {
        train: idx[..n_train].to_vec(),
        valid: idx[n_train..n_train + n_valid].to_vec(),
        test: idx[n_train + n_valid..].to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{CartpoleSwingup, LinearSystem};

    fn linear() -> System {
        System::Linear(LinearSystem::new(0.78, 0.0).unwrap())
    }

    #[test]
    fn sigma_from_width() {
        let ds = TrajectoryDataset::new(
            "linear",
            2,
            0,
            0.02,
            0,
            vec![Trajectory { states: vec![vec![-1.0, 3.0], vec![3.0, 3.0]], actions: vec![vec![]], observations: None }],
        )
        .unwrap();
        let s = noise_scale_to_sigma(&ds.meta, 0.02).unwrap();
        assert!((s[0] - 0.08).abs() < 1e-15);
        assert_eq!(s[1], 0.0);
        assert_eq!(noise_scale_to_sigma(&ds.meta, 0.0).unwrap(), vec![0.0, 0.0]);
        assert!(noise_scale_to_sigma(&ds.meta, -0.1).is_err());
    }

    #[test]
    fn zero_noise_observes_states() {
        let ds = generate_dataset(&linear(), Policy::RandomUniform, 3, 10, 1, 0.0).unwrap();
        for t in &ds.trajectories {
            assert_eq!(t.observations.as_ref().unwrap(), &t.states);
        }
    }

    #[test]
    fn bounds_cover_states() {
        let sys = System::Cartpole(CartpoleSwingup::default());
        let ds = generate_dataset(&sys, Policy::RandomUniform, 4, 50, 2, 0.02).unwrap();
        for s in ds.trajectories.iter().flat_map(|t| &t.states) {
            for j in 0..5 {
                assert!(s[j] >= ds.meta.state_min[j] && s[j] <= ds.meta.state_max[j]);
            }
        }
        assert_eq!(ds.meta.episode_lengths, vec![51; 4]);
    }

    #[test]
    fn split_matches_paper_ratio_and_partitions() {
        let s = split_episodes(50, 9);
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (36, 4, 10));
        let mut all: Vec<usize> = s.train.iter().chain(&s.valid).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_zero_episodes() {
        assert!(generate_dataset(&linear(), Policy::RandomUniform, 0, 10, 1, 0.0).is_err());
    }
}
