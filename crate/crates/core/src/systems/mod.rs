//! Ground-truth dynamical systems, observation noise, and trajectory datasets.

mod cartpole;
mod dataset;
mod io;
mod scalar;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use cartpole::{CartpoleParams, CartpoleSwingup};
pub use dataset::{
    generate_dataset, noise_scale_to_sigma, split_episodes, DatasetMeta, EpisodeSplit, Policy, Trajectory,
    TrajectoryDataset,
};
pub(crate) use io::fmt_f64;
pub use io::{load_dataset, read_dataset, save_dataset, write_dataset};
pub use scalar::{LinearSystem, SigmoidSystem};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// A deterministic discrete-time system `s' = f(s, a)`.
pub trait Dynamics {
    fn name(&self) -> &'static str;
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn step(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>>;
    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64>;

    /// Per-step reward when the environment defines one.
    fn reward(&self, _state: &[f64], _action: &[f64]) -> Option<f64> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "env", rename_all = "lowercase")]
pub enum System {
    Linear(LinearSystem),
    Sigmoid(SigmoidSystem),
    Cartpole(CartpoleSwingup),
}

impl System {
    fn inner(&self) -> &dyn Dynamics {
        match self {
            System::Linear(s) => s,
            System::Sigmoid(s) => s,
            System::Cartpole(s) => s,
        }
    }
}

impl Dynamics for System {
    fn name(&self) -> &'static str {
        self.inner().name()
    }
    fn state_dim(&self) -> usize {
        self.inner().state_dim()
    }
    fn action_dim(&self) -> usize {
        self.inner().action_dim()
    }
    fn step(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
        self.inner().step(state, action)
    }
    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64> {
        self.inner().initial_state(rng)
    }
    fn reward(&self, state: &[f64], action: &[f64]) -> Option<f64> {
        self.inner().reward(state, action)
    }
}

pub(crate) fn check_state(state: &[f64], dim: usize) -> Result<()> {
    if state.len() != dim {
        return Err(Error::DimMismatch { expected: dim, got: state.len() });
    }
    if state.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState);
    }
    Ok(())
}

/// `o = s + ε` with independent `ε_j ~ N(0, sigma_abs[j]²)`.
pub fn observe<R: Rng + ?Sized>(state: &[f64], sigma_abs: &[f64], rng: &mut R) -> Vec<f64> {
    state
        .iter()
        .zip(sigma_abs)
        .map(|(&s, &sd)| {
            let z: f64 = rng.sample(StandardNormal);
            if sd == 0.0 {
                s
            } else {
                s + sd * z
            }
        })
        .collect()
}
