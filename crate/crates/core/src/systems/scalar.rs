use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_state, Dynamics};
use crate::autodiff::sigmoid;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Uncontrolled scalar system `s' = θ · s` with observation noise `sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSystem {
    pub theta_true: f64,
    #[serde(default)]
    pub sigma: f64,
}

impl LinearSystem {
    pub fn new(theta_true: f64, sigma: f64) -> Result<Self> {
        if !(theta_true.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("|theta_true| must be < 1, got {theta_true}")));
        }
        if !(sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { theta_true, sigma })
    }
}

impl Dynamics for LinearSystem {
    fn name(&self) -> &'static str {
        "linear"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn action_dim(&self) -> usize {
        0
    }
    fn step(&self, state: &[f64], _action: &[f64]) -> Result<Vec<f64>> {
        check_state(state, 1)?;
        Ok(vec![self.theta_true * state[0]])
    }
    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64> {
        let mag = rng.gen_range(0.5..2.0);
        vec![if rng.gen::<bool>() { mag } else { -mag }]
    }
}

/// Uncontrolled scalar system `s' = θ₁ · sigmoid(θ₂ · s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmoidSystem {
    pub theta1_true: f64,
    pub theta2_true: f64,
    #[serde(default)]
    pub sigma: f64,
}

impl SigmoidSystem {
    pub fn new(theta1_true: f64, theta2_true: f64, sigma: f64) -> Result<Self> {
        if !theta1_true.is_finite() || !theta2_true.is_finite() {
            return Err(Error::InvalidArgument("sigmoid system parameters must be finite".into()));
        }
        if !(sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { theta1_true, theta2_true, sigma })
    }

    pub fn apply(&self, s: f64) -> f64 {
        self.theta1_true * sigmoid(self.theta2_true * s)
    }
}

impl Dynamics for SigmoidSystem {
    fn name(&self) -> &'static str {
        "sigmoid"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn action_dim(&self) -> usize {
        0
    }
    fn step(&self, state: &[f64], _action: &[f64]) -> Result<Vec<f64>> {
        check_state(state, 1)?;
        Ok(vec![self.apply(state[0])])
    }
    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64> {
        vec![rng.gen_range(-2.0..2.0)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_step() {
        let sys = LinearSystem::new(0.78, 0.0).unwrap();
        assert_eq!(sys.step(&[1.0], &[]).unwrap(), vec![0.78]);
    }

    #[test]
    fn linear_rejects_unstable_theta() {
        assert!(LinearSystem::new(1.0, 0.0).is_err());
        assert!(LinearSystem::new(-1.2, 0.0).is_err());
        assert!(LinearSystem::new(0.5, -0.1).is_err());
    }

    #[test]
    fn linear_decays_monotonically() {
        let sys = LinearSystem::new(-0.9, 0.0).unwrap();
        let mut s = vec![1.7];
        for _ in 0..50 {
            let next = sys.step(&s, &[]).unwrap();
            assert!(next[0].abs() < s[0].abs());
            s = next;
        }
    }

    #[test]
    fn sigmoid_step_at_zero_gain() {
        let sys = SigmoidSystem::new(2.0, 0.0, 0.0).unwrap();
        assert_eq!(sys.step(&[5.0], &[]).unwrap(), vec![1.0]);
    }

    #[test]
    fn non_finite_state_errors() {
        let sys = LinearSystem::new(0.5, 0.0).unwrap();
        assert!(matches!(sys.step(&[f64::NAN], &[]), Err(Error::NonFiniteState)));
        assert!(matches!(sys.step(&[1.0, 2.0], &[]), Err(Error::DimMismatch { .. })));
    }
}
