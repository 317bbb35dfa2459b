use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_state, Dynamics};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Physical constants of the frictionless cart-pole.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CartpoleParams {
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Distance from the pivot to the pole's centre of mass.
    pub half_length: f64,
    pub gravity: f64,
    /// Force in newtons applied for an action of 1.
    pub force_scale: f64,
    /// Control period in seconds.
    pub dt: f64,
    /// Integration substeps per control period.
    pub substeps: usize,
}

impl Default for CartpoleParams {
    fn default() -> Self {
        Self { cart_mass: 1.0, pole_mass: 0.1, half_length: 0.5, gravity: 9.81, force_scale: 10.0, dt: 0.01, substeps: 10 }
    }
}

/// Cart-pole with the swing-up encoding `(x, cos θ, sin θ, ẋ, θ̇)`.
/// `θ = 0` is upright, so the pole hangs down at `θ = π`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartpoleSwingup {
    #[serde(default)]
    pub params: CartpoleParams,
}

impl CartpoleSwingup {
    pub fn new(params: CartpoleParams) -> Result<Self> {
        let p = &params;
        let positive = [p.cart_mass, p.pole_mass, p.half_length, p.gravity, p.dt];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || p.substeps == 0 || !p.force_scale.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid cart-pole parameters {params:?}")));
        }
        Ok(Self { params })
    }

    /// Encode raw coordinates `(x, θ, ẋ, θ̇)`.
    pub fn encode(x: f64, theta: f64, x_dot: f64, theta_dot: f64) -> Vec<f64> {
        vec![x, theta.cos(), theta.sin(), x_dot, theta_dot]
    }

    fn accelerations(&self, theta: f64, theta_dot: f64, force: f64) -> (f64, f64) {
        let p = &self.params;
        let total = p.cart_mass + p.pole_mass;
        let (sin, cos) = theta.sin_cos();
        let temp = (force + p.pole_mass * p.half_length * theta_dot * theta_dot * sin) / total;
        let theta_acc = (p.gravity * sin - cos * temp)
            / (p.half_length * (4.0 / 3.0 - p.pole_mass * cos * cos / total));
        let x_acc = temp - p.pole_mass * p.half_length * theta_acc * cos / total;
        (x_acc, theta_acc)
    }

    /// Mechanical energy of a state, with the pivot as the potential reference.
    pub fn energy(&self, state: &[f64]) -> f64 {
        let p = &self.params;
        let (x_dot, theta_dot, cos, sin) = (state[3], state[4], state[1], state[2]);
        let l = p.half_length;
        // pole centre of mass velocity
        let vx = x_dot + l * theta_dot * cos;
        let vy = -l * theta_dot * sin;
        let inertia = p.pole_mass * l * l / 3.0;
        0.5 * p.cart_mass * x_dot * x_dot
            + 0.5 * p.pole_mass * (vx * vx + vy * vy)
            + 0.5 * inertia * theta_dot * theta_dot
            + p.pole_mass * p.gravity * l * cos
    }
}

impl Dynamics for CartpoleSwingup {
    fn name(&self) -> &'static str {
        "cartpole"
    }
    fn state_dim(&self) -> usize {
        5
    }
    fn action_dim(&self) -> usize {
        1
    }

    fn step(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
        check_state(state, 5)?;
        if action.len() != 1 {
            return Err(Error::DimMismatch { expected: 1, got: action.len() });
        }
        if !action[0].is_finite() {
            return Err(Error::NonFiniteState);
        }
        let force = action[0].clamp(-1.0, 1.0) * self.params.force_scale;
        let h = self.params.dt / self.params.substeps as f64;
        let (mut x, mut x_dot, mut theta_dot) = (state[0], state[3], state[4]);
        let mut theta = state[2].atan2(state[1]);
        for _ in 0..self.params.substeps {
            let (x_acc, theta_acc) = self.accelerations(theta, theta_dot, force);
            // semi-implicit Euler: velocities first, positions with the new velocities
            x_dot += h * x_acc;
            theta_dot += h * theta_acc;
            x += h * x_dot;
            theta += h * theta_dot;
        }
        let next = Self::encode(x, theta, x_dot, theta_dot);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState);
        }
        Ok(next)
    }

    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64> {
        let x = rng.gen_range(-0.5..0.5);
        let theta = PI + rng.gen_range(-1.0..1.0);
        let x_dot = rng.gen_range(-0.5..0.5);
        let theta_dot = rng.gen_range(-1.0..1.0);
        Self::encode(x, theta, x_dot, theta_dot)
    }

    fn reward(&self, state: &[f64], action: &[f64]) -> Option<f64> {
        let ln10 = std::f64::consts::LN_10;
        let (x, cos, x_dot) = (state[0], state[1], state[3]);
        let a = action.first().copied().unwrap_or(0.0).clamp(-1.0, 1.0);
        let upright = (1.0 + cos) / 2.0;
        let centered = (1.0 + (-0.25 * ln10 * x * x).exp()) / 2.0;
        let small_control = 1.0 - a * a / 5.0;
        let small_velocity = (1.0 + (-0.04 * ln10 * x_dot * x_dot).exp()) / 2.0;
        Some(upright * centered * small_control * small_velocity)
    }
}
