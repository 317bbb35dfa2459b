use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_dims, DynamicsModel, InitKind, Prediction};
use crate::autodiff::{ParamSet, Tape, Tensor, Var};
use crate::error::Result;
use crate::rng::{rng_for, SimRng};

/// `ŝ = θ·s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    params: ParamSet,
}

impl LinearModel {
    pub fn new(theta: f64) -> Self {
        let mut params = ParamSet::new();
        params.push("theta", Tensor::scalar(theta));
        Self { params }
    }

    pub fn init(init: InitKind, seed: u64) -> Self {
        let mut rng = rng_for(seed, &[init.stream()]);
        Self::new(init.draw(1, 1, &mut rng))
    }

    pub fn theta(&self) -> f64 {
        self.params.get(0).data()[0]
    }

    pub(crate) fn from_params(params: ParamSet) -> Self {
        Self { params }
    }
}

impl DynamicsModel for LinearModel {
    fn kind(&self) -> &'static str {
        "linear"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn action_dim(&self) -> usize {
        0
    }
    fn params(&self) -> &ParamSet {
        &self.params
    }
    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }
    fn step(&self, tape: &mut Tape, params: &[Var], state: Var, action: Option<Var>, _rng: Option<&mut SimRng>) -> Result<Prediction> {
        check_dims(self, tape, state, action)?;
        let mean = tape.mul(state, params[0])?;
        Ok(Prediction { mean, std: None })
    }
}

/// `ŝ = θ₁ · sigmoid(θ₂ · s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmoidModel {
    params: ParamSet,
    init: InitKind,
}

impl SigmoidModel {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        let mut params = ParamSet::new();
        params.push("theta1", Tensor::scalar(theta1));
        params.push("theta2", Tensor::scalar(theta2));
        Self { params, init: InitKind::Default }
    }

    /// Both parameters are treated as 1-in, 1-out layers.
    pub fn init(init: InitKind, seed: u64) -> Self {
        let mut rng = rng_for(seed, &[init.stream()]);
        let t1 = init.draw(1, 1, &mut rng);
        let t2 = init.draw(1, 1, &mut rng);
        Self { init, ..Self::new(t1, t2) }
    }

    pub fn thetas(&self) -> (f64, f64) {
        (self.params.get(0).data()[0], self.params.get(1).data()[0])
    }

    pub fn init_kind(&self) -> InitKind {
        self.init
    }

    pub(crate) fn from_params(params: ParamSet, init: InitKind) -> Self {
        Self { params, init }
    }
}

impl DynamicsModel for SigmoidModel {
    fn kind(&self) -> &'static str {
        "sigmoid"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn action_dim(&self) -> usize {
        0
    }
    fn params(&self) -> &ParamSet {
        &self.params
    }
    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }
    fn step(&self, tape: &mut Tape, params: &[Var], state: Var, action: Option<Var>, _rng: Option<&mut SimRng>) -> Result<Prediction> {
        check_dims(self, tape, state, action)?;
        let z = tape.mul(state, params[1])?;
        let g = tape.sigmoid(z);
        let mean = tape.mul(g, params[0])?;
        Ok(Prediction { mean, std: None })
    }
}

impl InitKind {
    fn stream(self) -> u64 {
        match self {
            InitKind::Default => 1,
            InitKind::Uniform => 2,
            InitKind::Xavier => 3,
        }
    }

    /// Half-width of the uniform weight distribution.
    pub fn bound(self, fan_in: usize, fan_out: usize) -> f64 {
        match self {
            InitKind::Default => 1.0 / (fan_in as f64).sqrt(),
            InitKind::Uniform => 1.0,
            InitKind::Xavier => (6.0 / (fan_in + fan_out) as f64).sqrt(),
        }
    }

    pub(crate) fn draw(self, fan_in: usize, fan_out: usize, rng: &mut SimRng) -> f64 {
        let b = self.bound(fan_in, fan_out);
        rng.gen_range(-b..=b)
    }
}
