use serde::{Deserialize, Serialize};

use super::{check_dims, DynamicsModel, InitKind, Prediction};
use crate::autodiff::{ParamSet, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::rng::{rng_for, SimRng};
use crate::stats::KahanSum;
use crate::systems::TrajectoryDataset;

pub const SIGMA_MIN: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpConfig {
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
    /// Range of the tanh mean head, in units of the delta scale.
    pub head_scale: f64,
    pub gaussian: bool,
    /// Upper bound of the predicted standard deviation.
    pub sigma_max: f64,
    pub init: InitKind,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self { hidden: 64, layers: 2, dropout: 0.1, head_scale: 3.0, gaussian: false, sigma_max: 1.0, init: InitKind::Default }
    }
}

/// Affine input standardization and a per-dimension delta scale.
///
/// Deltas are only scaled, never shifted, so a zero network output means
/// "no change".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub delta_scale: Vec<f64>,
}

fn safe_scale(v: f64) -> f64 {
    if v > 1e-12 && v.is_finite() {
        v
    } else {
        1.0
    }
}

impl Normalizer {
    pub fn identity(d_in: usize, d_s: usize) -> Self {
        Self { input_mean: vec![0.0; d_in], input_std: vec![1.0; d_in], delta_scale: vec![1.0; d_s] }
    }

    /// Fit from rows of inputs `(s, a)` and state deltas.
    pub fn fit(inputs: &[Vec<f64>], deltas: &[Vec<f64>]) -> Result<Self> {
        if inputs.is_empty() || deltas.is_empty() {
            return Err(Error::InvalidArgument("cannot fit a normalizer on no data".into()));
        }
        let n = inputs.len() as f64;
        let d_in = inputs[0].len();
        let d_s = deltas[0].len();
        let mut input_mean = vec![0.0; d_in];
        let mut input_std = vec![1.0; d_in];
        for j in 0..d_in {
            let m = inputs.iter().map(|r| r[j]).collect::<KahanSum>().value() / n;
            let v = inputs.iter().map(|r| (r[j] - m) * (r[j] - m)).collect::<KahanSum>().value() / n;
            input_mean[j] = m;
            input_std[j] = safe_scale(v.sqrt());
        }
        let nd = deltas.len() as f64;
        let delta_scale = (0..d_s)
            .map(|j| safe_scale((deltas.iter().map(|r| r[j] * r[j]).collect::<KahanSum>().value() / nd).sqrt()))
            .collect();
        Ok(Self { input_mean, input_std, delta_scale })
    }

    /// Fit on the transitions of the given episodes, read from the training channel.
    pub fn fit_dataset(ds: &TrajectoryDataset, episodes: &[usize], use_true_state: bool) -> Result<Self> {
        let mut inputs = Vec::new();
        let mut deltas = Vec::new();
        for &e in episodes {
            let traj = &ds.trajectories[e];
            let xs = traj.channel(use_true_state);
            for t in 0..traj.len() {
                let mut row = xs[t].clone();
                row.extend_from_slice(&traj.actions[t]);
                inputs.push(row);
                deltas.push(xs[t + 1].iter().zip(&xs[t]).map(|(b, a)| b - a).collect());
            }
        }
        Self::fit(&inputs, &deltas)
    }

    pub fn normalize(&self, input: &[f64]) -> Vec<f64> {
        input.iter().zip(&self.input_mean).zip(&self.input_std).map(|((x, m), s)| (x - m) / s).collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.input_mean).zip(&self.input_std).map(|((z, m), s)| z * s + m).collect()
    }
}

/// Two tanh hidden layers predicting the state delta, with a tanh-bounded
/// mean head and an optional tanh-bounded log-σ head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpDeltaModel {
    pub config: MlpConfig,
    pub d_s: usize,
    pub d_a: usize,
    pub normalizer: Normalizer,
    params: ParamSet,
}

impl MlpDeltaModel {
    pub fn new(d_s: usize, d_a: usize, config: MlpConfig, normalizer: Normalizer, seed: u64) -> Result<Self> {
        if d_s == 0 || config.hidden == 0 || config.layers == 0 {
            return Err(Error::InvalidArgument("MLP needs d_s, hidden and layers >= 1".into()));
        }
        if !(0.0..1.0).contains(&config.dropout) {
            return Err(Error::InvalidArgument(format!("dropout must be in [0, 1), got {}", config.dropout)));
        }
        if !(config.sigma_max > SIGMA_MIN) || !(config.head_scale > 0.0) {
            return Err(Error::InvalidArgument("sigma_max must exceed 1e-4 and head_scale be positive".into()));
        }
        if normalizer.input_mean.len() != d_s + d_a || normalizer.delta_scale.len() != d_s {
            return Err(Error::DimMismatch { expected: d_s + d_a, got: normalizer.input_mean.len() });
        }
        let mut rng = rng_for(seed, &[0x31f, config.init as u64]);
        let mut params = ParamSet::new();
        let mut layer = |params: &mut ParamSet, name: &str, fan_in: usize, fan_out: usize| {
            let w = (0..fan_in * fan_out).map(|_| config.init.draw(fan_in, fan_out, &mut rng)).collect();
            let b = match config.init {
                InitKind::Xavier => vec![0.0; fan_out],
                _ => (0..fan_out).map(|_| config.init.draw(fan_in, fan_out, &mut rng)).collect(),
            };
            params.push(format!("{name}.w"), Tensor::matrix(fan_in, fan_out, w));
            params.push(format!("{name}.b"), Tensor::matrix(1, fan_out, b));
        };
        let mut fan_in = d_s + d_a;
        for l in 0..config.layers {
            layer(&mut params, &format!("hidden{l}"), fan_in, config.hidden);
            fan_in = config.hidden;
        }
        layer(&mut params, "mean", config.hidden, d_s);
        if config.gaussian {
            layer(&mut params, "logstd", config.hidden, d_s);
        }
        Ok(Self { config, d_s, d_a, normalizer, params })
    }

    pub(crate) fn from_parts(config: MlpConfig, d_s: usize, d_a: usize, normalizer: Normalizer, params: ParamSet) -> Self {
        Self { config, d_s, d_a, normalizer, params }
    }

    /// Set the mean head (and the σ head, if any) to zero.
    pub fn zero_output_layer(&mut self) {
        let names: Vec<String> = self.params.names().to_vec();
        for (i, n) in names.iter().enumerate() {
            if n.starts_with("mean.") {
                self.params.get_mut(i).data_mut().fill(0.0);
            }
        }
    }

    fn head_index(&self, name: &str) -> usize {
        self.params.names().iter().position(|n| n == name).expect("head exists")
    }
}

impl DynamicsModel for MlpDeltaModel {
    fn kind(&self) -> &'static str {
        "mlp"
    }
    fn state_dim(&self) -> usize {
        self.d_s
    }
    fn action_dim(&self) -> usize {
        self.d_a
    }
    fn params(&self) -> &ParamSet {
        &self.params
    }
    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }
    fn is_gaussian(&self) -> bool {
        self.config.gaussian
    }

    fn step(&self, tape: &mut Tape, params: &[Var], state: Var, action: Option<Var>, mut rng: Option<&mut SimRng>) -> Result<Prediction> {
        check_dims(self, tape, state, action)?;
        let x = match action {
            Some(a) if self.d_a > 0 => tape.concat_cols(state, a)?,
            _ => state,
        };
        let nm = &self.normalizer;
        let shift = tape.leaf(Tensor::row(nm.input_mean.clone()));
        let inv = tape.leaf(Tensor::row(nm.input_std.iter().map(|s| 1.0 / s).collect()));
        let centred = tape.sub(x, shift)?;
        let mut h = tape.mul(centred, inv)?;
        for l in 0..self.config.layers {
            let z = tape.matmul(h, params[2 * l])?;
            let z = tape.add(z, params[2 * l + 1])?;
            h = tape.tanh(z);
            if let Some(r) = rng.as_deref_mut() {
                if self.config.dropout > 0.0 {
                    h = tape.dropout(h, self.config.dropout, r);
                }
            }
        }
        let mi = self.head_index("mean.w");
        let z = tape.matmul(h, params[mi])?;
        let z = tape.add(z, params[mi + 1])?;
        let t = tape.tanh(z);
        let scale = tape.leaf(Tensor::row(nm.delta_scale.iter().map(|s| s * self.config.head_scale).collect()));
        let delta = tape.mul(t, scale)?;
        let mean = tape.add(state, delta)?;

        let std = if self.config.gaussian {
            let si = self.head_index("logstd.w");
            let z = tape.matmul(h, params[si])?;
            let z = tape.add(z, params[si + 1])?;
            let t = tape.tanh(z);
            // log σ runs over [ln σ_min, ln σ_max] as tanh runs over [-1, 1]
            let (lo, hi) = (SIGMA_MIN.ln(), self.config.sigma_max.ln());
            let half = 0.5 * (hi - lo);
            let log_sigma = tape.scale(t, half);
            let log_sigma = tape.add_scalar(log_sigma, lo + half);
            Some(tape.exp(log_sigma))
        } else {
            None
        };
        Ok(Prediction { mean, std })
    }
}
