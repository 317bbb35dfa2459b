//! Learnable one-step predictors.
//!
//! The linear and sigmoid models predict the next state directly. The MLP
//! predicts a state delta from standardized inputs.

mod mlp;
mod scalar;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use mlp::{MlpConfig, MlpDeltaModel, Normalizer, SIGMA_MIN};
pub use scalar::{LinearModel, SigmoidModel};

use crate::autodiff::{ParamSet, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// `U(±1/√fan_in)`.
    #[default]
    Default,
    /// `U(−1, 1)`.
    Uniform,
    /// `U(±√(6/(fan_in + fan_out)))`.
    Xavier,
}

impl std::str::FromStr for InitKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "default" => Ok(Self::Default),
            "uniform" => Ok(Self::Uniform),
            "xavier" | "xavier-uniform" => Ok(Self::Xavier),
            other => Err(format!("unknown init `{other}` (expected default, uniform or xavier)")),
        }
    }
}

/// Output of one model call on a tape. `std` is set by Gaussian heads.
#[derive(Clone, Copy, Debug)]
pub struct Prediction {
    pub mean: Var,
    pub std: Option<Var>,
}

pub trait DynamicsModel {
    fn kind(&self) -> &'static str;
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;

    fn is_gaussian(&self) -> bool {
        false
    }

    /// Record one prediction for a batch `state: [B, d_s]`, `action: [B, d_a]`.
    /// `params` are the model parameters bound on `tape`. Passing an RNG
    /// selects training mode (dropout on).
    fn step(&self, tape: &mut Tape, params: &[Var], state: Var, action: Option<Var>, rng: Option<&mut SimRng>) -> Result<Prediction>;

    /// Eval-mode batch prediction of the mean.
    fn predict_batch(&self, states: &Tensor, actions: Option<&Tensor>) -> Result<Tensor> {
        let mut tape = Tape::new();
        let p = self.params().bind(&mut tape);
        let s = tape.leaf(states.clone());
        let a = actions.map(|a| tape.leaf(a.clone()));
        let pred = self.step(&mut tape, &p, s, a, None)?;
        Ok(tape.value(pred.mean).clone())
    }

    fn predict(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
        if state.is_empty() {
            return Err(Error::DimMismatch { expected: self.state_dim(), got: 0 });
        }
        let s = Tensor::row(state.to_vec());
        let a = (!action.is_empty()).then(|| Tensor::row(action.to_vec()));
        if a.is_none() && self.action_dim() > 0 {
            return Err(Error::DimMismatch { expected: self.action_dim(), got: 0 });
        }
        Ok(self.predict_batch(&s, a.as_ref())?.into_data())
    }
}

pub(crate) fn check_dims<M: DynamicsModel + ?Sized>(m: &M, tape: &Tape, state: Var, action: Option<Var>) -> Result<()> {
    let s = tape.value(state);
    if s.cols() != m.state_dim() {
        return Err(Error::DimMismatch { expected: m.state_dim(), got: s.cols() });
    }
    match action {
        Some(a) => {
            let a = tape.value(a);
            if a.cols() != m.action_dim() || m.action_dim() == 0 {
                return Err(Error::DimMismatch { expected: m.action_dim(), got: a.cols() });
            }
            if a.rows() != s.rows() {
                return Err(Error::DimMismatch { expected: s.rows(), got: a.rows() });
            }
        }
        None if m.action_dim() > 0 => return Err(Error::DimMismatch { expected: m.action_dim(), got: 0 }),
        None => {}
    }
    Ok(())
}

/// Any of the built-in models.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyModel {
    Linear(LinearModel),
    Sigmoid(SigmoidModel),
    Mlp(MlpDeltaModel),
}

impl AnyModel {
    fn inner(&self) -> &dyn DynamicsModel {
        match self {
            AnyModel::Linear(m) => m,
            AnyModel::Sigmoid(m) => m,
            AnyModel::Mlp(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn DynamicsModel {
        match self {
            AnyModel::Linear(m) => m,
            AnyModel::Sigmoid(m) => m,
            AnyModel::Mlp(m) => m,
        }
    }

    fn spec(&self) -> ModelSpec {
        match self {
            AnyModel::Linear(_) => ModelSpec::Linear,
            AnyModel::Sigmoid(m) => ModelSpec::Sigmoid { init: m.init_kind() },
            AnyModel::Mlp(m) => ModelSpec::Mlp {
                d_s: m.d_s,
                d_a: m.d_a,
                config: m.config.clone(),
                normalizer: m.normalizer.clone(),
            },
        }
    }
}

impl DynamicsModel for AnyModel {
    fn kind(&self) -> &'static str {
        self.inner().kind()
    }
    fn state_dim(&self) -> usize {
        self.inner().state_dim()
    }
    fn action_dim(&self) -> usize {
        self.inner().action_dim()
    }
    fn params(&self) -> &ParamSet {
        self.inner().params()
    }
    fn params_mut(&mut self) -> &mut ParamSet {
        self.inner_mut().params_mut()
    }
    fn is_gaussian(&self) -> bool {
        self.inner().is_gaussian()
    }
    fn step(&self, tape: &mut Tape, params: &[Var], state: Var, action: Option<Var>, rng: Option<&mut SimRng>) -> Result<Prediction> {
        self.inner().step(tape, params, state, action, rng)
    }
}

/// Which model to build for a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelChoice {
    Linear {
        #[serde(default)]
        theta0: f64,
    },
    Sigmoid {
        #[serde(default)]
        init: InitKind,
    },
    Mlp(MlpConfig),
}

impl Default for ModelChoice {
    fn default() -> Self {
        ModelChoice::Mlp(MlpConfig::default())
    }
}

impl ModelChoice {
    /// Build a fresh model for `ds`; the MLP normalizer is fitted on the
    /// training episodes.
    pub fn build(
        &self,
        ds: &crate::systems::TrajectoryDataset,
        train_episodes: &[usize],
        use_true_state: bool,
        seed: u64,
    ) -> Result<AnyModel> {
        let scalar = ds.meta.d_s == 1 && ds.meta.d_a == 0;
        match self {
            ModelChoice::Linear { theta0 } if scalar => Ok(AnyModel::Linear(LinearModel::new(*theta0))),
            ModelChoice::Sigmoid { init } if scalar => Ok(AnyModel::Sigmoid(SigmoidModel::init(*init, seed))),
            ModelChoice::Mlp(cfg) => {
                let norm = Normalizer::fit_dataset(ds, train_episodes, use_true_state)?;
                Ok(AnyModel::Mlp(MlpDeltaModel::new(ds.meta.d_s, ds.meta.d_a, cfg.clone(), norm, seed)?))
            }
            _ => Err(Error::InvalidArgument(format!(
                "model {self:?} needs a 1-dim uncontrolled system, dataset has d_s={} d_a={}",
                ds.meta.d_s, ds.meta.d_a
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModelSpec {
    Linear,
    Sigmoid { init: InitKind },
    Mlp { d_s: usize, d_a: usize, config: MlpConfig, normalizer: Normalizer },
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    format: String,
    model: ModelSpec,
    params: Vec<(String, Vec<usize>)>,
}

const CHECKPOINT_FORMAT: &str = "msdyn-checkpoint-1";

/// JSON header line followed by the parameters as little-endian `f64`.
pub fn checkpoint_bytes(model: &AnyModel) -> Vec<u8> {
    let p = model.params();
    let header = CheckpointHeader {
        format: CHECKPOINT_FORMAT.into(),
        model: model.spec(),
        params: p.names().iter().cloned().zip(p.values().iter().map(|t| t.shape().to_vec())).collect(),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for v in p.flat() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn model_from_checkpoint(bytes: &[u8], path: &Path) -> Result<AnyModel> {
    let perr = |message: String| Error::Parse { path: path.to_path_buf(), line: 1, message };
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| perr("missing checkpoint header".into()))?;
    let header: CheckpointHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| perr(format!("bad checkpoint header: {e}")))?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(perr(format!("unsupported checkpoint format `{}`", header.format)));
    }
    let body = &bytes[nl + 1..];
    let total: usize = header.params.iter().map(|(_, s)| s.iter().product::<usize>()).sum();
    if body.len() != total * 8 {
        return Err(perr(format!("expected {} parameter bytes, found {}", total * 8, body.len())));
    }
    let mut values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut params = ParamSet::new();
    for (name, shape) in &header.params {
        let n = shape.iter().product();
        let data: Vec<f64> = values.by_ref().take(n).collect();
        let t = Tensor::new(shape.clone(), data).map_err(|e| perr(e.to_string()))?;
        params.push(name.clone(), t);
    }
    Ok(match header.model {
        ModelSpec::Linear => AnyModel::Linear(LinearModel::from_params(params)),
        ModelSpec::Sigmoid { init } => AnyModel::Sigmoid(SigmoidModel::from_params(params, init)),
        ModelSpec::Mlp { d_s, d_a, config, normalizer } => {
            AnyModel::Mlp(MlpDeltaModel::from_parts(config, d_s, d_a, normalizer, params))
        }
    })
}

pub fn save_checkpoint(model: &AnyModel, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, checkpoint_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<AnyModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_checkpoint(&bytes, path)
}
