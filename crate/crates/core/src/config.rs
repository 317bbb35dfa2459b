//! Run configuration for the command-line front end.
//!
//! A TOML file with a top-level `seed` and one section per command. Unknown
//! keys are rejected. Command-line flags override file values, and the
//! resolved configuration is written next to each command's outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autodiff::OptimizerConfig;
use crate::closed_form::StudyConfig;
use crate::error::{Error, Result};
use crate::eval::{AblationConfig, BETA_GRID};
use crate::model::ModelChoice;
use crate::multistep::{exp_weights, LossConfig, LossKind, Sampling, WeightProfile};
use crate::systems::{CartpoleParams, CartpoleSwingup, LinearSystem, Policy, SigmoidSystem, System};

/// Which channel models are trained and scored on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    #[default]
    Observation,
    TrueState,
}

impl Target {
    pub fn use_true_state(self) -> bool {
        self == Target::TrueState
    }
}

impl std::str::FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "observation" | "obs" => Ok(Self::Observation),
            "true-state" | "state" => Ok(Self::TrueState),
            other => Err(format!("unknown target `{other}` (expected observation or true-state)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Linear,
    Sigmoid,
    #[default]
    Cartpole,
}

impl std::str::FromStr for EnvKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "linear" => Ok(Self::Linear),
            "sigmoid" => Ok(Self::Sigmoid),
            "cartpole" | "cartpole-swingup" => Ok(Self::Cartpole),
            other => Err(format!("unknown env `{other}` (expected linear, sigmoid or cartpole)")),
        }
    }
}

/// Episodes a command reads from a dataset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Train,
    Valid,
    #[default]
    Test,
    All,
}

impl std::str::FromStr for SplitKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Self::Train),
            "valid" => Ok(Self::Valid),
            "test" => Ok(Self::Test),
            "all" => Ok(Self::All),
            other => Err(format!("unknown split `{other}` (expected train, valid, test or all)")),
        }
    }
}

fn out_dir(name: &str) -> PathBuf {
    PathBuf::from("msdyn-out").join(name)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenSection {
    pub env: EnvKind,
    pub episodes: usize,
    pub horizon: usize,
    /// Observation noise as a fraction of each state dimension's range.
    pub noise: f64,
    pub policy: Policy,
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub cartpole: CartpoleParams,
    pub out: PathBuf,
}

impl Default for GenSection {
    fn default() -> Self {
        Self {
            env: EnvKind::Cartpole,
            episodes: 50,
            horizon: 1000,
            noise: 0.0,
            policy: Policy::RandomUniform,
            theta: 0.78,
            theta1: 2.0,
            theta2: 1.5,
            cartpole: CartpoleParams::default(),
            out: out_dir("gen"),
        }
    }
}

impl GenSection {
    pub fn system(&self) -> Result<System> {
        Ok(match self.env {
            EnvKind::Linear => System::Linear(LinearSystem::new(self.theta, 0.0)?),
            EnvKind::Sigmoid => System::Sigmoid(SigmoidSystem::new(self.theta1, self.theta2, 0.0)?),
            EnvKind::Cartpole => System::Cartpole(CartpoleSwingup::new(self.cartpole.clone())?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub h: usize,
    /// Exponential weight parameter. Ignored when `alphas` is set.
    pub beta: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub loss: LossKind,
    pub sampling: Sampling,
    pub model: ModelChoice,
    pub optimizer: OptimizerConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub target: Target,
    /// Record wall-clock time. Makes the record nondeterministic.
    pub wall_time: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            data: None,
            out: out_dir("train"),
            h: 1,
            beta: None,
            alphas: None,
            loss: LossKind::Mse,
            sampling: Sampling::Deterministic,
            model: ModelChoice::default(),
            optimizer: OptimizerConfig::default(),
            epochs: 50,
            batch_size: 64,
            target: Target::Observation,
            wall_time: false,
        }
    }
}

impl TrainSection {
    pub fn profile(&self) -> Result<WeightProfile> {
        match (&self.alphas, self.beta) {
            (Some(a), _) => {
                if a.len() != self.h {
                    return Err(Error::Config(format!("{} alphas given for h = {}", a.len(), self.h)));
                }
                WeightProfile::explicit(a.clone())
            }
            (None, Some(b)) => exp_weights(self.h, b),
            (None, None) => exp_weights(self.h, 1.0),
        }
    }

    pub fn loss_config(&self) -> Result<LossConfig> {
        Ok(LossConfig { profile: self.profile()?, kind: self.loss, sampling: self.sampling })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub data: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: PathBuf,
    /// Largest horizon `H` of the R² curve.
    pub horizon: usize,
    pub split: SplitKind,
    pub target: Target,
    /// Render R² as ×1000 integers.
    pub millesimal: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            data: None,
            checkpoint: None,
            out: out_dir("eval"),
            horizon: 50,
            split: SplitKind::Test,
            target: Target::Observation,
            millesimal: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub h: usize,
    pub betas: Vec<f64>,
    pub folds: usize,
    pub eval_h: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    pub model: ModelChoice,
    pub target: Target,
    pub millesimal: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            data: None,
            out: out_dir("gridsearch"),
            h: 2,
            betas: BETA_GRID.to_vec(),
            folds: 3,
            eval_h: 50,
            epochs: 30,
            batch_size: 64,
            optimizer: OptimizerConfig::default(),
            model: ModelChoice::default(),
            target: Target::Observation,
            millesimal: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearLabSection {
    pub out: PathBuf,
    /// Empty means ten values drawn uniformly in (0.3, 0.95).
    pub theta_true: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub n_mc: usize,
    pub s0: Vec<f64>,
    pub bootstrap: usize,
    /// Also run the augmented-data and noise-averaging estimators.
    pub baselines: bool,
    /// First-order variance check of `θ̂₀` at `(taylor_theta, taylor_s)`,
    /// skipped when `taylor_n_mc` is 0.
    pub taylor_theta: f64,
    pub taylor_s: f64,
    pub taylor_sigmas: Vec<f64>,
    pub taylor_n_mc: usize,
}

impl Default for LinearLabSection {
    fn default() -> Self {
        let std = StudyConfig::standard(0);
        Self {
            out: out_dir("linear-lab"),
            theta_true: Vec::new(),
            sigmas: std.sigmas,
            alphas: std.alphas,
            n_mc: std.n_mc,
            s0: std.s0,
            bootstrap: std.bootstrap,
            baselines: true,
            taylor_theta: 0.78,
            taylor_s: 1.0,
            taylor_sigmas: vec![0.005, 0.01, 0.02, 0.05],
            taylor_n_mc: 20_000,
        }
    }
}

impl LinearLabSection {
    pub fn study(&self, seed: u64) -> StudyConfig {
        let mut cfg = StudyConfig::standard(seed);
        if !self.theta_true.is_empty() {
            cfg.theta_true = self.theta_true.clone();
        }
        cfg.sigmas = self.sigmas.clone();
        cfg.alphas = self.alphas.clone();
        cfg.n_mc = self.n_mc;
        cfg.s0 = self.s0.clone();
        cfg.bootstrap = self.bootstrap;
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandscapeSection {
    pub alphas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub theta1: (f64, f64, usize),
    pub theta2: (f64, f64, usize),
    pub n_draws: usize,
    pub n_samples: usize,
    pub s0_range: (f64, f64),
}

impl Default for LandscapeSection {
    fn default() -> Self {
        Self {
            alphas: vec![1.0, 0.5, 0.0],
            sigmas: vec![0.0, 0.2, 0.4],
            theta1: (1.0, 3.0, 81),
            theta2: (0.5, 2.5, 81),
            n_draws: 10,
            n_samples: 100,
            s0_range: (-2.0, 2.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SigmoidLabSection {
    pub out: PathBuf,
    pub run_ablation: bool,
    pub run_landscape: bool,
    pub ablation: AblationConfig,
    pub landscape: LandscapeSection,
}

impl Default for SigmoidLabSection {
    fn default() -> Self {
        Self {
            out: out_dir("sigmoid-lab"),
            run_ablation: true,
            run_landscape: true,
            ablation: AblationConfig::default(),
            landscape: LandscapeSection::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen: Option<GenSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gridsearch: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_lab: Option<LinearLabSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmoid_lab: Option<SigmoidLabSection>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Write the configuration as `config.toml` in `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let path = dir.join("config.toml");
        std::fs::write(&path, self.to_toml()?).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("sed = 3").is_err());
        assert!(RunConfig::parse("[train]\nepoch = 3").is_err());
        assert!(RunConfig::parse("[train.model]\nkind = \"mlp\"\nhiden = 3").is_err());
    }

    #[test]
    fn sections_fill_defaults() {
        let c = RunConfig::parse("seed = 7\n[train]\nh = 3\nbeta = 0.5\n[train.model]\nkind = \"mlp\"\nhidden = 16\n").unwrap();
        assert_eq!(c.seed, Some(7));
        let t = c.train.unwrap();
        assert_eq!(t.batch_size, 64);
        assert_eq!(t.profile().unwrap(), exp_weights(3, 0.5).unwrap());
        match t.model {
            ModelChoice::Mlp(m) => assert_eq!((m.hidden, m.layers), (16, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolved_config_roundtrips() {
        let c = RunConfig {
            seed: Some(3),
            train: Some(TrainSection::default()),
            gridsearch: Some(GridSection::default()),
            linear_lab: Some(LinearLabSection::default()),
            sigmoid_lab: Some(SigmoidLabSection::default()),
            gen: Some(GenSection::default()),
            eval: Some(EvalSection::default()),
        };
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn alphas_must_match_h() {
        let t = TrainSection { h: 2, alphas: Some(vec![1.0]), ..Default::default() };
        assert!(t.profile().is_err());
    }
}
