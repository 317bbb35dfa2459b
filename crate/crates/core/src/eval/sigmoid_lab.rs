use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{OptimizerConfig, OptimizerKind, Tensor};
use crate::error::{Error, Result};
use crate::model::{DynamicsModel, InitKind, SigmoidModel};
use crate::multistep::{train, LossConfig, TrainConfig, WeightProfile};
use crate::rng::{derive_seed, rng_for};
use crate::stats::{mean, stratified_bootstrap, Interval};
use crate::systems::{SigmoidSystem, Trajectory, TrajectoryDataset};

fn two_step_mse(m: &SigmoidModel, s0: &[f64], o1: &[f64], o2: &[f64], alpha: f64) -> f64 {
    let (t1, t2) = m.thetas();
    let f = |s: f64| t1 * crate::autodiff::sigmoid(t2 * s);
    let n = s0.len() as f64;
    s0.iter()
        .zip(o1)
        .zip(o2)
        .map(|((&s, &a), &b)| {
            let p1 = f(s);
            let p2 = f(p1);
            alpha * (p1 - a).powi(2) + (1.0 - alpha) * (p2 - b).powi(2)
        })
        .sum::<f64>()
        / n
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeConfig {
    pub theta_true: (f64, f64),
    pub alpha: f64,
    pub sigma: f64,
    /// `(low, high, points)` for θ₁.
    pub theta1: (f64, f64, usize),
    pub theta2: (f64, f64, usize),
    pub n_draws: usize,
    pub n_samples: usize,
    pub s0_range: (f64, f64),
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeScan {
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    /// Mean loss over draws, `θ₁`-major.
    pub mean_loss: Vec<f64>,
    pub argmins: Vec<(f64, f64)>,
    pub mean_argmin: (f64, f64),
    /// Mean Euclidean distance of the per-draw argmins to `θ_true`.
    pub mean_distance: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Two-step loss of the sigmoid model over a parameter grid, for several
/// noise draws. Draws depend only on their index, not on σ.
pub fn loss_landscape_scan(cfg: &LandscapeConfig) -> Result<LandscapeScan> {
    if cfg.n_draws == 0 || cfg.n_samples == 0 || cfg.theta1.2 == 0 || cfg.theta2.2 == 0 {
        return Err(Error::InvalidArgument("landscape scan needs draws, samples and grid points".into()));
    }
    let sys = SigmoidSystem::new(cfg.theta_true.0, cfg.theta_true.1, cfg.sigma)?;
    let mut rng = rng_for(cfg.seed, &[0x1a4d]);
    let s0: Vec<f64> = (0..cfg.n_samples).map(|_| rng.gen_range(cfg.s0_range.0..=cfg.s0_range.1)).collect();
    let g1 = linspace(cfg.theta1.0, cfg.theta1.1, cfg.theta1.2);
    let g2 = linspace(cfg.theta2.0, cfg.theta2.1, cfg.theta2.2);
    let surfaces: Vec<Vec<f64>> = (0..cfg.n_draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = rng_for(cfg.seed, &[0xd4a, d as u64]);
            let mut o1 = Vec::with_capacity(s0.len());
            let mut o2 = Vec::with_capacity(s0.len());
            for &s in &s0 {
                let s1 = sys.apply(s);
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                o1.push(s1 + cfg.sigma * z1);
                o2.push(sys.apply(s1) + cfg.sigma * z2);
            }
            let mut surf = Vec::with_capacity(g1.len() * g2.len());
            for &a in &g1 {
                for &b in &g2 {
                    surf.push(two_step_mse(&SigmoidModel::new(a, b), &s0, &o1, &o2, cfg.alpha));
                }
            }
            surf
        })
        .collect();
    let cells = g1.len() * g2.len();
    let mean_loss: Vec<f64> = (0..cells).map(|i| surfaces.iter().map(|s| s[i]).sum::<f64>() / cfg.n_draws as f64).collect();
    let argmins: Vec<(f64, f64)> = surfaces
        .iter()
        .map(|s| {
            let i = (0..cells).min_by(|&a, &b| s[a].total_cmp(&s[b])).expect("nonempty grid");
            (g1[i / g2.len()], g2[i % g2.len()])
        })
        .collect();
    let n = argmins.len() as f64;
    let mean_argmin = (argmins.iter().map(|p| p.0).sum::<f64>() / n, argmins.iter().map(|p| p.1).sum::<f64>() / n);
    let mean_distance = argmins
        .iter()
        .map(|p| ((p.0 - cfg.theta_true.0).powi(2) + (p.1 - cfg.theta_true.1).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    Ok(LandscapeScan { theta1: g1, theta2: g2, mean_loss, argmins, mean_argmin, mean_distance })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationConfig {
    pub theta_true: (f64, f64),
    pub alphas: Vec<f64>,
    pub optimizers: Vec<OptimizerConfig>,
    pub inits: Vec<InitKind>,
    pub n_starts: usize,
    /// Absolute observation noise levels.
    pub sigmas: Vec<f64>,
    pub n_mc: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub n_train: usize,
    pub n_valid: usize,
    pub s0_range: (f64, f64),
    /// Observe the initial state with noise too, and score on noisy
    /// validation data of the same form.
    pub noisy_inputs: bool,
    pub seed: u64,
}

impl AblationConfig {
    /// 2 optimizers, 3 inits, 10 starts, 3 noise levels, 10 MC draws,
    /// 60 epochs and α ∈ {0, 0.25, 0.5, 0.75, 1}.
    pub fn standard(seed: u64) -> Self {
        Self {
            theta_true: (2.0, 1.5),
            alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            optimizers: vec![OptimizerConfig::adam(0.05), OptimizerConfig::sgd(0.1)],
            inits: vec![InitKind::Default, InitKind::Uniform, InitKind::Xavier],
            n_starts: 10,
            sigmas: vec![0.0, 0.2, 0.4],
            n_mc: 10,
            epochs: 60,
            batch_size: 16,
            n_train: 256,
            n_valid: 10_000,
            s0_range: (-2.0, 2.0),
            noisy_inputs: true,
            seed,
        }
    }
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self::standard(crate::rng::DEFAULT_SEED)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRun {
    pub alpha: f64,
    pub optimizer: OptimizerKind,
    pub init: InitKind,
    pub start: usize,
    pub sigma: f64,
    pub mc: usize,
    pub valid_one_step: f64,
    pub valid_two_step: f64,
    pub param_distance: f64,
}

impl AblationRun {
    pub fn valid_average(&self) -> f64 {
        0.5 * (self.valid_one_step + self.valid_two_step)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub alpha: f64,
    pub runs: usize,
    pub diverged: usize,
    pub one_step: f64,
    pub one_step_ci: Interval,
    pub two_step: f64,
    pub two_step_ci: Interval,
    pub average: f64,
    pub average_ci: Interval,
    pub param_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub runs: Vec<AblationRun>,
    pub summary: Vec<AblationSummary>,
}

impl AblationReport {
    fn argmin(&self, f: impl Fn(&AblationSummary) -> f64) -> f64 {
        self.summary.iter().min_by(|a, b| f(a).total_cmp(&f(b))).map(|s| s.alpha).unwrap_or(f64::NAN)
    }

    pub fn best_alpha_one_step(&self) -> f64 {
        self.argmin(|s| s.one_step)
    }

    pub fn best_alpha_two_step(&self) -> f64 {
        self.argmin(|s| s.two_step)
    }

    pub fn best_alpha_average(&self) -> f64 {
        self.argmin(|s| s.average)
    }
}

/// Datasets of `(o₀, o₁, o₂)` stored as 2-transition trajectories. Without
/// `noisy_inputs` the first observation is the clean initial state.
fn lab_dataset(sys: &SigmoidSystem, s0: &[f64], sigma: f64, noisy_inputs: bool, rng: &mut impl Rng) -> Result<TrajectoryDataset> {
    let trajs = s0
        .iter()
        .map(|&s| {
            let s1 = sys.apply(s);
            let s2 = sys.apply(s1);
            let z: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let o0 = if noisy_inputs { s + sigma * z[0] } else { s };
            Trajectory {
                states: vec![vec![s], vec![s1], vec![s2]],
                actions: vec![vec![], vec![]],
                observations: Some(vec![vec![o0], vec![s1 + sigma * z[1]], vec![s2 + sigma * z[2]]]),
            }
        })
        .collect();
    TrajectoryDataset::new("sigmoid", 1, 0, 0.0, 0, trajs)
}

/// Train the two-parameter sigmoid network on the two-step loss across
/// optimizers, initializations, starts, noise levels and noise draws, and
/// score it on held-out one- and two-step validation data.
pub fn sigmoid_ablation(cfg: &AblationConfig) -> Result<AblationReport> {
    if cfg.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) || cfg.n_train == 0 || cfg.n_valid == 0 {
        return Err(Error::InvalidArgument("ablation needs alphas in [0, 1] and nonempty datasets".into()));
    }
    let sys = SigmoidSystem::new(cfg.theta_true.0, cfg.theta_true.1, 0.0)?;
    let mut vrng = rng_for(cfg.seed, &[0x5a1]);
    let valid_s0: Vec<f64> = (0..cfg.n_valid).map(|_| vrng.gen_range(cfg.s0_range.0..=cfg.s0_range.1)).collect();
    // one validation set per noise level, sharing states and normals
    let valid: Vec<TrajectoryDataset> =
        cfg.sigmas.iter().map(|&sg| lab_dataset(&sys, &valid_s0, sg, cfg.noisy_inputs, &mut vrng.clone())).collect::<Result<_>>()?;
    let all_train: Vec<usize> = (0..cfg.n_train).collect();

    let groups: Vec<(usize, usize, usize, usize)> = (0..cfg.sigmas.len())
        .flat_map(|si| (0..cfg.n_mc).map(move |mc| (si, mc)))
        .flat_map(|(si, mc)| (0..cfg.inits.len()).map(move |ii| (si, mc, ii)))
        .flat_map(|(si, mc, ii)| (0..cfg.n_starts).map(move |st| (si, mc, ii, st)))
        .collect();
    let runs: Vec<AblationRun> = groups
        .par_iter()
        .map(|&(si, mc, ii, start)| -> Result<Vec<AblationRun>> {
            let sigma = cfg.sigmas[si];
            // same states and standard normals at every σ
            let mut rng = rng_for(cfg.seed, &[0xda7a, mc as u64]);
            let s0: Vec<f64> = (0..cfg.n_train).map(|_| rng.gen_range(cfg.s0_range.0..=cfg.s0_range.1)).collect();
            let ds = lab_dataset(&sys, &s0, sigma, cfg.noisy_inputs, &mut rng)?;
            let vobs = |t: usize| -> Vec<f64> { valid[si].trajectories.iter().map(|tr| tr.channel(false)[t][0]).collect() };
            let (v0, v1, v2) = (vobs(0), vobs(1), vobs(2));
            let init = cfg.inits[ii];
            let init_seed = derive_seed(cfg.seed, &[0x1417, start as u64]);
            let mut out = Vec::new();
            for opt in &cfg.optimizers {
                for &alpha in &cfg.alphas {
                    let mut model = SigmoidModel::init(init, init_seed);
                    let profile = WeightProfile::explicit(vec![alpha, 1.0 - alpha])?;
                    let tc = TrainConfig {
                        loss: LossConfig::mse(profile),
                        epochs: cfg.epochs,
                        batch_size: cfg.batch_size,
                        optimizer: *opt,
                        seed: derive_seed(cfg.seed, &[mc as u64, start as u64, ii as u64]),
                        use_true_state: false,
                        record_wall_time: false,
                    };
                    let (one, two) = match train(&mut model, &ds, &all_train, &[], &tc) {
                        Ok(_) => {
                            let p1 = model.predict_batch(&Tensor::matrix(cfg.n_valid, 1, v0.clone()), None)?;
                            let p2 = model.predict_batch(&p1, None)?;
                            let mse = |p: &Tensor, t: &[f64]| {
                                p.data().iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / t.len() as f64
                            };
                            (mse(&p1, &v1), mse(&p2, &v2))
                        }
                        Err(e) => {
                            log::warn!("sigmoid run diverged: {}", e.error);
                            (f64::NAN, f64::NAN)
                        }
                    };
                    let (t1, t2) = model.thetas();
                    out.push(AblationRun {
                        alpha,
                        optimizer: opt.kind,
                        init,
                        start,
                        sigma,
                        mc,
                        valid_one_step: one,
                        valid_two_step: two,
                        param_distance: ((t1 - cfg.theta_true.0).powi(2) + (t2 - cfg.theta_true.1).powi(2)).sqrt(),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut brng = rng_for(cfg.seed, &[0xb5]);
    let summary = cfg
        .alphas
        .iter()
        .map(|&alpha| {
            let sel: Vec<&AblationRun> = runs.iter().filter(|r| r.alpha == alpha).collect();
            let ok: Vec<&AblationRun> = sel.iter().copied().filter(|r| r.valid_two_step.is_finite() && r.valid_one_step.is_finite()).collect();
            let col = |f: &dyn Fn(&AblationRun) -> f64| vec![ok.iter().map(|r| f(r)).collect::<Vec<f64>>()];
            let one = col(&|r| r.valid_one_step);
            let two = col(&|r| r.valid_two_step);
            let avg = col(&|r| r.valid_average());
            let mean_of = |g: &[Vec<f64>]| mean(&g[0]);
            AblationSummary {
                alpha,
                runs: sel.len(),
                diverged: sel.len() - ok.len(),
                one_step: mean_of(&one),
                one_step_ci: stratified_bootstrap(&one, 1000, 0.95, &mut brng, mean_of),
                two_step: mean_of(&two),
                two_step_ci: stratified_bootstrap(&two, 1000, 0.95, &mut brng, mean_of),
                average: mean_of(&avg),
                average_ci: stratified_bootstrap(&avg, 1000, 0.95, &mut brng, mean_of),
                param_distance: mean(&ok.iter().map(|r| r.param_distance).collect::<Vec<_>>()),
            }
        })
        .collect();
    Ok(AblationReport { runs, summary })
}
