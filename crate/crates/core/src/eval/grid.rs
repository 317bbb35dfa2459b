use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::r2::{r2_bar, relative_improvement};
use crate::autodiff::OptimizerConfig;
use crate::error::{Error, Result};
use crate::model::ModelChoice;
use crate::multistep::{effective_horizon, exp_weights, train, LossConfig, TrainConfig, WeightProfile};
use crate::rng::{derive_seed, rng_for};
use crate::stats::{mean, sample_std};
use crate::systems::TrajectoryDataset;

/// β values searched by default.
pub const BETA_GRID: [f64; 10] = [0.1, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 20.0];

/// Fold means closer than this count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSearchConfig {
    pub h: usize,
    #[serde(default = "default_grid")]
    pub betas: Vec<f64>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Evaluation horizon of R̄2.
    pub eval_h: usize,
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub model: ModelChoice,
    #[serde(default)]
    pub use_true_state: bool,
    pub seed: u64,
}

fn default_grid() -> Vec<f64> {
    BETA_GRID.to_vec()
}
fn default_folds() -> usize {
    3
}
fn default_batch() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub h: usize,
    pub beta: f64,
    pub fold: usize,
    /// R̄2 on the held-out fold; `None` when training or evaluation failed.
    pub r2bar: Option<f64>,
    /// R̄2 on the separate test episodes, when given.
    pub test_r2bar: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSummary {
    pub beta: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchRecord {
    pub h: usize,
    pub betas: Vec<f64>,
    pub folds: usize,
    pub eval_h: usize,
    pub cells: Vec<GridCell>,
    pub per_beta: Vec<BetaSummary>,
    pub selected_beta: f64,
    pub effective_horizon: f64,
    /// One-step model trained and scored on the same folds.
    pub baseline: Vec<GridCell>,
    pub relative_improvement: Option<f64>,
}

impl GridSearchRecord {
    pub fn selected_cells(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(move |c| c.beta == self.selected_beta)
    }
}

/// Split episodes into `k` shuffled folds of near-equal size.
pub fn fold_partition(episodes: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || episodes.len() < k {
        return Err(Error::InvalidArgument(format!("cannot split {} episodes into {k} folds", episodes.len())));
    }
    let mut shuffled = episodes.to_vec();
    shuffled.shuffle(&mut rng_for(seed, &[0xf01d]));
    let mut folds = vec![Vec::new(); k];
    for (i, e) in shuffled.into_iter().enumerate() {
        folds[i % k].push(e);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Index of the best mean, preferring the smallest β among near-ties.
fn select(per_beta: &[BetaSummary]) -> Option<usize> {
    let best = per_beta.iter().filter_map(|b| b.mean).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return None;
    }
    per_beta
        .iter()
        .enumerate()
        .filter(|(_, b)| b.mean.is_some_and(|m| m >= best - TIE_TOLERANCE))
        .min_by(|a, b| a.1.beta.total_cmp(&b.1.beta))
        .map(|(i, _)| i)
}

fn run_cell(
    ds: &TrajectoryDataset,
    train_eps: &[usize],
    valid_eps: &[usize],
    test_eps: Option<&[usize]>,
    profile: WeightProfile,
    cfg: &GridSearchConfig,
    fold: usize,
) -> Result<(f64, Option<f64>)> {
    let seed = derive_seed(cfg.seed, &[fold as u64]);
    let mut model = cfg.model.build(ds, train_eps, cfg.use_true_state, seed)?;
    let tc = TrainConfig {
        loss: LossConfig::mse(profile),
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        optimizer: cfg.optimizer,
        seed,
        use_true_state: cfg.use_true_state,
        record_wall_time: false,
    };
    train(&mut model, ds, train_eps, &[], &tc)?;
    let r = r2_bar(&model, ds, valid_eps, cfg.eval_h, cfg.use_true_state)?;
    let t = test_eps.map(|t| r2_bar(&model, ds, t, cfg.eval_h, cfg.use_true_state)).transpose()?;
    Ok((r, t))
}

/// Cross-validated search for the β of the exponential weight profile.
///
/// Every (β, fold) cell trains on the other folds and scores R̄2 on its own
/// fold; cells of the same fold share the model seed. A one-step baseline is
/// trained on the same folds. Failed cells are logged and left out.
pub fn grid_search_beta(
    ds: &TrajectoryDataset,
    episodes: &[usize],
    test_episodes: Option<&[usize]>,
    cfg: &GridSearchConfig,
) -> Result<GridSearchRecord> {
    if cfg.betas.is_empty() {
        return Err(Error::InvalidArgument("empty β grid".into()));
    }
    let folds = fold_partition(episodes, cfg.folds, cfg.seed)?;
    let profiles: Vec<WeightProfile> = cfg.betas.iter().map(|&b| exp_weights(cfg.h, b)).collect::<Result<_>>()?;
    // the last "β" slot is the one-step baseline
    let jobs: Vec<(usize, usize)> =
        (0..=cfg.betas.len()).flat_map(|b| (0..cfg.folds).map(move |f| (b, f))).collect();
    // jobs are ordered β-major, so results come back the same way
    let results: Vec<GridCell> = jobs
        .par_iter()
        .map(|&(b, f)| {
            let valid = &folds[f];
            let train_eps: Vec<usize> = folds.iter().enumerate().filter(|(i, _)| *i != f).flat_map(|(_, v)| v.clone()).collect();
            let (h, beta, profile) = if b < cfg.betas.len() {
                (cfg.h, cfg.betas[b], profiles[b].clone())
            } else {
                (1, 1.0, WeightProfile::one_step(1).expect("h = 1 is valid"))
            };
            let out = run_cell(ds, &train_eps, valid, test_episodes, profile, cfg, f);
            if let Err(e) = &out {
                log::warn!("grid cell h={h} beta={beta} fold={f} failed: {e}");
            }
            let (r2bar, test_r2bar) = match out {
                Ok((r, t)) => (Some(r), t),
                Err(_) => (None, None),
            };
            GridCell { h, beta, fold: f, r2bar, test_r2bar }
        })
        .collect();
    let mut cells = results;
    let baseline = cells.split_off(cfg.betas.len() * cfg.folds);

    let per_beta: Vec<BetaSummary> = cfg
        .betas
        .iter()
        .enumerate()
        .map(|(i, &beta)| {
            let vals: Vec<f64> =
                cells[i * cfg.folds..(i + 1) * cfg.folds].iter().filter_map(|c| c.r2bar).collect();
            let failed = cfg.folds - vals.len();
            let ok = !vals.is_empty() && vals.iter().all(|v| v.is_finite());
            BetaSummary {
                beta,
                mean: ok.then(|| mean(&vals)),
                std: ok.then(|| sample_std(&vals)),
                failed,
            }
        })
        .collect();
    let sel = select(&per_beta).ok_or_else(|| Error::InvalidArgument("every grid cell failed".into()))?;
    let selected_beta = cfg.betas[sel];
    let base_vals: Vec<f64> = baseline.iter().filter_map(|c| c.r2bar).collect();
    let relative = if base_vals.len() == cfg.folds {
        per_beta[sel].mean.and_then(|m| relative_improvement(m, mean(&base_vals)).ok())
    } else {
        None
    };
    Ok(GridSearchRecord {
        h: cfg.h,
        betas: cfg.betas.clone(),
        folds: cfg.folds,
        eval_h: cfg.eval_h,
        cells,
        per_beta,
        selected_beta,
        effective_horizon: effective_horizon(&profiles[sel]),
        baseline,
        relative_improvement: relative,
    })
}
