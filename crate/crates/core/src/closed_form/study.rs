use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{estimate_theta, Sign, TwoStepSample};
use crate::error::{Error, Result};
use crate::rng::{rng_for, SimRng};
use crate::stats::{mean, stratified_bootstrap, variance, Interval, KahanSum};

/// Which estimator a study row describes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StudyKind {
    MultiStep { alpha: f64 },
    /// α = 1 fitted on `{s → o₁, o₁ → o₂}`.
    Augmented,
    /// α = 1 fitted on targets averaged over two noise realizations.
    Averaging,
}

impl StudyKind {
    pub fn label(&self) -> &'static str {
        match self {
            StudyKind::MultiStep { .. } => "multistep",
            StudyKind::Augmented => "augmented",
            StudyKind::Averaging => "averaging",
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            StudyKind::MultiStep { alpha } => *alpha,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub theta_true: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub n_mc: usize,
    pub seed: u64,
    /// Initial states shared by every simulated dataset.
    #[serde(default = "default_s0")]
    pub s0: Vec<f64>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

fn default_s0() -> Vec<f64> {
    vec![1.0]
}

fn default_bootstrap() -> usize {
    1000
}

impl StudyConfig {
    /// Ten `θ_true` drawn uniformly in (0.3, 0.95), five noise levels, and
    /// α ∈ {0, 0.5, 1}.
    pub fn standard(seed: u64) -> Self {
        Self {
            theta_true: sample_thetas(10, seed),
            sigmas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            alphas: vec![0.0, 0.5, 1.0],
            n_mc: 100,
            seed,
            s0: default_s0(),
            bootstrap: default_bootstrap(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_mc < 2 {
            return Err(Error::InvalidArgument("n_mc must be >= 2".into()));
        }
        if self.theta_true.is_empty() || self.s0.is_empty() {
            return Err(Error::InvalidArgument("theta_true and s0 must be nonempty".into()));
        }
        if self.sigmas.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidArgument("sigmas must be >= 0".into()));
        }
        if self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidArgument("alphas must be in [0, 1]".into()));
        }
        if self.s0.iter().all(|s| *s == 0.0) {
            return Err(Error::InvalidArgument("s0 must contain a nonzero state".into()));
        }
        Ok(())
    }
}

pub fn sample_thetas(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, &[0x7e7a]);
    (0..n).map(|_| rng.gen_range(0.3..0.95)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasVarianceRow {
    pub study: StudyKind,
    pub sigma: f64,
    /// Mean over `θ_true` of `E[θ̂] − θ_true`.
    pub bias: f64,
    pub bias_ci: Interval,
    /// Mean over `θ_true` of `Var[θ̂]`.
    pub variance: f64,
    pub variance_ci: Interval,
    pub samples: usize,
    pub dropped: usize,
}

impl BiasVarianceRow {
    pub fn drop_rate(&self) -> f64 {
        self.dropped as f64 / (self.samples + self.dropped).max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasVarianceReport {
    pub theta_true: Vec<f64>,
    pub n_mc: usize,
    pub rows: Vec<BiasVarianceRow>,
}

impl BiasVarianceReport {
    pub fn find(&self, study: StudyKind, sigma: f64) -> Option<&BiasVarianceRow> {
        self.rows.iter().find(|r| r.study == study && r.sigma == sigma)
    }

    pub fn multistep(&self, alpha: f64, sigma: f64) -> Option<&BiasVarianceRow> {
        self.find(StudyKind::MultiStep { alpha }, sigma)
    }

    /// Long format: one row per (study, α, σ, statistic).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        use crate::systems::fmt_f64;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["study", "alpha", "sigma", "statistic", "value", "ci_lower", "ci_upper", "samples", "dropped"])?;
        for r in &self.rows {
            for (stat, v, ci) in [("bias", r.bias, r.bias_ci), ("variance", r.variance, r.variance_ci)] {
                w.write_record([
                    r.study.label().to_string(),
                    fmt_f64(r.study.alpha()),
                    fmt_f64(r.sigma),
                    stat.to_string(),
                    fmt_f64(v),
                    fmt_f64(ci.lower),
                    fmt_f64(ci.upper),
                    r.samples.to_string(),
                    r.dropped.to_string(),
                ])?;
            }
        }
        w.flush()
    }
}

/// Standard normal draws for one simulated dataset: `z₁`, `z₂` and a second
/// realization `z₁'` per initial state. They depend only on `(θ index, draw)`,
/// so every σ, α and estimator sees the same noise.
struct Draw {
    z1: Vec<f64>,
    z2: Vec<f64>,
    z1b: Vec<f64>,
}

fn draw(seed: u64, k: usize, m: usize, n: usize) -> Draw {
    let mut rng = rng_for(seed, &[k as u64, m as u64]);
    let normals = |rng: &mut SimRng| (0..n).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>();
    let z1 = normals(&mut rng);
    let z2 = normals(&mut rng);
    let z1b = normals(&mut rng);
    Draw { z1, z2, z1b }
}

fn estimate(kind: StudyKind, theta: f64, sigma: f64, s0: &[f64], d: &Draw) -> Option<f64> {
    let samples: Vec<TwoStepSample> = s0
        .iter()
        .enumerate()
        .map(|(i, &s)| TwoStepSample::new(s, theta * s + sigma * d.z1[i], theta * theta * s + sigma * d.z2[i]))
        .collect();
    match kind {
        StudyKind::MultiStep { alpha } => estimate_theta(alpha, &samples, Sign::of(theta)).ok().map(|e| e.theta_hat),
        StudyKind::Augmented => {
            let num: KahanSum = samples.iter().map(|x| x.s0 * x.o1 + x.o1 * x.o2).collect();
            let den: KahanSum = samples.iter().map(|x| x.s0 * x.s0 + x.o1 * x.o1).collect();
            (den.value() > 0.0).then(|| num.value() / den.value())
        }
        StudyKind::Averaging => {
            let num: KahanSum = samples
                .iter()
                .enumerate()
                .map(|(i, x)| x.s0 * 0.5 * (x.o1 + theta * x.s0 + sigma * d.z1b[i]))
                .collect();
            let den: KahanSum = samples.iter().map(|x| x.s0 * x.s0).collect();
            Some(num.value() / den.value())
        }
    }
}

fn group_bias(groups: &[Vec<f64>]) -> f64 {
    let means: Vec<f64> = groups.iter().filter(|g| !g.is_empty()).map(|g| mean(g)).collect();
    mean(&means)
}

fn group_variance(groups: &[Vec<f64>]) -> f64 {
    let vars: Vec<f64> = groups.iter().filter(|g| !g.is_empty()).map(|g| variance(g)).collect();
    mean(&vars)
}

fn run_cells(cfg: &StudyConfig, kinds: &[StudyKind]) -> Result<BiasVarianceReport> {
    cfg.validate()?;
    let n = cfg.s0.len();
    let draws: Vec<Vec<Draw>> = (0..cfg.theta_true.len())
        .into_par_iter()
        .map(|k| (0..cfg.n_mc).map(|m| draw(cfg.seed, k, m, n)).collect())
        .collect();
    let cells: Vec<(usize, StudyKind, usize, f64)> = kinds
        .iter()
        .enumerate()
        .flat_map(|(ki, &kind)| cfg.sigmas.iter().enumerate().map(move |(si, &sigma)| (ki, kind, si, sigma)))
        .collect();
    let rows = cells
        .into_par_iter()
        .map(|(ki, kind, si, sigma)| {
            let mut dropped = 0;
            let groups: Vec<Vec<f64>> = cfg
                .theta_true
                .iter()
                .zip(&draws)
                .map(|(&theta, ds)| {
                    ds.iter()
                        .filter_map(|d| {
                            let e = estimate(kind, theta, sigma, &cfg.s0, d);
                            if e.is_none() {
                                dropped += 1;
                            }
                            e.map(|t| t - theta)
                        })
                        .collect()
                })
                .collect();
            let samples: usize = groups.iter().map(Vec::len).sum();
            let bias = group_bias(&groups);
            let variance = group_variance(&groups);
            let (bias_ci, variance_ci) = if cfg.bootstrap == 0 || samples == 0 {
                (Interval { lower: bias, upper: bias }, Interval { lower: variance, upper: variance })
            } else {
                let mut rng = rng_for(cfg.seed, &[0xb0075, ki as u64, si as u64]);
                let b = stratified_bootstrap(&groups, cfg.bootstrap, 0.95, &mut rng, group_bias);
                let v = stratified_bootstrap(&groups, cfg.bootstrap, 0.95, &mut rng, group_variance);
                (b, v)
            };
            BiasVarianceRow { study: kind, sigma, bias, bias_ci, variance, variance_ci, samples, dropped }
        })
        .collect();
    Ok(BiasVarianceReport { theta_true: cfg.theta_true.clone(), n_mc: cfg.n_mc, rows })
}

/// Bias and variance of `θ̂(α)` for every configured α and σ.
///
/// Datasets where the estimator does not exist are dropped and counted.
pub fn bias_variance_study(cfg: &StudyConfig) -> Result<BiasVarianceReport> {
    let kinds: Vec<StudyKind> = cfg.alphas.iter().map(|&alpha| StudyKind::MultiStep { alpha }).collect();
    run_cells(cfg, &kinds)
}

pub fn augmented_baseline_study(cfg: &StudyConfig) -> Result<BiasVarianceReport> {
    run_cells(cfg, &[StudyKind::Augmented])
}

pub fn averaging_baseline_study(cfg: &StudyConfig) -> Result<BiasVarianceReport> {
    run_cells(cfg, &[StudyKind::Averaging])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorCheck {
    pub theta: f64,
    pub s: f64,
    pub sigma: f64,
    /// `σ² / (4θ²s²)`.
    pub approx: f64,
    pub empirical: f64,
    pub relative_error: f64,
    /// `σ / (θ²|s|) < 0.1`.
    pub in_regime: bool,
    pub dropped: usize,
}

/// Compare the first-order variance of `θ̂₀` with a Monte Carlo estimate.
pub fn taylor_variance_check(theta_true: f64, s: f64, sigma: f64, n_mc: usize, seed: u64) -> Result<TaylorCheck> {
    if n_mc < 2 || s == 0.0 || theta_true == 0.0 || !(sigma >= 0.0) {
        return Err(Error::InvalidArgument("taylor check needs n_mc >= 2, s != 0, theta != 0, sigma >= 0".into()));
    }
    let hint = Sign::of(theta_true);
    let results: Vec<Option<f64>> = (0..n_mc)
        .into_par_iter()
        .map(|m| {
            let mut rng = rng_for(seed, &[0x7a7, m as u64]);
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let sample = TwoStepSample::new(s, theta_true * s + sigma * z1, theta_true * theta_true * s + sigma * z2);
            estimate_theta(0.0, &[sample], hint).ok().map(|e| e.theta_hat)
        })
        .collect();
    let kept: Vec<f64> = results.iter().flatten().copied().collect();
    let dropped = n_mc - kept.len();
    let approx = sigma * sigma / (4.0 * theta_true * theta_true * s * s);
    let empirical = if kept.len() >= 2 { variance(&kept) } else { f64::NAN };
    let relative_error = if approx == 0.0 { (empirical - approx).abs() } else { (empirical - approx).abs() / approx };
    let in_regime = sigma / (theta_true * theta_true * s.abs()) < 0.1;
    Ok(TaylorCheck { theta: theta_true, s, sigma, approx, empirical, relative_error, in_regime, dropped })
}
