use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::loss::{multistep_loss, nll_multistep_loss, segments, LossConfig, LossKind, Segment, SegmentBatch};
use crate::autodiff::{OptimizerConfig, OptimizerState, ParamSet, Tape};
use crate::error::{Error, Result};
use crate::model::DynamicsModel;
use crate::rng::rng_for;
use crate::systems::TrajectoryDataset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    /// Train on clean states instead of observations.
    #[serde(default)]
    pub use_true_state: bool,
    #[serde(default)]
    pub record_wall_time: bool,
}

impl TrainConfig {
    pub fn new(loss: LossConfig, epochs: usize, seed: u64) -> Self {
        Self {
            loss,
            epochs,
            batch_size: 64,
            optimizer: OptimizerConfig::default(),
            seed,
            use_true_state: false,
            record_wall_time: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_one_step: Option<f64>,
    pub valid_h_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub config: TrainConfig,
    pub model: String,
    pub segments: usize,
    pub epochs: Vec<EpochRecord>,
    pub params_digest: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_s: Option<f64>,
}

/// A failed run and everything recorded up to the failure.
#[derive(Debug)]
pub struct TrainError {
    pub error: Error,
    pub partial: TrainRecord,
}

impl From<TrainError> for Error {
    fn from(e: TrainError) -> Self {
        e.error
    }
}

/// SHA-256 of the parameters as little-endian bytes.
pub fn params_digest(params: &ParamSet) -> String {
    let mut h = Sha256::new();
    for v in params.flat() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// One-step and h-step MSE of eval-mode rollouts.
pub fn validation_mse<M: DynamicsModel + ?Sized>(model: &M, segs: &[Segment]) -> Result<(f64, f64)> {
    let h = segs[0].targets.len();
    let mut sums = (0.0, 0.0);
    for chunk in segs.chunks(1024) {
        let refs: Vec<&Segment> = chunk.iter().collect();
        let batch = SegmentBatch::new(&refs)?;
        let mut tape = Tape::new();
        let params = model.params().bind(&mut tape);
        let profile = super::WeightProfile::one_step(h)?;
        let out = multistep_loss(model, &mut tape, &params, &batch, &profile, None)?;
        sums.0 += out.per_horizon[0] * chunk.len() as f64;
        sums.1 += out.per_horizon[h - 1] * chunk.len() as f64;
    }
    let n = segs.len() as f64;
    Ok((sums.0 / n, sums.1 / n))
}

/// Minimize the configured loss over every length-`h` window of the training
/// episodes, shuffled each epoch, with gradients through all compositions.
pub fn train<M: DynamicsModel + ?Sized>(
    model: &mut M,
    ds: &TrajectoryDataset,
    train_episodes: &[usize],
    valid_episodes: &[usize],
    cfg: &TrainConfig,
) -> std::result::Result<TrainRecord, TrainError> {
    let clock = Instant::now();
    let mut record = TrainRecord {
        config: cfg.clone(),
        model: model.kind().to_string(),
        segments: 0,
        epochs: Vec::new(),
        params_digest: params_digest(model.params()),
        wall_time_s: None,
    };
    macro_rules! fail {
        ($e:expr) => {{
            record.params_digest = params_digest(model.params());
            if cfg.record_wall_time {
                record.wall_time_s = Some(clock.elapsed().as_secs_f64());
            }
            return Err(TrainError { error: $e, partial: record });
        }};
    }
    if let Err(e) = cfg.loss.validate(model.is_gaussian()) {
        fail!(e);
    }
    if cfg.batch_size == 0 {
        fail!(Error::InvalidArgument("batch size must be >= 1".into()));
    }
    let h = cfg.loss.h();
    let train_segs = match segments(ds, train_episodes, h, cfg.use_true_state) {
        Ok(s) if !s.is_empty() => s,
        Ok(_) => fail!(Error::InvalidArgument("no training segments".into())),
        Err(e) => fail!(e),
    };
    let valid_segs = match segments(ds, valid_episodes, h, cfg.use_true_state) {
        Ok(s) => s,
        Err(e) => fail!(e),
    };
    record.segments = train_segs.len();

    let mut opt = OptimizerState::new(cfg.optimizer, model.params());
    let mut order: Vec<usize> = (0..train_segs.len()).collect();
    let mut tape = Tape::new();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng_for(cfg.seed, &[epoch as u64, 0]));
        let mut dropout_rng = rng_for(cfg.seed, &[epoch as u64, 1]);
        let mut sample_rng = rng_for(cfg.seed, &[epoch as u64, 2]);
        let mut loss_sum = 0.0;
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let refs: Vec<&Segment> = idx.iter().map(|&i| &train_segs[i]).collect();
            let batch = match SegmentBatch::new(&refs) {
                Ok(b) => b,
                Err(e) => fail!(e),
            };
            tape.clear();
            let params = model.params().bind(&mut tape);
            let out = match cfg.loss.kind {
                LossKind::Mse => multistep_loss(&*model, &mut tape, &params, &batch, &cfg.loss.profile, Some(&mut dropout_rng)),
                LossKind::Nll => nll_multistep_loss(
                    &*model,
                    &mut tape,
                    &params,
                    &batch,
                    cfg.loss.sampling,
                    Some(&mut dropout_rng),
                    Some(&mut sample_rng),
                ),
            };
            let out = match out {
                Ok(o) => o,
                Err(Error::NonFinitePrediction { .. }) => fail!(Error::NonFiniteLoss { epoch, batch: b }),
                Err(e) => fail!(e),
            };
            let loss = tape.value(out.total).data()[0];
            if !loss.is_finite() {
                fail!(Error::NonFiniteLoss { epoch, batch: b });
            }
            let grads = match tape.backward(out.total) {
                Ok(g) => g,
                Err(e) => fail!(e.into()),
            };
            let g: Vec<_> = params.iter().map(|&p| grads.wrt(&tape, p)).collect();
            if let Err(e) = opt.step(model.params_mut(), &g) {
                fail!(e.into());
            }
            loss_sum += loss * idx.len() as f64;
        }
        let (valid_one_step, valid_h_step) = if valid_segs.is_empty() {
            (None, None)
        } else {
            match validation_mse(&*model, &valid_segs) {
                Ok((a, b)) if a.is_finite() && b.is_finite() => (Some(a), Some(b)),
                Ok(_) | Err(Error::NonFinitePrediction { .. }) => (None, None),
                Err(e) => fail!(e),
            }
        };
        log::debug!("epoch {epoch}: train {:.6e}", loss_sum / train_segs.len() as f64);
        record.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train_segs.len() as f64,
            valid_one_step,
            valid_h_step,
        });
    }
    record.params_digest = params_digest(model.params());
    if cfg.record_wall_time {
        record.wall_time_s = Some(clock.elapsed().as_secs_f64());
    }
    Ok(record)
}
