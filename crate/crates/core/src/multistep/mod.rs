//! The weighted multi-step loss, exponential weight profiles and the trainer.

mod loss;
mod train;
mod weights;

pub use loss::{
    implicit_weights, multistep_loss, nll_multistep_loss, rollout, rollout_states, segments, LossConfig, LossKind,
    LossOutput, Sampling, Segment, SegmentBatch,
};
pub use train::{params_digest, train, validation_mse, EpochRecord, TrainConfig, TrainError, TrainRecord};
pub use weights::{effective_horizon, exp_weights, WeightProfile};
