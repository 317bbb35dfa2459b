//! Train a Gaussian-head MLP with the 2-step NLL on noiseless linear-system
//! data and print the normalized implicit weights 1/(2σ_j²).

use msdyn::model::{MlpConfig, ModelChoice};
use msdyn::multistep::{exp_weights, implicit_weights, segments, train, LossConfig, LossKind, Sampling, SegmentBatch, TrainConfig};
use msdyn::systems::{generate_dataset, split_episodes, LinearSystem, Policy, System};

fn main() -> msdyn::Result<()> {
    let system = System::Linear(LinearSystem::new(0.8, 0.0)?);
    let ds = generate_dataset(&system, Policy::RandomUniform, 30, 30, 2, 0.0)?;
    let split = split_episodes(ds.len(), ds.meta.seed);
    let choice = ModelChoice::Mlp(MlpConfig { hidden: 16, gaussian: true, dropout: 0.0, sigma_max: 0.5, ..MlpConfig::default() });
    let mut model = choice.build(&ds, &split.train, false, 3)?;
    let loss = LossConfig { profile: exp_weights(2, 1.0)?, kind: LossKind::Nll, sampling: Sampling::Deterministic };
    let mut cfg = TrainConfig::new(loss, 30, 3);
    cfg.optimizer.lr = 3e-3;
    let record = train(&mut model, &ds, &split.train, &split.valid, &cfg)?;
    println!("final NLL {:.4}", record.epochs.last().map_or(f64::NAN, |e| e.train_loss));
    let segs = segments(&ds, &split.valid, 2, false)?;
    let refs: Vec<_> = segs.iter().collect();
    let w = implicit_weights(&model, &SegmentBatch::new(&refs)?)?;
    println!("implicit weights alpha_1 {:.4}, alpha_2 {:.4}", w[0], w[1]);
    Ok(())
}
