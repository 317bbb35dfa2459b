//! Train MLP delta-models on noisy cart-pole data with the one-step loss and
//! with a 4-step exponentially weighted loss, then compare their test R̄2.
//!
//! `cargo run --release --example train_multistep`

use msdyn::eval::r2_curve;
use msdyn::model::{load_checkpoint, save_checkpoint, MlpConfig, ModelChoice};
use msdyn::multistep::{exp_weights, train, LossConfig, TrainConfig};
use msdyn::systems::{generate_dataset, split_episodes, CartpoleSwingup, Policy, System};

fn main() -> msdyn::Result<()> {
    let system = System::Cartpole(CartpoleSwingup::default());
    let ds = generate_dataset(&system, Policy::RandomUniform, 20, 150, 5, 0.02)?;
    let split = split_episodes(ds.len(), ds.meta.seed);
    let choice = ModelChoice::Mlp(MlpConfig { hidden: 32, ..MlpConfig::default() });
    for (h, beta) in [(1, 1.0), (4, 0.75)] {
        let mut model = choice.build(&ds, &split.train, false, 1)?;
        let mut cfg = TrainConfig::new(LossConfig::mse(exp_weights(h, beta)?), 15, 1);
        cfg.optimizer.lr = 3e-3;
        let record = train(&mut model, &ds, &split.train, &split.valid, &cfg)?;
        for e in record.epochs.iter().step_by(5) {
            println!(
                "h={h} epoch {:>2} train {:.5} valid one-step {:.5}",
                e.epoch,
                e.train_loss,
                e.valid_one_step.unwrap_or(f64::NAN)
            );
        }
        let path = std::env::temp_dir().join(format!("msdyn-example-h{h}.ckpt"));
        save_checkpoint(&model, &path)?;
        let model = load_checkpoint(&path)?;
        let curve = r2_curve(&model, &ds, &split.test, 30, false)?;
        println!("h={h} beta={beta}: test R2(1) {:.4}  R2(30) {:.4}  R2bar(30) {:.4}\n", curve.r2[0], curve.r2[29], curve.r2_bar());
    }
    Ok(())
}
