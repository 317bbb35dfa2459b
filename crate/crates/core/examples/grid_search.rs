//! Three-fold cross-validated grid search over β for a 3-step loss on noisy
//! linear-system data, with the one-step baseline.

use msdyn::autodiff::OptimizerConfig;
use msdyn::eval::{grid_search_beta, GridSearchConfig, BETA_GRID};
use msdyn::model::ModelChoice;
use msdyn::systems::{generate_dataset, split_episodes, LinearSystem, Policy, System};

fn main() -> msdyn::Result<()> {
    let system = System::Linear(LinearSystem::new(0.9, 0.0)?);
    let ds = generate_dataset(&system, Policy::RandomUniform, 30, 40, 9, 0.05)?;
    let split = split_episodes(ds.len(), ds.meta.seed);
    let eps: Vec<usize> = split.train.iter().chain(&split.valid).copied().collect();
    let cfg = GridSearchConfig {
        h: 3,
        betas: BETA_GRID.to_vec(),
        folds: 3,
        eval_h: 10,
        epochs: 20,
        batch_size: 32,
        optimizer: OptimizerConfig::adam(0.02),
        model: ModelChoice::Linear { theta0: 0.0 },
        use_true_state: false,
        seed: 4,
    };
    let rec = grid_search_beta(&ds, &eps, Some(&split.test), &cfg)?;
    for b in &rec.per_beta {
        println!("beta {:<5} fold-mean R2bar {:.5}", b.beta, b.mean.unwrap_or(f64::NAN));
    }
    println!("selected beta {} (effective horizon {:.3})", rec.selected_beta, rec.effective_horizon);
    if let Some(ri) = rec.relative_improvement {
        println!("relative improvement over h=1: {ri:+.3}%");
    }
    Ok(())
}
