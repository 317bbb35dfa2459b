//! Two-step loss surface of the sigmoid model around the true parameters,
//! with the spread of per-draw global minima as noise grows.

use msdyn::eval::{loss_landscape_scan, LandscapeConfig};

fn main() -> msdyn::Result<()> {
    for alpha in [1.0, 0.5, 0.0] {
        for sigma in [0.0, 0.2, 0.4] {
            let cfg = LandscapeConfig {
                theta_true: (2.0, 1.5),
                alpha,
                sigma,
                theta1: (1.0, 3.0, 81),
                theta2: (0.5, 2.5, 81),
                n_draws: 10,
                n_samples: 100,
                s0_range: (-2.0, 2.0),
                seed: 11,
            };
            let scan = loss_landscape_scan(&cfg)?;
            println!(
                "alpha {alpha:<4} sigma {sigma:<4} mean argmin ({:.3}, {:.3})  mean distance to truth {:.4}",
                scan.mean_argmin.0, scan.mean_argmin.1, scan.mean_distance
            );
        }
    }
    Ok(())
}
