//! Closed-form minimizers of the linear two-step loss for several α, with the
//! roots of its cubic derivative.

use msdyn::closed_form::{dataset_loss, estimate_theta, loss_derivative, Moments, Sign, TwoStepSample};
use msdyn::rng::rng_for;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> msdyn::Result<()> {
    let (theta, sigma) = (0.78, 0.5);
    let mut rng = rng_for(7, &[]);
    let samples: Vec<TwoStepSample> = (0..20)
        .map(|_| {
            let s0 = 1.0;
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            TwoStepSample { s0, o1: theta * s0 + sigma * z1, o2: theta * theta * s0 + sigma * z2 }
        })
        .collect();
    let m = Moments::of(&samples);
    println!("theta_true {theta}, sigma {sigma}, {} samples", samples.len());
    for alpha in [1.0, 0.75, 0.5, 0.25, 0.0] {
        let r = estimate_theta(alpha, &samples, Sign::Positive)?;
        let slopes: Vec<String> = r.roots.iter().map(|&x| format!("{:.1e}", loss_derivative(x, alpha, &m))).collect();
        println!(
            "alpha {alpha:<4}  theta_hat {:.5}  loss {:.5}  roots {:?}  dL/dtheta at roots [{}]  ({:?})",
            r.theta_hat,
            dataset_loss(r.theta_hat, alpha, &samples),
            r.roots.iter().map(|x| (x * 1e5).round() / 1e5).collect::<Vec<_>>(),
            slopes.join(", "),
            r.selection
        );
    }
    Ok(())
}
