//! Monte Carlo bias and variance of the linear-system estimators for
//! α ∈ {0, 0.5, 1}, the augmented-data and noise-averaging baselines, and the
//! first-order variance approximation of θ̂₀.
//!
//! `cargo run --release --example linear_bias_variance`

use msdyn::closed_form::{augmented_baseline_study, averaging_baseline_study, bias_variance_study, taylor_variance_check, StudyConfig, StudyKind};

fn main() -> msdyn::Result<()> {
    let cfg = StudyConfig::standard(42);
    let thetas: Vec<String> = cfg.theta_true.iter().map(|t| format!("{t:.3}")).collect();
    println!("theta_true: {}", thetas.join(" "));
    let mut rep = bias_variance_study(&cfg)?;
    rep.rows.extend(augmented_baseline_study(&cfg)?.rows);
    rep.rows.extend(averaging_baseline_study(&cfg)?.rows);
    println!("{:<14} {:>5}  {:>9} {:>22}  {:>9} {:>22}", "estimator", "sigma", "bias", "95% CI", "variance", "95% CI");
    for r in &rep.rows {
        let name = match r.study {
            StudyKind::MultiStep { alpha } => format!("alpha={alpha}"),
            other => other.label().to_string(),
        };
        println!(
            "{name:<14} {:>5}  {:>9.4} [{:>9.4}, {:>9.4}]  {:>9.4} [{:>9.4}, {:>9.4}]",
            r.sigma, r.bias, r.bias_ci.lower, r.bias_ci.upper, r.variance, r.variance_ci.lower, r.variance_ci.upper
        );
    }
    println!("\nfirst-order variance of theta_hat(alpha=0), theta=0.78, s=1:");
    for sigma in [0.005, 0.01, 0.05, 0.2] {
        let t = taylor_variance_check(0.78, 1.0, sigma, 20_000, 3)?;
        println!(
            "  sigma {sigma:<6} approx {:.3e}  empirical {:.3e}  rel.err {:.3}  in regime: {}",
            t.approx, t.empirical, t.relative_error, t.in_regime
        );
    }
    Ok(())
}
