//! Train the two-parameter sigmoid network on the two-step loss for several
//! α and print validation errors per α.
//!
//! `cargo run --release --example sigmoid_ablation [-- quick]`

use msdyn::eval::{sigmoid_ablation, AblationConfig};

fn main() -> msdyn::Result<()> {
    let mut cfg = AblationConfig::standard(42);
    if std::env::args().any(|a| a == "quick") {
        cfg.n_starts = 2;
        cfg.n_mc = 2;
    }
    let t = std::time::Instant::now();
    let rep = sigmoid_ablation(&cfg)?;
    println!("{} runs in {:.1}s", rep.runs.len(), t.elapsed().as_secs_f64());
    println!("alpha  one_step      two_step      average       dist   diverged");
    for s in &rep.summary {
        println!(
            "{:<5}  {:<12.6}  {:<12.6}  {:<12.6}  {:<6.3} {}",
            s.alpha, s.one_step, s.two_step, s.average, s.param_distance, s.diverged
        );
    }
    println!(
        "best alpha: one-step {}, two-step {}, average {}",
        rep.best_alpha_one_step(),
        rep.best_alpha_two_step(),
        rep.best_alpha_average()
    );
    Ok(())
}
