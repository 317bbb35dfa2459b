//! Exponential loss weights and their effective horizon over the β grid.

use msdyn::eval::BETA_GRID;
use msdyn::multistep::{effective_horizon, exp_weights};

fn main() -> msdyn::Result<()> {
    for h in [2, 4, 10] {
        println!("h = {h}");
        for beta in BETA_GRID {
            let w = exp_weights(h, beta)?;
            let shown: Vec<String> = w.alphas().iter().map(|a| format!("{a:.3}")).collect();
            println!("  beta {beta:<5} h_e {:.3}  [{}]", effective_horizon(&w), shown.join(" "));
        }
    }
    Ok(())
}
