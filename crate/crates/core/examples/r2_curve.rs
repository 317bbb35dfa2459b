//! R2(h) of a fitted linear model on noisy linear-system data, per horizon,
//! next to its closed-form value.

use msdyn::eval::r2_curve;
use msdyn::model::{AnyModel, LinearModel};
use msdyn::systems::{generate_dataset, LinearSystem, Policy, System};

fn main() -> msdyn::Result<()> {
    let system = System::Linear(LinearSystem::new(0.95, 0.0)?);
    let ds = generate_dataset(&system, Policy::RandomUniform, 40, 60, 3, 0.0)?;
    let eps: Vec<usize> = (0..ds.len()).collect();
    for theta in [0.95, 0.9, 0.99] {
        let model = AnyModel::Linear(LinearModel::new(theta));
        let curve = r2_curve(&model, &ds, &eps, 10, true)?;
        let shown: Vec<String> = curve.r2.iter().map(|r| format!("{r:.4}")).collect();
        println!("model theta {theta}: R2(1..10) = {}", shown.join(" "));
        println!("  R2bar(10) = {:.4}", curve.r2_bar());
    }
    Ok(())
}
