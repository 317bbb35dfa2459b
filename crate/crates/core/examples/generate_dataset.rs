//! Simulate noisy cart-pole swing-up episodes, write them to disk and read
//! them back.

use msdyn::systems::{generate_dataset, load_dataset, save_dataset, CartpoleSwingup, Dynamics, Policy, System};

fn main() -> msdyn::Result<()> {
    let system = System::Cartpole(CartpoleSwingup::default());
    let ds = generate_dataset(&system, Policy::RandomUniform, 5, 200, 7, 0.02)?;
    let dir = std::env::temp_dir().join("msdyn-example-gen");
    std::fs::create_dir_all(&dir).map_err(|e| msdyn::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("dataset.csv");
    save_dataset(&ds, &path)?;
    let back = load_dataset(&path)?;
    assert_eq!(back, ds);
    println!("{} episodes, d_s={} d_a={}, noise {}", ds.len(), ds.meta.d_s, ds.meta.d_a, ds.meta.noise_percent);
    println!("state min {:?}", ds.meta.state_min);
    println!("state max {:?}", ds.meta.state_max);
    for (e, t) in ds.trajectories.iter().enumerate() {
        let ret: f64 = t.actions.iter().zip(&t.states).filter_map(|(a, s)| system.reward(s, a)).sum();
        println!("episode {e}: {} steps, return {ret:.2}", t.actions.len());
    }
    println!("round-trip through {} is exact", path.display());
    Ok(())
}
