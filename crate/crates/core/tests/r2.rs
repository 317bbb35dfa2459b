use msdyn::eval::{r2_bar_of, r2_curve, relative_improvement};
use msdyn::model::{DynamicsModel, LinearModel, MlpConfig, MlpDeltaModel, Normalizer};
use msdyn::multistep::rollout_states;
use msdyn::systems::{generate_dataset, CartpoleSwingup, LinearSystem, Policy, System, TrajectoryDataset};
use proptest::prelude::*;

/// Two-pass R2(h): roll out every start separately, then form
/// `1 − SS_res / SS_tot` per dimension and average.
fn brute_r2<M: DynamicsModel>(m: &M, ds: &TrajectoryDataset, eps: &[usize], max_h: usize, truth: bool) -> Vec<f64> {
    let d = ds.meta.d_s;
    let mut out = Vec::new();
    for h in 1..=max_h {
        let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for &e in eps {
            let tr = &ds.trajectories[e];
            let ch = tr.channel(truth);
            for t in 0..=tr.len() - h {
                let states = rollout_states(m, &ch[t], &tr.actions[t..t + h]).unwrap();
                pairs.push((ch[t + h].clone(), states[h - 1].clone()));
            }
        }
        let mut comps = Vec::new();
        for k in 0..d {
            let mean = pairs.iter().map(|p| p.0[k]).sum::<f64>() / pairs.len() as f64;
            let tot: f64 = pairs.iter().map(|p| (p.0[k] - mean).powi(2)).sum();
            let res: f64 = pairs.iter().map(|p| (p.0[k] - p.1[k]).powi(2)).sum();
            if tot > 0.0 {
                comps.push(1.0 - res / tot);
            }
        }
        out.push(comps.iter().sum::<f64>() / comps.len() as f64);
    }
    out
}

fn cartpole(noise: f64, seed: u64) -> TrajectoryDataset {
    generate_dataset(&System::Cartpole(CartpoleSwingup::default()), Policy::RandomUniform, 4, 25, seed, noise).unwrap()
}

fn small_mlp(ds: &TrajectoryDataset, seed: u64) -> MlpDeltaModel {
    let norm = Normalizer::fit_dataset(ds, &[0, 1, 2, 3], false).unwrap();
    MlpDeltaModel::new(5, 1, MlpConfig { hidden: 8, ..MlpConfig::default() }, norm, seed).unwrap()
}

#[test]
fn streaming_r2_matches_the_two_pass_oracle() {
    for (noise, seed) in [(0.0, 1), (0.02, 2), (0.04, 3)] {
        let ds = cartpole(noise, seed);
        let model = small_mlp(&ds, seed);
        for truth in [false, true] {
            let got = r2_curve(&model, &ds, &[0, 1, 2, 3], 6, truth).unwrap();
            let want = brute_r2(&model, &ds, &[0, 1, 2, 3], 6, truth);
            for (h, (a, b)) in got.r2.iter().zip(&want).enumerate() {
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "h={} {a} vs {b}", h + 1);
            }
            assert_eq!(got.counts, (1..=6).map(|h| 4 * (26 - h)).collect::<Vec<_>>());
        }
    }
}

#[test]
fn linear_model_oracle() {
    let ds = generate_dataset(&System::Linear(LinearSystem::new(0.9, 0.0).unwrap()), Policy::RandomUniform, 5, 8, 7, 0.05).unwrap();
    for theta in [0.0, 0.5, 0.9, 1.0] {
        let m = LinearModel::new(theta);
        let got = r2_curve(&m, &ds, &[0, 1, 2, 3, 4], 4, false).unwrap();
        let want = brute_r2(&m, &ds, &[0, 1, 2, 3, 4], 4, false);
        for (a, b) in got.r2.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "theta {theta}: {a} vs {b}");
        }
    }
}

#[test]
fn perfect_model_scores_one() {
    let ds = generate_dataset(&System::Linear(LinearSystem::new(0.9, 0.0).unwrap()), Policy::RandomUniform, 3, 10, 7, 0.0).unwrap();
    let c = r2_curve(&LinearModel::new(0.9), &ds, &[0, 1, 2], 5, true).unwrap();
    for v in &c.r2 {
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }
    assert!((c.r2_bar() - 1.0).abs() < 1e-12);
}

#[test]
fn episode_order_does_not_matter() {
    let ds = cartpole(0.02, 5);
    let model = small_mlp(&ds, 9);
    let a = r2_curve(&model, &ds, &[0, 1, 2, 3], 5, false).unwrap();
    let b = r2_curve(&model, &ds, &[3, 1, 0, 2], 5, false).unwrap();
    for (x, y) in a.r2.iter().zip(&b.r2) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn horizon_longer_than_an_episode_is_an_error() {
    let ds = cartpole(0.0, 1);
    let model = small_mlp(&ds, 1);
    assert!(r2_curve(&model, &ds, &[0], 26, false).is_err());
    assert!(r2_curve(&model, &ds, &[0], 0, false).is_err());
}

#[test]
fn relative_improvement_is_percent_of_baseline() {
    assert!((relative_improvement(0.6, 0.5).unwrap() - 20.0).abs() < 1e-12);
    assert!((relative_improvement(-0.5, -1.0).unwrap() - 50.0).abs() < 1e-12);
    assert!(relative_improvement(0.3, 0.0).is_err());
}

proptest! {
    #[test]
    fn r2_bar_is_the_plain_mean(v in proptest::collection::vec(-5.0f64..1.0, 1..40)) {
        let want = v.iter().sum::<f64>() / v.len() as f64;
        prop_assert!((r2_bar_of(&v) - want).abs() < 1e-12);
    }

    #[test]
    fn scaled_linear_model_matches_oracle(theta in -1.2f64..1.2, seed in 0u64..50) {
        let ds = generate_dataset(&System::Linear(LinearSystem::new(0.8, 0.0).unwrap()), Policy::RandomUniform, 2, 6, seed, 0.1).unwrap();
        let m = LinearModel::new(theta);
        let got = r2_curve(&m, &ds, &[0, 1], 3, false).unwrap();
        let want = brute_r2(&m, &ds, &[0, 1], 3, false);
        for (a, b) in got.r2.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn linear_two_step_r2_closed_form() {
    // noiseless: target θ²s, prediction θ̂²s, so R2(2) = 1 − (θ² − θ̂²)² Σs² / (θ⁴ Σ(s − s̄)²)
    let (theta, theta_hat) = (0.9, 0.8);
    let ds = generate_dataset(&System::Linear(LinearSystem::new(theta, 0.0).unwrap()), Policy::RandomUniform, 4, 9, 11, 0.0).unwrap();
    let eps = [0, 1, 2, 3];
    let starts: Vec<f64> = eps.iter().flat_map(|&e| ds.trajectories[e].states[..=7].iter().map(|s| s[0])).collect();
    let mean = starts.iter().sum::<f64>() / starts.len() as f64;
    let ss: f64 = starts.iter().map(|s| s * s).sum();
    let var: f64 = starts.iter().map(|s| (s - mean).powi(2)).sum();
    let want = 1.0 - (theta * theta - theta_hat * theta_hat).powi(2) * ss / (theta.powi(4) * var);
    let got = r2_curve(&LinearModel::new(theta_hat), &ds, &eps, 2, true).unwrap();
    assert!((got.r2[1] - want).abs() < 1e-10, "{} vs {want}", got.r2[1]);
}
