//! Acceptance criteria 1–11. Prints one PASS/FAIL/REPORT line per criterion.
//!
//! Runs as a plain binary (`harness = false`). It exits nonzero only when a
//! criterion fails that is not listed in `KNOWN_GAPS`.

mod common;

use std::process::Command;
use std::time::Instant;

use common::*;
use msdyn::autodiff::OptimizerConfig;
use msdyn::closed_form::{
    augmented_baseline_study, averaging_baseline_study, bias_variance_study, estimate_theta, taylor_variance_check, Sign, StudyConfig,
    StudyKind,
};
use msdyn::eval::{grid_search_beta, sigmoid_ablation, AblationConfig, GridSearchConfig, GridSearchRecord, BETA_GRID, TIE_TOLERANCE};
use msdyn::model::{AnyModel, LinearModel, MlpConfig, MlpDeltaModel, ModelChoice, Normalizer};
use msdyn::multistep::{exp_weights, implicit_weights, segments, train, LossConfig, LossKind, Sampling, SegmentBatch, TrainConfig};
use msdyn::rng::SimRng;
use msdyn::systems::{generate_dataset, split_episodes, CartpoleSwingup, LinearSystem, Policy, System};
use rand::{Rng, SeedableRng};

const SEED: u64 = 42;

/// Criteria expected to fail, with the reason. Details are in the README.
const KNOWN_GAPS: &[(usize, &str)] = &[
    (5, "the augmented baseline's variance is 5-15% below alpha=0.5 at sigma=1 on every seed tried"),
    (6, "validation one-step MSE bottoms out at an interior alpha, not at alpha=1"),
];

enum Status {
    Pass,
    Fail,
    Report,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Self { status: if ok { Status::Pass } else { Status::Fail }, detail }
    }
}

fn t_975(df: usize) -> f64 {
    [12.706, 4.303, 3.182, 2.776, 2.571][df.clamp(1, 5) - 1]
}

// 1 ---------------------------------------------------------------------

fn gradients() -> Outcome {
    let mut rng = SimRng::seed_from_u64(SEED);
    let (mut n, mut worst, mut worst_name) = (0, 0.0f64, String::new());
    let mut note = |name: &str, err: f64| {
        n += 1;
        if !(err <= worst) {
            worst = err;
            worst_name = name.to_string();
        }
    };
    for case in op_cases() {
        for _ in 0..8 {
            let inputs = op_inputs(&case, &mut rng);
            note(case.name, gradcheck(&case.graph, &inputs));
        }
    }
    for h in 1..=3 {
        for seed in 0..6 {
            let ds = generate_dataset(&System::Cartpole(CartpoleSwingup::default()), Policy::RandomUniform, 2, 12, seed, 0.02).unwrap();
            let segs = segments(&ds, &[0, 1], h, false).unwrap();
            let refs: Vec<_> = segs.iter().take(6).collect();
            let batch = SegmentBatch::new(&refs).unwrap();
            let norm = Normalizer::fit_dataset(&ds, &[0, 1], false).unwrap();
            let beta = 0.3 + 0.4 * seed as f64;
            let mse = MlpDeltaModel::new(5, 1, MlpConfig { hidden: 6, dropout: 0.0, ..MlpConfig::default() }, norm.clone(), seed).unwrap();
            note("mlp mse loss", loss_gradcheck(&mse, &batch, &exp_weights(h, beta).unwrap(), false));
            let cfg = MlpConfig { hidden: 5, dropout: 0.0, gaussian: true, ..MlpConfig::default() };
            let nll = MlpDeltaModel::new(5, 1, cfg, norm, seed + 100).unwrap();
            note("gaussian nll loss", loss_gradcheck(&nll, &batch, &exp_weights(h, beta).unwrap(), true));
        }
    }
    Outcome::check(n >= 100 && worst < 1e-5, format!("max relative error {worst:.2e} ({worst_name}) over {n} instances, tolerance 1e-5"))
}

// 2 ---------------------------------------------------------------------

fn closed_form() -> Outcome {
    let mut rng = SimRng::seed_from_u64(SEED);
    let mut formula_err = 0.0f64;
    for _ in 0..200 {
        let (theta, sigma) = (rng.gen_range(0.3..0.95), rng.gen_range(0.0..0.3));
        let n = rng.gen_range(1..20);
        let samples = linear_samples(&mut rng, n, theta, sigma);
        let ss: f64 = samples.iter().map(|x| x.s0 * x.s0).sum();
        let so1: f64 = samples.iter().map(|x| x.s0 * x.o1).sum();
        let so2: f64 = samples.iter().map(|x| x.s0 * x.o2).sum();
        let one = estimate_theta(1.0, &samples, Sign::Positive).unwrap().theta_hat;
        formula_err = formula_err.max((one - so1 / ss).abs());
        if so2 > 0.0 {
            let zero = estimate_theta(0.0, &samples, Sign::Positive).unwrap().theta_hat;
            formula_err = formula_err.max((zero - (so2 / ss).sqrt()).abs());
        }
    }
    let (mut dist, mut slope, mut mismatched) = (0.0f64, 0.0f64, 0);
    for _ in 0..1000 {
        let alpha = rng.gen_range(0.01..0.99);
        let (theta, sigma) = (rng.gen_range(-1.2..1.2), rng.gen_range(0.0..1.0));
        let n = rng.gen_range(1..30);
        let samples = linear_samples(&mut rng, n, theta, sigma);
        match cubic_root_check(alpha, &samples) {
            Some((d, s)) => {
                dist = dist.max(d);
                slope = slope.max(s);
            }
            None => mismatched += 1,
        }
    }
    Outcome::check(
        formula_err < 1e-12 && mismatched == 0 && dist < 1e-9 && slope < 1e-9,
        format!(
            "endpoint formulas max err {formula_err:.1e} (tol 1e-12); 1000 cubic instances: {mismatched} root-count mismatches, \
             max root distance {dist:.1e}, max |dL/dθ| at roots {slope:.1e} (tol 1e-9)"
        ),
    )
}

// 3 ---------------------------------------------------------------------

fn bias_variance() -> Outcome {
    let cfg = StudyConfig::standard(SEED);
    let rep = bias_variance_study(&cfg).unwrap();
    let row = |a: f64, s: f64| rep.multistep(a, s).unwrap();
    let (mut a_ok, mut b_ok, mut c_ok) = (true, true, true);
    let mut lines = Vec::new();
    for &s in &cfg.sigmas {
        let (r0, r5, r1) = (row(0.0, s), row(0.5, s), row(1.0, s));
        if s >= 0.5 {
            a_ok &= r5.variance_ci.upper < r1.variance_ci.lower;
            b_ok &= r0.bias.abs() > r5.bias.abs() && r0.bias.abs() > r1.bias.abs();
        }
        c_ok &= r1.bias_ci.lower <= 0.0 && 0.0 <= r1.bias_ci.upper;
        lines.push(format!(
            "σ={s}: var α.5 {:.3} [{:.3},{:.3}] α1 {:.3} [{:.3},{:.3}], bias α0 {:+.3} α.5 {:+.3} α1 {:+.3} [{:+.3},{:+.3}]",
            r5.variance, r5.variance_ci.lower, r5.variance_ci.upper, r1.variance, r1.variance_ci.lower, r1.variance_ci.upper, r0.bias,
            r5.bias, r1.bias, r1.bias_ci.lower, r1.bias_ci.upper
        ));
    }
    Outcome::check(a_ok && b_ok && c_ok, format!("(a) {a_ok} (b) {b_ok} (c) {c_ok}\n    {}", lines.join("\n    ")))
}

// 4 ---------------------------------------------------------------------

fn variance_formulas() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let cfg = StudyConfig {
        theta_true: vec![0.78],
        sigmas: vec![0.1, 0.5, 1.0],
        alphas: vec![1.0],
        n_mc: 100_000,
        bootstrap: 100,
        ..StudyConfig::standard(SEED)
    };
    let rep = bias_variance_study(&cfg).unwrap();
    for &s in &cfg.sigmas {
        let v = rep.multistep(1.0, s).unwrap().variance;
        let rel = (v - s * s).abs() / (s * s);
        ok &= rel < 0.10;
        lines.push(format!("Var[θ̂₁] σ={s}: {v:.5} vs σ²/s² {:.5} (rel {rel:.3}, tol 0.10)", s * s));
    }
    let mut in_regime = 0;
    for s in [0.005, 0.01, 0.02, 0.05] {
        let t = taylor_variance_check(0.78, 1.0, s, 100_000, SEED).unwrap();
        if t.in_regime {
            in_regime += 1;
            ok &= t.relative_error < 0.15;
        }
        lines.push(format!(
            "Taylor σ={s}: {:.3e} vs {:.3e} (rel {:.3}, tol 0.15, in regime {})",
            t.empirical, t.approx, t.relative_error, t.in_regime
        ));
    }
    Outcome::check(ok && in_regime > 0, lines.join("\n    "))
}

// 5 ---------------------------------------------------------------------

fn baselines() -> Outcome {
    let cfg = StudyConfig::standard(SEED);
    let avg = averaging_baseline_study(&cfg).unwrap();
    let aug = augmented_baseline_study(&cfg).unwrap();
    let ms = bias_variance_study(&cfg).unwrap();
    let mut lines = Vec::new();
    let mut avg_ok = true;
    for &s in cfg.sigmas.iter().filter(|s| **s > 0.0) {
        let v = avg.find(StudyKind::Averaging, s).unwrap().variance;
        let want = s * s / 2.0;
        let rel = (v - want).abs() / want;
        avg_ok &= rel < 0.15;
        lines.push(format!("averaging σ={s}: var {v:.4} vs σ²/2s² {want:.4} (rel {rel:.3}, tol 0.15)"));
    }
    let a = aug.find(StudyKind::Augmented, 1.0).unwrap();
    let bias_ok = a.bias_ci.upper < 0.0 || a.bias_ci.lower > 0.0;
    let (v5, v1) = (ms.multistep(0.5, 1.0).unwrap().variance, ms.multistep(1.0, 1.0).unwrap().variance);
    let lowest_ok = v5 < v1 && v5 < a.variance;
    lines.push(format!("augmented σ=1: bias {:+.4} CI [{:+.4}, {:+.4}] excludes 0: {bias_ok}", a.bias, a.bias_ci.lower, a.bias_ci.upper));
    lines.push(format!("σ=1 variances: α=0.5 {v5:.4}, α=1 {v1:.4}, augmented {:.4}; α=0.5 lowest: {lowest_ok}", a.variance));
    Outcome::check(avg_ok && bias_ok && lowest_ok, lines.join("\n    "))
}

// 6 ---------------------------------------------------------------------

fn sigmoid() -> Outcome {
    let rep = sigmoid_ablation(&AblationConfig::standard(SEED)).unwrap();
    let (one, two, avg) = (rep.best_alpha_one_step(), rep.best_alpha_two_step(), rep.best_alpha_average());
    let mut lines: Vec<String> = rep
        .summary
        .iter()
        .map(|s| format!("α={:<4} one-step {:.6} two-step {:.6} average {:.6} diverged {}", s.alpha, s.one_step, s.two_step, s.average, s.diverged))
        .collect();
    let ok = (one == 1.0, two < 1.0, avg == 0.5 || avg == 0.75);
    lines.push(format!("best α: one-step {one} (want 1: {}), two-step {two} (want <1: {}), average {avg} (want .5/.75: {})", ok.0, ok.1, ok.2));
    Outcome::check(ok.0 && ok.1 && ok.2, format!("{} runs\n    {}", rep.runs.len(), lines.join("\n    ")))
}

// 7 ---------------------------------------------------------------------

fn zero_noise() -> Outcome {
    let theta = 0.85;
    let ds = generate_dataset(&System::Linear(LinearSystem::new(theta, 0.0).unwrap()), Policy::RandomUniform, 12, 20, SEED, 0.0).unwrap();
    let eps: Vec<usize> = (0..12).collect();
    let mut worst = 0.0f64;
    for h in 1..=4 {
        for &beta in &BETA_GRID {
            let mut model = AnyModel::Linear(LinearModel::new(0.0));
            let mut cfg = TrainConfig::new(LossConfig::mse(exp_weights(h, beta).unwrap()), 150, SEED);
            cfg.optimizer = OptimizerConfig::adam(0.02);
            cfg.batch_size = 16;
            train(&mut model, &ds, &eps, &[], &cfg).unwrap();
            let AnyModel::Linear(m) = model else { unreachable!() };
            worst = worst.max((m.theta() - theta).abs());
        }
    }
    let mut sel_ok = true;
    let mut sels = Vec::new();
    for h in 2..=4 {
        let cfg = GridSearchConfig {
            h,
            betas: BETA_GRID.to_vec(),
            folds: 3,
            eval_h: 10,
            epochs: 150,
            batch_size: 16,
            optimizer: OptimizerConfig::adam(0.02),
            model: ModelChoice::Linear { theta0: 0.0 },
            use_true_state: false,
            seed: SEED,
        };
        let rec = grid_search_beta(&ds, &eps, None, &cfg).unwrap();
        let means: Vec<f64> = rec.per_beta.iter().map(|b| b.mean.unwrap_or(f64::NAN)).collect();
        let spread = means.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - means.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        sel_ok &= rec.selected_beta == BETA_GRID[0] && spread < TIE_TOLERANCE;
        sels.push(format!("h={h} selected β {} (R̄2 spread {spread:.1e})", rec.selected_beta));
    }
    Outcome::check(worst < 1e-3 && sel_ok, format!("40 cells, max |θ̂ − θ| {worst:.2e} (tol 1e-3); {}", sels.join(", ")))
}

// 8, 9 ------------------------------------------------------------------

fn cartpole_grid(noise: f64, h: usize) -> GridSearchRecord {
    let ds = generate_dataset(&System::Cartpole(CartpoleSwingup::default()), Policy::RandomUniform, 50, 100, SEED, noise).unwrap();
    let split = split_episodes(ds.len(), ds.meta.seed);
    let eps: Vec<usize> = split.train.iter().chain(&split.valid).copied().collect();
    let cfg = GridSearchConfig {
        h,
        betas: BETA_GRID.to_vec(),
        folds: 3,
        eval_h: 50,
        epochs: 30,
        batch_size: 64,
        optimizer: OptimizerConfig::adam(1e-3),
        model: ModelChoice::Mlp(MlpConfig { hidden: 64, ..MlpConfig::default() }),
        use_true_state: false,
        seed: SEED,
    };
    grid_search_beta(&ds, &eps, Some(&split.test), &cfg).unwrap()
}

fn fold_scores(cells: &[msdyn::eval::GridCell], beta: f64) -> Vec<f64> {
    cells.iter().filter(|c| c.beta == beta).map(|c| c.r2bar.unwrap_or(f64::NEG_INFINITY)).collect()
}

/// Mean and t-interval half-width of paired per-fold differences.
fn paired_gap(best: &[f64], base: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = best.iter().zip(base).map(|(a, b)| a - b).collect();
    let n = d.len() as f64;
    let m = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (m, t_975(d.len() - 1) * sd / n.sqrt())
}

fn best_of(recs: &[GridSearchRecord]) -> (usize, f64, f64) {
    recs.iter()
        .flat_map(|r| r.per_beta.iter().map(move |b| (r.h, b.beta, b.mean.unwrap_or(f64::NEG_INFINITY))))
        .fold((0, 0.0, f64::NEG_INFINITY), |acc, x| if x.2 > acc.2 { x } else { acc })
}

fn multistep_benefit(recs: &[GridSearchRecord], zero: &GridSearchRecord) -> Outcome {
    let (h, beta, mean) = best_of(recs);
    let rec = recs.iter().find(|r| r.h == h).unwrap();
    let base = fold_scores(&rec.baseline, 1.0);
    let (gap, half) = paired_gap(&fold_scores(&rec.cells, beta), &base);
    let test_best: f64 = rec.cells.iter().filter(|c| c.beta == beta).filter_map(|c| c.test_r2bar).sum::<f64>() / 3.0;
    let test_base: f64 = rec.baseline.iter().filter_map(|c| c.test_r2bar).sum::<f64>() / 3.0;
    let (zgap, zhalf) = paired_gap(&fold_scores(&zero.cells, zero.selected_beta), &fold_scores(&zero.baseline, 1.0));
    Outcome::check(
        gap - half > 0.0,
        format!(
            "noise 2%: best h={h} β={beta} R̄2(50) {mean:.4} vs h=1 {:.4}; paired gap {gap:+.4} ± {half:.4} (95% t, 3 folds); \
             test split {test_best:.4} vs {test_base:.4}\n    noise 0% (report only, h=2): gap {zgap:+.4} ± {zhalf:.4}",
            base.iter().sum::<f64>() / 3.0
        ),
    )
}

fn weight_trend(by_noise: &[(f64, &GridSearchRecord)]) -> Outcome {
    let idx = |b: f64| BETA_GRID.iter().position(|x| *x == b).unwrap() as i64;
    let sel: Vec<i64> = by_noise.iter().map(|(_, r)| idx(r.selected_beta)).collect();
    let drops: Vec<i64> = sel.windows(2).map(|w| w[0] - w[1]).filter(|d| *d > 0).collect();
    let ok = drops.len() <= 1 && drops.iter().all(|d| *d <= 1);
    let mut lines: Vec<String> =
        by_noise.iter().map(|(n, r)| format!("noise {:.0}%: selected β {} (h_e {:.3})", n * 100.0, r.selected_beta, r.effective_horizon)).collect();
    lines.push(format!("{:<8}{}", "β", by_noise.iter().map(|(n, _)| format!("{:>10}", format!("{:.0}%", n * 100.0))).collect::<String>()));
    for (i, b) in BETA_GRID.iter().enumerate() {
        let row: String = by_noise.iter().map(|(_, r)| format!("{:>10.4}", r.per_beta[i].mean.unwrap_or(f64::NAN))).collect();
        lines.push(format!("{b:<8}{row}"));
    }
    let base: String = by_noise.iter().map(|(_, r)| format!("{:>10.4}", fold_scores(&r.baseline, 1.0).iter().sum::<f64>() / 3.0)).collect();
    lines.push(format!("{:<8}{base}", "h=1"));
    Outcome { status: if ok { Status::Pass } else { Status::Report }, detail: lines.join("\n    ") }
}

// 10 --------------------------------------------------------------------

fn implicit() -> Outcome {
    let ds = generate_dataset(&System::Linear(LinearSystem::new(0.8, 0.0).unwrap()), Policy::RandomUniform, 30, 30, SEED, 0.0).unwrap();
    let split = split_episodes(ds.len(), ds.meta.seed);
    let choice = ModelChoice::Mlp(MlpConfig { hidden: 16, gaussian: true, dropout: 0.0, sigma_max: 0.5, ..MlpConfig::default() });
    let mut model = choice.build(&ds, &split.train, false, SEED).unwrap();
    let loss = LossConfig { profile: exp_weights(2, 1.0).unwrap(), kind: LossKind::Nll, sampling: Sampling::Deterministic };
    let mut cfg = TrainConfig::new(loss, 30, SEED);
    cfg.optimizer.lr = 3e-3;
    train(&mut model, &ds, &split.train, &split.valid, &cfg).unwrap();
    let segs = segments(&ds, &split.valid, 2, false).unwrap();
    let refs: Vec<_> = segs.iter().collect();
    let w = implicit_weights(&model, &SegmentBatch::new(&refs).unwrap()).unwrap();
    Outcome { status: Status::Report, detail: format!("α₁ {:.4}, α₂ {:.4}, α₁ > α₂: {}", w[0], w[1], w[0] > w[1]) }
}

// 11 --------------------------------------------------------------------

fn determinism() -> Outcome {
    let root = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let _ = std::fs::remove_dir_all(&root);
    let p = |x: &str| root.join(x).to_string_lossy().into_owned();
    let data = format!("{}/dataset.csv", p("d"));
    let ckpt = format!("{}/model.ckpt", p("t"));
    let commands: Vec<(String, Vec<String>)> = vec![
        (p("d"), vec!["gen", "--env", "cartpole", "--episodes", "6", "--horizon", "40", "--noise", "0.02"]),
        (p("t"), vec!["train", "--data", &data, "--h", "3", "--beta", "0.5", "--hidden", "16", "--epochs", "3"]),
        (p("e"), vec!["eval", "--data", &data, "--checkpoint", &ckpt, "--horizon", "10"]),
        (p("g"), vec!["gridsearch", "--data", &data, "--h", "2", "--betas", "0.5,1,2", "--folds", "2", "--eval-h", "8", "--hidden", "8", "--epochs", "2"]),
        (p("l"), vec!["linear-lab", "--n-mc", "50", "--bootstrap", "100", "--taylor-n-mc", "500"]),
        (p("s"), vec!["sigmoid-lab", "--n-mc", "1", "--n-starts", "2", "--epochs", "3", "--n-train", "32", "--draws", "2", "--grid", "9"]),
    ]
    .into_iter()
    .map(|(out, a)| (out, a.into_iter().map(String::from).collect()))
    .collect();
    let mut checked = 0;
    for (out, args) in &commands {
        let mut snaps = Vec::new();
        for _ in 0..2 {
            let status = Command::new(env!("CARGO_BIN_EXE_msdyn"))
                .args(["--seed", "7", "--force"])
                .args(args)
                .arg("--out")
                .arg(out)
                .output()
                .unwrap();
            if !status.status.success() {
                return Outcome::check(false, format!("{} failed: {}", args[0], String::from_utf8_lossy(&status.stderr)));
            }
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
                .unwrap()
                .map(|e| e.unwrap())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
                .collect();
            files.sort();
            snaps.push(files);
        }
        if snaps[0] != snaps[1] {
            return Outcome::check(false, format!("{} outputs differ between reruns", args[0]));
        }
        checked += snaps[0].len();
    }
    Outcome::check(true, format!("{} commands rerun, {checked} files byte-identical", commands.len()))
}

fn main() {
    let mut unexpected = Vec::new();
    let mut report = |id: usize, name: &str, limit: Option<f64>, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let mut out = f();
        let secs = t.elapsed().as_secs_f64();
        let timing = match limit {
            Some(l) => {
                if secs >= l && matches!(out.status, Status::Pass) {
                    out.status = Status::Fail;
                    out.detail.push_str(" [over time budget]");
                }
                format!("{secs:.1}s, budget {l:.0}s")
            }
            None => format!("{secs:.1}s"),
        };
        let tag = match out.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Report => "REPORT",
        };
        println!("criterion {id:>2} {tag:<6} {name} ({timing}): {}", out.detail);
        if let Status::Fail = out.status {
            match KNOWN_GAPS.iter().find(|(k, _)| *k == id) {
                Some((_, why)) => println!("             known gap: {why}"),
                None => unexpected.push(id),
            }
        }
    };
    report(1, "gradient correctness", Some(10.0), &mut gradients);
    report(2, "closed-form equivalence", Some(30.0), &mut closed_form);
    report(3, "linear bias/variance trends", Some(60.0), &mut bias_variance);
    report(4, "variance formulas", Some(60.0), &mut variance_formulas);
    report(5, "averaging and augmented baselines", Some(60.0), &mut baselines);
    report(6, "sigmoid ablation", Some(600.0), &mut sigmoid);
    report(7, "zero-noise consistency", Some(120.0), &mut zero_noise);

    // criteria 8 and 9 share the 2% h=2 grid; the 0% grid is part of 8's report
    let mut grids: Vec<GridSearchRecord> = Vec::new();
    let mut zero: Option<GridSearchRecord> = None;
    report(8, "multi-step benefit on cart-pole", Some(1800.0), &mut || {
        grids = (2..=4).map(|h| cartpole_grid(0.02, h)).collect();
        let z = zero.insert(cartpole_grid(0.0, 2));
        multistep_benefit(&grids, z)
    });
    report(9, "weight trend over noise", None, &mut || {
        let four = cartpole_grid(0.04, 2);
        weight_trend(&[(0.0, zero.as_ref().unwrap()), (0.02, &grids[0]), (0.04, &four)])
    });
    report(10, "Gaussian implicit weights", None, &mut implicit);
    report(11, "CLI determinism", None, &mut determinism);

    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
