//! The `msdyn` command-line front end.
//!
//! Every command reads an optional TOML config, applies flag overrides,
//! refuses to write into a nonempty output directory without `--force`, and
//! writes its resolved config as `config.toml` next to its outputs.
//! Exit codes: 0 ok, 1 usage, 2 runtime failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::autodiff::{OptimizerConfig, OptimizerKind};
use crate::closed_form::{augmented_baseline_study, averaging_baseline_study, bias_variance_study, taylor_variance_check};
use crate::config::{
    EnvKind, EvalSection, GenSection, GridSection, LandscapeSection, LinearLabSection, RunConfig, SigmoidLabSection, SplitKind,
    Target, TrainSection,
};
use crate::error::{Error, Result};
use crate::eval::report::{eval_summary, gridsearch_summary, write_ablation, write_gridsearch_csv, write_json, write_landscape, write_r2_curve};
use crate::eval::{grid_search_beta, loss_landscape_scan, r2_curve, sigmoid_ablation, GridSearchConfig, LandscapeConfig, R2Format};
use crate::model::{load_checkpoint, save_checkpoint, AnyModel, DynamicsModel, InitKind, MlpConfig, ModelChoice};
use crate::multistep::{implicit_weights, segments, train, LossKind, Sampling, SegmentBatch, TrainConfig};
use crate::rng::resolve_seed;
use crate::systems::{generate_dataset, load_dataset, save_dataset, split_episodes, Dynamics, Policy, TrajectoryDataset};

#[derive(Parser, Debug)]
#[command(name = "msdyn", version, about = "Weighted multi-step loss for one-step dynamics models")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed. Overrides the config file and MSDYN_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a system and write a trajectory dataset.
    Gen(GenArgs),
    /// Train a dynamics model with the weighted multi-step loss.
    Train(TrainArgs),
    /// R2 curve of a checkpoint on a dataset split.
    Eval(EvalArgs),
    /// Cross-validated grid search over the exponential weight parameter.
    Gridsearch(GridArgs),
    /// Monte Carlo bias and variance of the linear-system estimators.
    LinearLab(LinearLabArgs),
    /// Sigmoid-system training ablation and loss-landscape scans.
    SigmoidLab(SigmoidLabArgs),
}

#[derive(Args, Debug, Default)]
pub struct GenArgs {
    #[arg(long)]
    pub env: Option<EnvKind>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Transitions per episode.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Observation noise as a fraction of the state range (0.02 is 2%).
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub policy: Option<Policy>,
    /// Linear system coefficient.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub theta1: Option<f64>,
    #[arg(long)]
    pub theta2: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Model overrides shared by `train` and `gridsearch`.
#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// linear, sigmoid or mlp.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Gaussian output head.
    #[arg(long)]
    pub gaussian: bool,
    #[arg(long)]
    pub init: Option<InitKind>,
    #[arg(long)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// observation or true-state.
    #[arg(long)]
    pub target: Option<Target>,
}

#[derive(Args, Debug, Default)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Loss horizon.
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Explicit weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// mse or nll.
    #[arg(long)]
    pub loss: Option<String>,
    /// Feed reparametrized samples back during NLL rollouts.
    #[arg(long)]
    pub stochastic: bool,
    /// Record wall-clock training time.
    #[arg(long)]
    pub wall_time: bool,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Debug, Default)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest horizon of the R2 curve.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub split: Option<SplitKind>,
    #[arg(long)]
    pub target: Option<Target>,
    /// Write R2 as x1000 integers.
    #[arg(long)]
    pub millesimal: bool,
}

#[derive(Args, Debug, Default)]
pub struct GridArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub eval_h: Option<usize>,
    #[arg(long)]
    pub millesimal: bool,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Debug, Default)]
pub struct LinearLabArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub n_mc: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub s0: Option<Vec<f64>>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub no_baselines: bool,
    /// Draws for the Taylor variance check, 0 to skip it.
    #[arg(long)]
    pub taylor_n_mc: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct SigmoidLabArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub n_mc: Option<usize>,
    #[arg(long)]
    pub n_starts: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub n_train: Option<usize>,
    /// Landscape noise draws.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Landscape grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub skip_ablation: bool,
    #[arg(long)]
    pub skip_landscape: bool,
}

/// Parse `args`, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_env("MSDYN_LOG").try_init();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be >= 1");
            return 1;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => 1,
                _ => 2,
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = resolve_seed(cli.seed, file.seed);
    let mut resolved = RunConfig { seed: Some(seed), ..RunConfig::default() };
    match &cli.command {
        Command::Gen(a) => {
            let mut s = file.gen.clone().unwrap_or_default();
            apply_gen(&mut s, a);
            resolved.gen = Some(s.clone());
            cmd_gen(&s, seed, cli.force, &resolved)
        }
        Command::Train(a) => {
            let mut s = file.train.clone().unwrap_or_default();
            apply_train(&mut s, a)?;
            resolved.train = Some(s.clone());
            cmd_train(&s, seed, cli.force, &resolved)
        }
        Command::Eval(a) => {
            let mut s = file.eval.clone().unwrap_or_default();
            apply_eval(&mut s, a);
            resolved.eval = Some(s.clone());
            cmd_eval(&s, cli.force, &resolved)
        }
        Command::Gridsearch(a) => {
            let mut s = file.gridsearch.clone().unwrap_or_default();
            apply_grid(&mut s, a)?;
            resolved.gridsearch = Some(s.clone());
            cmd_gridsearch(&s, seed, cli.force, &resolved)
        }
        Command::LinearLab(a) => {
            let mut s = file.linear_lab.clone().unwrap_or_default();
            apply_linear_lab(&mut s, a);
            resolved.linear_lab = Some(s.clone());
            cmd_linear_lab(&s, seed, cli.force, &resolved)
        }
        Command::SigmoidLab(a) => {
            let mut s = file.sigmoid_lab.clone().unwrap_or_default();
            apply_sigmoid_lab(&mut s, a);
            s.ablation.seed = seed;
            resolved.sigmoid_lab = Some(s.clone());
            cmd_sigmoid_lab(&s, seed, cli.force, &resolved)
        }
    }
}

fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
    if let Some(v) = src {
        *dst = v.clone();
    }
}

fn apply_gen(s: &mut GenSection, a: &GenArgs) {
    set(&mut s.env, &a.env);
    set(&mut s.episodes, &a.episodes);
    set(&mut s.horizon, &a.horizon);
    set(&mut s.noise, &a.noise);
    set(&mut s.policy, &a.policy);
    set(&mut s.theta, &a.theta);
    set(&mut s.theta1, &a.theta1);
    set(&mut s.theta2, &a.theta2);
    set(&mut s.out, &a.out);
}

fn apply_model(
    model: &mut ModelChoice,
    optimizer: &mut OptimizerConfig,
    epochs: &mut usize,
    batch_size: &mut usize,
    target: &mut Target,
    a: &ModelArgs,
) -> Result<()> {
    if let Some(kind) = &a.model {
        let same = matches!(
            (kind.as_str(), &*model),
            ("linear", ModelChoice::Linear { .. }) | ("sigmoid", ModelChoice::Sigmoid { .. }) | ("mlp", ModelChoice::Mlp(_))
        );
        if !same {
            *model = match kind.as_str() {
                "linear" => ModelChoice::Linear { theta0: 0.0 },
                "sigmoid" => ModelChoice::Sigmoid { init: InitKind::Default },
                "mlp" => ModelChoice::Mlp(MlpConfig::default()),
                other => return Err(Error::Config(format!("unknown model `{other}` (expected linear, sigmoid or mlp)"))),
            };
        }
    }
    match model {
        ModelChoice::Mlp(m) => {
            set(&mut m.hidden, &a.hidden);
            set(&mut m.layers, &a.layers);
            set(&mut m.dropout, &a.dropout);
            set(&mut m.init, &a.init);
            if a.gaussian {
                m.gaussian = true;
            }
        }
        ModelChoice::Sigmoid { init } => set(init, &a.init),
        ModelChoice::Linear { .. } => {}
    }
    if let Some(k) = a.optimizer {
        optimizer.kind = k;
    }
    set(&mut optimizer.lr, &a.lr);
    set(epochs, &a.epochs);
    set(batch_size, &a.batch_size);
    set(target, &a.target);
    Ok(())
}

fn apply_train(s: &mut TrainSection, a: &TrainArgs) -> Result<()> {
    set(&mut s.data, &a.data.clone().map(Some));
    set(&mut s.out, &a.out);
    set(&mut s.h, &a.h);
    if a.beta.is_some() {
        s.beta = a.beta;
        s.alphas = None;
    }
    if let Some(al) = &a.alphas {
        s.alphas = Some(al.clone());
        if a.h.is_none() {
            s.h = al.len();
        }
    }
    if let Some(l) = &a.loss {
        s.loss = match l.as_str() {
            "mse" => LossKind::Mse,
            "nll" => LossKind::Nll,
            other => return Err(Error::Config(format!("unknown loss `{other}` (expected mse or nll)"))),
        };
    }
    if a.stochastic {
        s.sampling = Sampling::Stochastic;
    }
    if a.wall_time {
        s.wall_time = true;
    }
    apply_model(&mut s.model, &mut s.optimizer, &mut s.epochs, &mut s.batch_size, &mut s.target, &a.model)
}

fn apply_eval(s: &mut EvalSection, a: &EvalArgs) {
    set(&mut s.data, &a.data.clone().map(Some));
    set(&mut s.checkpoint, &a.checkpoint.clone().map(Some));
    set(&mut s.out, &a.out);
    set(&mut s.horizon, &a.horizon);
    set(&mut s.split, &a.split);
    set(&mut s.target, &a.target);
    if a.millesimal {
        s.millesimal = true;
    }
}

fn apply_grid(s: &mut GridSection, a: &GridArgs) -> Result<()> {
    set(&mut s.data, &a.data.clone().map(Some));
    set(&mut s.out, &a.out);
    set(&mut s.h, &a.h);
    set(&mut s.betas, &a.betas);
    set(&mut s.folds, &a.folds);
    set(&mut s.eval_h, &a.eval_h);
    if a.millesimal {
        s.millesimal = true;
    }
    apply_model(&mut s.model, &mut s.optimizer, &mut s.epochs, &mut s.batch_size, &mut s.target, &a.model)
}

fn apply_linear_lab(s: &mut LinearLabSection, a: &LinearLabArgs) {
    set(&mut s.out, &a.out);
    set(&mut s.n_mc, &a.n_mc);
    set(&mut s.sigmas, &a.sigmas);
    set(&mut s.alphas, &a.alphas);
    set(&mut s.theta_true, &a.thetas);
    set(&mut s.s0, &a.s0);
    set(&mut s.bootstrap, &a.bootstrap);
    set(&mut s.taylor_n_mc, &a.taylor_n_mc);
    if a.no_baselines {
        s.baselines = false;
    }
}

fn apply_sigmoid_lab(s: &mut SigmoidLabSection, a: &SigmoidLabArgs) {
    set(&mut s.out, &a.out);
    set(&mut s.ablation.n_mc, &a.n_mc);
    set(&mut s.ablation.n_starts, &a.n_starts);
    set(&mut s.ablation.epochs, &a.epochs);
    set(&mut s.ablation.n_train, &a.n_train);
    set(&mut s.landscape.n_draws, &a.draws);
    if let Some(n) = a.grid {
        s.landscape.theta1.2 = n;
        s.landscape.theta2.2 = n;
    }
    if a.skip_ablation {
        s.run_ablation = false;
    }
    if a.skip_landscape {
        s.run_landscape = false;
    }
}

/// Create `dir`, refusing a nonempty one unless `force` is set.
fn prepare_out(dir: &Path, force: bool) -> Result<()> {
    if let Ok(mut entries) = std::fs::read_dir(dir) {
        if entries.next().is_some() && !force {
            return Err(Error::InvalidArgument(format!("output directory {} is not empty; pass --force to overwrite", dir.display())));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Config(format!("missing {what} path (flag --{what} or config key `{what}`)")))
}

fn r2_format(millesimal: bool) -> R2Format {
    if millesimal {
        R2Format::Millesimal
    } else {
        R2Format::Decimal
    }
}

fn cmd_gen(s: &GenSection, seed: u64, force: bool, resolved: &RunConfig) -> Result<()> {
    let system = s.system()?;
    let ds = generate_dataset(&system, s.policy, s.episodes, s.horizon, seed, s.noise)?;
    prepare_out(&s.out, force)?;
    save_dataset(&ds, &s.out.join("dataset.csv"))?;
    resolved.write_to(&s.out)?;
    for (e, t) in ds.trajectories.iter().enumerate() {
        let ret: Option<f64> = t.actions.iter().zip(&t.states).map(|(a, st)| system.reward(st, a)).sum();
        if let Some(r) = ret {
            println!("episode {e} return {r:.3}");
        }
    }
    println!("wrote {} episodes to {}", ds.len(), s.out.join("dataset.csv").display());
    Ok(())
}

fn cmd_train(s: &TrainSection, seed: u64, force: bool, resolved: &RunConfig) -> Result<()> {
    let ds = load_dataset(required(&s.data, "data")?)?;
    let loss = s.loss_config()?;
    let split = split_episodes(ds.len(), ds.meta.seed);
    let use_true = s.target.use_true_state();
    let mut model = s.model.build(&ds, &split.train, use_true, seed)?;
    let cfg = TrainConfig {
        loss,
        epochs: s.epochs,
        batch_size: s.batch_size,
        optimizer: s.optimizer,
        seed,
        use_true_state: use_true,
        record_wall_time: s.wall_time,
    };
    prepare_out(&s.out, force)?;
    resolved.write_to(&s.out)?;
    let record_path = s.out.join("train_record.json");
    match train(&mut model, &ds, &split.train, &split.valid, &cfg) {
        Ok(record) => {
            save_checkpoint(&model, &s.out.join("model.ckpt"))?;
            let weights = implicit_weights_report(&model, &ds, &split.valid, cfg.loss.h(), use_true)?;
            write_json(&record_path, &serde_json::json!({ "status": "ok", "record": record, "implicit_weights": weights }))?;
            if let Some(last) = record.epochs.last() {
                println!("trained {} epochs, final train loss {:.6}", record.epochs.len(), last.train_loss);
            }
            Ok(())
        }
        Err(e) => {
            write_json(&record_path, &serde_json::json!({ "status": "aborted", "error": e.error.to_string(), "record": e.partial }))?;
            Err(e.error)
        }
    }
}

/// Normalized `1 / (2σ²)` per horizon on the validation segments, for
/// Gaussian models.
fn implicit_weights_report(model: &AnyModel, ds: &TrajectoryDataset, eps: &[usize], h: usize, use_true: bool) -> Result<Option<Vec<f64>>> {
    if !model.is_gaussian() || eps.is_empty() {
        return Ok(None);
    }
    let segs = segments(ds, eps, h, use_true)?;
    if segs.is_empty() {
        return Ok(None);
    }
    let refs: Vec<_> = segs.iter().collect();
    Ok(Some(implicit_weights(model, &SegmentBatch::new(&refs)?)?))
}

fn split_of(ds: &TrajectoryDataset, kind: SplitKind) -> Vec<usize> {
    let split = split_episodes(ds.len(), ds.meta.seed);
    match kind {
        SplitKind::Train => split.train,
        SplitKind::Valid => split.valid,
        SplitKind::Test => split.test,
        SplitKind::All => (0..ds.len()).collect(),
    }
}

fn cmd_eval(s: &EvalSection, force: bool, resolved: &RunConfig) -> Result<()> {
    let ds = load_dataset(required(&s.data, "data")?)?;
    let model = load_checkpoint(required(&s.checkpoint, "checkpoint")?)?;
    let eps = split_of(&ds, s.split);
    let curve = r2_curve(&model, &ds, &eps, s.horizon, s.target.use_true_state())?;
    let fmt = r2_format(s.millesimal);
    prepare_out(&s.out, force)?;
    resolved.write_to(&s.out)?;
    write_r2_curve(&s.out.join("r2_curve.csv"), &curve, fmt)?;
    write_json(&s.out.join("summary.json"), &eval_summary(&curve, fmt))?;
    println!("R2bar({}) = {}", s.horizon, fmt.render(curve.r2_bar()));
    Ok(())
}

fn cmd_gridsearch(s: &GridSection, seed: u64, force: bool, resolved: &RunConfig) -> Result<()> {
    let ds = load_dataset(required(&s.data, "data")?)?;
    let split = split_episodes(ds.len(), ds.meta.seed);
    let episodes: Vec<usize> = split.train.iter().chain(&split.valid).copied().collect();
    let cfg = GridSearchConfig {
        h: s.h,
        betas: s.betas.clone(),
        folds: s.folds,
        eval_h: s.eval_h,
        epochs: s.epochs,
        batch_size: s.batch_size,
        optimizer: s.optimizer,
        model: s.model.clone(),
        use_true_state: s.target.use_true_state(),
        seed,
    };
    prepare_out(&s.out, force)?;
    resolved.write_to(&s.out)?;
    let test = (!split.test.is_empty()).then_some(split.test.as_slice());
    let rec = grid_search_beta(&ds, &episodes, test, &cfg)?;
    let fmt = r2_format(s.millesimal);
    write_gridsearch_csv(&s.out.join("gridsearch.csv"), &rec, fmt)?;
    write_json(&s.out.join("summary.json"), &gridsearch_summary(&rec, fmt))?;
    println!("selected beta {} (effective horizon {:.3})", rec.selected_beta, rec.effective_horizon);
    Ok(())
}

fn cmd_linear_lab(s: &LinearLabSection, seed: u64, force: bool, resolved: &RunConfig) -> Result<()> {
    let study = s.study(seed);
    let mut report = bias_variance_study(&study)?;
    if s.baselines {
        report.rows.extend(augmented_baseline_study(&study)?.rows);
        report.rows.extend(averaging_baseline_study(&study)?.rows);
    }
    let taylor = if s.taylor_n_mc > 0 {
        s.taylor_sigmas
            .par_iter()
            .enumerate()
            .map(|(i, &sg)| taylor_variance_check(s.taylor_theta, s.taylor_s, sg, s.taylor_n_mc, crate::rng::derive_seed(seed, &[0x7a, i as u64])))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    prepare_out(&s.out, force)?;
    resolved.write_to(&s.out)?;
    let path = s.out.join("bias_variance.csv");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    report.write_csv(file).map_err(|e| Error::io(&path, e))?;
    write_json(&s.out.join("summary.json"), &serde_json::json!({ "theta_true": report.theta_true, "n_mc": report.n_mc, "rows": report.rows, "taylor": taylor }))?;
    println!("wrote {} rows to {}", report.rows.len(), path.display());
    Ok(())
}

fn landscape_configs(l: &LandscapeSection, theta_true: (f64, f64), seed: u64) -> Vec<(f64, f64, LandscapeConfig)> {
    l.alphas
        .iter()
        .flat_map(|&alpha| l.sigmas.iter().map(move |&sigma| (alpha, sigma)))
        .map(|(alpha, sigma)| {
            let cfg = LandscapeConfig {
                theta_true,
                alpha,
                sigma,
                theta1: l.theta1,
                theta2: l.theta2,
                n_draws: l.n_draws,
                n_samples: l.n_samples,
                s0_range: l.s0_range,
                seed,
            };
            (alpha, sigma, cfg)
        })
        .collect()
}

fn cmd_sigmoid_lab(s: &SigmoidLabSection, seed: u64, force: bool, resolved: &RunConfig) -> Result<()> {
    let ablation = if s.run_ablation { Some(sigmoid_ablation(&s.ablation)?) } else { None };
    let scans = if s.run_landscape {
        landscape_configs(&s.landscape, s.ablation.theta_true, seed)
            .into_iter()
            .map(|(a, sg, cfg)| Ok((a, sg, loss_landscape_scan(&cfg)?)))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    prepare_out(&s.out, force)?;
    resolved.write_to(&s.out)?;
    let mut summary = serde_json::Map::new();
    if let Some(rep) = &ablation {
        write_ablation(&s.out, rep)?;
        summary.insert("ablation".into(), serde_json::to_value(&rep.summary)?);
        summary.insert(
            "best_alpha".into(),
            serde_json::json!({
                "one_step": rep.best_alpha_one_step(),
                "two_step": rep.best_alpha_two_step(),
                "average": rep.best_alpha_average(),
            }),
        );
        println!(
            "best alpha: one-step {}, two-step {}, average {}",
            rep.best_alpha_one_step(),
            rep.best_alpha_two_step(),
            rep.best_alpha_average()
        );
    }
    if !scans.is_empty() {
        write_landscape(&s.out, &scans)?;
        let l: Vec<_> = scans
            .iter()
            .map(|(a, sg, sc)| serde_json::json!({ "alpha": a, "sigma": sg, "mean_argmin": sc.mean_argmin, "mean_distance": sc.mean_distance }))
            .collect();
        summary.insert("landscape".into(), serde_json::Value::Array(l));
    }
    write_json(&s.out.join("summary.json"), &summary)?;
    Ok(())
}
