use serde::{Deserialize, Serialize};

use super::WeightProfile;
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::model::{DynamicsModel, Prediction};
use crate::rng::SimRng;
use crate::systems::TrajectoryDataset;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    #[default]
    Mse,
    Nll,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Feed predicted means back into the model.
    #[default]
    Deterministic,
    /// Feed reparametrized samples `μ + σ·ξ` back into the model.
    Stochastic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub profile: WeightProfile,
    #[serde(default)]
    pub kind: LossKind,
    #[serde(default)]
    pub sampling: Sampling,
}

impl LossConfig {
    pub fn mse(profile: WeightProfile) -> Self {
        Self { profile, kind: LossKind::Mse, sampling: Sampling::Deterministic }
    }

    pub fn h(&self) -> usize {
        self.profile.h()
    }

    pub fn validate(&self, gaussian_model: bool) -> Result<()> {
        if self.kind == LossKind::Nll && !gaussian_model {
            return Err(Error::InvalidArgument("NLL loss needs a Gaussian-head model".into()));
        }
        if self.sampling == Sampling::Stochastic && self.kind != LossKind::Nll {
            return Err(Error::InvalidArgument("stochastic sampling is only used with the NLL loss".into()));
        }
        Ok(())
    }
}

/// A start state, `h` actions and the `h` states that follow.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start: Vec<f64>,
    pub actions: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

/// Every stride-1 window of `h` transitions in the given episodes, read from
/// the observation channel unless `use_true_state` is set.
pub fn segments(ds: &TrajectoryDataset, episodes: &[usize], h: usize, use_true_state: bool) -> Result<Vec<Segment>> {
    if h == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let mut out = Vec::new();
    for &e in episodes {
        let traj = ds.trajectories.get(e).ok_or_else(|| Error::InvalidArgument(format!("no episode {e}")))?;
        if traj.len() < h {
            return Err(Error::InvalidArgument(format!(
                "horizon {h} exceeds the {} transitions of episode {e}",
                traj.len()
            )));
        }
        let xs = traj.channel(use_true_state);
        for t in 0..=traj.len() - h {
            out.push(Segment {
                start: xs[t].clone(),
                actions: traj.actions[t..t + h].to_vec(),
                targets: xs[t + 1..=t + h].to_vec(),
            });
        }
    }
    Ok(out)
}

/// Segments stacked into tensors: `start: [B, d_s]`, and per horizon an
/// action `[B, d_a]` (absent when `d_a = 0`) and a target `[B, d_s]`.
#[derive(Clone, Debug)]
pub struct SegmentBatch {
    pub start: Tensor,
    pub actions: Vec<Option<Tensor>>,
    pub targets: Vec<Tensor>,
}

impl SegmentBatch {
    pub fn new(segs: &[&Segment]) -> Result<Self> {
        let first = segs.first().ok_or_else(|| Error::InvalidArgument("empty batch".into()))?;
        let h = first.targets.len();
        let rows = |f: &dyn Fn(&Segment) -> &Vec<f64>| -> Result<Tensor> {
            let r: Vec<Vec<f64>> = segs.iter().map(|s| f(s).clone()).collect();
            Ok(Tensor::from_rows(&r)?)
        };
        let start = rows(&|s| &s.start)?;
        let mut actions = Vec::with_capacity(h);
        let mut targets = Vec::with_capacity(h);
        for j in 0..h {
            if segs.iter().any(|s| s.targets.len() != h || s.actions.len() != h) {
                return Err(Error::InvalidArgument("segments in a batch must share a horizon".into()));
            }
            actions.push(if first.actions[j].is_empty() { None } else { Some(rows(&|s| &s.actions[j])?) });
            targets.push(rows(&|s| &s.targets[j])?);
        }
        Ok(Self { start, actions, targets })
    }

    pub fn h(&self) -> usize {
        self.targets.len()
    }

    pub fn len(&self) -> usize {
        self.start.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Apply the model recursively for `actions.len()` steps from `start`.
///
/// With `sample_rng` set, a Gaussian model feeds reparametrized samples
/// forward instead of its means. `dropout_rng` turns on training mode.
pub fn rollout<M: DynamicsModel + ?Sized>(
    model: &M,
    tape: &mut Tape,
    params: &[Var],
    start: Var,
    actions: &[Option<Var>],
    mut dropout_rng: Option<&mut SimRng>,
    mut sample_rng: Option<&mut SimRng>,
) -> Result<Vec<Prediction>> {
    let mut state = start;
    let mut preds = Vec::with_capacity(actions.len());
    for (j, &a) in actions.iter().enumerate() {
        let pred = model.step(tape, params, state, a, dropout_rng.as_deref_mut())?;
        if !tape.value(pred.mean).is_finite() {
            return Err(Error::NonFinitePrediction { step: j + 1 });
        }
        state = match (pred.std, sample_rng.as_deref_mut()) {
            (Some(sd), Some(rng)) => tape.gaussian_sample(pred.mean, sd, rng)?,
            _ => pred.mean,
        };
        preds.push(pred);
    }
    Ok(preds)
}

/// Eval-mode rollout of a single start state, returning plain vectors.
pub fn rollout_states<M: DynamicsModel + ?Sized>(model: &M, start: &[f64], actions: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut s = start.to_vec();
    let mut out = Vec::with_capacity(actions.len());
    for (j, a) in actions.iter().enumerate() {
        s = model.predict(&s, a)?;
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinitePrediction { step: j + 1 });
        }
        out.push(s.clone());
    }
    Ok(out)
}

/// Total loss on the tape plus the value of every per-horizon term.
#[derive(Clone, Debug)]
pub struct LossOutput {
    pub total: Var,
    pub per_horizon: Vec<f64>,
}

fn leaf_inputs(tape: &mut Tape, batch: &SegmentBatch) -> (Var, Vec<Option<Var>>) {
    let start = tape.leaf(batch.start.clone());
    let actions = batch.actions.iter().map(|a| a.as_ref().map(|a| tape.leaf(a.clone()))).collect();
    (start, actions)
}

/// `Σⱼ αⱼ · MSEⱼ` where `MSEⱼ` averages squared errors over the batch and the
/// state dimensions at horizon `j`.
pub fn multistep_loss<M: DynamicsModel + ?Sized>(
    model: &M,
    tape: &mut Tape,
    params: &[Var],
    batch: &SegmentBatch,
    profile: &WeightProfile,
    dropout_rng: Option<&mut SimRng>,
) -> Result<LossOutput> {
    if profile.h() != batch.h() {
        return Err(Error::InvalidArgument(format!(
            "weight profile horizon {} differs from segment horizon {}",
            profile.h(),
            batch.h()
        )));
    }
    let (start, actions) = leaf_inputs(tape, batch);
    let preds = rollout(model, tape, params, start, &actions, dropout_rng, None)?;
    let mut total: Option<Var> = None;
    let mut per_horizon = Vec::with_capacity(preds.len());
    for ((pred, target), &alpha) in preds.iter().zip(&batch.targets).zip(profile.alphas()) {
        let t = tape.leaf(target.clone());
        let diff = tape.sub(pred.mean, t)?;
        let sq = tape.square(diff);
        let mse = tape.mean(sq);
        per_horizon.push(tape.value(mse).data()[0]);
        let term = tape.scale(mse, alpha);
        total = Some(match total {
            Some(acc) => tape.add(acc, term)?,
            None => term,
        });
    }
    Ok(LossOutput { total: total.expect("h >= 1"), per_horizon })
}

/// Joint Gaussian negative log-likelihood over the horizons, without the
/// `log √(2π)` constant: `Σⱼ mean[log σⱼ + (x − μⱼ)² / (2σⱼ²)]`.
pub fn nll_multistep_loss<M: DynamicsModel + ?Sized>(
    model: &M,
    tape: &mut Tape,
    params: &[Var],
    batch: &SegmentBatch,
    sampling: super::Sampling,
    dropout_rng: Option<&mut SimRng>,
    sample_rng: Option<&mut SimRng>,
) -> Result<LossOutput> {
    if !model.is_gaussian() {
        return Err(Error::InvalidArgument("NLL loss needs a Gaussian-head model".into()));
    }
    let (start, actions) = leaf_inputs(tape, batch);
    let sample_rng = if sampling == Sampling::Stochastic { sample_rng } else { None };
    let preds = rollout(model, tape, params, start, &actions, dropout_rng, sample_rng)?;
    nll_terms(tape, &preds, &batch.targets)
}

pub(crate) fn nll_terms(tape: &mut Tape, preds: &[Prediction], targets: &[Tensor]) -> Result<LossOutput> {
    let mut total: Option<Var> = None;
    let mut per_horizon = Vec::with_capacity(preds.len());
    for (pred, target) in preds.iter().zip(targets) {
        let sd = pred.std.ok_or_else(|| Error::InvalidArgument("model did not return a std".into()))?;
        if tape.value(sd).data().iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidArgument("predicted std must be positive".into()));
        }
        let t = tape.leaf(target.clone());
        let diff = tape.sub(t, pred.mean)?;
        let sq = tape.square(diff);
        let log_sd = tape.log(sd);
        let inv_var = tape.scale(log_sd, -2.0);
        let inv_var = tape.exp(inv_var);
        let quad = tape.mul(sq, inv_var)?;
        let quad = tape.scale(quad, 0.5);
        let term = tape.add(log_sd, quad)?;
        let term = tape.mean(term);
        per_horizon.push(tape.value(term).data()[0]);
        total = Some(match total {
            Some(acc) => tape.add(acc, term)?,
            None => term,
        });
    }
    Ok(LossOutput { total: total.ok_or_else(|| Error::InvalidArgument("empty horizon".into()))?, per_horizon })
}

/// Normalized implicit weights `mean(1/2σⱼ²) / Σₖ mean(1/2σₖ²)` of a Gaussian
/// model along eval-mode rollouts of `batch`.
pub fn implicit_weights<M: DynamicsModel + ?Sized>(model: &M, batch: &SegmentBatch) -> Result<Vec<f64>> {
    if !model.is_gaussian() {
        return Err(Error::InvalidArgument("implicit weights need a Gaussian-head model".into()));
    }
    let mut tape = Tape::new();
    let params = model.params().bind(&mut tape);
    let (start, actions) = leaf_inputs(&mut tape, batch);
    let preds = rollout(model, &mut tape, &params, start, &actions, None, None)?;
    let raw: Vec<f64> = preds
        .iter()
        .map(|p| {
            let sd = tape.value(p.std.expect("gaussian model"));
            sd.data().iter().map(|s| 0.5 / (s * s)).sum::<f64>() / sd.numel() as f64
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.iter().map(|w| w / total).collect())
}
