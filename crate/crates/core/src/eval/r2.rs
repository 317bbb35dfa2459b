use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::model::DynamicsModel;
use crate::stats::KahanSum;
use crate::systems::TrajectoryDataset;

/// Streaming per-dimension accumulator for `1 − SS_res / SS_tot`.
#[derive(Clone, Debug, Default)]
struct R2Acc {
    n: usize,
    mean: f64,
    m2: f64,
    ss_res: KahanSum,
}

impl R2Acc {
    fn push(&mut self, target: f64, pred: f64) {
        self.n += 1;
        let d = target - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (target - self.mean);
        let r = target - pred;
        self.ss_res.add(r * r);
    }

    /// `None` when the targets have zero variance.
    fn r2(&self) -> Option<f64> {
        (self.m2 > 0.0).then(|| 1.0 - self.ss_res.value() / self.m2)
    }

    fn degenerate_value(&self) -> f64 {
        if self.ss_res.value() == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// R2 at every horizon `1..=H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct R2Curve {
    /// `r2[h − 1]` is R2(h).
    pub r2: Vec<f64>,
    /// Per-dimension components; `None` for a dimension with zero target
    /// variance, which is left out of the average.
    pub per_dim: Vec<Vec<Option<f64>>>,
    /// Sub-trajectories behind each horizon.
    pub counts: Vec<usize>,
}

impl R2Curve {
    pub fn horizon(&self) -> usize {
        self.r2.len()
    }

    /// Mean of R2(1..=H).
    pub fn r2_bar(&self) -> f64 {
        r2_bar_of(&self.r2)
    }
}

pub fn r2_bar_of(r2: &[f64]) -> f64 {
    r2.iter().copied().collect::<KahanSum>().value() / r2.len() as f64
}

/// R2(h) for `h = 1..=max_h` over every length-`h` sub-trajectory of the
/// given episodes, rolling the model forward on ground-truth actions.
///
/// Starts and targets are read from the observation channel unless
/// `use_true_state` is set. All starts are rolled out together; sorting them
/// by remaining length keeps the rows still in play a prefix of the batch.
pub fn r2_curve<M: DynamicsModel + ?Sized>(
    model: &M,
    ds: &TrajectoryDataset,
    episodes: &[usize],
    max_h: usize,
    use_true_state: bool,
) -> Result<R2Curve> {
    if max_h == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let d_s = ds.meta.d_s;
    if model.state_dim() != d_s || model.action_dim() != ds.meta.d_a {
        return Err(Error::DimMismatch { expected: d_s, got: model.state_dim() });
    }
    // (remaining transitions, episode, t)
    let mut starts: Vec<(usize, usize, usize)> = Vec::new();
    for &e in episodes {
        let traj = ds.trajectories.get(e).ok_or_else(|| Error::InvalidArgument(format!("no episode {e}")))?;
        if traj.len() < max_h {
            return Err(Error::InvalidArgument(format!(
                "episode {e} has {} transitions, fewer than the horizon {max_h}",
                traj.len()
            )));
        }
        for t in 0..traj.len() {
            starts.push((traj.len() - t, e, t));
        }
    }
    if starts.is_empty() {
        return Err(Error::InvalidArgument("no episodes to evaluate".into()));
    }
    starts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let row = |(_, e, t): (usize, usize, usize), j: usize| &ds.trajectories[e].channel(use_true_state)[t + j];
    let mut accs = vec![vec![R2Acc::default(); d_s]; max_h];
    let mut counts = vec![0; max_h];
    let mut active = starts.len();
    let mut state = Tensor::from_rows(&starts.iter().map(|&s| row(s, 0).clone()).collect::<Vec<_>>())?;
    for j in 1..=max_h {
        while active > 0 && starts[active - 1].0 < j {
            active -= 1;
        }
        if active == 0 {
            break;
        }
        if state.rows() > active {
            state = state.head_rows(active);
        }
        let actions = (ds.meta.d_a > 0)
            .then(|| {
                let rows: Vec<Vec<f64>> =
                    starts[..active].iter().map(|&(_, e, t)| ds.trajectories[e].actions[t + j - 1].clone()).collect();
                Tensor::from_rows(&rows)
            })
            .transpose()?;
        state = model.predict_batch(&state, actions.as_ref())?;
        if !state.is_finite() {
            return Err(Error::NonFinitePrediction { step: j });
        }
        for (i, &s) in starts[..active].iter().enumerate() {
            let target = row(s, j);
            let pred = state.row_slice(i);
            for d in 0..d_s {
                accs[j - 1][d].push(target[d], pred[d]);
            }
        }
        counts[j - 1] = active;
    }

    let mut r2 = Vec::with_capacity(max_h);
    let mut per_dim = Vec::with_capacity(max_h);
    for (h, accs) in accs.iter().enumerate() {
        let comps: Vec<Option<f64>> = accs.iter().map(R2Acc::r2).collect();
        let valid: Vec<f64> = comps.iter().flatten().copied().collect();
        let excluded = d_s - valid.len();
        if excluded > 0 {
            log::warn!("R2({}): {excluded} zero-variance target dimension(s) left out", h + 1);
        }
        let value = if valid.is_empty() {
            accs.iter().map(R2Acc::degenerate_value).fold(f64::INFINITY, f64::min)
        } else {
            valid.iter().sum::<f64>() / valid.len() as f64
        };
        r2.push(value);
        per_dim.push(comps);
    }
    Ok(R2Curve { r2, per_dim, counts })
}

/// R̄2(H) of a model on the given episodes.
pub fn r2_bar<M: DynamicsModel + ?Sized>(model: &M, ds: &TrajectoryDataset, episodes: &[usize], max_h: usize, use_true_state: bool) -> Result<f64> {
    Ok(r2_curve(model, ds, episodes, max_h, use_true_state)?.r2_bar())
}

/// `100 · (multi − base) / |base|`.
pub fn relative_improvement(r2_bar_multi: f64, r2_bar_base: f64) -> Result<f64> {
    if r2_bar_base.abs() < 1e-9 {
        return Err(Error::InvalidArgument("baseline R2 is too close to zero for a relative change".into()));
    }
    Ok(100.0 * (r2_bar_multi - r2_bar_base) / r2_bar_base.abs())
}
