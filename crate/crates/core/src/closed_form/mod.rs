//! Exact minimizers of the two-step loss of the scalar linear model
//! `ŝ = θ·s`, and Monte Carlo studies of their bias and variance.
//!
//! For samples `(s, o₁, o₂)` the loss
//! `L_α(θ) = mean[α(θs − o₁)² + (1 − α)(θ²s − o₂)²]` has derivative
//!
//! ```text
//! dL/dθ = 4(1−α)·S_ss·θ³ + (2α·S_ss − 4(1−α)·S_o₂s)·θ − 2α·S_o₁s
//! ```
//!
//! where `S_xy` are sample means of products. The cubic has no `θ²` term so
//! it is already depressed.

mod study;

use serde::{Deserialize, Serialize};

pub use study::{
    averaging_baseline_study, augmented_baseline_study, bias_variance_study, taylor_variance_check,
    BiasVarianceReport, BiasVarianceRow, StudyConfig, StudyKind, TaylorCheck,
};

use crate::error::{Error, Result};
use crate::stats::KahanSum;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStepSample {
    pub s0: f64,
    pub o1: f64,
    pub o2: f64,
}

impl TwoStepSample {
    pub fn new(s0: f64, o1: f64, o2: f64) -> Self {
        Self { s0, o1, o2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    fn matches(self, x: f64) -> bool {
        match self {
            Sign::Positive => x > 0.0,
            Sign::Negative => x < 0.0,
        }
    }
}

/// How [`estimate_theta`] picked its root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootSelection {
    /// Direct formula at α = 1 or α = 0.
    ClosedForm,
    /// The only real root or the lowest-loss one.
    GlobalMinimum,
    /// Local minima on both signs; the lowest one with the hinted sign.
    SignHint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub alpha: f64,
    pub theta_hat: f64,
    pub roots: Vec<f64>,
    pub selection: RootSelection,
}

pub fn two_step_loss(theta: f64, alpha: f64, sample: &TwoStepSample) -> f64 {
    let r1 = theta * sample.s0 - sample.o1;
    let r2 = theta * theta * sample.s0 - sample.o2;
    alpha * r1 * r1 + (1.0 - alpha) * r2 * r2
}

/// Mean of [`two_step_loss`] over a dataset.
pub fn dataset_loss(theta: f64, alpha: f64, samples: &[TwoStepSample]) -> f64 {
    let k: KahanSum = samples.iter().map(|s| two_step_loss(theta, alpha, s)).collect();
    k.value() / samples.len() as f64
}

/// Sample means of the products that determine the loss derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub ss: f64,
    pub o1s: f64,
    pub o2s: f64,
}

impl Moments {
    pub fn of(samples: &[TwoStepSample]) -> Self {
        let n = samples.len() as f64;
        let ss: KahanSum = samples.iter().map(|x| x.s0 * x.s0).collect();
        let o1s: KahanSum = samples.iter().map(|x| x.o1 * x.s0).collect();
        let o2s: KahanSum = samples.iter().map(|x| x.o2 * x.s0).collect();
        Self { ss: ss.value() / n, o1s: o1s.value() / n, o2s: o2s.value() / n }
    }

    /// Coefficients `(a, c, d)` of `dL/dθ = aθ³ + cθ + d`.
    pub fn derivative_coefficients(&self, alpha: f64) -> (f64, f64, f64) {
        let a = 4.0 * (1.0 - alpha) * self.ss;
        let c = 2.0 * alpha * self.ss - 4.0 * (1.0 - alpha) * self.o2s;
        let d = -2.0 * alpha * self.o1s;
        (a, c, d)
    }
}

pub fn loss_derivative(theta: f64, alpha: f64, m: &Moments) -> f64 {
    let (a, c, d) = m.derivative_coefficients(alpha);
    (a * theta * theta + c) * theta + d
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must be in [0, 1], got {alpha}")));
    }
    Ok(())
}

fn check_samples(samples: &[TwoStepSample]) -> Result<Moments> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    if samples.iter().any(|s| !(s.s0.is_finite() && s.o1.is_finite() && s.o2.is_finite())) {
        return Err(Error::NonFiniteState);
    }
    let m = Moments::of(samples);
    if m.ss <= 0.0 {
        return Err(Error::InvalidArgument("initial states must not all be zero".into()));
    }
    Ok(m)
}

/// Real roots of `x³ + p·x + q`, ascending.
pub fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    let disc = 4.0 * p * p * p + 27.0 * q * q;
    let mut roots = if p == 0.0 {
        vec![(-q).cbrt()]
    } else if disc < 0.0 {
        // three distinct real roots (p < 0)
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3).map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos()).collect()
    } else if disc == 0.0 {
        let double = -3.0 * q / (2.0 * p);
        vec![3.0 * q / p, double]
    } else {
        let inner = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        // pick the larger-magnitude term to avoid cancellation
        let u = (-q / 2.0 + if q <= 0.0 { inner } else { -inner }).cbrt();
        vec![if u == 0.0 { 0.0 } else { u - p / (3.0 * u) }]
    };
    roots.sort_by(f64::total_cmp);
    roots
}

/// All real roots of `dL_α/dθ`, each polished by one Newton step.
pub fn loss_derivative_roots(alpha: f64, samples: &[TwoStepSample]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let m = check_samples(samples)?;
    Ok(roots_from_moments(alpha, &m))
}

fn roots_from_moments(alpha: f64, m: &Moments) -> Vec<f64> {
    let (a, c, d) = m.derivative_coefficients(alpha);
    let raw = if a == 0.0 { vec![-d / c] } else { depressed_cubic_roots(c / a, d / a) };
    let mut roots: Vec<f64> = raw
        .into_iter()
        .map(|r| {
            let f = (a * r * r + c) * r + d;
            let df = 3.0 * a * r * r + c;
            let polished = r - f / df;
            if df != 0.0 && polished.is_finite() {
                polished
            } else {
                r
            }
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    roots
}

/// Minimizer of the empirical `L_α`.
///
/// α = 1 and α = 0 use their closed forms. Otherwise, when the derivative's
/// local minima fall on both sides of zero, the hinted sign decides; the
/// remaining choice is by lowest loss and then smaller `|θ|`.
pub fn estimate_theta(alpha: f64, samples: &[TwoStepSample], sign_hint: Sign) -> Result<EstimatorResult> {
    check_alpha(alpha)?;
    let m = check_samples(samples)?;
    let roots = roots_from_moments(alpha, &m);
    if alpha == 1.0 {
        return Ok(EstimatorResult { alpha, theta_hat: m.o1s / m.ss, roots, selection: RootSelection::ClosedForm });
    }
    if alpha == 0.0 {
        if m.o2s <= 0.0 {
            return Err(Error::EstimatorUndefined(format!("mean o2*s = {} is not positive", m.o2s)));
        }
        let mag = (m.o2s / m.ss).sqrt();
        let theta_hat = match sign_hint {
            Sign::Positive => mag,
            Sign::Negative => -mag,
        };
        return Ok(EstimatorResult { alpha, theta_hat, roots, selection: RootSelection::ClosedForm });
    }

    let (a, c, _) = m.derivative_coefficients(alpha);
    let minima: Vec<f64> = roots.iter().copied().filter(|&r| 3.0 * a * r * r + c > 0.0).collect();
    let candidates = if minima.is_empty() { roots.clone() } else { minima };
    let both_signs = candidates.iter().any(|&r| r > 0.0) && candidates.iter().any(|&r| r < 0.0);
    let (pool, selection): (Vec<f64>, _) = if both_signs {
        (candidates.into_iter().filter(|&r| sign_hint.matches(r)).collect(), RootSelection::SignHint)
    } else {
        (candidates, RootSelection::GlobalMinimum)
    };
    let theta_hat = pool
        .iter()
        .copied()
        .map(|r| (dataset_loss(r, alpha, samples), r))
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.abs().total_cmp(&y.1.abs())))
        .map(|(_, r)| r)
        .expect("a real cubic has at least one real root");
    Ok(EstimatorResult { alpha, theta_hat, roots, selection })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(s0: f64, o1: f64, o2: f64) -> Vec<TwoStepSample> {
        vec![TwoStepSample::new(s0, o1, o2)]
    }

    #[test]
    fn loss_examples() {
        let th = 0.78;
        let clean = TwoStepSample::new(1.3, th * 1.3, th * th * 1.3);
        for alpha in [0.0, 0.3, 1.0] {
            assert!(two_step_loss(th, alpha, &clean).abs() < 1e-15);
        }
        assert_eq!(two_step_loss(0.0, 1.0, &TwoStepSample::new(1.0, 2.0, 0.0)), 4.0);
        assert_eq!(two_step_loss(1.0, 0.5, &TwoStepSample::new(1.0, 0.0, 0.0)), 1.0);
    }

    #[test]
    fn linear_case_root() {
        let r = loss_derivative_roots(1.0, &one(2.0, 1.6, 0.0)).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn alpha_zero_factors() {
        let r = loss_derivative_roots(0.0, &one(1.0, 0.0, 0.64)).unwrap();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-0.8, 0.0, 0.8]) {
            assert!((got - want).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn closed_forms() {
        let e = estimate_theta(1.0, &one(1.0, 0.9, 0.3), Sign::Positive).unwrap();
        assert_eq!(e.theta_hat, 0.9);
        assert_eq!(e.selection, RootSelection::ClosedForm);
        let e = estimate_theta(0.0, &one(1.0, 0.1, 0.64), Sign::Positive).unwrap();
        assert!((e.theta_hat - 0.8).abs() < 1e-15);
        let e = estimate_theta(0.0, &one(1.0, 0.1, 0.64), Sign::Negative).unwrap();
        assert!((e.theta_hat + 0.8).abs() < 1e-15);
    }

    #[test]
    fn alpha_zero_undefined_without_positive_moment() {
        let err = estimate_theta(0.0, &one(1.0, 0.5, -0.1), Sign::Positive).unwrap_err();
        assert!(matches!(err, Error::EstimatorUndefined(_)));
    }

    #[test]
    fn one_step_estimate_with_a_shared_initial_state() {
        let th = 0.6;
        let s = 1.5;
        let eps = [0.12, -0.4, 0.05];
        let samples: Vec<_> = eps.iter().map(|e| TwoStepSample::new(s, th * s + e, 0.0)).collect();
        let shared_s = th + eps.iter().sum::<f64>() / (3.0 * s);
        let got = estimate_theta(1.0, &samples, Sign::Positive).unwrap().theta_hat;
        assert!((got - shared_s).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_alpha_and_zero_states() {
        assert!(loss_derivative_roots(1.5, &one(1.0, 0.0, 0.0)).is_err());
        assert!(loss_derivative_roots(-0.1, &one(1.0, 0.0, 0.0)).is_err());
        assert!(estimate_theta(0.5, &one(0.0, 1.0, 1.0), Sign::Positive).is_err());
    }

    #[test]
    fn noiseless_estimators_are_exact() {
        for th in [0.78, -0.4, 0.31] {
            let samples: Vec<_> = [0.7, 1.0, -2.0].iter().map(|&s| TwoStepSample::new(s, th * s, th * th * s)).collect();
            for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let e = estimate_theta(alpha, &samples, Sign::of(th)).unwrap();
                assert!((e.theta_hat - th).abs() < 1e-9, "alpha {alpha}: {e:?}");
            }
        }
    }

    #[test]
    fn cubic_three_and_one_root() {
        // (x-1)(x-2)(x+3) = x³ - 7x + 6
        let r = depressed_cubic_roots(-7.0, 6.0);
        for (got, want) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        // x³ + x + 2 = (x+1)(x² - x + 2)
        let r = depressed_cubic_roots(1.0, 2.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] + 1.0).abs() < 1e-12);
    }
}
