use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-horizon loss weights `α₁..α_h`, summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    alphas: Vec<f64>,
    beta: Option<f64>,
}

impl WeightProfile {
    /// Explicit weights. They must be nonnegative and sum to one within 1e-9;
    /// they are then rescaled to sum to one exactly.
    pub fn explicit(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidArgument("weight profile needs h >= 1".into()));
        }
        if alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidArgument(format!("weights must be finite and >= 0: {alphas:?}")));
        }
        let total: f64 = alphas.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { alphas: alphas.iter().map(|a| a / total).collect(), beta: None })
    }

    /// All weight on the first horizon: the one-step loss.
    pub fn one_step(h: usize) -> Result<Self> {
        let mut a = vec![0.0; h.max(1)];
        a[0] = 1.0;
        if h == 0 {
            return Err(Error::InvalidArgument("weight profile needs h >= 1".into()));
        }
        Self::explicit(a)
    }

    pub fn uniform(h: usize) -> Result<Self> {
        exp_weights(h, 1.0)
    }

    pub fn h(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }
}

/// `αᵢ = βⁱ / Σⱼ βʲ` for `i, j = 1..h`.
pub fn exp_weights(h: usize, beta: f64) -> Result<WeightProfile> {
    if h == 0 {
        return Err(Error::InvalidArgument("weight profile needs h >= 1".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
    }
    let alphas = if beta == 1.0 {
        vec![1.0 / h as f64; h]
    } else {
        // work relative to the largest power so large β and h do not overflow
        let log_b = beta.ln();
        let top = if beta > 1.0 { h as f64 } else { 1.0 };
        let raw: Vec<f64> = (1..=h).map(|i| ((i as f64 - top) * log_b).exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|r| r / total).collect()
    };
    Ok(WeightProfile { alphas, beta: Some(beta) })
}

/// `h_e = Σ αᵢ · i`.
pub fn effective_horizon(profile: &WeightProfile) -> f64 {
    profile.alphas.iter().enumerate().map(|(i, a)| a * (i + 1) as f64).sum()
}
