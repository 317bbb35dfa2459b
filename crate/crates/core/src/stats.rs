//! Small statistics helpers shared by the Monte Carlo studies and reports.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        for x in iter {
            k.add(x);
        }
        k
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().copied().collect::<KahanSum>().value() / xs.len() as f64
}

/// Population variance (divides by `n`).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).collect::<KahanSum>().value() / xs.len() as f64
}

/// Sample standard deviation (divides by `n - 1`); zero for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss = xs.iter().map(|x| (x - m) * (x - m)).collect::<KahanSum>().value();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Linear-interpolated quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// True when `self` lies entirely below `other`.
    pub fn below(&self, other: &Interval) -> bool {
        self.upper < other.lower
    }
}

/// `mean ± 1.96 · standard error`.
pub fn normal_ci(xs: &[f64]) -> Interval {
    let m = mean(xs);
    let se = sample_std(xs) / (xs.len() as f64).sqrt();
    Interval { lower: m - 1.96 * se, upper: m + 1.96 * se }
}

/// Percentile bootstrap interval for a statistic over stratified groups.
///
/// Each resample draws, independently within every group, as many values as
/// the group holds, then evaluates `stat` on the resampled groups.
pub fn stratified_bootstrap<R: Rng + ?Sized>(
    groups: &[Vec<f64>],
    resamples: usize,
    level: f64,
    rng: &mut R,
    stat: impl Fn(&[Vec<f64>]) -> f64,
) -> Interval {
    let mut stats = Vec::with_capacity(resamples);
    let mut scratch: Vec<Vec<f64>> = groups.iter().map(|g| Vec::with_capacity(g.len())).collect();
    for _ in 0..resamples {
        for (g, out) in groups.iter().zip(scratch.iter_mut()) {
            out.clear();
            for _ in 0..g.len() {
                out.push(g[rng.gen_range(0..g.len())]);
            }
        }
        stats.push(stat(&scratch));
    }
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Interval { lower: quantile_sorted(&stats, alpha), upper: quantile_sorted(&stats, 1.0 - alpha) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut xs = vec![1e16];
        xs.extend(std::iter::repeat(1.0).take(1000));
        let k: KahanSum = xs.iter().copied().collect();
        assert_eq!(k.value(), 1e16 + 1000.0);
    }

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert_eq!(variance(&xs), 1.25);
        assert!((sample_std(&xs) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_of_constant_is_degenerate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let ci = stratified_bootstrap(&[vec![2.0; 10]], 200, 0.95, &mut rng, |g| mean(&g[0]));
        assert_eq!(ci, Interval { lower: 2.0, upper: 2.0 });
    }
}
