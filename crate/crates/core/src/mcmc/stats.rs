//! Binning and jackknife error estimates for Markov chain averages.

use serde::{Deserialize, Serialize};

/// Number of bins used for error bars.
pub const DEFAULT_BINS: usize = 64;

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
    /// False when halving the bin count changes the error noticeably,
    /// i.e. bins are shorter than the autocorrelation time.
    pub converged: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Estimate {
        Estimate { value, err: 0.0, converged: true }
    }

    /// Number of standard errors separating `self` from `x`.
    pub fn z_score(&self, x: f64) -> f64 {
        if self.err == 0.0 {
            if self.value == x {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - x).abs() / self.err
        }
    }
}

/// Means of `bins` equal consecutive blocks; the remainder is dropped.
pub fn bin_means(series: &[f64], bins: usize) -> Vec<f64> {
    let len = series.len() / bins.max(1);
    if len == 0 {
        return Vec::new();
    }
    series.chunks_exact(len).take(bins).map(|c| c.iter().sum::<f64>() / len as f64).collect()
}

/// Jackknife mean and error of `f(mean num, mean den)` over paired bin means.
fn jackknife(num: &[f64], den: &[f64], f: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let b = num.len();
    let sn: f64 = num.iter().sum();
    let sd: f64 = den.iter().sum();
    let full = f(sn / b as f64, sd / b as f64);
    if b < 2 {
        return (full, f64::INFINITY);
    }
    let leave: Vec<f64> = (0..b)
        .map(|i| f((sn - num[i]) / (b - 1) as f64, (sd - den[i]) / (b - 1) as f64))
        .collect();
    let mean = leave.iter().sum::<f64>() / b as f64;
    let var = leave.iter().map(|x| (x - mean).powi(2)).sum::<f64>() * (b - 1) as f64 / b as f64;
    let value = b as f64 * full - (b - 1) as f64 * mean;
    (value, var.sqrt())
}

fn combine(fine: (f64, f64), coarse: (f64, f64)) -> Estimate {
    Estimate { value: fine.0, err: fine.1.max(coarse.1), converged: coarse.1 <= 1.3 * fine.1 || coarse.1 == 0.0 }
}

/// Estimate of the mean of `series`.
pub fn mean_estimate(series: &[f64], bins: usize) -> Estimate {
    let ones = vec![1.0; series.len()];
    ratio_estimate(series, &ones, bins)
}

/// Estimate of `E[num] / E[den]`.
pub fn ratio_estimate(num: &[f64], den: &[f64], bins: usize) -> Estimate {
    let f = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let fine = jackknife(&bin_means(num, bins), &bin_means(den, bins), f);
    let coarse = jackknife(&bin_means(num, bins / 2), &bin_means(den, bins / 2), f);
    combine(fine, coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iid_mean_error_matches_theory() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..64_000).map(|_| rng.random::<f64>()).collect();
        let e = mean_estimate(&xs, 64);
        let theory = (1.0f64 / 12.0 / 64_000.0).sqrt();
        assert!((e.value - 0.5).abs() < 4.0 * theory);
        assert!((e.err / theory - 1.0).abs() < 0.35, "{} vs {}", e.err, theory);
        assert!(e.converged);
    }

    #[test]
    fn correlated_series_is_flagged() {
        // blocks of 2000 identical values: 64 bins of 1000 are strongly correlated
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut xs = Vec::new();
        for _ in 0..32 {
            let v: f64 = rng.random();
            xs.extend(std::iter::repeat_n(v, 2000));
        }
        let e = mean_estimate(&xs, 64);
        assert!(!e.converged);
    }

    #[test]
    fn ratio_of_constants() {
        let e = ratio_estimate(&[2.0; 128], &[4.0; 128], 64);
        assert_eq!(e.value, 0.5);
        assert_eq!(e.err, 0.0);
    }
}
