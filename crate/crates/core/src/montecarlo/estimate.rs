use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    BatchMeans,
    Jackknife,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub mean_s: f64,
    pub var_s: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_effective: usize,
    pub method: CiMethod,
    /// All samples identical; the interval collapses to `[0, 0]`.
    pub degenerate: bool,
}

impl VarianceEstimate {
    pub fn contains(&self, v: f64) -> bool {
        self.ci_low <= v && v <= self.ci_high
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn sample_stats(x: &[f64]) -> SampleStats {
    let n = x.len();
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = if n > 1 { m2 / (nf - 1.0) } else { 0.0 };
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    SampleStats {
        n,
        mean,
        variance,
        skewness,
        excess_kurtosis,
    }
}

/// Sample covariance of paired draws and its standard error
/// `√((⟨(dx·dy)²⟩ − cov²)/n)`.
pub fn covariance(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::invalid("samples", "paired samples differ in length"));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let products: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let cov = products.iter().sum::<f64>() / (nf - 1.0);
    let second = products.iter().map(|p| p * p).sum::<f64>() / nf;
    let se = ((second - cov * cov).max(0.0) / nf).sqrt();
    Ok((cov, se))
}

fn unbiased_variance(x: &[f64]) -> f64 {
    sample_stats(x).variance
}

fn t_quantile(level: f64, dof: f64) -> f64 {
    StudentsT::new(0.0, 1.0, dof)
        .map(|t| t.inverse_cdf(0.5 + level / 2.0))
        .unwrap_or(1.96)
}

/// 95% interval; batch means (20 to 1000 batches of at least 50) for
/// `n ≥ 1000`, jackknife below.
pub fn estimate_variance(samples: &[f64]) -> Result<VarianceEstimate> {
    estimate_variance_with(samples, 0.95)
}

/// Same as [`estimate_variance`] at an arbitrary two-sided confidence level.
pub fn estimate_variance_with(samples: &[f64], level: f64) -> Result<VarianceEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", format!("must lie in (0, 1), got {level}")));
    }
    let stats = sample_stats(samples);
    let method = if n >= 1000 {
        CiMethod::BatchMeans
    } else {
        CiMethod::Jackknife
    };
    if samples.iter().all(|&s| s == samples[0]) {
        return Ok(VarianceEstimate {
            mean_s: stats.mean,
            var_s: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            n_effective: n,
            method,
            degenerate: true,
        });
    }
    let var = stats.variance;
    let (half, n_effective) = match method {
        CiMethod::BatchMeans => {
            let batches = (n / 50).clamp(20, 1000);
            let size = n / batches;
            let per_batch: Vec<f64> = samples
                .chunks_exact(size)
                .take(batches)
                .map(unbiased_variance)
                .collect();
            let spread = unbiased_variance(&per_batch);
            let se = (spread / batches as f64).sqrt();
            (t_quantile(level, (batches - 1) as f64) * se, batches * size)
        }
        CiMethod::Jackknife => {
            // Leave-one-out variances from running sums.
            let nf = n as f64;
            let sum: f64 = samples.iter().sum();
            let sum2: f64 = samples.iter().map(|x| x * x).sum();
            let loo: Vec<f64> = samples
                .iter()
                .map(|&x| {
                    let m = nf - 1.0;
                    let s = sum - x;
                    let s2 = sum2 - x * x;
                    ((s2 - s * s / m) / (m - 1.0)).max(0.0)
                })
                .collect();
            let loo_mean = loo.iter().sum::<f64>() / nf;
            let jk_var = (nf - 1.0) / nf * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>();
            (t_quantile(level, nf - 1.0) * jk_var.sqrt(), n)
        }
    };
    Ok(VarianceEstimate {
        mean_s: stats.mean,
        var_s: var,
        ci_low: (var - half).max(0.0),
        ci_high: var + half,
        n_effective,
        method,
        degenerate: false,
    })
}
