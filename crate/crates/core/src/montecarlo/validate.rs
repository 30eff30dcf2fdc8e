use serde::{Deserialize, Serialize};

use super::estimate::{estimate_variance_with, VarianceEstimate};
use super::sampling::{run_trials, AtomicEnsemble, PhotonReference, PhotonSource, TrialConfig};
use crate::ensemble::{
    alpha_moments, fluctuation_parameter, intrinsic_variance, GasParams, MomentOptions, ResponseModel,
};
use crate::noise::PhotonStatistics;
use crate::spectroscopy::FourLevelParams;
use crate::{Error, Result};

/// A grid of resource ratios simulated at fixed `N̄_at`, with `N̄_ph = R·N̄_at`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingValidation {
    pub levels: FourLevelParams,
    pub gas: GasParams,
    /// Optical-depth transduction `a`.
    pub a: f64,
    pub n_at_mean: f64,
    pub r_grid: Vec<f64>,
    pub stats: PhotonStatistics,
    pub mode: ResponseModel,
    pub seed: u64,
    pub trials: usize,
    /// Relative tolerance on `σ_S/σ_S^(0)`.
    pub tolerance: f64,
    /// Family-wise confidence of the per-point intervals.
    pub confidence: f64,
    /// Points with `R·J` at or above this enter the AGN-branch slope fit.
    pub agn_branch_min_rj: f64,
    /// Put every atom at rest, so that `J = 0`.
    pub frozen_velocities: bool,
    /// Multiplies the analytic `J`. Anything but 1 is a deliberately wrong
    /// analytic curve, used to check that the comparison can fail.
    pub analytic_j_factor: f64,
}

impl ScalingValidation {
    pub fn new(levels: FourLevelParams, gas: GasParams, a: f64, n_at_mean: f64, r_grid: Vec<f64>) -> Self {
        Self {
            levels,
            gas,
            a,
            n_at_mean,
            r_grid,
            stats: PhotonStatistics::COHERENT,
            mode: ResponseModel::WeakProbe,
            seed: 0,
            trials: 20_000,
            tolerance: 0.05,
            confidence: 0.95,
            agn_branch_min_rj: 100.0,
            frozen_velocities: false,
            analytic_j_factor: 1.0,
        }
    }

    /// `J = a²𝒱_I` from velocity quadrature (zero for frozen velocities).
    pub fn analytic_j(&self) -> Result<f64> {
        if self.frozen_velocities {
            return Ok(0.0);
        }
        let m = alpha_moments(&self.levels, &self.gas, self.mode, &MomentOptions::default())?;
        Ok(fluctuation_parameter(
            self.a,
            intrinsic_variance(&self.gas, m.var_alpha_i),
        ))
    }

    fn validate(&self) -> Result<()> {
        if self.r_grid.is_empty() || self.r_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("r_grid", "needs at least one finite R > 0"));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::invalid("a", format!("must be finite and > 0, got {}", self.a)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be > 0"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::invalid("confidence", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPointReport {
    pub r_target: f64,
    /// `N̄_ph,achieved/N̄_at`.
    pub r_achieved: f64,
    pub n_ph_mean: f64,
    pub q_achieved: f64,
    pub variance: VarianceEstimate,
    /// `σ_S·√N̄_ph`, i.e. `σ_S/σ_S^(0)` against the coherent shot limit.
    pub empirical_ratio: f64,
    pub ratio_ci_low: f64,
    pub ratio_ci_high: f64,
    /// `√((1+Q) + R·J)`.
    pub analytic_ratio: f64,
    pub relative_deviation: f64,
    pub analytic_in_ci: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub j: f64,
    pub points: Vec<ScalingPointReport>,
    /// Log-log slope of the empirical ratio over the AGN branch; `None` with
    /// fewer than two points there.
    pub agn_slope: Option<f64>,
    pub pass: bool,
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Simulates every grid point and compares `σ_S/σ_S^(0)` with the scaling
/// law. Intervals are Bonferroni-corrected so the whole grid holds at
/// `confidence`. The analytic side uses the achieved photon mean and `Q`.
pub fn validate_scaling(v: &ScalingValidation) -> Result<ScalingReport> {
    v.validate()?;
    let j = v.analytic_j()? * v.analytic_j_factor;
    let mut ensemble = AtomicEnsemble::new(&v.levels, &v.gas, v.mode)?;
    if v.frozen_velocities {
        ensemble = ensemble.frozen();
    }
    let level = 1.0 - (1.0 - v.confidence) / v.r_grid.len() as f64;
    let mut points = Vec::with_capacity(v.r_grid.len());
    for (i, &r) in v.r_grid.iter().enumerate() {
        let config = TrialConfig {
            seed: v.seed,
            trials: v.trials,
            n_at_mean: v.n_at_mean,
            n_ph_mean: r * v.n_at_mean,
            stats: v.stats,
            mode: v.mode,
            reference: PhotonReference::Incident,
        };
        config.validate()?;
        config.check_linearized()?;
        let source = PhotonSource::new(config.n_ph_mean, config.stats)?;
        let samples = run_trials(&config, &ensemble, v.a, i as u64)?;
        let s: Vec<f64> = samples.iter().map(|x| x.s).collect();
        let variance = estimate_variance_with(&s, level)?;
        let n_ph = source.achieved_mean;
        let r_achieved = n_ph / v.n_at_mean;
        let analytic_ratio = ((1.0 + source.achieved_q) + r_achieved * j).sqrt();
        let empirical_ratio = (variance.var_s * n_ph).sqrt();
        let ratio_ci_low = (variance.ci_low * n_ph).sqrt();
        let ratio_ci_high = (variance.ci_high * n_ph).sqrt();
        let relative_deviation = if analytic_ratio > 0.0 {
            (empirical_ratio - analytic_ratio).abs() / analytic_ratio
        } else {
            empirical_ratio
        };
        let analytic_in_ci = if variance.degenerate {
            analytic_ratio == 0.0
        } else {
            ratio_ci_low <= analytic_ratio && analytic_ratio <= ratio_ci_high
        };
        let pass = relative_deviation < v.tolerance && analytic_in_ci;
        points.push(ScalingPointReport {
            r_target: r,
            r_achieved,
            n_ph_mean: n_ph,
            q_achieved: source.achieved_q,
            variance,
            empirical_ratio,
            ratio_ci_low,
            ratio_ci_high,
            analytic_ratio,
            relative_deviation,
            analytic_in_ci,
            pass,
        });
    }
    let branch: Vec<_> = points
        .iter()
        .filter(|p| p.r_achieved * j >= v.agn_branch_min_rj && p.empirical_ratio > 0.0)
        .collect();
    let agn_slope = fit_slope(
        &branch.iter().map(|p| p.r_achieved.ln()).collect::<Vec<_>>(),
        &branch.iter().map(|p| p.empirical_ratio.ln()).collect::<Vec<_>>(),
    );
    let pass = points.iter().all(|p| p.pass);
    Ok(ScalingReport {
        j,
        points,
        agn_slope,
        pass,
    })
}
