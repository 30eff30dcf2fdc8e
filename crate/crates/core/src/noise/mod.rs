//! Noise budget of a linearized optical readout.
//!
//! A readout `S = f(χ̄_q, ξ)` linearized at its operating point splits into an
//! atomic term with transduction `G` and a photon-counting term with
//! transduction `ν`:
//!
//! ```text
//! σ_S² = G²𝒱_q/N̄_at + ν²(1+Q)/N̄_ph
//! ```
//!
//! With `R = N̄_ph/N̄_at` and `J = G²𝒱_q/ν²` the ratio to the coherent-light
//! limit is `√(1 + R·J)`.

mod sensitivity;

pub use sensitivity::{
    quantum_advantage_boundary, sensitivity, sensitivity_map, signal_slope, slope_limited_field, ConstantJ,
    FluctuationCurve, IntensityDependentJ, MapPoint, SensitivityMap, SensitivityPoint, SensorModel, SlopeEstimate,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Quadrature {
    #[serde(rename = "R")]
    Real,
    #[default]
    #[serde(rename = "I")]
    Imaginary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub transduction_g: f64,
    pub photon_transduction_nu: f64,
    pub quadrature_q: Quadrature,
}

impl ReadoutModel {
    /// Optical depth `S = a·χ̄_I − ln(ξ/N̄_ph)`: `G = a`, `ν = −1`.
    pub fn optical_depth(a: f64) -> Self {
        Self {
            transduction_g: a,
            photon_transduction_nu: -1.0,
            quadrature_q: Quadrature::Imaginary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.photon_transduction_nu == 0.0 || !self.photon_transduction_nu.is_finite() {
            return Err(Error::invalid("photon_transduction_nu", "must be finite and nonzero"));
        }
        if !self.transduction_g.is_finite() {
            return Err(Error::invalid("transduction_g", "must be finite"));
        }
        Ok(())
    }

    /// `J = G²𝒱_q/ν²`.
    pub fn fluctuation_parameter(&self, intrinsic_variance: f64) -> f64 {
        crate::ensemble::fluctuation_parameter_general(
            self.transduction_g,
            intrinsic_variance,
            self.photon_transduction_nu,
        )
    }
}

/// Photon-number statistics of the probe, `Var(ξ) = N̄_ph(1+Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatistics {
    pub mandel_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonSampler {
    Poisson,
    Binomial,
    NegativeBinomial,
    Deterministic,
}

impl PhotonStatistics {
    pub const COHERENT: PhotonStatistics = PhotonStatistics { mandel_q: 0.0 };
    pub const FOCK: PhotonStatistics = PhotonStatistics { mandel_q: -1.0 };

    pub fn new(mandel_q: f64) -> Result<Self> {
        let s = Self { mandel_q };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mandel_q.is_finite() || self.mandel_q < -1.0 {
            return Err(Error::MandelDomain(self.mandel_q));
        }
        Ok(())
    }

    /// The sampler that realizes this `Q`.
    pub fn sampler(&self) -> PhotonSampler {
        let q = self.mandel_q;
        if q == 0.0 {
            PhotonSampler::Poisson
        } else if q == -1.0 {
            PhotonSampler::Deterministic
        } else if q < 0.0 {
            PhotonSampler::Binomial
        } else {
            PhotonSampler::NegativeBinomial
        }
    }
}

impl Default for PhotonStatistics {
    fn default() -> Self {
        Self::COHERENT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub sigma_agn: f64,
    pub sigma_omn: f64,
    pub sigma_total: f64,
    /// `σ_S/σ_S^(0)` against the coherent-light shot-noise limit.
    pub ratio_to_shot_limit: f64,
    pub r: f64,
    pub j: f64,
    /// `J/(1+Q)`; infinite for Fock light.
    pub j_q: f64,
}

fn check_counts(n_at: f64, n_ph: f64) -> Result<()> {
    if !(n_at > 0.0 && n_at.is_finite()) {
        return Err(Error::invalid("n_at", format!("must be > 0, got {n_at}")));
    }
    if !(n_ph > 0.0 && n_ph.is_finite()) {
        return Err(Error::invalid("n_ph", format!("must be > 0, got {n_ph}")));
    }
    Ok(())
}

/// `σ_A = |G|√(𝒱_q/N̄_at)`.
pub fn sigma_agn(g: f64, v_q: f64, n_at: f64) -> f64 {
    (g * g * v_q / n_at).sqrt()
}

/// `σ_ℰ = |ν|/√N̄_ph` for coherent light.
pub fn sigma_omn(nu: f64, n_ph: f64) -> f64 {
    (nu * nu / n_ph).sqrt()
}

/// `σ_S² = G²𝒱_q/N̄_at + ν²/N̄_ph`.
pub fn signal_variance(g: f64, v_q: f64, n_at: f64, nu: f64, n_ph: f64) -> Result<f64> {
    check_counts(n_at, n_ph)?;
    Ok(g * g * v_q / n_at + nu * nu / n_ph)
}

/// `√(1 + R·J)`.
pub fn scaling_ratio(r: f64, j: f64) -> f64 {
    (1.0 + r * j).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedRatio {
    /// `σ_S/σ_ℰ^(Q) = √(1 + R·J/(1+Q))`; `None` for Fock light, where the
    /// quantum limit vanishes.
    pub to_quantum_limit: Option<f64>,
    /// `σ_S/σ_S^(0) = √((1+Q) + R·J)`.
    pub to_shot_limit: f64,
}

pub fn generalized_scaling_ratio(r: f64, j: f64, stats: PhotonStatistics) -> Result<GeneralizedRatio> {
    stats.validate()?;
    let q = stats.mandel_q;
    let to_quantum_limit = if q > -1.0 {
        Some((1.0 + r * j / (1.0 + q)).sqrt())
    } else {
        None
    };
    Ok(GeneralizedRatio {
        to_quantum_limit,
        to_shot_limit: ((1.0 + q) + r * j).sqrt(),
    })
}

/// Crossover threshold between the OMN- and AGN-limited regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CriticalThreshold {
    Finite(f64),
    /// `J = 0`: the readout never becomes granularity limited.
    NoGranularityNoise,
}

impl CriticalThreshold {
    pub fn value(&self) -> f64 {
        match self {
            CriticalThreshold::Finite(r) => *r,
            CriticalThreshold::NoGranularityNoise => f64::INFINITY,
        }
    }
}

/// `R_c = 1/J`.
pub fn critical_threshold(j: f64) -> Result<CriticalThreshold> {
    if !(j >= 0.0) {
        return Err(Error::invalid("j", format!("must be >= 0, got {j}")));
    }
    Ok(if j == 0.0 {
        CriticalThreshold::NoGranularityNoise
    } else {
        CriticalThreshold::Finite(1.0 / j)
    })
}

/// The full budget for given counts and photon statistics.
pub fn noise_budget(
    readout: &ReadoutModel,
    v_q: f64,
    n_at: f64,
    n_ph: f64,
    stats: PhotonStatistics,
) -> Result<NoiseBudget> {
    readout.validate()?;
    stats.validate()?;
    check_counts(n_at, n_ph)?;
    let q = stats.mandel_q;
    let sigma_a = sigma_agn(readout.transduction_g, v_q, n_at);
    let sigma_e = sigma_omn(readout.photon_transduction_nu, n_ph) * (1.0 + q).sqrt();
    let j = readout.fluctuation_parameter(v_q);
    let r = n_ph / n_at;
    let sigma_total = (sigma_a * sigma_a + sigma_e * sigma_e).sqrt();
    Ok(NoiseBudget {
        sigma_agn: sigma_a,
        sigma_omn: sigma_e,
        sigma_total,
        ratio_to_shot_limit: sigma_total / sigma_omn(readout.photon_transduction_nu, n_ph),
        r,
        j,
        j_q: if q > -1.0 { j / (1.0 + q) } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn shot_limit_when_no_atomic_noise() {
        let n_ph = 3.7e6;
        assert_eq!(signal_variance(3e5, 0.0, 1e4, -1.0, n_ph).unwrap(), 1.0 / n_ph);
        assert!(signal_variance(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(signal_variance(1.0, 1.0, 1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn pure_agn_limit() {
        let v = signal_variance(2.0, 0.3, 1e3, 1.0, 1e300).unwrap();
        assert_relative_eq!(v, 4.0 * 0.3 / 1e3, max_relative = 1e-12);
    }

    #[test]
    fn scaling_ratio_values() {
        assert_eq!(scaling_ratio(0.0, 40.0), 1.0);
        assert_eq!(scaling_ratio(1.5, 2.0), 2.0);
        let r = scaling_ratio(0.72, 40.0);
        assert_relative_eq!(r, 29.8f64.sqrt(), max_relative = 1e-15);
        assert!((r - 5.46).abs() < 0.005);
        assert!((r - 5.4).abs() / 5.4 < 0.02);
        assert_eq!(scaling_ratio(1.0 / 40.0, 40.0), 2f64.sqrt());
    }

    #[test]
    fn generalized_ratio_cases() {
        let coherent = generalized_scaling_ratio(0.3, 7.0, PhotonStatistics::COHERENT).unwrap();
        assert_eq!(coherent.to_shot_limit, scaling_ratio(0.3, 7.0));
        assert_eq!(coherent.to_quantum_limit, Some(scaling_ratio(0.3, 7.0)));
        let fock = generalized_scaling_ratio(0.3, 7.0, PhotonStatistics::FOCK).unwrap();
        assert_eq!(fock.to_quantum_limit, None);
        assert_relative_eq!(fock.to_shot_limit, (0.3f64 * 7.0).sqrt(), max_relative = 1e-15);
        let squeezed = generalized_scaling_ratio(0.5, 2.0, PhotonStatistics { mandel_q: -0.5 }).unwrap();
        assert_relative_eq!(squeezed.to_shot_limit, 1.5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(squeezed.to_quantum_limit.unwrap(), 3f64.sqrt(), max_relative = 1e-15);
        assert_eq!(
            generalized_scaling_ratio(1.0, 1.0, PhotonStatistics { mandel_q: -1.5 }),
            Err(Error::MandelDomain(-1.5))
        );
    }

    #[test]
    fn thresholds() {
        assert_eq!(critical_threshold(40.0).unwrap().value(), 0.025);
        assert_eq!(critical_threshold(1000.0).unwrap().value(), 1e-3);
        assert_eq!(critical_threshold(1.0).unwrap().value(), 1.0);
        assert_eq!(critical_threshold(0.0).unwrap(), CriticalThreshold::NoGranularityNoise);
        assert!(critical_threshold(-1.0).is_err());
    }

    #[test]
    fn sampler_selection() {
        let s = |q| PhotonStatistics { mandel_q: q }.sampler();
        assert_eq!(s(0.0), PhotonSampler::Poisson);
        assert_eq!(s(-1.0), PhotonSampler::Deterministic);
        assert_eq!(s(-0.3), PhotonSampler::Binomial);
        assert_eq!(s(2.0), PhotonSampler::NegativeBinomial);
    }

    #[test]
    fn asymptotic_slope_is_one_half() {
        let j = 40.0;
        let rs: Vec<f64> = (0..6).map(|i| 1e4 / j * 10f64.powi(i)).collect();
        let xs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = rs.iter().map(|r| scaling_ratio(*r, j).ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        assert!((sxy / sxx - 0.5).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn budget_adds_in_quadrature(
            g in 0.1f64..1e6, v in 0.0f64..1e-6, n_at in 1.0f64..1e12,
            n_ph in 1.0f64..1e15, q in -0.99f64..5.0,
        ) {
            let readout = ReadoutModel { transduction_g: g, photon_transduction_nu: -1.0, quadrature_q: Quadrature::Imaginary };
            let b = noise_budget(&readout, v, n_at, n_ph, PhotonStatistics { mandel_q: q }).unwrap();
            let lhs = b.sigma_total.powi(2);
            let rhs = b.sigma_agn.powi(2) + b.sigma_omn.powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);
            if q == 0.0 {
                prop_assert!(b.ratio_to_shot_limit >= 1.0);
            }
            let coherent = noise_budget(&readout, v, n_at, n_ph, PhotonStatistics::COHERENT).unwrap();
            let direct = signal_variance(g, v, n_at, -1.0, n_ph).unwrap();
            prop_assert!((coherent.sigma_total.powi(2) - direct).abs() <= 1e-12 * direct);
        }

        #[test]
        fn ratio_monotone_and_regimes(r in 1e-9f64..1e6, j in 1e-6f64..1e6, bump in 1.0001f64..3.0) {
            prop_assert!(scaling_ratio(r * bump, j) > scaling_ratio(r, j));
            prop_assert!(scaling_ratio(r, j * bump) > scaling_ratio(r, j));
            let rj = r * j;
            if rj < 1e-3 {
                prop_assert!(scaling_ratio(r, j) - 1.0 <= rj / 2.0 + rj * rj);
            }
            let g0 = generalized_scaling_ratio(r, j, PhotonStatistics::COHERENT).unwrap();
            prop_assert_eq!(g0.to_shot_limit, scaling_ratio(r, j));
        }
    }
}
