//! Slope-detection sensitivity of the Rydberg optical-depth readout and the
//! intensity-dependent fluctuation parameter `J(R)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::ensemble::{
    alpha_moments_on_mesh, alpha_moments_with_mesh, intrinsic_variance, AlphaMoments, GasParams, MomentOptions,
    ResponseModel, VelocityMesh,
};
use crate::geometry::{
    optical_depth_prefactor, power_for_ratio, probe_rabi_from_power, resource_accounting, BeamGeometry,
    IntensityConvention, RatioMode, ResourceAccounting,
};
use crate::noise::{scaling_ratio, signal_variance};
use crate::numerics::{bisect, richardson_central};
use crate::spectroscopy::FourLevelParams;
use crate::{Error, Result};

/// Relative reproducibility of a moment sum on a frozen mesh.
const FROZEN_MESH_NOISE: f64 = 1e-12;

/// Relative tolerance on `R` for the quantum-advantage boundary.
pub const BOUNDARY_RTOL: f64 = 1e-10;

/// A vapor-cell electrometer at one operating point, read out through the
/// optical depth `S = a·χ̄_I − ln(ξ/N̄_ph)`.
///
/// Counts are taken in flux mode over `interval`: `N̄_ph = Φ_ph·Δt` and
/// `N̄_at = Φ_at·Δt`. The integration time equals the interval, so the
/// sensitivity per √Hz does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub gas: GasParams,
    pub geometry: BeamGeometry,
    pub levels: FourLevelParams,
    pub response: ResponseModel,
    pub intensity: IntensityConvention,
    pub moments: MomentOptions,
    /// Counting interval Δt (s).
    pub interval: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            gas: GasParams::default(),
            geometry: BeamGeometry::default(),
            levels: FourLevelParams::default(),
            response: ResponseModel::Full,
            intensity: IntensityConvention::Peak,
            moments: MomentOptions::default(),
            interval: 1.0,
        }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        self.gas.validate()?;
        self.geometry.validate()?;
        self.levels.validate()?;
        if !(self.interval.is_finite() && self.interval > 0.0) {
            return Err(Error::invalid("interval", "must be > 0"));
        }
        Ok(())
    }

    pub fn with_power(mut self, power_in: f64) -> Self {
        self.geometry.power_in = power_in;
        self
    }

    pub fn with_waist(mut self, waist: f64) -> Self {
        self.geometry.waist_w0 = waist;
        self
    }

    pub fn with_microwave_rabi(mut self, omega_s: f64) -> Self {
        self.levels.omega_s_rabi = omega_s;
        self
    }

    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.moments.rtol = rtol;
        self
    }

    pub fn probe_rabi(&self) -> Result<f64> {
        probe_rabi_from_power(&self.geometry, self.levels.mu12, self.intensity)
    }

    /// Ladder parameters with the probe Rabi frequency set by the input power.
    pub fn effective_levels(&self) -> Result<FourLevelParams> {
        Ok(self.levels.with_probe_rabi(self.probe_rabi()?))
    }

    pub fn accounting(&self) -> Result<ResourceAccounting> {
        resource_accounting(&self.gas, &self.geometry, RatioMode::Flux, self.interval)
    }

    pub fn optical_depth_prefactor(&self) -> Result<f64> {
        optical_depth_prefactor(&self.geometry)
    }

    pub fn moments_with_mesh(&self) -> Result<(AlphaMoments, VelocityMesh)> {
        self.validate()?;
        alpha_moments_with_mesh(&self.effective_levels()?, &self.gas, self.response, &self.moments)
    }

    /// `J = a²(n/ε₀)²Var_v[α_I]` from moments already computed.
    pub fn fluctuation_from(&self, moments: &AlphaMoments) -> Result<f64> {
        let a = self.optical_depth_prefactor()?;
        Ok(a * a * intrinsic_variance(&self.gas, moments.var_alpha_i))
    }

    pub fn fluctuation_parameter(&self) -> Result<f64> {
        let (m, _) = self.moments_with_mesh()?;
        self.fluctuation_from(&m)
    }

    /// Mean optical depth `S₀ = a·(n/ε₀)⟨α_I⟩` on a frozen velocity mesh.
    fn mean_signal_on_mesh(&self, levels: &FourLevelParams, mesh: &VelocityMesh) -> Result<f64> {
        let m = alpha_moments_on_mesh(levels, &self.gas, self.response, mesh)?;
        Ok(self.optical_depth_prefactor()? * self.gas.susceptibility_scale() * m.mean_alpha.alpha_i)
    }

    /// Default finite-difference step `max(1e-4·Ω_s, 2π·1 kHz)`.
    pub fn default_slope_step(&self) -> f64 {
        (1e-4 * self.levels.omega_s_rabi).max(2.0 * std::f64::consts::PI * 1e3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    /// `∂S₀/∂Ω_s` in 1/(rad/s).
    pub value: f64,
    pub error: f64,
    /// `S₀` at the operating point.
    pub mean_signal: f64,
}

fn slope_on_mesh(model: &SensorModel, mesh: &VelocityMesh, step: f64) -> Result<SlopeEstimate> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", format!("must be > 0, got {step}")));
    }
    let levels = model.effective_levels()?;
    let omega_s = levels.omega_s_rabi;
    // S₀ depends on Ω_s only through Ω_s², so a stencil that crosses zero
    // is folded back onto |Ω_s|.
    let signal = |x: f64| model.mean_signal_on_mesh(&levels.with_microwave_rabi(x.abs()), mesh);
    let s0 = signal(omega_s)?;
    let d = richardson_central(signal, omega_s, step)?;
    let noise = (FROZEN_MESH_NOISE * s0.abs() / step).max(d.error);
    if !(d.value.abs() > noise) {
        return Err(Error::FlatSlope { slope: d.value, noise });
    }
    Ok(SlopeEstimate {
        value: d.value,
        error: d.error,
        mean_signal: s0,
    })
}

/// `∂S₀/∂Ω_s` by Richardson-extrapolated central differences (steps `h`, `h/2`)
/// on the velocity mesh accepted at the operating point.
pub fn signal_slope(model: &SensorModel, step: f64) -> Result<SlopeEstimate> {
    let (_, mesh) = model.moments_with_mesh()?;
    slope_on_mesh(model, &mesh, step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub power_in: f64,
    pub waist: f64,
    /// ℰ_s in V·m⁻¹·Hz^(−1/2).
    pub e_s: f64,
    /// Shot-noise-limited ℰ_s^(0).
    pub e_s_shot: f64,
    pub r: f64,
    pub j: f64,
    pub slope: f64,
    pub sigma_s: f64,
    /// `|ℰ_s/ℰ_s^(0) − √(1+RJ)| / √(1+RJ)`.
    pub identity_residual: f64,
}

/// `(ħ/μ_s)·σ_S/|∂S₀/∂Ω_s|·√T` for a given signal noise and slope.
pub fn slope_limited_field(sigma_s: f64, slope: f64, mu_s: f64, integration_time: f64) -> f64 {
    HBAR / mu_s * integration_time.sqrt() * sigma_s / slope.abs()
}

/// `ℰ_s = (ħ/μ_s)·σ_S/|∂S₀/∂Ω_s|·√T`.
pub fn sensitivity(model: &SensorModel) -> Result<SensitivityPoint> {
    let (moments, mesh) = model.moments_with_mesh()?;
    let j = model.fluctuation_from(&moments)?;
    let slope = slope_on_mesh(model, &mesh, model.default_slope_step())?;
    let acc = model.accounting()?;
    let n_ph = acc.phi_ph * model.interval;
    let n_at = acc.phi_at * model.interval;
    let a = acc.a_prefactor;
    let v_i = intrinsic_variance(&model.gas, moments.var_alpha_i);

    let sigma_s = signal_variance(a, v_i, n_at, -1.0, n_ph)?.sqrt();
    let sigma_shot = 1.0 / n_ph.sqrt();
    let e_s = slope_limited_field(sigma_s, slope.value, model.levels.mu_s, model.interval);
    let e_s_shot = slope_limited_field(sigma_shot, slope.value, model.levels.mu_s, model.interval);

    let r = n_ph / n_at;
    let law = scaling_ratio(r, j);
    Ok(SensitivityPoint {
        power_in: model.geometry.power_in,
        waist: model.geometry.waist_w0,
        e_s,
        e_s_shot,
        r,
        j,
        slope: slope.value,
        sigma_s,
        identity_residual: ((e_s / e_s_shot) - law).abs() / law,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub power_in: f64,
    pub waist: f64,
    pub result: Option<SensitivityPoint>,
    pub failure: Option<String>,
}

/// Sensitivity over `waists × powers`, waist-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityMap {
    pub powers: Vec<f64>,
    pub waists: Vec<f64>,
    pub points: Vec<MapPoint>,
}

impl SensitivityMap {
    pub fn get(&self, waist_index: usize, power_index: usize) -> &MapPoint {
        &self.points[waist_index * self.powers.len() + power_index]
    }

    pub fn row(&self, waist_index: usize) -> &[MapPoint] {
        let n = self.powers.len();
        &self.points[waist_index * n..(waist_index + 1) * n]
    }
}

/// Evaluates [`sensitivity`] on every grid point in parallel. Points whose
/// evaluation fails numerically are kept as missing; invalid parameters abort.
pub fn sensitivity_map(powers: &[f64], waists: &[f64], model: &SensorModel) -> Result<SensitivityMap> {
    if powers.is_empty() || waists.is_empty() {
        return Err(Error::invalid("grid", "power and waist axes must be nonempty"));
    }
    let n = powers.len();
    let points: Vec<Result<MapPoint>> = (0..powers.len() * waists.len())
        .into_par_iter()
        .map(|idx| {
            let (w, p) = (waists[idx / n], powers[idx % n]);
            let m = model.with_power(p).with_waist(w);
            match sensitivity(&m) {
                Ok(s) => Ok(MapPoint {
                    power_in: p,
                    waist: w,
                    result: Some(s),
                    failure: None,
                }),
                Err(e @ Error::InvalidParameter { .. }) => Err(e),
                Err(e) => {
                    log::info!("sensitivity missing at P = {p:e} W, w0 = {w:e} m: {e}");
                    Ok(MapPoint {
                        power_in: p,
                        waist: w,
                        result: None,
                        failure: Some(e.to_string()),
                    })
                }
            }
        })
        .collect();
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    if points.iter().all(|p| p.result.is_none()) {
        return Err(Error::AllPointsFailed);
    }
    Ok(SensitivityMap {
        powers: powers.to_vec(),
        waists: waists.to_vec(),
        points,
    })
}

/// `J` as a function of the resource ratio.
pub trait FluctuationCurve: Sync {
    fn j_at(&self, r: f64) -> Result<f64>;

    /// Probe power corresponding to `r`, when the curve has a physical mapping.
    fn power_at(&self, _r: f64) -> Option<f64> {
        None
    }
}

/// Weak-probe curve: `J` independent of `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantJ(pub f64);

impl FluctuationCurve for ConstantJ {
    fn j_at(&self, _r: f64) -> Result<f64> {
        Ok(self.0)
    }
}

/// `R → P_in → Ω_p → J` at fixed gas and geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityDependentJ {
    model: SensorModel,
}

impl IntensityDependentJ {
    pub fn new(model: SensorModel) -> Result<Self> {
        model.validate()?;
        Ok(Self { model })
    }

    pub fn model(&self) -> &SensorModel {
        &self.model
    }

    pub fn model_at(&self, r: f64) -> Result<SensorModel> {
        let p = power_for_ratio(&self.model.gas, &self.model.geometry, r)?;
        Ok(self.model.with_power(p))
    }
}

impl FluctuationCurve for IntensityDependentJ {
    fn j_at(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::invalid("r", format!("must be finite and >= 0, got {r}")));
        }
        self.model_at(r)?.fluctuation_parameter()
    }

    fn power_at(&self, r: f64) -> Option<f64> {
        power_for_ratio(&self.model.gas, &self.model.geometry, r).ok()
    }
}

/// `R_crit`: the root of `R·J(R) = 1`, where even Fock-state light only
/// matches the shot-noise limit.
pub fn quantum_advantage_boundary(curve: &dyn FluctuationCurve, bracket: (f64, f64)) -> Result<f64> {
    bisect(|r| Ok(r * curve.j_at(r)? - 1.0), bracket.0, bracket.1, BOUNDARY_RTOL)
}
