//! Resource bookkeeping: probe volume, atom and photon fluxes, the resource
//! ratio `R`, the optical-depth prefactor `a` and the probe Rabi frequency.
//!
//! The probe beam is modelled as a cylinder of radius `w₀` and length `L`.
//! Atoms refresh the volume through its side wall at the kinetic-theory rate
//! `n·v̄·A/4` with `A = 2πw₀L`.

use serde::{Deserialize, Serialize};

use crate::constants::{EPSILON_0, HBAR, PLANCK, SPEED_OF_LIGHT};
use crate::ensemble::{velocity_distribution, GasParams};
use crate::{Error, Result};

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    pub waist_w0: f64,
    pub cell_length_l: f64,
    pub lambda_p: f64,
    pub power_in: f64,
    pub saturation_power: f64,
}

impl Default for BeamGeometry {
    fn default() -> Self {
        Self {
            waist_w0: 0.85e-3,
            cell_length_l: 0.05,
            lambda_p: 852e-9,
            power_in: 120e-6,
            saturation_power: 480e-6,
        }
    }
}

impl BeamGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("waist_w0", self.waist_w0),
            ("cell_length_l", self.cell_length_l),
            ("lambda_p", self.lambda_p),
            ("saturation_power", self.saturation_power),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.power_in.is_finite() && self.power_in >= 0.0) {
            return Err(Error::invalid(
                "power_in",
                format!("must be finite and >= 0, got {}", self.power_in),
            ));
        }
        Ok(())
    }

    pub fn side_wall_area(&self) -> f64 {
        2.0 * PI * self.waist_w0 * self.cell_length_l
    }

    /// `P_in / P_s^th`; values well below one are in the weak-probe regime.
    pub fn saturation_fraction(&self) -> f64 {
        self.power_in / self.saturation_power
    }

    /// Energy of one probe photon.
    pub fn photon_energy(&self) -> f64 {
        PLANCK * SPEED_OF_LIGHT / self.lambda_p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioMode {
    /// `Φ_ph/Φ_at`, independent of the counting interval.
    #[default]
    Flux,
    /// `Φ_ph·Δt/(n·V_bm)`: photons in one interval against atoms in one snapshot.
    Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntensityConvention {
    /// On-axis intensity of a Gaussian beam, `2P/(πw₀²)`.
    #[default]
    Peak,
    /// Beam-averaged intensity `P/(πw₀²)`.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceAccounting {
    pub v_bm: f64,
    pub n_at_mean: f64,
    pub phi_at: f64,
    pub phi_ph: f64,
    pub resource_ratio_r: f64,
    pub a_prefactor: f64,
    pub mode: RatioMode,
}

fn check_dt(mode: RatioMode, dt: f64) -> Result<()> {
    if mode == RatioMode::Snapshot && !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("snapshot mode needs dt > 0, got {dt}")));
    }
    Ok(())
}

pub fn beam_volume(geom: &BeamGeometry) -> Result<f64> {
    geom.validate()?;
    Ok(PI * geom.waist_w0 * geom.waist_w0 * geom.cell_length_l)
}

/// `N̄_at = n·V_bm`. A zero density is accepted here and gives zero.
pub fn mean_atom_number(gas: &GasParams, geom: &BeamGeometry) -> Result<f64> {
    Ok(gas.density_n * beam_volume(geom)?)
}

pub fn atom_flux(gas: &GasParams, geom: &BeamGeometry) -> Result<f64> {
    geom.validate()?;
    let v_bar = velocity_distribution(gas).v_bar;
    Ok(gas.density_n * v_bar * geom.side_wall_area() / 4.0)
}

/// `Φ_ph = P_in λ_p/(hc)`.
pub fn photon_flux(geom: &BeamGeometry) -> Result<f64> {
    geom.validate()?;
    Ok(geom.power_in / geom.photon_energy())
}

pub fn resource_ratio(gas: &GasParams, geom: &BeamGeometry, mode: RatioMode, dt: f64) -> Result<f64> {
    check_dt(mode, dt)?;
    let phi_ph = photon_flux(geom)?;
    match mode {
        RatioMode::Flux => Ok(phi_ph / atom_flux(gas, geom)?),
        RatioMode::Snapshot => Ok(phi_ph * dt / mean_atom_number(gas, geom)?),
    }
}

/// `a = 2πL/λ_p`.
pub fn optical_depth_prefactor(geom: &BeamGeometry) -> Result<f64> {
    geom.validate()?;
    Ok(2.0 * PI * geom.cell_length_l / geom.lambda_p)
}

/// `Ω_p = (μ₁₂/ħ)·√(2I/(ε₀c))`, the field amplitude of a plane wave with the
/// chosen beam intensity.
pub fn probe_rabi_from_power(geom: &BeamGeometry, mu12: f64, convention: IntensityConvention) -> Result<f64> {
    geom.validate()?;
    let area = PI * geom.waist_w0 * geom.waist_w0;
    let intensity = match convention {
        IntensityConvention::Peak => 2.0 * geom.power_in / area,
        IntensityConvention::Mean => geom.power_in / area,
    };
    let field = (2.0 * intensity / (EPSILON_0 * SPEED_OF_LIGHT)).sqrt();
    Ok(mu12 * field / HBAR)
}

/// Power at which the flux-mode resource ratio equals `r`.
pub fn power_for_ratio(gas: &GasParams, geom: &BeamGeometry, r: f64) -> Result<f64> {
    Ok(r * atom_flux(gas, geom)? * geom.photon_energy())
}

pub fn resource_accounting(
    gas: &GasParams,
    geom: &BeamGeometry,
    mode: RatioMode,
    dt: f64,
) -> Result<ResourceAccounting> {
    Ok(ResourceAccounting {
        v_bm: beam_volume(geom)?,
        n_at_mean: mean_atom_number(gas, geom)?,
        phi_at: atom_flux(gas, geom)?,
        phi_ph: photon_flux(geom)?,
        resource_ratio_r: resource_ratio(gas, geom, mode, dt)?,
        a_prefactor: optical_depth_prefactor(geom)?,
        mode,
    })
}
