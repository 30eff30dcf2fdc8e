//! Maxwell–Boltzmann moments of the polarizability, the intrinsic variance
//! `𝒱_q = (n/ε₀)² Var_v[α_q]` and the fluctuation parameter `J`.

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, CS133_MASS, EPSILON_0};
use crate::numerics::{gauss_hermite, integrate_adaptive, integrate_on_mesh, AdaptiveOptions, Mesh, Moments4};
use crate::spectroscopy::{full_alpha, FourLevelParams, Polarizability, WeakProbeKernel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    /// Number density (m⁻³).
    pub density_n: f64,
    /// Temperature (K).
    pub temperature_t: f64,
    /// Atomic mass (kg).
    pub mass_m: f64,
}

impl Default for GasParams {
    /// Room-temperature ¹³³Cs vapor.
    fn default() -> Self {
        Self {
            density_n: 4.89e16,
            temperature_t: 298.15,
            mass_m: CS133_MASS,
        }
    }
}

impl GasParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("density_n", self.density_n),
            ("temperature_t", self.temperature_t),
            ("mass_m", self.mass_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `n/ε₀`, converting a polarizability into a susceptibility.
    pub fn susceptibility_scale(&self) -> f64 {
        self.density_n / EPSILON_0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityDistribution {
    /// One-dimensional standard deviation `√(k_B T/m)`.
    pub sigma_v: f64,
    /// Mean speed `√(8 k_B T/(π m))`.
    pub v_bar: f64,
}

pub fn velocity_distribution(gas: &GasParams) -> VelocityDistribution {
    let kt_over_m = BOLTZMANN * gas.temperature_t / gas.mass_m;
    VelocityDistribution {
        sigma_v: kt_over_m.sqrt(),
        v_bar: (8.0 * kt_over_m / std::f64::consts::PI).sqrt(),
    }
}

/// Which single-atom response is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseModel {
    /// Linear response in the probe field.
    #[default]
    WeakProbe,
    /// Full Lindblad steady state at the configured probe Rabi frequency.
    Full,
}

/// A polarizability evaluator for a fixed parameter set.
#[derive(Debug, Clone, Copy)]
pub enum AlphaEvaluator {
    Weak(WeakProbeKernel),
    Full(FourLevelParams),
}

impl AlphaEvaluator {
    pub fn new(params: &FourLevelParams, mode: ResponseModel) -> Result<Self> {
        params.validate()?;
        Ok(match mode {
            ResponseModel::WeakProbe => AlphaEvaluator::Weak(WeakProbeKernel::new(params)?),
            ResponseModel::Full => {
                if params.omega_p_rabi == 0.0 {
                    return Err(Error::ZeroProbeRabi);
                }
                AlphaEvaluator::Full(*params)
            }
        })
    }

    #[inline]
    pub fn alpha(&self, v: f64) -> Result<Polarizability> {
        match self {
            AlphaEvaluator::Weak(k) => Ok(k.alpha(v)),
            AlphaEvaluator::Full(p) => full_alpha(p, v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    /// Adaptive Gauss–Kronrod over ±`span_sigmas`·σ_v, with resonance
    /// velocities as forced breakpoints.
    #[default]
    Adaptive,
    /// Gauss–Hermite with order doubling. Only suitable when the response is
    /// smooth on the scale of σ_v.
    GaussHermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentOptions {
    pub rtol: f64,
    pub rule: QuadratureRule,
    pub min_order: usize,
    pub max_order: usize,
    pub max_evaluations: usize,
    pub initial_panels: usize,
    pub span_sigmas: f64,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            rule: QuadratureRule::Adaptive,
            min_order: 8,
            max_order: 512,
            max_evaluations: 400_000,
            initial_panels: 32,
            span_sigmas: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaMoments {
    pub mean_alpha: Polarizability,
    pub var_alpha_r: f64,
    pub var_alpha_i: f64,
    /// Number of velocity nodes in the accepted rule.
    pub quadrature_order: usize,
}

/// Velocities at which some detuning of the ladder crosses a resonance.
fn resonance_velocities(p: &FourLevelParams) -> Vec<f64> {
    let mut out = Vec::new();
    let kpc = p.k_p + p.k_c;
    let half_c = 0.5 * p.omega_c_rabi;
    let half_s = 0.5 * p.omega_s_rabi;
    if p.k_p != 0.0 {
        for shift in [0.0, half_c, -half_c] {
            out.push((p.delta_p - shift) / p.k_p);
        }
    }
    if kpc != 0.0 {
        let two = p.delta_p + p.delta_c;
        let three = two + p.delta_s;
        for target in [two, three, two + half_s, two - half_s, two + p.delta_s / 2.0] {
            out.push(target / kpc);
        }
    }
    out.retain(|v| v.is_finite());
    out
}

fn raw_moments(m: &Moments4) -> (Polarizability, f64, f64) {
    let mean = Polarizability {
        alpha_r: m[0],
        alpha_i: m[1],
    };
    (mean, m[2], m[3])
}

fn finish(m: &Moments4, order: usize, rtol: f64) -> AlphaMoments {
    let (mean, sq_r, sq_i) = raw_moments(m);
    let clamp = |second: f64, first: f64, label: &str| {
        let var = second - first * first;
        if var < 0.0 {
            if var < -rtol * second.abs() {
                log::warn!("Var[{label}] = {var:e} clamped to zero (beyond tolerance)");
            } else {
                log::debug!("Var[{label}] = {var:e} clamped to zero");
            }
            0.0
        } else {
            var
        }
    };
    AlphaMoments {
        mean_alpha: mean,
        var_alpha_r: clamp(sq_r, mean.alpha_r, "alpha_r"),
        var_alpha_i: clamp(sq_i, mean.alpha_i, "alpha_i"),
        quadrature_order: order,
    }
}

fn scales(m: &Moments4) -> Moments4 {
    let second = m[2].abs().max(m[3].abs());
    let rms = second.sqrt();
    [rms, rms, second, second]
}

/// Velocity-space quadrature state that can be reused at nearby parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityMesh {
    pub sigma_v: f64,
    pub mesh: Mesh,
}

/// `⟨α⟩` and `Var[α_q]` over the 1D Maxwell–Boltzmann distribution.
pub fn alpha_moments(
    params: &FourLevelParams,
    gas: &GasParams,
    mode: ResponseModel,
    opts: &MomentOptions,
) -> Result<AlphaMoments> {
    match opts.rule {
        QuadratureRule::Adaptive => alpha_moments_with_mesh(params, gas, mode, opts).map(|(m, _)| m),
        QuadratureRule::GaussHermite => gauss_hermite_moments(params, gas, mode, opts),
    }
}

/// Adaptive moments together with the velocity mesh they were accepted on.
pub fn alpha_moments_with_mesh(
    params: &FourLevelParams,
    gas: &GasParams,
    mode: ResponseModel,
    opts: &MomentOptions,
) -> Result<(AlphaMoments, VelocityMesh)> {
    gas.validate()?;
    let eval = AlphaEvaluator::new(params, mode)?;
    let sigma = velocity_distribution(gas).sigma_v;
    let span = opts.span_sigmas * sigma;
    let integrand = gaussian_weighted(eval, sigma);
    let result = integrate_adaptive(
        integrand,
        -span,
        span,
        &resonance_velocities(params),
        scales,
        &AdaptiveOptions {
            rtol: opts.rtol,
            max_evaluations: opts.max_evaluations,
            initial_panels: opts.initial_panels,
        },
    )?;
    let moments = finish(&result.integral, result.mesh.nodes(), opts.rtol);
    Ok((
        moments,
        VelocityMesh {
            sigma_v: sigma,
            mesh: result.mesh,
        },
    ))
}

/// Moments on a frozen mesh. Used for finite differences in a parameter, where
/// a mesh that changed between evaluations would show up as noise.
pub fn alpha_moments_on_mesh(
    params: &FourLevelParams,
    gas: &GasParams,
    mode: ResponseModel,
    mesh: &VelocityMesh,
) -> Result<AlphaMoments> {
    gas.validate()?;
    let eval = AlphaEvaluator::new(params, mode)?;
    let sigma = velocity_distribution(gas).sigma_v;
    let m = integrate_on_mesh(gaussian_weighted(eval, sigma), &mesh.mesh)?;
    Ok(finish(&m, mesh.mesh.nodes(), 0.0))
}

fn gaussian_weighted(eval: AlphaEvaluator, sigma: f64) -> impl Fn(f64) -> Result<Moments4> {
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    move |v: f64| {
        let a = eval.alpha(v)?;
        let p = norm * (-0.5 * (v / sigma).powi(2)).exp();
        Ok([
            p * a.alpha_r,
            p * a.alpha_i,
            p * a.alpha_r * a.alpha_r,
            p * a.alpha_i * a.alpha_i,
        ])
    }
}

fn gauss_hermite_moments(
    params: &FourLevelParams,
    gas: &GasParams,
    mode: ResponseModel,
    opts: &MomentOptions,
) -> Result<AlphaMoments> {
    gas.validate()?;
    if opts.min_order < 8 {
        return Err(Error::invalid("min_order", "Gauss–Hermite order must be >= 8"));
    }
    let eval = AlphaEvaluator::new(params, mode)?;
    let sigma = velocity_distribution(gas).sigma_v;
    let estimate = |n: usize| -> Result<Moments4> {
        let (x, w) = gauss_hermite(n);
        let mut acc = [0.0; 4];
        for (xi, wi) in x.iter().zip(&w) {
            let a = eval.alpha(std::f64::consts::SQRT_2 * sigma * xi)?;
            let wn = wi / std::f64::consts::PI.sqrt();
            acc[0] += wn * a.alpha_r;
            acc[1] += wn * a.alpha_i;
            acc[2] += wn * a.alpha_r * a.alpha_r;
            acc[3] += wn * a.alpha_i * a.alpha_i;
        }
        Ok(acc)
    };
    let mut order = opts.min_order;
    let mut previous = estimate(order)?;
    let mut evaluations = order;
    while order * 2 <= opts.max_order {
        order *= 2;
        let current = estimate(order)?;
        evaluations += order;
        let sc = scales(&current);
        if (0..4).all(|k| (current[k] - previous[k]).abs() <= opts.rtol * sc[k]) {
            return Ok(finish(&current, order, opts.rtol));
        }
        previous = current;
        if order * 2 > opts.max_order {
            return Err(Error::NonConvergence {
                evaluations,
                last: current,
                previous,
            });
        }
    }
    Err(Error::NonConvergence {
        evaluations,
        last: previous,
        previous,
    })
}

/// `𝒱_q = (n/ε₀)² Var_v[α_q]`. `var_alpha_q` must be non-negative.
pub fn intrinsic_variance(gas: &GasParams, var_alpha_q: f64) -> f64 {
    debug_assert!(var_alpha_q >= 0.0);
    gas.susceptibility_scale().powi(2) * var_alpha_q
}

/// `J = a²𝒱_I` for an optical-depth readout.
pub fn fluctuation_parameter(a: f64, intrinsic_variance: f64) -> f64 {
    a * a * intrinsic_variance
}

/// General transduction form `J = 𝒢²𝒱_q/ν²`.
pub fn fluctuation_parameter_general(g: f64, intrinsic_variance: f64, nu: f64) -> f64 {
    g * g * intrinsic_variance / (nu * nu)
}
