//! Single-atom response of the four-level Rydberg ladder.
//!
//! Levels are numbered 1–4 in the physics and 0–3 in code: ground `|1⟩`,
//! intermediate `|2⟩` (probe), Rydberg `|3⟩` (coupling) and Rydberg `|4⟩`
//! (microwave). Decay runs down the ladder 4→3→2→1.
//!
//! Sign conventions: detunings are `ω_laser − ω_atom`, an atom moving with
//! velocity `v` sees `Δ − k·v`, and the dipole coupling enters the rotating
//! frame Hamiltonian as `−Ω/2`. With that coupling sign the slowly varying
//! coherence `ρ₂₁ = ⟨2|ρ|1⟩` is already in phase with the field that drives
//! absorption, so the polarizability is `α = 2μ₁₂²ρ₂₁/(ħΩ_p)` and a passive
//! absorber has `Im α > 0`.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_RADIUS, ELEMENTARY_CHARGE, HBAR};
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Largest accepted 1-norm condition estimate of the steady-state system.
pub const MAX_CONDITION: f64 = 1e12;

/// Parameters of the ladder. All frequencies are angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourLevelParams {
    pub omega_p_rabi: f64,
    pub omega_c_rabi: f64,
    /// Microwave Rabi frequency on the Rydberg–Rydberg transition.
    pub omega_s_rabi: f64,
    pub delta_p: f64,
    pub delta_c: f64,
    pub delta_s: f64,
    /// Population decay rates of levels 2, 3 and 4.
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    /// Extra pure dephasing of levels 2, 3 and 4. A coherence `ρ_kl` picks up
    /// `dephasing[k] + dephasing[l]` on top of `(Γ_k + Γ_l)/2`.
    pub dephasing: [f64; 3],
    /// Signed probe and coupling wavenumbers (rad/m) along the probe axis.
    pub k_p: f64,
    pub k_c: f64,
    /// Probe transition dipole moment (C·m).
    pub mu12: f64,
    /// Microwave transition dipole moment (C·m).
    pub mu_s: f64,
}

impl Default for FourLevelParams {
    /// Cs 6S₁/₂ → 6P₃/₂ → nD₅/₂ → (n+1)P₃/₂ ladder with counter-propagating
    /// 852 nm probe and 510 nm coupling beams.
    fn default() -> Self {
        Self {
            omega_p_rabi: 0.0,
            omega_c_rabi: TWO_PI * 1.0e6,
            omega_s_rabi: TWO_PI * 7.9e6,
            delta_p: 0.0,
            delta_c: 0.0,
            delta_s: 0.0,
            gamma2: TWO_PI * 5.22e6,
            gamma3: TWO_PI * 10.0e3,
            gamma4: TWO_PI * 10.0e3,
            dephasing: [0.0; 3],
            k_p: TWO_PI / 852.0e-9,
            k_c: -TWO_PI / 510.0e-9,
            mu12: 2.7e-29,
            mu_s: 1443.45 * ELEMENTARY_CHARGE * BOHR_RADIUS,
        }
    }
}

impl FourLevelParams {
    fn check_common(&self) -> Result<()> {
        let all = [
            ("omega_p_rabi", self.omega_p_rabi),
            ("omega_c_rabi", self.omega_c_rabi),
            ("omega_s_rabi", self.omega_s_rabi),
            ("delta_p", self.delta_p),
            ("delta_c", self.delta_c),
            ("delta_s", self.delta_s),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
            ("k_p", self.k_p),
            ("k_c", self.k_c),
            ("mu12", self.mu12),
            ("mu_s", self.mu_s),
        ];
        for (name, value) in all {
            if !value.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {value}")));
            }
        }
        for (name, value) in [
            ("omega_p_rabi", self.omega_p_rabi),
            ("omega_c_rabi", self.omega_c_rabi),
            ("omega_s_rabi", self.omega_s_rabi),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
        ] {
            if value < 0.0 {
                return Err(Error::invalid(name, format!("must be >= 0, got {value}")));
            }
        }
        if self.gamma2 < 0.0 {
            return Err(Error::invalid("gamma2", "must be >= 0"));
        }
        if self.dephasing.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::invalid("dephasing", "rates must be finite and >= 0"));
        }
        Ok(())
    }

    /// Checks every invariant, including `gamma2 > 0`.
    pub fn validate(&self) -> Result<()> {
        self.check_common()?;
        if self.gamma2 <= 0.0 {
            return Err(Error::invalid("gamma2", "intermediate-state decay must be > 0"));
        }
        Ok(())
    }

    /// Decay rates of the ground-state coherences ρ₂₁, ρ₃₁, ρ₄₁.
    pub fn ground_coherence_decay(&self) -> [f64; 3] {
        [
            0.5 * self.gamma2 + self.dephasing[0],
            0.5 * self.gamma3 + self.dephasing[1],
            0.5 * self.gamma4 + self.dephasing[2],
        ]
    }

    pub fn with_probe_rabi(mut self, omega_p: f64) -> Self {
        self.omega_p_rabi = omega_p;
        self
    }

    pub fn with_microwave_rabi(mut self, omega_s: f64) -> Self {
        self.omega_s_rabi = omega_s;
        self
    }
}

/// Complex single-atom polarizability `α = α_R + iα_I` in C·m²/V.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Polarizability {
    pub alpha_r: f64,
    pub alpha_i: f64,
}

impl Polarizability {
    pub fn from_complex(z: Complex64) -> Self {
        Self {
            alpha_r: z.re,
            alpha_i: z.im,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.alpha_r, self.alpha_i)
    }

    pub fn norm(self) -> f64 {
        self.alpha_r.hypot(self.alpha_i)
    }
}

/// Steady-state density matrix of the ladder, indexed `entries[(k, l)] = ⟨k|ρ|l⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4 {
    pub entries: Matrix4<Complex64>,
}

impl DensityMatrix4 {
    pub fn ground() -> Self {
        let mut entries = Matrix4::zeros();
        entries[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { entries }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn population(&self, level: usize) -> f64 {
        self.entries[(level, level)].re
    }

    /// `max |ρ − ρ†|` over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        let diff = self.entries - self.entries.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // Symmetrize first so the Hermitian solver sees exactly Hermitian input.
        let h = (self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Hermitian to 1e-10, unit trace to 1e-12 and eigenvalues above −1e-9.
    pub fn is_physical(&self) -> bool {
        self.hermiticity_error() < 1e-10
            && (self.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12
            && self.min_eigenvalue() > -1e-9
    }
}

/// Returns the parameters seen by an atom moving with axial velocity `v`.
/// The microwave wavenumber is negligible, so `delta_s` is left alone.
pub fn doppler_shift(params: &FourLevelParams, v: f64) -> FourLevelParams {
    let mut shifted = *params;
    shifted.delta_p = params.delta_p - params.k_p * v;
    shifted.delta_c = params.delta_c - params.k_c * v;
    shifted
}

/// Precomputed weak-probe response, cheap enough to evaluate per atom.
#[derive(Debug, Clone, Copy)]
pub struct WeakProbeKernel {
    prefactor: f64,
    decay: [f64; 3],
    delta_p: f64,
    delta_pc: f64,
    delta_pcs: f64,
    k_p: f64,
    k_pc: f64,
    coupling_sq: f64,
    microwave_sq: f64,
}

impl WeakProbeKernel {
    pub fn new(params: &FourLevelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            prefactor: params.mu12 * params.mu12 / HBAR,
            decay: params.ground_coherence_decay(),
            delta_p: params.delta_p,
            delta_pc: params.delta_p + params.delta_c,
            delta_pcs: params.delta_p + params.delta_c + params.delta_s,
            k_p: params.k_p,
            k_pc: params.k_p + params.k_c,
            coupling_sq: 0.25 * params.omega_c_rabi * params.omega_c_rabi,
            microwave_sq: 0.25 * params.omega_s_rabi * params.omega_s_rabi,
        })
    }

    /// Continued-fraction denominator `D(v)`; `None` means it diverged.
    #[inline]
    fn denominator(&self, v: f64) -> Option<Complex64> {
        let dp = self.delta_p - self.k_p * v;
        let dpc = self.delta_pc - self.k_pc * v;
        let dpcs = self.delta_pcs - self.k_pc * v;
        let d2 = Complex64::new(self.decay[0], -dp);
        let d3 = Complex64::new(self.decay[1], -dpc);
        let d4 = Complex64::new(self.decay[2], -dpcs);

        let t3 = if self.microwave_sq == 0.0 {
            Some(d3)
        } else if d4 == Complex64::new(0.0, 0.0) {
            None
        } else {
            Some(d3 + self.microwave_sq / d4)
        };
        if self.coupling_sq == 0.0 {
            return Some(d2);
        }
        match t3 {
            None => Some(d2),
            Some(t) if t == Complex64::new(0.0, 0.0) => None,
            Some(t) => Some(d2 + self.coupling_sq / t),
        }
    }

    #[inline]
    pub fn alpha_complex(&self, v: f64) -> Complex64 {
        match self.denominator(v) {
            Some(d) => Complex64::new(0.0, self.prefactor) / d,
            None => Complex64::new(0.0, 0.0),
        }
    }

    #[inline]
    pub fn alpha(&self, v: f64) -> Polarizability {
        Polarizability::from_complex(self.alpha_complex(v))
    }
}

/// Linear-response polarizability `α(v) = i(μ₁₂²/ħ)/D(v)` with
/// `D = γ₂₁ − iΔ'_p + (Ω_c²/4)/(γ₃₁ − i(Δ'_p+Δ'_c) + (Ω_s²/4)/(γ₄₁ − i(Δ'_p+Δ'_c+Δ_s)))`.
pub fn weak_probe_alpha(params: &FourLevelParams, v: f64) -> Result<Polarizability> {
    params.check_common()?;
    if params.gamma2 > 0.0 {
        return Ok(WeakProbeKernel::new(params)?.alpha(v));
    }
    // gamma2 == 0: same fraction, but the outermost denominator can vanish.
    let kernel = WeakProbeKernel {
        prefactor: params.mu12 * params.mu12 / HBAR,
        decay: params.ground_coherence_decay(),
        delta_p: params.delta_p,
        delta_pc: params.delta_p + params.delta_c,
        delta_pcs: params.delta_p + params.delta_c + params.delta_s,
        k_p: params.k_p,
        k_pc: params.k_p + params.k_c,
        coupling_sq: 0.25 * params.omega_c_rabi * params.omega_c_rabi,
        microwave_sq: 0.25 * params.omega_s_rabi * params.omega_s_rabi,
    };
    match kernel.denominator(v) {
        Some(d) if d == Complex64::new(0.0, 0.0) => Err(Error::SingularDenominator),
        _ => Ok(kernel.alpha(v)),
    }
}

// Real parametrization of a Hermitian 4x4 matrix: the four populations, then
// (Re, Im) of ρ_kl for k < l in this order.
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

type Liouvillian = SMatrix<f64, 16, 16>;

fn basis_matrix(j: usize) -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    if j < 4 {
        m[(j, j)] = Complex64::new(1.0, 0.0);
    } else {
        let (k, l) = PAIRS[(j - 4) / 2];
        if (j - 4) % 2 == 0 {
            m[(k, l)] = Complex64::new(1.0, 0.0);
            m[(l, k)] = Complex64::new(1.0, 0.0);
        } else {
            m[(k, l)] = Complex64::new(0.0, 1.0);
            m[(l, k)] = Complex64::new(0.0, -1.0);
        }
    }
    m
}

fn components(m: &Matrix4<Complex64>) -> SVector<f64, 16> {
    let mut out = SVector::<f64, 16>::zeros();
    for k in 0..4 {
        out[k] = m[(k, k)].re;
    }
    for (p, &(k, l)) in PAIRS.iter().enumerate() {
        out[4 + 2 * p] = m[(k, l)].re;
        out[4 + 2 * p + 1] = m[(k, l)].im;
    }
    out
}

/// Rotating-frame Hamiltonian and jump operators, frequencies divided by `scale`.
fn generator(params: &FourLevelParams, scale: f64) -> (Matrix4<Complex64>, Vec<Matrix4<Complex64>>) {
    let c = |x: f64| Complex64::new(x / scale, 0.0);
    let mut h = Matrix4::<Complex64>::zeros();
    h[(1, 1)] = c(-params.delta_p);
    h[(2, 2)] = c(-(params.delta_p + params.delta_c));
    h[(3, 3)] = c(-(params.delta_p + params.delta_c + params.delta_s));
    for (k, rabi) in [params.omega_p_rabi, params.omega_c_rabi, params.omega_s_rabi]
        .into_iter()
        .enumerate()
    {
        h[(k, k + 1)] = c(-0.5 * rabi);
        h[(k + 1, k)] = c(-0.5 * rabi);
    }

    let mut jumps = Vec::with_capacity(6);
    for (k, rate) in [params.gamma2, params.gamma3, params.gamma4].into_iter().enumerate() {
        if rate > 0.0 {
            let mut l = Matrix4::zeros();
            l[(k, k + 1)] = Complex64::new((rate / scale).sqrt(), 0.0);
            jumps.push(l);
        }
    }
    for (k, rate) in params.dephasing.into_iter().enumerate() {
        if rate > 0.0 {
            let mut l = Matrix4::zeros();
            l[(k + 1, k + 1)] = Complex64::new((2.0 * rate / scale).sqrt(), 0.0);
            jumps.push(l);
        }
    }
    (h, jumps)
}

fn lindblad_action(
    h: &Matrix4<Complex64>,
    jumps: &[Matrix4<Complex64>],
    rho: &Matrix4<Complex64>,
) -> Matrix4<Complex64> {
    let minus_i = Complex64::new(0.0, -1.0);
    let mut out = (h * rho - rho * h) * minus_i;
    for l in jumps {
        let ld = l.adjoint();
        let ldl = ld * l;
        out += l * rho * ld - (ldl * rho + rho * ldl) * Complex64::new(0.5, 0.0);
    }
    out
}

fn liouvillian(params: &FourLevelParams, scale: f64) -> Liouvillian {
    let (h, jumps) = generator(params, scale);
    let mut a = Liouvillian::zeros();
    for j in 0..16 {
        let col = components(&lindblad_action(&h, &jumps, &basis_matrix(j)));
        a.set_column(j, &col);
    }
    a
}

fn norm1(m: &Liouvillian) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Lindblad steady state of the ladder for an atom with axial velocity `v`.
///
/// The 16 real components of ρ solve `L ρ = 0` with the ground-population row
/// replaced by `tr ρ = 1`. Frequencies are scaled by `Γ₂` before assembly.
pub fn steady_state(params: &FourLevelParams, v: f64) -> Result<DensityMatrix4> {
    params.validate()?;
    let shifted = doppler_shift(params, v);
    let mut a = liouvillian(&shifted, params.gamma2);
    for j in 0..16 {
        a[(0, j)] = if j < 4 { 1.0 } else { 0.0 };
    }
    let inverse = a.lu().try_inverse().ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    let condition = norm1(&a) * norm1(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    // Right-hand side is the unit vector on the trace row.
    let x = inverse.column(0);

    let mut rho = Matrix4::<Complex64>::zeros();
    let trace: f64 = (0..4).map(|k| x[k]).sum();
    for k in 0..4 {
        rho[(k, k)] = Complex64::new(x[k] / trace, 0.0);
    }
    for (p, &(k, l)) in PAIRS.iter().enumerate() {
        let z = Complex64::new(x[4 + 2 * p], x[4 + 2 * p + 1]) / trace;
        rho[(k, l)] = z;
        rho[(l, k)] = z.conj();
    }
    Ok(DensityMatrix4 { entries: rho })
}

/// `α = 2μ₁₂²ρ₂₁/(ħΩ_p)`. In the weak-probe limit this reproduces
/// [`weak_probe_alpha`] exactly (see the module docs for the phase convention).
pub fn alpha_from_coherence(rho: &DensityMatrix4, params: &FourLevelParams) -> Result<Polarizability> {
    if params.omega_p_rabi == 0.0 {
        return Err(Error::ZeroProbeRabi);
    }
    let rho21 = rho.entries[(1, 0)];
    let scale = 2.0 * params.mu12 * params.mu12 / (HBAR * params.omega_p_rabi);
    Ok(Polarizability::from_complex(rho21 * scale))
}

/// Intensity-dependent polarizability from the full steady state.
pub fn full_alpha(params: &FourLevelParams, v: f64) -> Result<Polarizability> {
    let rho = steady_state(params, v)?;
    alpha_from_coherence(&rho, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_level(omega_p: f64) -> FourLevelParams {
        FourLevelParams {
            omega_c_rabi: 0.0,
            omega_s_rabi: 0.0,
            ..FourLevelParams::default()
        }
        .with_probe_rabi(omega_p)
    }

    #[test]
    fn zero_velocity_leaves_params_unchanged() {
        let p = FourLevelParams::default();
        assert_eq!(doppler_shift(&p, 0.0), p);
    }

    #[test]
    fn doppler_shift_values() {
        let p = FourLevelParams::default();
        let s = doppler_shift(&p, 100.0);
        // k_p v = 2π/852nm · 100 m/s, k_c v = −2π/510nm · 100 m/s
        assert_relative_eq!(s.delta_p, -7.374_6e8, max_relative = 1e-4);
        assert_relative_eq!(s.delta_c, 1.231_99e9, max_relative = 1e-4);
        assert_eq!(s.delta_s, p.delta_s);
    }

    #[test]
    fn two_level_resonant_value() {
        let p = two_level(0.0);
        let a = weak_probe_alpha(&p, 0.0).unwrap();
        let expected = p.mu12 * p.mu12 / (HBAR * 0.5 * p.gamma2);
        assert_eq!(a.alpha_r, 0.0);
        assert_relative_eq!(a.alpha_i, expected, max_relative = 1e-14);
    }

    #[test]
    fn eit_suppression_factor() {
        let p = FourLevelParams {
            omega_s_rabi: 0.0,
            ..FourLevelParams::default()
        };
        let two = weak_probe_alpha(&two_level(0.0), 0.0).unwrap().alpha_i;
        let eit = weak_probe_alpha(&p, 0.0).unwrap().alpha_i;
        let [g21, g31, _] = p.ground_coherence_decay();
        let factor = 1.0 / (1.0 + p.omega_c_rabi.powi(2) / (4.0 * g21 * g31));
        assert_relative_eq!(eit / two, factor, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_denominator_is_an_error() {
        let p = FourLevelParams {
            gamma2: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
            omega_c_rabi: 0.0,
            omega_s_rabi: 0.0,
            ..FourLevelParams::default()
        };
        assert_eq!(weak_probe_alpha(&p, 0.0), Err(Error::SingularDenominator));
    }

    #[test]
    fn dark_ground_state() {
        let p = FourLevelParams {
            omega_c_rabi: 0.0,
            omega_s_rabi: 0.0,
            ..FourLevelParams::default()
        };
        let rho = steady_state(&p, 0.0).unwrap();
        assert!((rho.entries - DensityMatrix4::ground().entries).norm() < 1e-14);
    }

    #[test]
    fn two_level_saturation_factor() {
        // Resonant two-level steady state: ρ₂₁ carries the inversion 1/(1 + 2Ω²/Γ²).
        let gamma2 = FourLevelParams::default().gamma2;
        for ratio in [0.3, 1.0, 3.0] {
            let p = two_level(ratio * gamma2);
            let full = full_alpha(&p, 0.0).unwrap();
            let weak = weak_probe_alpha(&p, 0.0).unwrap();
            let expected = 1.0 / (1.0 + 2.0 * ratio * ratio);
            assert_relative_eq!(full.alpha_i / weak.alpha_i, expected, max_relative = 1e-10);
            assert!(full.alpha_r.abs() < 1e-12 * weak.alpha_i);
        }
    }

    #[test]
    fn weak_probe_limit_matches_kernel() {
        let p = FourLevelParams::default().with_probe_rabi(FourLevelParams::default().gamma2 / 1000.0);
        for v in [-30.0, -1.0, 0.0, 0.7, 12.0] {
            let full = full_alpha(&p, v).unwrap();
            let weak = weak_probe_alpha(&p, v).unwrap();
            let rel = (full.to_complex() - weak.to_complex()).norm() / weak.norm();
            assert!(rel < 1e-2, "v = {v}: rel = {rel}");
        }
    }

    #[test]
    fn zero_coherence_gives_zero_alpha() {
        let p = two_level(1e6);
        let a = alpha_from_coherence(&DensityMatrix4::ground(), &p).unwrap();
        assert_eq!(a, Polarizability::default());
    }

    #[test]
    fn zero_probe_rabi_rejected() {
        let p = two_level(0.0);
        assert_eq!(
            alpha_from_coherence(&DensityMatrix4::ground(), &p),
            Err(Error::ZeroProbeRabi)
        );
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = FourLevelParams::default();
        p.gamma2 = 0.0;
        assert!(matches!(steady_state(&p, 0.0), Err(Error::InvalidParameter { .. })));
        p = FourLevelParams::default();
        p.omega_c_rabi = -1.0;
        assert!(matches!(weak_probe_alpha(&p, 0.0), Err(Error::InvalidParameter { .. })));
    }
}
