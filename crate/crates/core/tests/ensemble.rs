use std::f64::consts::PI;

use agn_core::ensemble::{
    alpha_moments, fluctuation_parameter, intrinsic_variance, velocity_distribution, AlphaEvaluator, GasParams,
    MomentOptions, ResponseModel,
};
use agn_core::spectroscopy::FourLevelParams;
use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const MHZ: f64 = 2.0 * PI * 1e6;

// Independent evaluation of the default Cs scenario (weak probe): the mean of
// 1e7 Gaussian velocity draws, and adaptive quadrature at 1e-12 split at the
// resonance velocities.
const SAMPLED_VAR_ALPHA_I: f64 = 1.775_770_3e-63;
const QUADRATURE_VAR_ALPHA_I: f64 = 1.779_713_7e-63;
const QUADRATURE_MEAN_ALPHA_I: f64 = 8.594_537_3e-33;

#[test]
fn default_scenario_matches_sampled_oracle() {
    let m = alpha_moments(
        &FourLevelParams::default(),
        &GasParams::default(),
        ResponseModel::WeakProbe,
        &MomentOptions::default(),
    )
    .unwrap();
    assert_relative_eq!(m.var_alpha_i, SAMPLED_VAR_ALPHA_I, max_relative = 5e-3);
    assert_relative_eq!(m.var_alpha_i, QUADRATURE_VAR_ALPHA_I, max_relative = 1e-5);
    assert_relative_eq!(m.mean_alpha.alpha_i, QUADRATURE_MEAN_ALPHA_I, max_relative = 1e-5);
    assert!(m.var_alpha_r >= 0.0);
}

#[test]
fn mean_speed_over_sigma() {
    for t in [1.0, 298.15, 450.0] {
        let gas = GasParams {
            temperature_t: t,
            ..GasParams::default()
        };
        let d = velocity_distribution(&gas);
        assert_relative_eq!(d.v_bar / d.sigma_v, (8.0 / PI).sqrt(), max_relative = 1e-12);
    }
}

#[test]
fn j_scales_as_a_squared_and_v_as_n_squared() {
    let gas = GasParams::default();
    let v = intrinsic_variance(&gas, 3.0e-63);
    for k in [2.0, 7.0] {
        let dense = GasParams {
            density_n: k * gas.density_n,
            ..gas
        };
        assert_relative_eq!(intrinsic_variance(&dense, 3.0e-63), k * k * v, max_relative = 1e-14);
        assert_relative_eq!(
            fluctuation_parameter(k * 5.0, v),
            k * k * fluctuation_parameter(5.0, v),
            max_relative = 1e-14
        );
    }
}

fn sampled_moments(p: &FourLevelParams, gas: &GasParams, draws: usize, seed: u64) -> (f64, f64, f64, f64) {
    let eval = AlphaEvaluator::new(p, ResponseModel::WeakProbe).unwrap();
    let sigma = velocity_distribution(gas).sigma_v;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..draws)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            eval.alpha(sigma * z).unwrap().alpha_i
        })
        .collect();
    let n = draws as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (mean, (var / n).sqrt(), var, ((m4 - var * var) / n).sqrt())
}

#[test]
fn quadrature_agrees_with_sampling_across_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..6 {
        let p = FourLevelParams {
            omega_c_rabi: rng.random_range(0.3..4.0) * MHZ,
            omega_s_rabi: rng.random_range(0.0..15.0) * MHZ,
            delta_p: rng.random_range(-20.0..20.0) * MHZ,
            delta_c: rng.random_range(-5.0..5.0) * MHZ,
            delta_s: rng.random_range(-5.0..5.0) * MHZ,
            ..FourLevelParams::default()
        };
        let gas = GasParams {
            temperature_t: rng.random_range(250.0..400.0),
            ..GasParams::default()
        };
        let m = alpha_moments(&p, &gas, ResponseModel::WeakProbe, &MomentOptions::default()).unwrap();
        let (mean, se_mean, var, se_var) = sampled_moments(&p, &gas, 1_000_000, case);
        assert!((m.mean_alpha.alpha_i - mean).abs() < 3.0 * se_mean, "case {case}: mean");
        assert!(
            (m.var_alpha_i - var).abs() < 3.0 * se_var,
            "case {case}: var {} vs {var}",
            m.var_alpha_i
        );
    }
}

#[test]
fn successive_tolerances_agree() {
    let p = FourLevelParams::default();
    let gas = GasParams::default();
    let coarse = alpha_moments(&p, &gas, ResponseModel::WeakProbe, &MomentOptions::default()).unwrap();
    let fine = alpha_moments(
        &p,
        &gas,
        ResponseModel::WeakProbe,
        &MomentOptions {
            rtol: 1e-9,
            ..MomentOptions::default()
        },
    )
    .unwrap();
    assert_relative_eq!(coarse.var_alpha_i, fine.var_alpha_i, max_relative = 1e-6);
    assert_relative_eq!(coarse.mean_alpha.alpha_i, fine.mean_alpha.alpha_i, max_relative = 1e-6);
    assert!(fine.quadrature_order >= coarse.quadrature_order);
}
