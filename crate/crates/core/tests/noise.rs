use std::f64::consts::PI;

use agn_core::ensemble::ResponseModel;
use agn_core::noise::{
    generalized_scaling_ratio, quantum_advantage_boundary, scaling_ratio, sensitivity, sensitivity_map, signal_slope,
    FluctuationCurve, IntensityDependentJ, PhotonStatistics, SensorModel,
};
use agn_core::Error;
use approx::assert_relative_eq;
use proptest::prelude::*;

const MHZ: f64 = 2.0 * PI * 1e6;

fn weak() -> SensorModel {
    SensorModel {
        response: ResponseModel::WeakProbe,
        ..SensorModel::default()
    }
}

#[test]
fn agn_branch_has_half_power_slope() {
    let j = 40.0;
    let r: Vec<f64> = (0..6).map(|i| 1e4 / j * 10f64.powi(i)).collect();
    for w in r.windows(2) {
        let slope = (scaling_ratio(w[1], j).ln() - scaling_ratio(w[0], j).ln()) / (w[1] / w[0]).ln();
        assert!((slope - 0.5).abs() < 0.02, "{slope}");
    }
}

#[test]
fn slope_changes_sign_across_signal_extremum() {
    let m = weak();
    let slope = |mhz: f64| {
        let mm = m.with_microwave_rabi(mhz * MHZ);
        signal_slope(&mm, mm.default_slope_step()).unwrap()
    };
    let below = slope(4.0);
    let above = slope(10.0);
    assert!(below.value > 0.0 && above.value < 0.0);
    let peak = slope(6.0).mean_signal.max(slope(8.0).mean_signal);
    assert!(peak > below.mean_signal && peak > above.mean_signal);
}

#[test]
fn richardson_error_shrinks_fourfold() {
    let m = SensorModel::default();
    let h = 20.0 * m.default_slope_step();
    let e1 = signal_slope(&m, h).unwrap().error;
    let e2 = signal_slope(&m, h / 2.0).unwrap().error;
    assert!((e1 / e2 / 4.0 - 1.0).abs() < 0.2, "{}", e1 / e2);
}

#[test]
fn single_point_map_equals_sensitivity() {
    let m = weak();
    let map = sensitivity_map(&[m.geometry.power_in], &[m.geometry.waist_w0], &m).unwrap();
    let direct = sensitivity(&m).unwrap();
    assert_eq!(map.points[0].result.unwrap(), direct);
}

#[test]
fn map_does_not_depend_on_grid_order() {
    let m = weak();
    let powers = [30e-6, 120e-6, 400e-6];
    let waists = [0.5e-3, 0.85e-3];
    let forward = sensitivity_map(&powers, &waists, &m).unwrap();
    let mut rp = powers;
    rp.reverse();
    let mut rw = waists;
    rw.reverse();
    let backward = sensitivity_map(&rp, &rw, &m).unwrap();
    for (wi, _) in waists.iter().enumerate() {
        for (pi, _) in powers.iter().enumerate() {
            let a = forward.get(wi, pi);
            let b = backward.get(waists.len() - 1 - wi, powers.len() - 1 - pi);
            assert_eq!(a, b);
        }
    }
    for p in &forward.points {
        assert!(p.result.unwrap().identity_residual < 1e-10);
    }
}

#[test]
fn sensitivity_is_interval_independent_in_full_mode() {
    let a = SensorModel::default();
    let b = SensorModel { interval: 1e-4, ..a };
    let sa = sensitivity(&a).unwrap();
    let sb = sensitivity(&b).unwrap();
    assert_relative_eq!(sa.e_s, sb.e_s, max_relative = 1e-10);
    assert_relative_eq!(sa.e_s_shot, sb.e_s_shot, max_relative = 1e-10);
}

#[test]
fn inset_power_sweep_has_interior_minimum() {
    let m = SensorModel::default();
    let powers: Vec<f64> = (0..9).map(|i| 1e-6 * 10f64.powf(i as f64 * 0.375)).collect();
    let e: Vec<f64> = powers
        .iter()
        .map(|&p| sensitivity(&m.with_power(p)).unwrap().e_s)
        .collect();
    let (imin, _) = e.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert!(imin > 0 && imin < e.len() - 1, "{e:?}");
}

#[test]
fn intensity_dependent_boundary_residual() {
    let curve = IntensityDependentJ::new(SensorModel::default().with_rtol(1e-10)).unwrap();
    let r = quantum_advantage_boundary(&curve, (1e-6, 1e-2)).unwrap();
    let residual = r * curve.j_at(r).unwrap() - 1.0;
    assert!(residual.abs() < 1e-8, "{residual}");
    let at_root = generalized_scaling_ratio(r, curve.j_at(r).unwrap(), PhotonStatistics::FOCK).unwrap();
    assert!((at_root.to_shot_limit - 1.0).abs() < 1e-8);
}

#[test]
fn unbracketed_boundary_reports_endpoints() {
    let curve = IntensityDependentJ::new(weak()).unwrap();
    let err = quantum_advantage_boundary(&curve, (1.0, 2.0)).unwrap_err();
    assert!(matches!(err, Error::NotBracketed { .. }), "{err:?}");
}

proptest! {
    #[test]
    fn ratio_increases_in_r_and_j(r in 1e-6..1e3f64, j in 1e-3..1e4f64, k in 1.01..10.0f64) {
        prop_assert!(scaling_ratio(r * k, j) > scaling_ratio(r, j));
        prop_assert!(scaling_ratio(r, j * k) > scaling_ratio(r, j));
    }

    #[test]
    fn small_rj_regime(rj in 1e-8..1e-2f64) {
        prop_assert!(scaling_ratio(rj, 1.0) - 1.0 < rj / 2.0 + rj * rj);
    }

    #[test]
    fn coherent_light_recovers_unified_law(r in 0.0..1e3f64, j in 0.0..1e4f64) {
        let g = generalized_scaling_ratio(r, j, PhotonStatistics::COHERENT).unwrap();
        prop_assert_eq!(g.to_shot_limit, scaling_ratio(r, j));
        prop_assert_eq!(g.to_quantum_limit, Some(scaling_ratio(r, j)));
    }
}
