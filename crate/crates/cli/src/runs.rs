//! The computations behind each subcommand, returning tables.

use agn_core::ensemble::{intrinsic_variance, velocity_distribution, ResponseModel};
use agn_core::geometry::power_for_ratio;
use agn_core::montecarlo::{validate_scaling, ScalingReport, ScalingValidation};
use agn_core::noise::{
    critical_threshold, generalized_scaling_ratio, quantum_advantage_boundary, sensitivity_map, FluctuationCurve,
    IntensityDependentJ, PhotonStatistics, Quadrature, ReadoutModel, SensorModel,
};
use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use crate::output::{Cell, Table};
use crate::scenario::{ConfigError, RGrid, Scenario};

/// `J(R)` for a scenario: constant in the weak-probe limit, otherwise
/// evaluated at the probe power that realizes `R`.
pub struct ScenarioCurve {
    curve: IntensityDependentJ,
    readout: ReadoutModel,
    explicit_readout: bool,
    constant: Option<f64>,
}

impl ScenarioCurve {
    pub fn new(scenario: &Scenario, model: SensorModel) -> Result<Self> {
        let mut curve = Self {
            curve: IntensityDependentJ::new(model).map_err(ConfigError::from)?,
            readout: scenario.readout,
            explicit_readout: scenario.explicit_readout,
            constant: None,
        };
        if model.response == ResponseModel::WeakProbe {
            curve.constant = Some(curve.j_for(&model)?);
        }
        Ok(curve)
    }

    fn j_for(&self, model: &SensorModel) -> agn_core::Result<f64> {
        let (m, _) = model.moments_with_mesh()?;
        let var = match self.readout.quadrature_q {
            Quadrature::Real => m.var_alpha_r,
            Quadrature::Imaginary => m.var_alpha_i,
        };
        let readout = if self.explicit_readout {
            self.readout
        } else {
            ReadoutModel::optical_depth(model.optical_depth_prefactor()?)
        };
        Ok(readout.fluctuation_parameter(intrinsic_variance(&model.gas, var)))
    }

    pub fn model(&self) -> &SensorModel {
        self.curve.model()
    }
}

impl FluctuationCurve for ScenarioCurve {
    fn j_at(&self, r: f64) -> agn_core::Result<f64> {
        match self.constant {
            Some(j) => Ok(j),
            None => self.j_for(&self.curve.model_at(r)?),
        }
    }

    fn power_at(&self, r: f64) -> Option<f64> {
        self.curve.power_at(r)
    }
}

fn sensor(s: &Scenario) -> SensorModel {
    s.sensor()
}

/// Echo of the scenario plus the derived resource bookkeeping.
pub fn fluxes(s: &Scenario) -> Result<(Table, Vec<String>)> {
    let model = sensor(s);
    let acc = model.accounting().map_err(ConfigError::from)?;
    let dist = velocity_distribution(&s.gas);
    let omega_p = model.probe_rabi()?;
    let curve = ScenarioCurve::new(s, model)?;
    let j = curve.j_at(acc.resource_ratio_r)?;
    let weak = ScenarioCurve::new(
        s,
        SensorModel {
            response: ResponseModel::WeakProbe,
            ..model
        },
    )?
    .j_at(acc.resource_ratio_r)?;
    let mut t = Table::new(&["quantity", "value", "unit"]);
    for (name, value, unit) in s.echo() {
        t.push(vec![name.into(), value.into(), unit.into()]);
    }
    let derived: [(&str, f64, &str); 14] = [
        ("v_bar", dist.v_bar, "m/s"),
        ("sigma_v", dist.sigma_v, "m/s"),
        ("v_bm", acc.v_bm, "m^3"),
        ("n_at_mean", acc.n_at_mean, ""),
        ("phi_at", acc.phi_at, "1/s"),
        ("phi_ph", acc.phi_ph, "1/s"),
        ("resource_ratio_r", acc.resource_ratio_r, ""),
        ("a_prefactor", acc.a_prefactor, ""),
        ("omega_p_rabi", omega_p, "rad/s"),
        ("power_over_saturation", s.geometry.saturation_fraction(), ""),
        ("j", j, ""),
        ("j_weak_probe", weak, ""),
        ("r_c", critical_threshold(j)?.value(), ""),
        (
            "scaling_ratio",
            generalized_scaling_ratio(acc.resource_ratio_r, j, s.stats)?.to_shot_limit,
            "",
        ),
    ];
    for (name, value, unit) in derived {
        t.push(vec![name.into(), value.into(), unit.into()]);
    }
    let note = format!(
        "J = {j:.6} ({:?} response) at P_in = {:e} W, w0 = {:e} m, L = {:e} m, n = {:e} m^-3, T = {} K, Omega_p = {omega_p:e} rad/s, Omega_c = {:e} rad/s, Omega_s = {:e} rad/s, Gamma = ({:e}, {:e}, {:e}) rad/s, mu12 = {:e} C*m",
        s.response,
        s.geometry.power_in,
        s.geometry.waist_w0,
        s.geometry.cell_length_l,
        s.gas.density_n,
        s.gas.temperature_t,
        s.levels.omega_c_rabi,
        s.levels.omega_s_rabi,
        s.levels.gamma2,
        s.levels.gamma3,
        s.levels.gamma4,
        s.levels.mu12,
    );
    log::info!("{note}");
    Ok((t, vec![note]))
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "omega_s_mhz",
    "R",
    "sigma_ratio",
    "sigma_agn",
    "sigma_psn",
    "sigma_total",
    "J_at_point",
    "P_in_equivalent",
    "weak_probe_flag",
    "R_c",
];

/// Relative noise against `R`, one block per microwave Rabi frequency.
pub fn scaling_sweep(s: &Scenario) -> Result<Table> {
    let spec = s
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError::new("sweep", "scenario has no [sweep] section"))?;
    let r_values = spec.axis.values();
    let mut t = Table::new(&SWEEP_COLUMNS);
    for &omega_s in &spec.microwave_rabi {
        let model = sensor(s).with_microwave_rabi(omega_s);
        let acc = model.accounting().map_err(ConfigError::from)?;
        let n_at = acc.phi_at * s.interval;
        let curve = ScenarioCurve::new(s, model)?;
        let rows: Vec<Vec<Cell>> = r_values
            .par_iter()
            .map(|&r| -> Result<Vec<Cell>> {
                let j = curve.j_at(r).with_context(|| format!("J at R = {r:e}"))?;
                let ratio = generalized_scaling_ratio(r, j, s.stats)?;
                let n_ph = r * n_at;
                let sigma_agn = (j / n_at).sqrt();
                let sigma_psn = ((1.0 + s.stats.mandel_q) / n_ph).sqrt();
                let p_eq = power_for_ratio(&s.gas, &model.geometry, r)?;
                Ok(vec![
                    (omega_s / (2.0 * std::f64::consts::PI * 1e6)).into(),
                    r.into(),
                    ratio.to_shot_limit.into(),
                    sigma_agn.into(),
                    sigma_psn.into(),
                    (sigma_agn * sigma_agn + sigma_psn * sigma_psn).sqrt().into(),
                    j.into(),
                    p_eq.into(),
                    (p_eq < s.weak_probe_threshold * s.geometry.saturation_power).into(),
                    critical_threshold(j)?.value().into(),
                ])
            })
            .collect::<Result<_>>()?;
        for row in rows {
            t.push(row);
        }
    }
    Ok(t)
}

/// Relative noise against `R` for each Mandel `Q`, with the boundary where
/// Fock light meets the shot-noise limit.
pub fn quantum_sweep(s: &Scenario) -> Result<(Table, f64)> {
    let spec = s
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError::new("sweep", "scenario has no [sweep] section"))?;
    let curve = ScenarioCurve::new(s, sensor(s))?;
    let r_values = spec.axis.values();
    let js: Vec<f64> = r_values
        .par_iter()
        .map(|&r| curve.j_at(r).with_context(|| format!("J at R = {r:e}")))
        .collect::<Result<_>>()?;
    let r_crit = quantum_advantage_boundary(&curve, (spec.boundary_bracket[0], spec.boundary_bracket[1]))
        .context("quantum-advantage boundary")?;
    let mut t = Table::new(&["Q", "R", "ratio_to_shot", "ratio_to_quantum_limit", "J", "R_crit"]);
    for &q in &spec.mandel_q {
        let stats = PhotonStatistics::new(q)?;
        for (&r, &j) in r_values.iter().zip(&js) {
            let g = generalized_scaling_ratio(r, j, stats)?;
            t.push(vec![
                q.into(),
                r.into(),
                g.to_shot_limit.into(),
                g.to_quantum_limit.into(),
                j.into(),
                r_crit.into(),
            ]);
        }
    }
    Ok((t, r_crit))
}

pub const MAP_COLUMNS: [&str; 8] = ["P_in", "w0", "E_s", "log10_E_s", "E_s_shot_limit", "R", "J", "failure"];

fn map_table(map: &agn_core::noise::SensitivityMap) -> Table {
    let mut t = Table::new(&MAP_COLUMNS);
    for p in &map.points {
        let row = match &p.result {
            Some(r) => vec![
                p.power_in.into(),
                p.waist.into(),
                r.e_s.into(),
                r.e_s.log10().into(),
                r.e_s_shot.into(),
                r.r.into(),
                r.j.into(),
                Cell::Missing,
            ],
            None => vec![
                p.power_in.into(),
                p.waist.into(),
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                p.failure.clone().unwrap_or_default().into(),
            ],
        };
        t.push(row);
    }
    t
}

/// Long-format sensitivity map over `(P_in, w0)` and the fixed-waist inset.
pub fn sensitivity_map_run(s: &Scenario) -> Result<(Table, Table)> {
    let spec = s
        .map
        .as_ref()
        .ok_or_else(|| ConfigError::new("map", "scenario has no [map] section"))?;
    let powers = spec.power.values();
    let waists = spec.waist.values();
    let model = sensor(s);
    let map = sensitivity_map(&powers, &waists, &model).map_err(|e| anyhow!(e))?;
    let inset = sensitivity_map(&powers, &[spec.inset_waist], &model).map_err(|e| anyhow!(e))?;
    Ok((map_table(&map), map_table(&inset)))
}

pub const MC_COLUMNS: [&str; 16] = [
    "R_target",
    "R_achieved",
    "N_ph",
    "Q_achieved",
    "mean_S",
    "var_S",
    "var_ci_low",
    "var_ci_high",
    "empirical_ratio",
    "ratio_ci_low",
    "ratio_ci_high",
    "analytic_ratio",
    "relative_deviation",
    "analytic_in_ci",
    "pass",
    "J",
];

pub struct McOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub analytic_j_factor: f64,
}

/// Monte Carlo check of the scaling law on the scenario's `[mc]` grid.
pub fn mc_validate(s: &Scenario, opts: &McOptions) -> Result<(Table, ScalingReport, u64)> {
    let mc =
        s.mc.as_ref()
            .ok_or_else(|| ConfigError::new("mc", "scenario has no [mc] section"))?;
    let a = sensor(s).optical_depth_prefactor()?;
    let seed = opts.seed.unwrap_or(mc.seed);
    let mut v = ScalingValidation::new(s.levels, s.gas, a, mc.n_at, Vec::new());
    v.stats = s.stats;
    v.mode = mc.response;
    v.seed = seed;
    v.trials = opts.trials.unwrap_or(mc.trials);
    v.tolerance = mc.tolerance;
    v.confidence = mc.confidence;
    v.agn_branch_min_rj = mc.agn_branch_min_rj;
    v.frozen_velocities = mc.frozen_velocities;
    v.analytic_j_factor = opts.analytic_j_factor;
    v.r_grid = match &mc.grid {
        RGrid::Absolute(axis) => axis.values(),
        RGrid::RelativeToCritical(axis) => {
            let j = v.analytic_j()?;
            let rc = critical_threshold(j)?.value();
            if !rc.is_finite() {
                return Err(
                    ConfigError::new("mc.r_over_rc", "J = 0, so there is no critical ratio to scale by").into(),
                );
            }
            axis.values().into_iter().map(|x| x * rc).collect()
        }
    };
    let report = validate_scaling(&v)?;
    let mut t = Table::new(&MC_COLUMNS);
    for p in &report.points {
        t.push(vec![
            p.r_target.into(),
            p.r_achieved.into(),
            p.n_ph_mean.into(),
            p.q_achieved.into(),
            p.variance.mean_s.into(),
            p.variance.var_s.into(),
            p.variance.ci_low.into(),
            p.variance.ci_high.into(),
            p.empirical_ratio.into(),
            p.ratio_ci_low.into(),
            p.ratio_ci_high.into(),
            p.analytic_ratio.into(),
            p.relative_deviation.into(),
            p.analytic_in_ci.into(),
            p.pass.into(),
            report.j.into(),
        ]);
    }
    Ok((t, report, seed))
}
