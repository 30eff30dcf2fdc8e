//! Scenario files: strict TOML with unit-suffixed quantities.

use std::fmt;
use std::path::Path;

use agn_core::constants::CS133_MASS;
use agn_core::ensemble::{GasParams, MomentOptions, ResponseModel};
use agn_core::geometry::{optical_depth_prefactor, BeamGeometry, IntensityConvention};
use agn_core::noise::{PhotonStatistics, Quadrature, ReadoutModel, SensorModel};
use agn_core::spectroscopy::FourLevelParams;
use serde::{Deserialize, Serialize};

use crate::units::{parse_quantity, Dimension};

const PAPER_OPERATING_POINT: &str = include_str!("../scenarios/paper-operating-point.toml");
const MC_VALIDATION: &str = include_str!("../scenarios/mc-validation.toml");

/// Scenarios shipped with the binary, selectable by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("paper-operating-point", PAPER_OPERATING_POINT),
    ("mc-validation", MC_VALIDATION),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<agn_core::Error> for ConfigError {
    fn from(e: agn_core::Error) -> Self {
        match e {
            agn_core::Error::InvalidParameter { name, reason } => ConfigError::new(name, reason),
            other => ConfigError::new("", other.to_string()),
        }
    }
}

/// A number, or a string carrying a unit.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Raw {
    Number(f64),
    Text(String),
}

impl Raw {
    fn si(&self, key: &str, dim: Dimension) -> Result<f64, ConfigError> {
        match self {
            Raw::Number(v) if dim == Dimension::Dimensionless => Ok(*v),
            Raw::Number(v) => Err(ConfigError::new(
                key,
                format!("{v} needs a unit (write it as a string, e.g. \"{v} ...\")"),
            )),
            Raw::Text(t) => parse_quantity(key, t, dim),
        }
    }
}

fn opt(raw: &Option<Raw>, key: &str, dim: Dimension, default: f64) -> Result<f64, ConfigError> {
    raw.as_ref().map_or(Ok(default), |r| r.si(key, dim))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    #[serde(default)]
    gas: RawGas,
    #[serde(default)]
    geometry: RawGeometry,
    #[serde(default)]
    levels: RawLevels,
    #[serde(default)]
    model: RawModel,
    readout: Option<RawReadout>,
    #[serde(default)]
    stats: RawStats,
    sweep: Option<RawSweep>,
    map: Option<RawMap>,
    mc: Option<RawMc>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGas {
    density: Option<Raw>,
    temperature: Option<Raw>,
    mass: Option<Raw>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    waist: Option<Raw>,
    cell_length: Option<Raw>,
    probe_wavelength: Option<Raw>,
    power_in: Option<Raw>,
    saturation_power: Option<Raw>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevels {
    coupling_rabi: Option<Raw>,
    microwave_rabi: Option<Raw>,
    probe_detuning: Option<Raw>,
    coupling_detuning: Option<Raw>,
    microwave_detuning: Option<Raw>,
    gamma2: Option<Raw>,
    gamma3: Option<Raw>,
    gamma4: Option<Raw>,
    dephasing: Option<Vec<Raw>>,
    coupling_wavelength: Option<Raw>,
    coupling_direction: Option<Direction>,
    probe_dipole: Option<Raw>,
    microwave_dipole: Option<Raw>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Direction {
    Counter,
    Co,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    response: Option<ResponseModel>,
    intensity: Option<IntensityConvention>,
    interval: Option<Raw>,
    moment_rtol: Option<f64>,
    weak_probe_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReadout {
    transduction: f64,
    photon_transduction: f64,
    quadrature: Quadrature,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStats {
    mandel_q: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    variable: String,
    from: Raw,
    to: Raw,
    points: usize,
    scale: Option<Scale>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axes: Vec<RawAxis>,
    microwave_rabi: Option<Vec<Raw>>,
    mandel_q: Option<Vec<f64>>,
    boundary_bracket: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    axes: Vec<RawAxis>,
    inset_waist: Option<Raw>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    seed: Option<u64>,
    trials: usize,
    n_at: f64,
    r_over_rc: Option<RawAxis>,
    r: Option<RawAxis>,
    response: Option<ResponseModel>,
    tolerance: Option<f64>,
    confidence: Option<f64>,
    agn_branch_min_rj: Option<f64>,
    frozen_velocities: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Linear,
    #[default]
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    #[serde(rename = "R")]
    R,
    PowerIn,
    Waist,
}

impl Variable {
    fn parse(key: &str, s: &str) -> Result<Self, ConfigError> {
        match s {
            "R" => Ok(Variable::R),
            "power_in" => Ok(Variable::PowerIn),
            "waist" => Ok(Variable::Waist),
            other => Err(ConfigError::new(
                key,
                format!("unknown sweep variable {other:?}; use \"R\", \"power_in\" or \"waist\""),
            )),
        }
    }

    fn dimension(self) -> Dimension {
        match self {
            Variable::R => Dimension::Dimensionless,
            Variable::PowerIn => Dimension::Power,
            Variable::Waist => Dimension::Length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub variable: Variable,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Axis {
    fn from_raw(key: &str, raw: &RawAxis) -> Result<Self, ConfigError> {
        let variable = Variable::parse(&format!("{key}.variable"), &raw.variable)?;
        let axis = Axis {
            variable,
            from: raw.from.si(&format!("{key}.from"), variable.dimension())?,
            to: raw.to.si(&format!("{key}.to"), variable.dimension())?,
            points: raw.points,
            scale: raw.scale.unwrap_or_default(),
        };
        if axis.points == 0 {
            return Err(ConfigError::new(format!("{key}.points"), "must be at least 1"));
        }
        if axis.scale == Scale::Log && !(axis.from > 0.0 && axis.to > 0.0) {
            return Err(ConfigError::new(key, "a log axis needs positive endpoints"));
        }
        Ok(axis)
    }

    /// Grid values. A single point sits at `from`; a collapsed range gives
    /// one value.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 || self.from == self.to {
            return vec![self.from];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / n;
                match self.scale {
                    Scale::Linear => self.from + t * (self.to - self.from),
                    Scale::Log => (self.from.ln() + t * (self.to / self.from).ln()).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    /// One curve block per microwave Rabi frequency (rad/s).
    pub microwave_rabi: Vec<f64>,
    pub mandel_q: Vec<f64>,
    pub boundary_bracket: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub power: Axis,
    pub waist: Axis,
    pub inset_waist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RGrid {
    /// Multiples of `R_c = 1/J`.
    RelativeToCritical(Axis),
    Absolute(Axis),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub seed: u64,
    pub trials: usize,
    pub n_at: f64,
    pub grid: RGrid,
    pub response: ResponseModel,
    pub tolerance: f64,
    pub confidence: f64,
    pub agn_branch_min_rj: f64,
    pub frozen_velocities: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub gas: GasParams,
    pub geometry: BeamGeometry,
    pub levels: FourLevelParams,
    pub response: ResponseModel,
    pub intensity: IntensityConvention,
    pub interval: f64,
    pub moment_rtol: f64,
    /// `P_in < threshold·P_s` marks a point as weak-probe.
    pub weak_probe_threshold: f64,
    pub readout: ReadoutModel,
    /// Whether the readout was given explicitly rather than derived as the
    /// optical depth of the geometry.
    pub explicit_readout: bool,
    pub stats: PhotonStatistics,
    pub sweep: Option<SweepSpec>,
    pub map: Option<MapSpec>,
    pub mc: Option<McSpec>,
}

impl Scenario {
    pub fn sensor(&self) -> SensorModel {
        SensorModel {
            gas: self.gas,
            geometry: self.geometry,
            levels: self.levels,
            response: self.response,
            intensity: self.intensity,
            moments: MomentOptions {
                rtol: self.moment_rtol,
                ..MomentOptions::default()
            },
            interval: self.interval,
        }
    }

    /// SHA-256 of the normalized (SI) scenario.
    pub fn digest(&self) -> String {
        crate::manifest::sha256_hex(serde_json::to_string(self).expect("scenario serializes").as_bytes())
    }

    /// Key quantities in SI units, for echoing back what was loaded.
    pub fn echo(&self) -> Vec<(&'static str, f64, &'static str)> {
        let two_pi = 2.0 * std::f64::consts::PI;
        vec![
            ("density_n", self.gas.density_n, "m^-3"),
            ("temperature_t", self.gas.temperature_t, "K"),
            ("mass_m", self.gas.mass_m, "kg"),
            ("waist_w0", self.geometry.waist_w0, "m"),
            ("cell_length_l", self.geometry.cell_length_l, "m"),
            ("lambda_p", self.geometry.lambda_p, "m"),
            ("power_in", self.geometry.power_in, "W"),
            ("saturation_power", self.geometry.saturation_power, "W"),
            ("omega_c_rabi_over_2pi", self.levels.omega_c_rabi / two_pi, "Hz"),
            ("omega_s_rabi_over_2pi", self.levels.omega_s_rabi / two_pi, "Hz"),
            ("gamma2_over_2pi", self.levels.gamma2 / two_pi, "Hz"),
            ("gamma3_over_2pi", self.levels.gamma3 / two_pi, "Hz"),
            ("gamma4_over_2pi", self.levels.gamma4 / two_pi, "Hz"),
            ("mu12", self.levels.mu12, "C*m"),
            ("mu_s", self.levels.mu_s, "C*m"),
            ("mandel_q", self.stats.mandel_q, ""),
        ]
    }
}

fn convert(raw: RawScenario) -> Result<Scenario, ConfigError> {
    use Dimension::*;
    let gd = GasParams::default();
    let gas = GasParams {
        density_n: opt(&raw.gas.density, "gas.density", Density, gd.density_n)?,
        temperature_t: opt(&raw.gas.temperature, "gas.temperature", Temperature, gd.temperature_t)?,
        mass_m: opt(&raw.gas.mass, "gas.mass", Mass, CS133_MASS)?,
    };
    gas.validate()?;

    let bd = BeamGeometry::default();
    let g = &raw.geometry;
    let geometry = BeamGeometry {
        waist_w0: opt(&g.waist, "geometry.waist", Length, bd.waist_w0)?,
        cell_length_l: opt(&g.cell_length, "geometry.cell_length", Length, bd.cell_length_l)?,
        lambda_p: opt(&g.probe_wavelength, "geometry.probe_wavelength", Length, bd.lambda_p)?,
        power_in: opt(&g.power_in, "geometry.power_in", Power, bd.power_in)?,
        saturation_power: opt(
            &g.saturation_power,
            "geometry.saturation_power",
            Power,
            bd.saturation_power,
        )?,
    };
    geometry.validate()?;

    let ld = FourLevelParams::default();
    let l = &raw.levels;
    let k_c_mag = match &l.coupling_wavelength {
        None => ld.k_c.abs(),
        Some(r) => {
            let lambda = r.si("levels.coupling_wavelength", Length)?;
            if !(lambda > 0.0) {
                return Err(ConfigError::new("levels.coupling_wavelength", "must be > 0"));
            }
            2.0 * std::f64::consts::PI / lambda
        }
    };
    let dephasing = match &l.dephasing {
        None => ld.dephasing,
        Some(v) if v.len() == 3 => {
            let mut out = [0.0; 3];
            for (i, r) in v.iter().enumerate() {
                out[i] = r.si(&format!("levels.dephasing[{i}]"), Frequency)?;
            }
            out
        }
        Some(v) => {
            return Err(ConfigError::new(
                "levels.dephasing",
                format!("needs 3 rates (levels 2, 3, 4), got {}", v.len()),
            ))
        }
    };
    let levels = FourLevelParams {
        omega_p_rabi: 0.0,
        omega_c_rabi: opt(&l.coupling_rabi, "levels.coupling_rabi", Frequency, ld.omega_c_rabi)?,
        omega_s_rabi: opt(&l.microwave_rabi, "levels.microwave_rabi", Frequency, ld.omega_s_rabi)?,
        delta_p: opt(&l.probe_detuning, "levels.probe_detuning", Frequency, ld.delta_p)?,
        delta_c: opt(&l.coupling_detuning, "levels.coupling_detuning", Frequency, ld.delta_c)?,
        delta_s: opt(
            &l.microwave_detuning,
            "levels.microwave_detuning",
            Frequency,
            ld.delta_s,
        )?,
        gamma2: opt(&l.gamma2, "levels.gamma2", Frequency, ld.gamma2)?,
        gamma3: opt(&l.gamma3, "levels.gamma3", Frequency, ld.gamma3)?,
        gamma4: opt(&l.gamma4, "levels.gamma4", Frequency, ld.gamma4)?,
        dephasing,
        k_p: 2.0 * std::f64::consts::PI / geometry.lambda_p,
        k_c: match l.coupling_direction.unwrap_or(Direction::Counter) {
            Direction::Counter => -k_c_mag,
            Direction::Co => k_c_mag,
        },
        mu12: opt(&l.probe_dipole, "levels.probe_dipole", DipoleMoment, ld.mu12)?,
        mu_s: opt(&l.microwave_dipole, "levels.microwave_dipole", DipoleMoment, ld.mu_s)?,
    };
    levels.validate().map_err(|e| prefix("levels", e.into()))?;
    if !(levels.mu_s > 0.0) {
        return Err(ConfigError::new("levels.microwave_dipole", "must be > 0"));
    }

    let m = &raw.model;
    let interval = opt(&m.interval, "model.interval", Time, 1.0)?;
    if !(interval > 0.0) {
        return Err(ConfigError::new("model.interval", "must be > 0"));
    }
    let moment_rtol = m.moment_rtol.unwrap_or(MomentOptions::default().rtol);
    if !(moment_rtol > 0.0 && moment_rtol < 1.0) {
        return Err(ConfigError::new("model.moment_rtol", "must lie in (0, 1)"));
    }
    let weak_probe_threshold = m.weak_probe_threshold.unwrap_or(0.1);
    if !(weak_probe_threshold > 0.0) {
        return Err(ConfigError::new("model.weak_probe_threshold", "must be > 0"));
    }

    let a = optical_depth_prefactor(&geometry)?;
    let (readout, explicit_readout) = match &raw.readout {
        None => (ReadoutModel::optical_depth(a), false),
        Some(r) => (
            ReadoutModel {
                transduction_g: r.transduction,
                photon_transduction_nu: r.photon_transduction,
                quadrature_q: r.quadrature,
            },
            true,
        ),
    };
    readout.validate().map_err(|e| prefix("readout", e.into()))?;

    let stats = PhotonStatistics::new(raw.stats.mandel_q.unwrap_or(0.0))
        .map_err(|e| ConfigError::new("stats.mandel_q", e.to_string()))?;

    let sweep = raw.sweep.as_ref().map(|s| convert_sweep(s, &levels)).transpose()?;
    let map = raw.map.as_ref().map(|s| convert_map(s, &geometry)).transpose()?;
    let mc = raw.mc.as_ref().map(convert_mc).transpose()?;

    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| "unnamed".into()),
        gas,
        geometry,
        levels,
        response: m.response.unwrap_or(ResponseModel::Full),
        intensity: m.intensity.unwrap_or_default(),
        interval,
        moment_rtol,
        weak_probe_threshold,
        readout,
        explicit_readout,
        stats,
        sweep,
        map,
        mc,
    })
}

fn prefix(section: &str, mut e: ConfigError) -> ConfigError {
    e.key = if e.key.is_empty() {
        section.to_string()
    } else {
        format!("{section}.{}", e.key)
    };
    e
}

fn convert_sweep(s: &RawSweep, levels: &FourLevelParams) -> Result<SweepSpec, ConfigError> {
    if s.axes.len() != 1 {
        return Err(ConfigError::new(
            "sweep.axes",
            format!("a 1D sweep needs exactly one axis, got {}", s.axes.len()),
        ));
    }
    let axis = Axis::from_raw("sweep.axes[0]", &s.axes[0])?;
    if axis.variable != Variable::R {
        return Err(ConfigError::new("sweep.axes[0].variable", "1D sweeps run along \"R\""));
    }
    if axis.from < 0.0 || axis.to < 0.0 {
        return Err(ConfigError::new("sweep.axes[0]", "R must be >= 0"));
    }
    let microwave_rabi = match &s.microwave_rabi {
        None => vec![levels.omega_s_rabi],
        Some(v) if v.is_empty() => return Err(ConfigError::new("sweep.microwave_rabi", "list is empty")),
        Some(v) => v
            .iter()
            .enumerate()
            .map(|(i, r)| r.si(&format!("sweep.microwave_rabi[{i}]"), Dimension::Frequency))
            .collect::<Result<_, _>>()?,
    };
    let mandel_q = s.mandel_q.clone().unwrap_or_else(|| vec![-1.0, -0.9, -0.5, 0.0]);
    for (i, &q) in mandel_q.iter().enumerate() {
        PhotonStatistics::new(q).map_err(|e| ConfigError::new(format!("sweep.mandel_q[{i}]"), e.to_string()))?;
    }
    let boundary_bracket = s.boundary_bracket.unwrap_or([1e-8, 1e2]);
    if !(boundary_bracket[0] > 0.0 && boundary_bracket[1] > boundary_bracket[0]) {
        return Err(ConfigError::new("sweep.boundary_bracket", "needs 0 < lo < hi"));
    }
    Ok(SweepSpec {
        axis,
        microwave_rabi,
        mandel_q,
        boundary_bracket,
    })
}

fn convert_map(s: &RawMap, geometry: &BeamGeometry) -> Result<MapSpec, ConfigError> {
    if s.axes.len() != 2 {
        return Err(ConfigError::new(
            "map.axes",
            format!("a map needs exactly two axes, got {}", s.axes.len()),
        ));
    }
    let a = Axis::from_raw("map.axes[0]", &s.axes[0])?;
    let b = Axis::from_raw("map.axes[1]", &s.axes[1])?;
    let (power, waist) = match (a.variable, b.variable) {
        (Variable::PowerIn, Variable::Waist) => (a, b),
        (Variable::Waist, Variable::PowerIn) => (b, a),
        _ => {
            return Err(ConfigError::new(
                "map.axes",
                "a map runs over \"power_in\" and \"waist\"",
            ))
        }
    };
    for (key, axis) in [("power_in", &power), ("waist", &waist)] {
        if !(axis.from > 0.0 && axis.to > 0.0) {
            return Err(ConfigError::new(format!("map.axes.{key}"), "endpoints must be > 0"));
        }
    }
    Ok(MapSpec {
        power,
        waist,
        inset_waist: opt(&s.inset_waist, "map.inset_waist", Dimension::Length, geometry.waist_w0)?,
    })
}

fn convert_mc(m: &RawMc) -> Result<McSpec, ConfigError> {
    if m.trials < 2 {
        return Err(ConfigError::new("mc.trials", "need at least 2 trials"));
    }
    if !(m.n_at > 0.0 && m.n_at.is_finite()) {
        return Err(ConfigError::new("mc.n_at", "must be finite and > 0"));
    }
    let grid = match (&m.r_over_rc, &m.r) {
        (Some(a), None) => RGrid::RelativeToCritical(Axis::from_raw("mc.r_over_rc", a)?),
        (None, Some(a)) => RGrid::Absolute(Axis::from_raw("mc.r", a)?),
        _ => return Err(ConfigError::new("mc", "give exactly one of \"r_over_rc\" and \"r\"")),
    };
    let (RGrid::RelativeToCritical(axis) | RGrid::Absolute(axis)) = &grid;
    if axis.variable != Variable::R {
        return Err(ConfigError::new(
            "mc",
            "the resource-ratio grid must use variable \"R\"",
        ));
    }
    let tolerance = m.tolerance.unwrap_or(0.05);
    let confidence = m.confidence.unwrap_or(0.95);
    if !(tolerance > 0.0) {
        return Err(ConfigError::new("mc.tolerance", "must be > 0"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(ConfigError::new("mc.confidence", "must lie in (0, 1)"));
    }
    Ok(McSpec {
        seed: m.seed.unwrap_or(0),
        trials: m.trials,
        n_at: m.n_at,
        grid,
        response: m.response.unwrap_or(ResponseModel::WeakProbe),
        tolerance,
        confidence,
        agn_branch_min_rj: m.agn_branch_min_rj.unwrap_or(100.0),
        frozen_velocities: m.frozen_velocities.unwrap_or(false),
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    if text.trim().is_empty() {
        return Err(ConfigError::new("", "scenario file is empty"));
    }
    let raw: RawScenario = toml::from_str(text).map_err(|e| ConfigError::new("", format!("parse error: {e}")))?;
    convert(raw)
}

/// A loaded scenario with the bytes it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub source: String,
    pub bytes: Vec<u8>,
}

/// Loads a scenario file, or a bundled scenario when `spec` names one and
/// no such file exists.
pub fn load_scenario(spec: &str) -> Result<Loaded, ConfigError> {
    let path = Path::new(spec);
    let (source, text) = if path.exists() {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("cannot read {spec}: {e}")))?;
        (path.display().to_string(), text)
    } else if let Some((name, text)) = BUNDLED.iter().find(|(n, _)| *n == spec) {
        (format!("bundled:{name}"), text.to_string())
    } else {
        let names: Vec<_> = BUNDLED.iter().map(|(n, _)| *n).collect();
        return Err(ConfigError::new(
            "",
            format!(
                "{spec:?} is neither a file nor a bundled scenario ({})",
                names.join(", ")
            ),
        ));
    };
    let scenario = parse_scenario(&text)?;
    Ok(Loaded {
        scenario,
        source,
        bytes: text.into_bytes(),
    })
}
