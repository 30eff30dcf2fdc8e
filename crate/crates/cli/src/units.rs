//! Unit-suffixed quantities such as `"120 uW"` or `"4.89e10 cm^-3"`, normalized to SI.

use std::f64::consts::PI;

use agn_core::constants::{ATOMIC_MASS_UNIT, BOHR_RADIUS, ELEMENTARY_CHARGE};

use crate::scenario::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Power,
    Length,
    Density,
    Temperature,
    Mass,
    /// Angular frequency; cyclic units (Hz, MHz, ...) are multiplied by 2π.
    Frequency,
    DipoleMoment,
    Time,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        const TWO_PI: f64 = 2.0 * PI;
        match self {
            Dimension::Dimensionless => &[("", 1.0)],
            Dimension::Power => &[
                ("W", 1.0),
                ("mW", 1e-3),
                ("uW", 1e-6),
                ("µW", 1e-6),
                ("μW", 1e-6),
                ("nW", 1e-9),
            ],
            Dimension::Length => &[
                ("m", 1.0),
                ("cm", 1e-2),
                ("mm", 1e-3),
                ("um", 1e-6),
                ("µm", 1e-6),
                ("nm", 1e-9),
            ],
            Dimension::Density => &[("m^-3", 1.0), ("cm^-3", 1e6)],
            Dimension::Temperature => &[("K", 1.0)],
            Dimension::Mass => &[("kg", 1.0), ("u", ATOMIC_MASS_UNIT), ("Da", ATOMIC_MASS_UNIT)],
            Dimension::Frequency => &[
                ("rad/s", 1.0),
                ("Hz", TWO_PI),
                ("kHz", TWO_PI * 1e3),
                ("MHz", TWO_PI * 1e6),
                ("GHz", TWO_PI * 1e9),
            ],
            Dimension::DipoleMoment => &[
                ("C*m", 1.0),
                ("C m", 1.0),
                ("ea0", ELEMENTARY_CHARGE * BOHR_RADIUS),
                ("e*a0", ELEMENTARY_CHARGE * BOHR_RADIUS),
            ],
            Dimension::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6)],
        }
    }

    fn accepted(self) -> String {
        self.units()
            .iter()
            .map(|(u, _)| format!("\"{u}\""))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Parses `"<number> <unit>"`. Dimensionless quantities take a bare number.
pub fn parse_quantity(key: &str, text: &str, dim: Dimension) -> Result<f64, ConfigError> {
    let text = text.trim();
    let (number, unit) = match text.split_once(char::is_whitespace) {
        Some((n, u)) => (n, u.trim()),
        None => (text, ""),
    };
    let value: f64 = number
        .parse()
        .map_err(|_| ConfigError::new(key, format!("cannot read a number from {text:?}")))?;
    let factor = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| *f)
        .ok_or_else(|| {
            if unit.is_empty() {
                ConfigError::new(key, format!("{text:?} needs a unit, one of {}", dim.accepted()))
            } else {
                ConfigError::new(
                    key,
                    format!("unit {unit:?} is not a {dim:?} unit; use one of {}", dim.accepted()),
                )
            }
        })?;
    let si = value * factor;
    if !si.is_finite() {
        return Err(ConfigError::new(key, format!("{text:?} is not finite")));
    }
    Ok(si)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normalizes_to_si() {
        assert_relative_eq!(
            parse_quantity("p", "120 uW", Dimension::Power).unwrap(),
            1.2e-4,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            parse_quantity("n", "4.89e10 cm^-3", Dimension::Density).unwrap(),
            4.89e16,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            parse_quantity("w", "0.85 mm", Dimension::Length).unwrap(),
            8.5e-4,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            parse_quantity("o", "7.9 MHz", Dimension::Frequency).unwrap(),
            2.0 * PI * 7.9e6,
            max_relative = 1e-15
        );
        assert_eq!(parse_quantity("o", "1e6 rad/s", Dimension::Frequency).unwrap(), 1e6);
        assert_eq!(parse_quantity("r", "0.72", Dimension::Dimensionless).unwrap(), 0.72);
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse_quantity("geometry.power_in", "120 mm", Dimension::Power).unwrap_err();
        assert!(e.to_string().contains("geometry.power_in"));
        assert!(e.to_string().contains("\"mm\""));
        let e = parse_quantity("gas.temperature", "298", Dimension::Temperature).unwrap_err();
        assert!(e.to_string().contains("needs a unit"));
        assert!(parse_quantity("x", "fast K", Dimension::Temperature).is_err());
    }
}
