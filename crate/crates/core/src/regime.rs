//! Short- and long-distance alignment regimes in SI units.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeInput {
    /// Source width in meters.
    pub source_width_l0: f64,
    /// Wavelength in meters; fills the Compton-wavelength slot for photons.
    pub wavelength: f64,
}

impl RegimeInput {
    pub fn new(source_width_l0: f64, wavelength: f64) -> Result<Self> {
        for (name, v) in [("L0", source_width_l0), ("wavelength", wavelength)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(RegimeInput {
            source_width_l0,
            wavelength,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    #[serde(rename = "T_seconds")]
    pub t_seconds: f64,
    #[serde(rename = "R_meters")]
    pub r_meters: f64,
}

/// `R = L0²·k_c` with `k_c = 2π/λ`, and `T = R/c`.
pub fn alignment_transition(input: &RegimeInput) -> Transition {
    let k_c = 2.0 * PI / input.wavelength;
    let r = input.source_width_l0 * input.source_width_l0 * k_c;
    Transition {
        t_seconds: r / SPEED_OF_LIGHT,
        r_meters: r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleAsymptotes {
    pub small_t: f64,
    pub large_t: f64,
}

/// `tan θ` for small times (`L0·m/(p·t)`) and large times (`Δp/p`).
pub fn angle_asymptotes(l0: f64, dp_sum: f64, p: f64, m: f64, t: f64) -> Result<AngleAsymptotes> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("momentum must be positive, got {p}")));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    Ok(AngleAsymptotes {
        small_t: l0 * m / (p * t),
        large_t: dp_sum / p,
    })
}

/// Parses a length such as `"2mm"`, `"351.1 nm"` or `"0.5"` (meters).
pub fn parse_length(text: &str) -> Result<f64> {
    let s = text.trim();
    let split = s
        .find(|c: char| c.is_ascii_alphabetic() || c == 'µ')
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse length {text:?}")))?;
    let scale = match unit.trim() {
        "" | "m" => 1.0,
        "cm" => 1e-2,
        "mm" => 1e-3,
        "um" | "µm" => 1e-6,
        "nm" => 1e-9,
        other => return Err(Error::Config(format!("unknown length unit {other:?} in {text:?}"))),
    };
    Ok(value * scale)
}
