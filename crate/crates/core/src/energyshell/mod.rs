//! Pair waves restricted to an energy shell, in two dimensions.
//!
//! Lengths are in units of the Compton wavelength `λ_c`, band radii in
//! `1/λ_c`. The band `E₋ ≤ p²/2μ ≤ E₊` is an annulus in momentum space whose
//! Fourier transform is `g(x) ∝ [a₊J₁(a₊x) − a₋J₁(a₋x)]/x`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod bessel;
pub mod convolution;
pub mod current;
pub mod quadrature;

pub use bessel::{bessel_j0, bessel_j1, bessel_jn};
pub use convolution::{energy_band_convolution, ConvolutionReport};
pub use current::band_current_check;

/// Energies in units of `mc²`, reduced mass in units of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBand {
    pub e_plus: f64,
    pub e_minus: f64,
    pub mu: f64,
    /// Length unit of the profiles; radii are reported per `lambda_c`.
    pub lambda_c: f64,
}

impl EnergyBand {
    pub fn new(e_plus: f64, e_minus: f64, mu: f64) -> Result<Self> {
        let band = EnergyBand {
            e_plus,
            e_minus,
            mu,
            lambda_c: 1.0,
        };
        band.validate()?;
        Ok(band)
    }

    /// `E₊ = 0.02 mc²`, `E₋ = 0.999 E₊`, `2μ = m`.
    pub fn reference() -> Self {
        EnergyBand {
            e_plus: 0.02,
            e_minus: 0.999 * 0.02,
            mu: 0.5,
            lambda_c: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_minus >= 0.0 && self.e_minus < self.e_plus && self.e_plus.is_finite()) {
            return Err(Error::domain(format!(
                "band needs 0 <= E- < E+, got E- = {}, E+ = {}",
                self.e_minus, self.e_plus
            )));
        }
        if !(self.mu > 0.0) || !(self.lambda_c > 0.0) {
            return Err(Error::domain("band needs positive mu and lambda_c"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEdges {
    pub a_plus: f64,
    pub a_minus: f64,
}

/// `a = 2π·sqrt(2μE)/ħ` in units of `1/λ_c`, using `mc/ħ = 2π/λ_c`.
pub fn band_radius(mu: f64, energy: f64) -> f64 {
    4.0 * PI * PI * (2.0 * mu * energy).sqrt()
}

pub fn band_edges(band: &EnergyBand) -> Result<BandEdges> {
    band.validate()?;
    Ok(BandEdges {
        a_plus: band_radius(band.mu, band.e_plus),
        a_minus: band_radius(band.mu, band.e_minus),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexProfile {
    pub xs: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl ComplexProfile {
    pub fn modulus(&self) -> RadialProfile {
        RadialProfile {
            xs: self.xs.clone(),
            values: self.values.iter().map(|v| v.norm()).collect(),
        }
    }
}

fn check_radii(xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::domain("radii must be finite and non-negative"));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("radii must be strictly increasing"));
    }
    Ok(())
}

/// `g(x) = [a₊J₁(a₊x) − a₋J₁(a₋x)]/x`, with `(a₊² − a₋²)/2` at the origin.
pub fn g_value(edges: &BandEdges, x: f64) -> f64 {
    let (ap, am) = (edges.a_plus, edges.a_minus);
    if x.abs() < 1e-8 / ap {
        // next term of the series is O(a⁴x²)
        return 0.5 * (ap * ap - am * am);
    }
    (ap * bessel_j1(ap * x) - am * bessel_j1(am * x)) / x
}

pub fn g_profile(band: &EnergyBand, xs: &[f64]) -> Result<RadialProfile> {
    check_radii(xs)?;
    let edges = band_edges(band)?;
    Ok(RadialProfile {
        xs: xs.to_vec(),
        values: xs.iter().map(|&x| g_value(&edges, x)).collect(),
    })
}

/// `(π/(α + it/2μ))^{3/2}·exp(−x²/4(α + it/2μ))`.
pub fn h_value(alpha: f64, t: f64, mu: f64, x: f64) -> Complex64 {
    let beta = Complex64::new(alpha, t / (2.0 * mu));
    ((Complex64::from(PI) / beta).ln() * 1.5 - x * x / (beta * 4.0)).exp()
}

pub fn h_profile(alpha: f64, t: f64, mu: f64, xs: &[f64]) -> Result<ComplexProfile> {
    if !(alpha > 0.0) || !(mu > 0.0) {
        return Err(Error::domain("h needs alpha > 0 and mu > 0"));
    }
    check_radii(xs)?;
    Ok(ComplexProfile {
        xs: xs.to_vec(),
        values: xs.iter().map(|&x| h_value(alpha, t, mu, x)).collect(),
    })
}

/// Width parameter whose `t = 0` density `|h|² ∝ exp(−x²/2α)` has the given
/// full width at half maximum.
pub fn alpha_for_fwhm(fwhm: f64) -> f64 {
    fwhm * fwhm / (8.0 * 2f64.ln())
}

/// Full width at half maximum of a profile peaked at the origin, by linear
/// interpolation of the first downward crossing of half the peak.
pub fn profile_fwhm(p: &RadialProfile) -> Option<f64> {
    let peak = *p.values.first()?;
    let half = 0.5 * peak;
    p.xs.windows(2)
        .zip(p.values.windows(2))
        .find(|(_, v)| v[0] >= half && v[1] < half)
        .map(|(x, v)| 2.0 * (x[0] + (x[1] - x[0]) * (v[0] - half) / (v[0] - v[1])))
}

/// Fraction of `∫ f(x)·weight(x) dx` over the sampled range that lies within
/// `x ≤ cutoff` (trapezoid rule).
pub fn cumulative_fraction(xs: &[f64], f: &[f64], cutoff: f64, weight: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    let mut inner = 0.0;
    for i in 1..xs.len() {
        let seg = 0.5 * (xs[i] - xs[i - 1]) * (f[i] * weight(xs[i]) + f[i - 1] * weight(xs[i - 1]));
        total += seg;
        if xs[i] <= cutoff {
            inner += seg;
        }
    }
    inner / total
}
