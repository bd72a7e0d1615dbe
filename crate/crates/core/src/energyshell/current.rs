//! Guidance speed of the band-limited wave
//! `ψ(x, t) = ∫_{a₋≤|k|≤a₊} e^{−αk²} e^{ik·x − ik²t/2μ} d²k`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::quadrature::gauss_legendre_on;
use super::{band_edges, EnergyBand};
use crate::error::{Error, Result};
use crate::wavecore::DENSITY_FLOOR;

/// Accepted change of the speeds when both quadrature orders are doubled.
const RICHARDSON_REL_TOL: f64 = 1e-6;
const RICHARDSON_ABS_TOL: f64 = 1e-12;

#[allow(clippy::too_many_arguments)]
fn speeds(
    am: f64,
    ap: f64,
    alpha: f64,
    t: f64,
    mu: f64,
    radii: &[f64],
    n_k: usize,
    n_theta: usize,
) -> Result<Vec<f64>> {
    let (ks, wk) = gauss_legendre_on(n_k, am, ap);
    let dtheta = 2.0 * PI / n_theta as f64;
    let dirs: Vec<(f64, f64)> = (0..n_theta)
        .map(|j| {
            let th = j as f64 * dtheta;
            (th.cos(), th.sin())
        })
        .collect();
    radii
        .iter()
        .map(|&r| {
            let mut psi = Complex64::new(0.0, 0.0);
            let mut grad = [Complex64::new(0.0, 0.0); 2];
            for (&k, &w) in ks.iter().zip(&wk) {
                let weight = w * k * dtheta * (-alpha * k * k).exp();
                let disp = -k * k * t / (2.0 * mu);
                for &(c, s) in &dirs {
                    let e = Complex64::from_polar(weight, k * r * c + disp);
                    psi += e;
                    grad[0] += e * Complex64::new(0.0, k * c);
                    grad[1] += e * Complex64::new(0.0, k * s);
                }
            }
            let dens = psi.norm_sqr();
            if !(dens >= DENSITY_FLOOR) {
                return Err(Error::Node { density: dens, t });
            }
            let vx = (psi.conj() * grad[0]).im;
            let vy = (psi.conj() * grad[1]).im;
            Ok(vx.hypot(vy) / (dens * mu))
        })
        .collect()
}

/// Largest guidance speed `|Im(ψ*∇ψ)|/(μ|ψ|²)` over the points `(r, 0)`.
///
/// The annulus integral uses Gauss–Legendre nodes in `|k|` and the
/// trapezoid rule in angle; the result is accepted only if doubling both
/// orders leaves every speed unchanged within tolerance.
pub fn band_current_check(band: &EnergyBand, alpha: f64, t: f64, points: &[f64]) -> Result<f64> {
    let edges = band_edges(band)?;
    if !(alpha >= 0.0) {
        return Err(Error::domain(format!("alpha must be non-negative, got {alpha}")));
    }
    if points.is_empty() || points.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::domain("need at least one finite non-negative radius"));
    }
    let r_max = points.iter().copied().fold(0.0, f64::max);
    let n_theta = 4 * ((edges.a_plus * r_max / 2.0).ceil() as usize + 16);
    let n_k = 16;
    let (am, ap) = (edges.a_minus, edges.a_plus);
    let coarse = speeds(am, ap, alpha, t, band.mu, points, n_k, n_theta)?;
    let fine = speeds(am, ap, alpha, t, band.mu, points, 2 * n_k, 2 * n_theta)?;
    let max_fine = fine.iter().copied().fold(0.0, f64::max);
    let err = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if err > RICHARDSON_REL_TOL * max_fine + RICHARDSON_ABS_TOL {
        return Err(Error::Numeric(format!(
            "band quadrature not converged: speeds change by {err:e}"
        )));
    }
    Ok(max_fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energyshell::{bessel_j0, bessel_j1};

    // For the full disc with α = 0 and t = 0, ψ(r) = 2π a₊ J₁(a₊r)/r. Check
    // the quadrature of ψ against it through the speed-free density route.
    #[test]
    fn quadrature_reproduces_disc_transform() {
        let ap = 3.0;
        let (ks, wk) = gauss_legendre_on(16, 0.0, ap);
        let n_theta = 64;
        let dth = 2.0 * PI / n_theta as f64;
        for r in [0.3, 1.0, 2.5] {
            let mut psi = 0.0;
            for (&k, &w) in ks.iter().zip(&wk) {
                for j in 0..n_theta {
                    psi += w * k * dth * (k * r * (j as f64 * dth).cos()).cos();
                }
            }
            let exact = 2.0 * PI * ap * bessel_j1(ap * r) / r;
            assert!((psi - exact).abs() < 1e-10 * exact.abs().max(1.0));
        }
        // angular integral alone: ∫ e^{ikr cos θ} dθ = 2π J₀(kr)
        let s: f64 = (0..n_theta)
            .map(|j| (4.0 * (j as f64 * dth).cos()).cos() * dth)
            .sum();
        assert!((s - 2.0 * PI * bessel_j0(4.0)).abs() < 1e-12);
    }

    #[test]
    fn real_wave_does_not_move() {
        let band = EnergyBand::reference();
        let v = band_current_check(&band, 0.01, 0.0, &[0.25, 0.7, 1.25]).unwrap();
        assert!(v < 1e-9, "{v:e}");
    }

    #[test]
    fn finite_band_moves() {
        let band = EnergyBand::new(0.02, 0.018, 0.5).unwrap();
        let v = band_current_check(&band, 0.01, 1.0, &[0.25, 0.7, 1.25]).unwrap();
        assert!(v > 1e-6, "{v:e}");
    }

    #[test]
    fn rejects_empty_points() {
        assert!(band_current_check(&EnergyBand::reference(), 0.01, 1.0, &[]).is_err());
    }
}
