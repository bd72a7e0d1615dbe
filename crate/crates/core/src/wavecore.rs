//! Pair wavefunctions of a two-fragment decay at rest.
//!
//! Everything here is in natural units with `ħ = 1`. Two waves are provided:
//!
//! * [`PairWave::Limit`], the `δ(p₁+p₂)`-correlated wave. It depends on the
//!   separation `r₁ − r₂` only and is not normalizable; its normalization
//!   constant is fixed to 1, so only density ratios and velocities carry
//!   meaning.
//! * [`PairWave::Regularized`], where the total momentum is smeared by a
//!   Gaussian of width `σ`. It factorizes exactly into a free centre-of-mass
//!   packet times the limit wave of the separation.
//!
//! Both are closed-form free Gaussian packets, so amplitudes, phases and
//! Bohmian velocities are evaluated analytically.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub type Vec3 = Vector3<f64>;
pub type ComplexAmp = Complex64;

/// Densities below this value are treated as nodes of the wave.
pub const DENSITY_FLOOR: f64 = 1e-300;

pub fn reduced_mass(m1: f64, m2: f64) -> Result<f64> {
    check_mass("m1", m1)?;
    check_mass("m2", m2)?;
    Ok(m1 * m2 / (m1 + m2))
}

fn check_mass(name: &str, m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {m}")))
    }
}

/// Masses and correlation widths of the decaying pair.
///
/// `alpha` sets the initial separation scale (density `∝ exp(-(r₁-r₂)²/2α)`
/// at `t = 0`), `sigma` the spread of the total momentum. `sigma = 0`
/// selects the limit wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    pub m1: f64,
    pub m2: f64,
    pub alpha: f64,
    pub sigma: f64,
}

impl DecayParams {
    pub fn new(m1: f64, m2: f64, alpha: f64, sigma: f64) -> Result<Self> {
        let p = DecayParams {
            m1,
            m2,
            alpha,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_mass("m1", self.m1)?;
        check_mass("m2", self.m2)?;
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::domain(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::domain(format!(
                "sigma must be non-negative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        self.m1 * self.m2 / (self.m1 + self.m2)
    }

    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2
    }
}

/// Positions of both fragments at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub r1: Vec3,
    pub r2: Vec3,
    pub t: f64,
}

impl PairState {
    pub fn new(r1: Vec3, r2: Vec3, t: f64) -> Self {
        PairState { r1, r2, t }
    }

    pub fn separation(&self) -> Vec3 {
        self.r1 - self.r2
    }

    /// `m₁r₁ + m₂r₂`.
    pub fn collective(&self, params: &DecayParams) -> Vec3 {
        self.r1 * params.m1 + self.r2 * params.m2
    }

    pub fn center_of_mass(&self, params: &DecayParams) -> Vec3 {
        self.collective(params) / params.total_mass()
    }

    /// Rebuilds a state from centre of mass and separation.
    pub fn from_cm_separation(params: &DecayParams, cm: Vec3, sep: Vec3, t: f64) -> Self {
        let m = params.total_mass();
        PairState {
            r1: cm + sep * (params.m2 / m),
            r2: cm - sep * (params.m1 / m),
            t,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.r1.iter().all(|c| c.is_finite())
            && self.r2.iter().all(|c| c.is_finite())
    }
}

/// Free isotropic Gaussian packet `(π/β)^{3/2} exp(-x²/4β)` with
/// `β = width + i t / 2·mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreePacket {
    pub width: f64,
    pub mass: f64,
}

impl FreePacket {
    pub fn beta(&self, t: f64) -> Complex64 {
        Complex64::new(self.width, t / (2.0 * self.mass))
    }

    pub fn ln_amplitude(&self, x: &Vec3, t: f64) -> Complex64 {
        let beta = self.beta(t);
        (Complex64::from(PI) / beta).ln() * 1.5 - x.norm_squared() / (beta * 4.0)
    }

    pub fn eval(&self, x: &Vec3, t: f64) -> Complex64 {
        self.ln_amplitude(x, t).exp()
    }

    /// Gradient of the phase, `Im ∇ ln ψ`.
    pub fn phase_gradient(&self, x: &Vec3, t: f64) -> Vec3 {
        let beta = self.beta(t);
        x * (t / (4.0 * self.mass * beta.norm_sqr()))
    }

    /// Bohmian paths scale as `x(t) = x(0)·spread(t)`.
    pub fn spread(&self, t: f64) -> f64 {
        let s = t / (2.0 * self.mass * self.width);
        (1.0 + s * s).sqrt()
    }

    /// Per-component position variance of `|ψ|²`.
    pub fn position_variance(&self, t: f64) -> f64 {
        self.beta(t).norm_sqr() / self.width
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairWave {
    Limit(DecayParams),
    Regularized(DecayParams),
}

impl PairWave {
    /// Picks the variant from `params.sigma`.
    pub fn new(params: DecayParams) -> Result<Self> {
        params.validate()?;
        Ok(if params.sigma == 0.0 {
            PairWave::Limit(params)
        } else {
            PairWave::Regularized(params)
        })
    }

    pub fn params(&self) -> &DecayParams {
        match self {
            PairWave::Limit(p) | PairWave::Regularized(p) => p,
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(self, PairWave::Limit(_))
    }

    pub fn relative_packet(&self) -> FreePacket {
        let p = self.params();
        FreePacket {
            width: p.alpha,
            mass: p.mu(),
        }
    }

    pub fn center_of_mass_packet(&self) -> Option<FreePacket> {
        match self {
            PairWave::Limit(_) => None,
            PairWave::Regularized(p) => Some(FreePacket {
                width: 1.0 / p.sigma,
                mass: p.total_mass(),
            }),
        }
    }

    pub fn ln_eval(&self, state: &PairState) -> Complex64 {
        let p = self.params();
        let rel = self.relative_packet().ln_amplitude(&state.separation(), state.t);
        match self.center_of_mass_packet() {
            None => rel,
            Some(cm) => rel + cm.ln_amplitude(&state.center_of_mass(p), state.t),
        }
    }

    pub fn eval(&self, state: &PairState) -> ComplexAmp {
        self.ln_eval(state).exp()
    }

    pub fn density(&self, state: &PairState) -> f64 {
        (2.0 * self.ln_eval(state).re).exp()
    }

    /// Bohmian velocities `(v₁, v₂)` of both fragments.
    pub fn velocity(&self, state: &PairState) -> Result<(Vec3, Vec3)> {
        let p = self.params();
        let ln_density = 2.0 * self.ln_eval(state).re;
        if !(ln_density >= DENSITY_FLOOR.ln()) {
            return Err(Error::Node {
                density: ln_density.exp(),
                t: state.t,
            });
        }
        let g_rel = self
            .relative_packet()
            .phase_gradient(&state.separation(), state.t);
        let mut v1 = g_rel / p.m1;
        let mut v2 = -g_rel / p.m2;
        if let Some(cm) = self.center_of_mass_packet() {
            // ∇_{r_i} = (m_i/M) ∇_R ± ∇_d, so the CM part enters both as ∇_R S / M
            let v_cm = cm.phase_gradient(&state.center_of_mass(p), state.t) / p.total_mass();
            v1 += v_cm;
            v2 += v_cm;
        }
        Ok((v1, v2))
    }
}

pub fn eval_pair_wave(wave: &PairWave, state: &PairState) -> ComplexAmp {
    wave.eval(state)
}

pub fn pair_velocity(wave: &PairWave, state: &PairState) -> Result<(Vec3, Vec3)> {
    wave.velocity(state)
}

/// Location of the density maximum over a box of collective coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakReport {
    /// Collective coordinate `m₁r₁ + m₂r₂` at the argmax.
    pub argmax: [f64; 3],
    /// `|m₁r₁ + m₂r₂|` at the argmax.
    pub deviation: f64,
    /// Grid spacing of the scan.
    pub cell: f64,
    /// True when the density is flat over the whole box.
    pub degenerate: bool,
    /// Standard deviation of the collective coordinate per component,
    /// estimated from the gridded density; `None` when degenerate.
    pub width: Option<f64>,
}

/// Scans `|ψ|²` over a cubic grid of the collective coordinate at a fixed
/// separation `r₁ − r₂` and locates its maximum.
///
/// Ties (within 1e-12 in log-density) resolve to the grid point closest to
/// the origin, which is also how a flat density is reported.
pub fn density_peak_check(
    wave: &PairWave,
    t: f64,
    separation: Vec3,
    grid: &GridSpec,
) -> Result<PeakReport> {
    grid.validate()?;
    let p = wave.params();
    let m = p.total_mass();
    let axis = grid.points();

    let mut samples = Vec::with_capacity(axis.len().pow(3));
    for &x in &axis {
        for &y in &axis {
            for &z in &axis {
                let c = Vec3::new(x, y, z);
                let state = PairState::from_cm_separation(p, c / m, separation, t);
                samples.push((c, 2.0 * wave.ln_eval(&state).re));
            }
        }
    }

    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, l)| {
            (lo.min(*l), hi.max(*l))
        });
    let tol = 1e-12 * hi.abs().max(1.0);
    let degenerate = hi - lo <= tol;

    let argmax = samples
        .iter()
        .filter(|(_, l)| hi - l <= tol)
        .map(|(c, _)| *c)
        .min_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))
        .ok_or_else(|| Error::Numeric("density scan produced no finite values".into()))?;

    let width = if degenerate {
        None
    } else {
        let (mut w_sum, mut m2) = (0.0, 0.0);
        for (c, l) in &samples {
            let w = (l - hi).exp();
            w_sum += w;
            m2 += w * c.norm_squared();
        }
        Some((m2 / w_sum / 3.0).sqrt())
    };

    Ok(PeakReport {
        argmax: [argmax.x, argmax.y, argmax.z],
        deviation: argmax.norm(),
        cell: grid.spacing(),
        degenerate,
        width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_limit() -> PairWave {
        PairWave::new(DecayParams::new(1.0, 1.0, 1.0, 0.0).unwrap()).unwrap()
    }

    fn random_vec(rng: &mut impl Rng, scale: f64) -> Vec3 {
        Vec3::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }

    #[test]
    fn reduced_mass_examples() {
        assert_eq!(reduced_mass(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(reduced_mass(2.0, 2.0).unwrap(), 1.0);
        assert!((reduced_mass(1.0, 3.0).unwrap() - 1.0 / (1.0 + 1.0 / 3.0)).abs() < 1e-15);
        assert!(matches!(reduced_mass(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(reduced_mass(1.0, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn reduced_mass_identity_holds() {
        let p = DecayParams::new(0.7, 2.9, 1.0, 0.0).unwrap();
        let mu = p.mu();
        assert!((1.0 / mu - (1.0 / p.m1 + 1.0 / p.m2)).abs() < 4.0 * f64::EPSILON / mu);
    }

    #[test]
    fn params_validation() {
        assert!(DecayParams::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(DecayParams::new(1.0, 1.0, 1.0, -1e-3).is_err());
        assert!(DecayParams::new(1.0, 1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn limit_peak_at_coincidence() {
        let w = unit_limit();
        let r = Vec3::new(0.3, -1.0, 2.0);
        let amp = w.eval(&PairState::new(r, r, 0.0));
        assert!((amp.norm() - PI.powf(1.5)).abs() < 1e-12);
        assert!(amp.im.abs() < 1e-12);
        let off = w.eval(&PairState::new(r + Vec3::new(0.1, 0.0, 0.0), r, 0.0));
        assert!(off.norm() < amp.norm());
    }

    #[test]
    fn limit_density_e_fold_at_two_hbar_alpha() {
        let alpha = 0.37;
        let w = PairWave::new(DecayParams::new(1.0, 2.0, alpha, 0.0).unwrap()).unwrap();
        let d = (2.0 * alpha).sqrt();
        let peak = w.density(&PairState::new(Vec3::zeros(), Vec3::zeros(), 0.0));
        let at = w.density(&PairState::new(Vec3::new(0.0, d, 0.0), Vec3::zeros(), 0.0));
        assert!((at / peak - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn limit_depends_on_separation_only() {
        let w = PairWave::new(DecayParams::new(1.0, 3.0, 0.8, 0.0).unwrap()).unwrap();
        let d = Vec3::new(0.4, 0.1, -0.2);
        let shift = Vec3::new(5.0, -3.0, 1.0);
        let a = w.eval(&PairState::new(d, Vec3::zeros(), 1.3));
        let b = w.eval(&PairState::new(d + shift, shift, 1.3));
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn limit_velocity_vanishes_at_t0() {
        let w = unit_limit();
        let (v1, v2) = w
            .velocity(&PairState::new(Vec3::new(1.0, 2.0, 0.0), Vec3::zeros(), 0.0))
            .unwrap();
        assert_eq!(v1.norm(), 0.0);
        assert_eq!(v2.norm(), 0.0);
    }

    // Finite-difference oracle: v = Im(∂ψ/ψ)/m with central differences, h = 1e-5.
    fn fd_velocity(w: &PairWave, s: &PairState) -> (Vec3, Vec3) {
        let h = 1e-5;
        let psi = w.eval(s);
        let p = w.params();
        let mut v1 = Vec3::zeros();
        let mut v2 = Vec3::zeros();
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            let d1 = (w.eval(&PairState::new(s.r1 + e, s.r2, s.t))
                - w.eval(&PairState::new(s.r1 - e, s.r2, s.t)))
                / (2.0 * h);
            let d2 = (w.eval(&PairState::new(s.r1, s.r2 + e, s.t))
                - w.eval(&PairState::new(s.r1, s.r2 - e, s.t)))
                / (2.0 * h);
            v1[k] = (d1 / psi).im / p.m1;
            v2[k] = (d2 / psi).im / p.m2;
        }
        (v1, v2)
    }

    #[test]
    fn limit_velocity_example_matches_fd_and_formula() {
        let w = unit_limit();
        let s = PairState::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros(), 1.0);
        let (v1, v2) = w.velocity(&s).unwrap();
        assert!((v1 - Vec3::new(0.25, 0.0, 0.0)).norm() < 1e-14);
        assert!((v2 + Vec3::new(0.25, 0.0, 0.0)).norm() < 1e-14);
        let (f1, f2) = fd_velocity(&w, &s);
        assert!((f1 - v1).norm() < 1e-8);
        assert!((f2 - v2).norm() < 1e-8);
    }

    #[test]
    fn analytic_velocity_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..1000 {
            let m1 = rng.random_range(0.5..3.0);
            let m2 = rng.random_range(0.5..3.0);
            let alpha = rng.random_range(0.3..2.0);
            let sigma = if i % 2 == 0 { 0.0 } else { rng.random_range(0.2..2.0) };
            let w = PairWave::new(DecayParams::new(m1, m2, alpha, sigma).unwrap()).unwrap();
            let s = PairState::new(
                random_vec(&mut rng, 1.5),
                random_vec(&mut rng, 1.5),
                rng.random_range(0.2..4.0),
            );
            let (v1, v2) = w.velocity(&s).unwrap();
            let (f1, f2) = fd_velocity(&w, &s);
            let scale = (v1.norm_squared() + v2.norm_squared()).sqrt();
            let err = ((f1 - v1).norm_squared() + (f2 - v2).norm_squared()).sqrt();
            assert!(err < 1e-6 * scale, "case {i}: err {err:e} scale {scale:e}");
        }
    }

    #[test]
    fn limit_momenta_are_opposite() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p = DecayParams::new(
                rng.random_range(0.1..10.0),
                rng.random_range(0.1..10.0),
                rng.random_range(0.1..5.0),
                0.0,
            )
            .unwrap();
            let w = PairWave::new(p).unwrap();
            let s = PairState::new(
                random_vec(&mut rng, 3.0),
                random_vec(&mut rng, 3.0),
                rng.random_range(0.0..20.0),
            );
            let (v1, v2) = w.velocity(&s).unwrap();
            assert!((v1 * p.m1 + v2 * p.m2).norm() < 1e-12);
        }
    }

    #[test]
    fn node_error_below_density_floor() {
        let w = unit_limit();
        let s = PairState::new(Vec3::new(100.0, 0.0, 0.0), Vec3::zeros(), 0.0);
        assert!(matches!(w.velocity(&s), Err(Error::Node { .. })));
    }

    #[test]
    fn log_density_linear_in_squared_separation() {
        let alpha = 0.6;
        let w = PairWave::new(DecayParams::new(1.0, 2.0, alpha, 0.0).unwrap()).unwrap();
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|k| {
                let d = Vec3::new(0.2 * k as f64, -0.05 * k as f64, 0.1);
                let l = w.density(&PairState::new(d, Vec3::zeros(), 0.0)).ln();
                (d.norm_squared(), l)
            })
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / n, sy / n);
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let resid = pts
            .iter()
            .map(|p| (p.1 - (my + slope * (p.0 - mx))).abs())
            .fold(0.0, f64::max);
        assert!((slope + 1.0 / (2.0 * alpha)).abs() < 1e-12);
        assert!(resid < 1e-9);
    }

    // Trapezoid quadrature of the momentum integral for one Cartesian
    // component, F = exp(-(p1+p2)²/σ - α q²), q = (m2 p1 - m1 p2)/M.
    fn quadrature_component(p: &DecayParams, x1: f64, x2: f64, t: f64) -> Complex64 {
        let m = p.total_mass();
        let lim = 7.0 * (p.sigma.sqrt() + 1.0 / p.alpha.sqrt());
        let n = 1201;
        let h = 2.0 * lim / (n - 1) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let p1 = -lim + i as f64 * h;
            for j in 0..n {
                let p2 = -lim + j as f64 * h;
                let big_p = p1 + p2;
                let q = (p.m2 * p1 - p.m1 * p2) / m;
                let re = -big_p * big_p / p.sigma - p.alpha * q * q;
                let im = p1 * x1 + p2 * x2 - t * (p1 * p1 / (2.0 * p.m1) + p2 * p2 / (2.0 * p.m2));
                acc += Complex64::new(re, im).exp();
            }
        }
        acc * h * h
    }

    #[test]
    fn regularized_closed_form_matches_momentum_quadrature() {
        let p = DecayParams::new(1.0, 2.0, 0.8, 1.3).unwrap();
        let w = PairWave::new(p).unwrap();
        for (r1, r2, t) in [
            (Vec3::new(0.3, -0.2, 0.5), Vec3::new(-0.4, 0.1, 0.0), 0.0),
            (Vec3::new(1.0, 0.4, -0.3), Vec3::new(0.2, -0.6, 0.7), 0.7),
        ] {
            let oracle: Complex64 = (0..3)
                .map(|k| quadrature_component(&p, r1[k], r2[k], t))
                .product();
            let closed = w.eval(&PairState::new(r1, r2, t));
            assert!(
                (oracle - closed).norm() < 1e-8 * closed.norm(),
                "{oracle} vs {closed}"
            );
        }
    }

    // Centre-of-mass factor by 1D quadrature of ∫ exp(-P²/σ + iPR - iP²t/2M) dP.
    fn cm_factor_quadrature(sigma: f64, total: f64, r: &Vec3, t: f64) -> Complex64 {
        let lim = 10.0 * sigma.sqrt();
        let n = 4001;
        let h = 2.0 * lim / (n - 1) as f64;
        (0..3)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let pp = -lim + i as f64 * h;
                    acc += Complex64::new(-pp * pp / sigma, pp * r[k] - pp * pp * t / (2.0 * total))
                        .exp();
                }
                acc * h
            })
            .product()
    }

    #[test]
    fn regularized_converges_to_limit_times_cm_factor() {
        let r1 = Vec3::new(0.5, 0.2, -0.1);
        let r2 = Vec3::new(-0.3, 0.4, 0.2);
        let t = 0.9;
        for sigma in [1.0, 0.1, 0.01] {
            let p = DecayParams::new(1.0, 1.5, 0.7, sigma).unwrap();
            let reg = PairWave::new(p).unwrap().eval(&PairState::new(r1, r2, t));
            let lim = PairWave::new(DecayParams { sigma: 0.0, ..p })
                .unwrap()
                .eval(&PairState::new(r1, r2, t));
            let cm = (r1 * p.m1 + r2 * p.m2) / p.total_mass();
            let expected = lim * cm_factor_quadrature(sigma, p.total_mass(), &cm, t);
            assert!((reg - expected).norm() < 1e-3 * expected.norm(), "sigma {sigma}");
        }
    }

    #[test]
    fn regularized_cm_width_scales_with_inverse_root_sigma() {
        // |ψ| along r₁+r₂ at fixed separation is Gaussian with 1/e half-width 2/√σ
        // in the centre of mass (amplitude exp(-R²σ/4) at t = 0).
        for sigma in [0.25, 1.0, 4.0] {
            let p = DecayParams::new(1.0, 1.0, 0.5, sigma).unwrap();
            let w = PairWave::new(p).unwrap();
            let sep = Vec3::new(0.2, 0.0, 0.0);
            let at = |cm: f64| {
                w.eval(&PairState::from_cm_separation(&p, Vec3::new(cm, 0.0, 0.0), sep, 0.0))
                    .norm()
            };
            let ratio = at(2.0 / sigma.sqrt()) / at(0.0);
            assert!((ratio - (-1.0f64).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn peak_check_limit_is_degenerate_at_origin() {
        let w = unit_limit();
        for t in [0.0, 3.0] {
            let r = density_peak_check(&w, t, Vec3::new(0.5, 0.0, 0.0), &GridSpec::new(9, 4.0).unwrap())
                .unwrap();
            assert!(r.degenerate);
            assert_eq!(r.deviation, 0.0);
            assert!(r.width.is_none());
        }
    }

    #[test]
    fn peak_check_regularized_at_zero_with_growing_width() {
        let p = DecayParams::new(1.0, 1.0, 0.5, 1.0).unwrap();
        let w = PairWave::new(p).unwrap();
        let m = p.total_mass();
        for t in [0.0, 10.0] {
            let var = m * m / p.sigma + p.sigma * t * t / 4.0;
            let grid = GridSpec::new(41, 6.0 * var.sqrt()).unwrap();
            let r = density_peak_check(&w, t, Vec3::new(0.3, -0.1, 0.0), &grid).unwrap();
            assert!(!r.degenerate);
            assert!(r.deviation <= r.cell);
            let width = r.width.unwrap();
            assert!((width - var.sqrt()).abs() < 1e-3 * var.sqrt(), "t {t}: {width}");
        }
    }

    #[test]
    fn peak_check_rejects_empty_grid() {
        let grid = GridSpec {
            n: 0,
            half_width: 1.0,
        };
        assert!(matches!(
            density_peak_check(&unit_limit(), 0.0, Vec3::zeros(), &grid),
            Err(Error::Domain(_))
        ));
    }
}
