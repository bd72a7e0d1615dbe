//! Quantum-equilibrium ensembles of the regularized pair wave.
//!
//! Positions are drawn from `|ψ(·,0)|²` and propagated with the exact scaling
//! of the two free packets: the centre of mass spreads by
//! `sqrt(1 + (σt/2M)²)` and the separation by `sqrt(1 + (t/2μα)²)`.
//! Momenta are drawn from `|F|²` with `F = exp(-(p₁+p₂)²/σ - αq²)`,
//! `q = (m₂p₁ - m₁p₂)/M`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Moments;
use crate::trajectories::integrate_pair;
use crate::wavecore::{DecayParams, PairState, PairWave, Vec3};

const POSITION_STREAM: u64 = 0;
const MOMENTUM_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub seed: u64,
    pub params: DecayParams,
}

impl EnsembleSpec {
    pub fn new(n: usize, seed: u64, params: DecayParams) -> Result<Self> {
        let spec = EnsembleSpec { n, seed, params };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("ensemble needs at least one sample"));
        }
        validate_regularized(&self.params)
    }
}

pub(crate) fn validate_regularized(params: &DecayParams) -> Result<()> {
    params.validate()?;
    if params.sigma == 0.0 {
        return Err(Error::UnsupportedVariant(
            "the limit wave is not normalizable; sampling needs sigma > 0".into(),
        ));
    }
    Ok(())
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(var: f64) -> Normal<f64> {
    Normal::new(0.0, var.sqrt()).expect("variance is finite and non-negative")
}

fn normal_vec(dist: &Normal<f64>, rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(dist.sample(rng), dist.sample(rng), dist.sample(rng))
}

/// Initial positions from `|ψ(·,0)|²`.
pub fn sample_equilibrium(spec: &EnsembleSpec) -> Result<Vec<PairState>> {
    spec.validate()?;
    let p = &spec.params;
    let mut rng = rng_for(spec.seed, POSITION_STREAM);
    let cm = normal(1.0 / p.sigma);
    let rel = normal(p.alpha);
    Ok((0..spec.n)
        .map(|_| {
            let r = normal_vec(&cm, &mut rng);
            let d = normal_vec(&rel, &mut rng);
            PairState::from_cm_separation(p, r, d, 0.0)
        })
        .collect())
}

/// Momentum pairs `(p₁, p₂)` from `|F|²`.
pub fn sample_momenta(spec: &EnsembleSpec) -> Result<Vec<(Vec3, Vec3)>> {
    spec.validate()?;
    let p = &spec.params;
    let m = p.total_mass();
    let mut rng = rng_for(spec.seed, MOMENTUM_STREAM);
    let total = normal(p.sigma / 4.0);
    let relative = normal(1.0 / (4.0 * p.alpha));
    Ok((0..spec.n)
        .map(|_| {
            let big_p = normal_vec(&total, &mut rng);
            let q = normal_vec(&relative, &mut rng);
            (big_p * (p.m1 / m) + q, big_p * (p.m2 / m) - q)
        })
        .collect())
}

pub fn cm_spread(params: &DecayParams, t: f64) -> f64 {
    let s = params.sigma * t / (2.0 * params.total_mass());
    (1.0 + s * s).sqrt()
}

pub fn relative_spread(params: &DecayParams, t: f64) -> f64 {
    let s = t / (2.0 * params.mu() * params.alpha);
    (1.0 + s * s).sqrt()
}

/// Bohmian position at time `t` of the trajectory starting at `initial`
/// (`initial.t` must be 0).
pub fn propagate(params: &DecayParams, initial: &PairState, t: f64) -> PairState {
    let cm = initial.center_of_mass(params) * cm_spread(params, t);
    let d = initial.separation() * relative_spread(params, t);
    PairState::from_cm_separation(params, cm, d, t)
}

/// `Δ(m₁r₁ⱼ + m₂r₂ⱼ)²(t) = M²/σ + (σ/4)t²`.
pub fn analytic_collective_variance(params: &DecayParams, t: f64) -> f64 {
    let m = params.total_mass();
    m * m / params.sigma + params.sigma / 4.0 * t * t
}

/// `Δ(p₁ⱼ + p₂ⱼ)² = σ/4`.
pub fn analytic_momentum_sum_variance(params: &DecayParams) -> f64 {
    params.sigma / 4.0
}

/// `2t/m`, the standard quantum limit on `Δ(r₁ⱼ+r₂ⱼ)²` for equal masses `m`.
pub fn standard_quantum_limit(m: f64, t: f64) -> f64 {
    2.0 * t / m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceReport {
    pub t: f64,
    pub analytic: f64,
    pub empirical: f64,
    #[serde(rename = "se")]
    pub std_error: f64,
}

/// Samples drawn once and reused across times.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub spec: EnsembleSpec,
    pub positions: Vec<PairState>,
    pub momenta: Vec<(Vec3, Vec3)>,
}

fn components(vs: impl Iterator<Item = Vec3>) -> impl Iterator<Item = f64> {
    vs.flat_map(|v| [v.x, v.y, v.z])
}

impl Ensemble {
    pub fn sample(spec: &EnsembleSpec) -> Result<Self> {
        Ok(Ensemble {
            spec: *spec,
            positions: sample_equilibrium(spec)?,
            momenta: sample_momenta(spec)?,
        })
    }

    pub fn params(&self) -> &DecayParams {
        &self.spec.params
    }

    pub fn at(&self, t: f64) -> impl Iterator<Item = PairState> + '_ {
        self.positions
            .iter()
            .map(move |s| propagate(&self.spec.params, s, t))
    }

    /// Per-component moments of `m₁r₁ + m₂r₂` at `t`, pooled over axes.
    pub fn collective_moments(&self, t: f64) -> Moments {
        let p = self.spec.params;
        Moments::of(components(self.at(t).map(|s| s.collective(&p))))
    }

    /// Per-component moments of `r₁ + r₂` at `t`.
    pub fn position_sum_moments(&self, t: f64) -> Moments {
        Moments::of(components(self.at(t).map(|s| s.r1 + s.r2)))
    }

    pub fn momentum_sum_moments(&self) -> Moments {
        Moments::of(components(self.momenta.iter().map(|(a, b)| a + b)))
    }

    pub fn collective_variance(&self, t: f64) -> VarianceReport {
        let m = self.collective_moments(t);
        VarianceReport {
            t,
            analytic: analytic_collective_variance(self.params(), t),
            empirical: m.var,
            std_error: m.var_se(),
        }
    }

    /// Largest relative deviation between the analytic propagation and RK4
    /// integration of the guidance equation over the first `count` samples.
    pub fn spot_check(&self, t: f64, dt: f64, count: usize) -> Result<f64> {
        let wave = PairWave::Regularized(self.spec.params);
        let mut worst: f64 = 0.0;
        for s in self.positions.iter().take(count) {
            let exact = propagate(&self.spec.params, s, t);
            let num = *integrate_pair(&wave, s, t, dt)?
                .last()
                .ok_or_else(|| Error::Numeric("empty trajectory".into()))?;
            let scale = exact.r1.norm().max(exact.r2.norm()).max(1e-12);
            let err = (num.r1 - exact.r1).norm().max((num.r2 - exact.r2).norm());
            worst = worst.max(err / scale);
        }
        Ok(worst)
    }
}

pub fn collective_variance(spec: &EnsembleSpec, t: f64) -> Result<VarianceReport> {
    Ok(Ensemble::sample(spec)?.collective_variance(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeisenbergReport {
    /// Ratio from the closed-form Gaussian moments.
    pub analytic: f64,
    pub monte_carlo: f64,
    pub std_error: f64,
}

/// `Δ(p₁ⱼ+p₂ⱼ)·Δ(m₁r₁ⱼ+m₂r₂ⱼ)(0) / (M/2)`.
pub fn heisenberg_product(spec: &EnsembleSpec) -> Result<HeisenbergReport> {
    let ens = Ensemble::sample(spec)?;
    let p = ens.params();
    let bound = p.total_mass() / 2.0;
    let analytic = (analytic_momentum_sum_variance(p) * analytic_collective_variance(p, 0.0))
        .sqrt()
        / bound;
    let mp = ens.momentum_sum_moments();
    let mc = ens.collective_moments(0.0);
    let monte_carlo = mp.std_dev() * mc.std_dev() / bound;
    let rel = mp.std_dev_rel_se().hypot(mc.std_dev_rel_se());
    Ok(HeisenbergReport {
        analytic,
        monte_carlo,
        std_error: monte_carlo * rel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub axis: Vec3,
    /// Half opening angle in radians.
    pub half_angle: f64,
}

impl Cone {
    pub fn contains(&self, v: &Vec3) -> bool {
        if self.half_angle >= PI {
            return true;
        }
        let n = v.norm() * self.axis.norm();
        n > 0.0 && v.dot(&self.axis) >= n * self.half_angle.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeReport {
    pub position_fraction: f64,
    pub momentum_fraction: f64,
    /// Combined standard error of the difference of the two fractions.
    pub std_error: f64,
}

pub fn cone_probability_check(spec: &EnsembleSpec, cone: &Cone, t: f64) -> Result<ConeReport> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("cone check needs t > 0, got {t}")));
    }
    if !(cone.half_angle > 0.0 && cone.half_angle <= PI) || cone.axis.norm() == 0.0 {
        return Err(Error::domain(
            "cone needs a nonzero axis and half-angle in (0, π]",
        ));
    }
    let ens = Ensemble::sample(spec)?;
    let p = *ens.params();
    let n = spec.n as f64;
    let pos = ens
        .at(t)
        .filter(|s| cone.contains(&(s.r1 - s.center_of_mass(&p))))
        .count() as f64
        / n;
    let mom = ens.momenta.iter().filter(|(p1, _)| cone.contains(p1)).count() as f64 / n;
    let se = |f: f64| f * (1.0 - f) / n;
    Ok(ConeReport {
        position_fraction: pos,
        momentum_fraction: mom,
        std_error: (se(pos) + se(mom)).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularReport {
    pub tan_theta_estimate: f64,
    pub small_t_asymptote: f64,
    pub large_t_asymptote: f64,
}

/// Angular spread of the pair axis around perfect back-to-back alignment,
/// for equal masses.
pub fn angular_deviation(spec: &EnsembleSpec, t: f64) -> Result<AngularReport> {
    if !(t > 0.0) {
        return Err(Error::domain(format!(
            "angular deviation needs t > 0, got {t}"
        )));
    }
    let p = spec.params;
    if p.m1 != p.m2 {
        return Err(Error::domain("angular deviation assumes m1 = m2"));
    }
    let ens = Ensemble::sample(spec)?;
    let m = p.m1;
    let p_bar = ens.momenta.iter().map(|(p1, _)| p1.norm()).sum::<f64>() / spec.n as f64;
    let spread_t = ens.position_sum_moments(t).std_dev();
    let spread_0 = ens.position_sum_moments(0.0).std_dev();
    let dp = ens.momentum_sum_moments().std_dev();
    Ok(AngularReport {
        tan_theta_estimate: spread_t * m / (p_bar * t),
        small_t_asymptote: spread_0 * m / (p_bar * t),
        large_t_asymptote: dp / p_bar,
    })
}

/// Time at which the two asymptotes of [`angular_deviation`] coincide,
/// `L(0)·m/Δ(p₁+p₂) = 4m/σ` for equal masses.
pub fn crossover_time(params: &DecayParams) -> f64 {
    4.0 * params.m1 / params.sigma
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> EnsembleSpec {
        EnsembleSpec::new(n, 42, DecayParams::new(1.0, 2.0, 0.5, 0.8).unwrap()).unwrap()
    }

    #[test]
    fn limit_params_are_unsupported() {
        let p = DecayParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            EnsembleSpec::new(10, 0, p),
            Err(Error::UnsupportedVariant(_))
        ));
    }

    #[test]
    fn same_seed_same_samples() {
        let a = sample_equilibrium(&spec(100)).unwrap();
        let b = sample_equilibrium(&spec(100)).unwrap();
        assert_eq!(a, b);
        let c = sample_equilibrium(&EnsembleSpec { seed: 43, ..spec(100) }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn collective_mean_is_zero() {
        let ens = Ensemble::sample(&spec(100_000)).unwrap();
        let m = ens.collective_moments(0.0);
        assert!(m.mean.abs() < 4.0 * m.mean_se());
    }

    #[test]
    fn separation_variance_is_alpha() {
        let s = spec(100_000);
        let pos = sample_equilibrium(&s).unwrap();
        let m = Moments::of(components(pos.iter().map(|p| p.separation())));
        assert!((m.var - s.params.alpha).abs() < 4.0 * m.var_se());
    }

    #[test]
    fn analytic_variance_increment_is_quadratic() {
        let p = spec(1).params;
        for t in [0.5, 3.0, 40.0] {
            let inc = analytic_collective_variance(&p, t) - analytic_collective_variance(&p, 0.0);
            assert!((inc - p.sigma / 4.0 * t * t).abs() < 1e-12 * inc);
        }
    }

    #[test]
    fn momentum_marginals() {
        let s = spec(100_000);
        let ens = Ensemble::sample(&s).unwrap();
        let m = ens.momentum_sum_moments();
        assert!((m.var - s.params.sigma / 4.0).abs() < 4.0 * m.var_se());
    }

    #[test]
    fn propagation_matches_rk4() {
        let ens = Ensemble::sample(&spec(100)).unwrap();
        let err = ens.spot_check(5.0, 1e-3, 100).unwrap();
        assert!(err < 1e-9, "{err:e}");
    }

    #[test]
    fn heisenberg_analytic_is_one() {
        let r = heisenberg_product(&spec(10)).unwrap();
        assert!((r.analytic - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_cone_contains_everything() {
        let cone = Cone {
            axis: Vec3::z(),
            half_angle: PI,
        };
        let r = cone_probability_check(&spec(1000), &cone, 1.0).unwrap();
        assert_eq!(r.position_fraction, 1.0);
        assert_eq!(r.momentum_fraction, 1.0);
    }

    #[test]
    fn cone_rejects_bad_input() {
        let cone = Cone {
            axis: Vec3::z(),
            half_angle: 0.0,
        };
        assert!(cone_probability_check(&spec(10), &cone, 1.0).is_err());
        let cone = Cone {
            axis: Vec3::z(),
            half_angle: 0.5,
        };
        assert!(cone_probability_check(&spec(10), &cone, 0.0).is_err());
    }

    #[test]
    fn angular_deviation_requires_equal_masses_and_positive_time() {
        assert!(angular_deviation(&spec(10), 1.0).is_err());
        let s = EnsembleSpec::new(10, 1, DecayParams::new(1.0, 1.0, 1.0, 0.5).unwrap()).unwrap();
        assert!(angular_deviation(&s, 0.0).is_err());
    }

    #[test]
    fn standard_quantum_limit_is_touched_at_crossover() {
        let p = DecayParams::new(1.5, 1.5, 1.0, 0.3).unwrap();
        let m = p.m1;
        let spread = |t: f64| analytic_collective_variance(&p, t) / (m * m);
        let tc = crossover_time(&p);
        assert!((spread(tc) - standard_quantum_limit(m, tc)).abs() < 1e-12);
        for t in [0.1, 1.0, tc, 50.0, 1e4] {
            assert!(spread(t) >= standard_quantum_limit(m, t) - 1e-12);
        }
    }
}
