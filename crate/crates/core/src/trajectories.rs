//! Bohmian trajectories of the pair: RK4 integration of the guidance
//! equation and the closed-form family of the limit wave.

use std::io::Write;

use nalgebra::SVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode;
use crate::wavecore::{DecayParams, PairState, PairWave, Vec3};

type Phase = SVector<f64, 6>;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PairState>,
    pub params: DecayParams,
}

/// Path of a single particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticlePath {
    pub times: Vec<f64>,
    pub positions: Vec<Vec3>,
}

/// Constants of the straight-line family: `c1` is the (constant) centre of
/// mass, `d` the separation direction scaled so that `r₁ − r₂ = d·s(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormSpec {
    pub c1: Vec3,
    pub d: Vec3,
}

/// `s(t) = sqrt(t²/4μ² + α²)`, the separation growth factor of the limit wave.
pub fn separation_scale(params: &DecayParams, t: f64) -> f64 {
    let mu = params.mu();
    (t * t / (4.0 * mu * mu) + params.alpha * params.alpha).sqrt()
}

impl ClosedFormSpec {
    /// Member of the family passing through `state`.
    pub fn from_state(params: &DecayParams, state: &PairState) -> Self {
        ClosedFormSpec {
            c1: state.center_of_mass(params),
            d: state.separation() / separation_scale(params, state.t),
        }
    }
}

fn pack(s: &PairState) -> Phase {
    Phase::from_iterator(s.r1.iter().chain(s.r2.iter()).copied())
}

fn unpack(y: &Phase, t: f64) -> PairState {
    PairState::new(
        Vec3::new(y[0], y[1], y[2]),
        Vec3::new(y[3], y[4], y[5]),
        t,
    )
}

pub fn integrate_pair(
    wave: &PairWave,
    initial: &PairState,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_pair_strided(wave, initial, t_end, dt, 1)
}

/// As [`integrate_pair`], keeping every `stride`-th step plus both endpoints.
pub fn integrate_pair_strided(
    wave: &PairWave,
    initial: &PairState,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if !initial.is_finite() {
        return Err(Error::domain("initial state is not finite"));
    }
    if !(t_end > initial.t) {
        return Err(Error::domain(format!(
            "t_end {t_end} must exceed the initial time {}",
            initial.t
        )));
    }
    let rhs = |t: f64, y: &Phase| -> Result<Phase> {
        let (v1, v2) = wave.velocity(&unpack(y, t))?;
        Ok(Phase::from_iterator(v1.iter().chain(v2.iter()).copied()))
    };
    let (times, ys) = ode::integrate(rhs, initial.t, pack(initial), t_end, dt, stride)?;
    let states = times.iter().zip(&ys).map(|(&t, y)| unpack(y, t)).collect();
    Ok(Trajectory {
        times,
        states,
        params: *wave.params(),
    })
}

pub fn closed_form_pair(spec: &ClosedFormSpec, params: &DecayParams, t: f64) -> Result<PairState> {
    if params.sigma != 0.0 {
        return Err(Error::UnsupportedVariant(format!(
            "closed-form trajectories need sigma = 0, got {}",
            params.sigma
        )));
    }
    let m = params.total_mass();
    let s = separation_scale(params, t);
    Ok(PairState::new(
        spec.c1 + spec.d * (params.m2 / m * s),
        spec.c1 - spec.d * (params.m1 / m * s),
        t,
    ))
}

/// Samples the closed-form trajectory at the given times.
pub fn closed_form_trajectory(
    spec: &ClosedFormSpec,
    params: &DecayParams,
    times: &[f64],
) -> Result<Trajectory> {
    let states = times
        .iter()
        .map(|&t| closed_form_pair(spec, params, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        params: *params,
    })
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&PairState> {
        self.states.last()
    }

    /// Path of particle 1 or 2.
    pub fn particle(&self, which: usize) -> ParticlePath {
        let positions = self
            .states
            .iter()
            .map(|s| if which == 1 { s.r1 } else { s.r2 })
            .collect();
        ParticlePath {
            times: self.times.clone(),
            positions,
        }
    }

    /// CSV with columns `t, r1x, r1y, r1z, r2x, r2y, r2z`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(e.into());
        w.write_record(["t", "r1x", "r1y", "r1z", "r2x", "r2y", "r2z"])
            .map_err(csv_err)?;
        for s in &self.states {
            let row = [s.t, s.r1.x, s.r1.y, s.r1.z, s.r2.x, s.r2.y, s.r2.z];
            w.write_record(row.iter().map(|v| v.to_string()))
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest distance of a path from the chord joining its endpoints,
/// divided by the path length. Returns 0 for a path that does not move.
pub fn path_straightness(points: &[Vec3]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::domain(format!(
            "straightness needs at least 3 points, got {}",
            points.len()
        )));
    }
    let length: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if length == 0.0 {
        return Ok(0.0);
    }
    let first = points[0];
    let chord = points[points.len() - 1] - first;
    let chord_len = chord.norm();
    let max_dev = points
        .iter()
        .map(|p| {
            let rel = p - first;
            if chord_len == 0.0 {
                rel.norm()
            } else {
                (rel - chord * (rel.dot(&chord) / (chord_len * chord_len))).norm()
            }
        })
        .fold(0.0, f64::max);
    Ok(max_dev / length)
}

impl ParticlePath {
    pub fn straightness(&self) -> Result<f64> {
        path_straightness(&self.positions)
    }
}

pub fn straightness_measure(traj: &Trajectory) -> Result<f64> {
    let a = traj.particle(1).straightness()?;
    let b = traj.particle(2).straightness()?;
    Ok(a.max(b))
}
