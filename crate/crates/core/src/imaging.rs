//! Coincidence imaging of an aperture through a thin lens, unfolded onto a
//! single optical axis.
//!
//! Lens frame: the lens sits at the origin, `w` runs along the optical axis
//! towards the aperture (particle 1 side) and `(x, y)` are transverse. The
//! aperture plane is at `w = S`, the scan plane for particle 2 at `w = -S′`.
//!
//! After particle 1 is detected at `a`, particle 2 is guided by a spherical
//! wave centred on `a`. The lens turns the part of it that reaches the lens
//! into a Gaussian beam converging onto the image of `a`.

use std::f64::consts::PI;

use nalgebra::SVector;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ensemble::{rng_for, validate_regularized, EnsembleSpec};
use crate::error::{Error, Result};
use crate::ode;
use crate::stats::Moments;
use crate::trajectories::ParticlePath;
use crate::wavecore::{DecayParams, FreePacket, Vec3, DENSITY_FLOOR};

type State3 = SVector<f64, 3>;

/// Object-side distance for which the image is at infinity, within this
/// relative tolerance.
const INFINITE_CONJUGATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conjugate {
    pub s_prime: f64,
    /// The image is virtual (on the object side) when `S < f`.
    pub virtual_image: bool,
}

/// Gaussian thin-lens equation `1/S + 1/S′ = 1/f`.
pub fn thin_lens_conjugate(s: f64, f: f64) -> Result<Conjugate> {
    if !(s > 0.0 && s.is_finite()) || !(f > 0.0 && f.is_finite()) {
        return Err(Error::domain(format!(
            "object distance and focal length must be positive, got S = {s}, f = {f}"
        )));
    }
    if (s - f).abs() <= INFINITE_CONJUGATE_TOL * f {
        return Err(Error::domain("object at the focal plane: image at infinity"));
    }
    let s_prime = s * f / (s - f);
    Ok(Conjugate {
        s_prime,
        virtual_image: s_prime < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensSetup {
    pub f: f64,
    pub s: f64,
    pub s_prime: f64,
    pub axis: Vec3,
}

impl LensSetup {
    /// Completes `S′` from the lens equation when it is not given.
    pub fn new(f: f64, s: f64, s_prime: Option<f64>, axis: Vec3) -> Result<Self> {
        let conj = thin_lens_conjugate(s, f)?;
        if conj.virtual_image {
            return Err(Error::domain(format!(
                "S = {s} inside the focal length gives a virtual image"
            )));
        }
        let s_prime = match s_prime {
            None => conj.s_prime,
            Some(sp) => {
                if ((1.0 / s + 1.0 / sp) * f - 1.0).abs() > 1e-12 {
                    return Err(Error::domain(format!(
                        "S = {s}, S' = {sp} are not conjugate for f = {f}"
                    )));
                }
                sp
            }
        };
        let n = axis.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain("lens axis must be a nonzero vector"));
        }
        Ok(LensSetup {
            f,
            s,
            s_prime,
            axis: axis / n,
        })
    }

    pub fn magnification(&self) -> f64 {
        -self.s_prime / self.s
    }

    /// Orthonormal transverse basis `(e₁, e₂)` completing the axis.
    pub fn transverse_basis(&self) -> (Vec3, Vec3) {
        let w = self.axis;
        let seed = if w.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let e1 = (seed - w * seed.dot(&w)).normalize();
        (e1, w.cross(&e1))
    }

    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let (e1, e2) = self.transverse_basis();
        Vec3::new(p.dot(&e1), p.dot(&e2), p.dot(&self.axis))
    }

    pub fn to_global(&self, p: &Vec3) -> Vec3 {
        let (e1, e2) = self.transverse_basis();
        e1 * p.x + e2 * p.y + self.axis * p.z
    }
}

/// Image of a point in lens-frame coordinates (`z` along the axis, object
/// side positive).
pub fn image_of_point(local: &Vec3, f: f64) -> Result<Vec3> {
    let conj = thin_lens_conjugate(local.z, f)?;
    let m = -conj.s_prime / local.z;
    Ok(Vec3::new(local.x * m, local.y * m, -conj.s_prime))
}

/// Image of a point of the object plane, on the line through the lens centre.
pub fn lens_image_point(source: &Vec3, lens: &LensSetup) -> Result<Vec3> {
    let axial = source.dot(&lens.axis);
    if (axial - lens.s).abs() > 1e-9 * lens.s {
        return Err(Error::domain(format!(
            "source at axial distance {axial} is not on the object plane S = {}",
            lens.s
        )));
    }
    let transverse = source - lens.axis * axial;
    Ok(transverse * lens.magnification() - lens.axis * lens.s_prime)
}

/// Effective one-particle wave of particle 2 after particle 1 was detected
/// at `center_a`: a free packet of width `alpha` and mass `m₂` centred on
/// the detection point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphericalWave {
    pub center_a: Vec3,
    pub alpha: f64,
    pub t0: f64,
    pub mass: f64,
}

pub fn collapse_to_detection(a: Vec3, params: &DecayParams, t0: f64) -> Result<SphericalWave> {
    params.validate()?;
    if !a.iter().all(|c| c.is_finite()) {
        return Err(Error::domain("detection point is not finite"));
    }
    Ok(SphericalWave {
        center_a: a,
        alpha: params.alpha,
        t0,
        mass: params.m2,
    })
}

impl SphericalWave {
    fn packet(&self) -> FreePacket {
        FreePacket {
            width: self.alpha,
            mass: self.mass,
        }
    }

    pub fn eval(&self, r: &Vec3, t: f64) -> Complex64 {
        self.packet().eval(&(r - self.center_a), t)
    }

    /// `t|r−a|²/(8mα² + 2t²/m) − (3/2)·atan(t/2mα)`.
    pub fn phase(&self, r: &Vec3, t: f64) -> f64 {
        let (m, al) = (self.mass, self.alpha);
        t * (r - self.center_a).norm_squared() / (8.0 * m * al * al + 2.0 * t * t / m)
            - 1.5 * (t / (2.0 * m * al)).atan()
    }

    pub fn velocity(&self, r: &Vec3, t: f64) -> Result<Vec3> {
        let x = r - self.center_a;
        let ln_density = 2.0 * self.packet().ln_amplitude(&x, t).re;
        if !(ln_density >= DENSITY_FLOOR.ln()) {
            return Err(Error::Node {
                density: ln_density.exp(),
                t,
            });
        }
        Ok(self.packet().phase_gradient(&x, t) / self.mass)
    }
}

/// Paraxial Gaussian beam: a plane wave of momentum `arrival_momentum`
/// times a transverse minimum-uncertainty packet whose waist `waist_w0` is
/// reached at `focus` at `focus_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianBeam {
    pub focus: Vec3,
    pub waist_w0: f64,
    pub arrival_momentum: Vec3,
    pub focus_time: f64,
    pub mass: f64,
}

impl GaussianBeam {
    pub fn validate(&self) -> Result<()> {
        if !(self.waist_w0 > 0.0 && self.waist_w0.is_finite()) {
            return Err(Error::domain(format!(
                "beam waist must be positive, got {}",
                self.waist_w0
            )));
        }
        if !(self.mass > 0.0) || self.arrival_momentum.norm() == 0.0 {
            return Err(Error::domain("beam needs positive mass and nonzero momentum"));
        }
        Ok(())
    }

    pub fn direction(&self) -> Vec3 {
        self.arrival_momentum.normalize()
    }

    /// Rayleigh time `2·m·w0²`.
    pub fn tau(&self) -> f64 {
        2.0 * self.mass * self.waist_w0 * self.waist_w0
    }

    pub fn center(&self, t: f64) -> Vec3 {
        self.focus + self.arrival_momentum * ((t - self.focus_time) / self.mass)
    }

    /// Transverse standard deviation of the density.
    pub fn width(&self, t: f64) -> f64 {
        let s = (t - self.focus_time) / self.tau();
        self.waist_w0 * (1.0 + s * s).sqrt()
    }

    fn transverse_offset(&self, x: &Vec3, t: f64) -> Vec3 {
        let rho = x - self.center(t);
        let k = self.direction();
        rho - k * rho.dot(&k)
    }

    pub fn density(&self, x: &Vec3, t: f64) -> f64 {
        let w = self.width(t);
        let rho = self.transverse_offset(x, t);
        (-rho.norm_squared() / (2.0 * w * w)).exp() / (2.0 * PI * w * w)
    }

    pub fn velocity(&self, x: &Vec3, t: f64) -> Result<Vec3> {
        let w = self.width(t);
        let rho = self.transverse_offset(x, t);
        let ln_density = -rho.norm_squared() / (2.0 * w * w) - (2.0 * PI * w * w).ln();
        if !(ln_density >= DENSITY_FLOOR.ln()) {
            return Err(Error::Node {
                density: ln_density.exp(),
                t,
            });
        }
        let dt = t - self.focus_time;
        let tau = self.tau();
        Ok(self.arrival_momentum / self.mass + rho * (dt / (tau * tau + dt * dt)))
    }

    /// Transverse unit vectors perpendicular to the beam direction.
    pub fn transverse_basis(&self) -> (Vec3, Vec3) {
        let k = self.direction();
        let seed = if k.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let e1 = (seed - k * seed.dot(&k)).normalize();
        (e1, k.cross(&e1))
    }

    /// Offset of the trajectory started at `offset0` at `t_start`, from the
    /// width-scaling law.
    pub fn scaled_offset(&self, offset0: &Vec3, t_start: f64, t: f64) -> Vec3 {
        offset0 * (self.width(t) / self.width(t_start))
    }
}

/// RK4 path through the beam starting at transverse offset `initial_offset`
/// from the beam centre at `t_span.0`.
pub fn beam_trajectory(
    beam: &GaussianBeam,
    initial_offset: [f64; 2],
    t_span: (f64, f64),
    dt: f64,
) -> Result<ParticlePath> {
    beam.validate()?;
    let (e1, e2) = beam.transverse_basis();
    let offset = e1 * initial_offset[0] + e2 * initial_offset[1];
    // integrate the offset from the moving centre so that narrow beams far
    // from the origin keep their relative precision
    let drift = beam.arrival_momentum / beam.mass;
    let mut path = integrate_path(
        |t, rho| Ok(beam.velocity(&(beam.center(t) + rho), t)? - drift),
        offset,
        t_span.0,
        t_span.1,
        dt,
    )?;
    for (t, x) in path.times.iter().zip(path.positions.iter_mut()) {
        *x += beam.center(*t);
    }
    Ok(path)
}

fn integrate_path<F>(mut v: F, start: Vec3, t0: f64, t1: f64, dt: f64) -> Result<ParticlePath>
where
    F: FnMut(f64, &Vec3) -> Result<Vec3>,
{
    let (times, ys) = ode::integrate(|t, y: &State3| v(t, y), t0, start, t1, dt, 1)?;
    Ok(ParticlePath {
        times,
        positions: ys,
    })
}

/// Largest distance of `points` from the line through `a` and `b`.
pub fn max_deviation_from_line(points: &[Vec3], a: &Vec3, b: &Vec3) -> f64 {
    let dir = (b - a).normalize();
    points
        .iter()
        .map(|p| {
            let rel = p - a;
            (rel - dir * rel.dot(&dir)).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskShape {
    Open,
    /// Infinite along `y`, open for `|x − center| ≤ width/2`.
    Slit { center: f64, width: f64 },
    Disk { center: [f64; 2], radius: f64 },
    DoubleSlit {
        center: f64,
        width: f64,
        separation: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureMask {
    pub shape: MaskShape,
    /// Shift of the aperture plane along the axis away from `w = S`.
    pub plane_offset: f64,
}

impl ApertureMask {
    pub fn new(shape: MaskShape, plane_offset: f64) -> Result<Self> {
        let m = ApertureMask {
            shape,
            plane_offset,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn open() -> Self {
        ApertureMask {
            shape: MaskShape::Open,
            plane_offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("mask {name} must be positive, got {v}")))
            }
        };
        match self.shape {
            MaskShape::Open => Ok(()),
            MaskShape::Slit { width, .. } => positive("width", width),
            MaskShape::Disk { radius, .. } => positive("radius", radius),
            MaskShape::DoubleSlit {
                width, separation, ..
            } => {
                positive("width", width)?;
                positive("separation", separation)?;
                if separation <= width {
                    return Err(Error::domain("double-slit separation must exceed the width"));
                }
                Ok(())
            }
        }
    }

    pub fn transmits(&self, x: f64, y: f64) -> bool {
        match self.shape {
            MaskShape::Open => true,
            MaskShape::Slit { center, width } => (x - center).abs() <= width / 2.0,
            MaskShape::Disk { center, radius } => {
                (x - center[0]).hypot(y - center[1]) <= radius
            }
            MaskShape::DoubleSlit {
                center,
                width,
                separation,
            } => {
                let d = (x - center).abs();
                (d - separation / 2.0).abs() <= width / 2.0
            }
        }
    }

    /// Transverse `x` centres of the open regions, if any.
    pub fn open_centers(&self) -> Vec<f64> {
        match self.shape {
            MaskShape::Open => vec![],
            MaskShape::Slit { center, .. } => vec![center],
            MaskShape::Disk { center, .. } => vec![center[0]],
            MaskShape::DoubleSlit {
                center, separation, ..
            } => vec![center - separation / 2.0, center + separation / 2.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanOptions {
    pub scan_bins: usize,
    pub scan_range: [f64; 2],
    /// Mean relative momentum along the axis.
    pub carrier_momentum: f64,
    /// Transverse standard deviation of the decay point.
    pub source_width: f64,
    /// Decay plane position as a fraction of `S`.
    pub decay_fraction: f64,
    pub waist: f64,
    /// Give up after this many sampled pairs per requested coincidence.
    pub attempts_per_coincidence: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            scan_bins: 200,
            scan_range: [-1.5, 1.5],
            carrier_momentum: 2.0,
            source_width: 0.5,
            decay_fraction: 0.5,
            waist: 0.01,
            attempts_per_coincidence: 1000,
        }
    }
}

impl ScanOptions {
    pub fn validate(&self) -> Result<()> {
        if self.scan_bins == 0 {
            return Err(Error::domain("scan needs at least one bin"));
        }
        let [lo, hi] = self.scan_range;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain(format!("bad scan range [{lo}, {hi}]")));
        }
        if !(self.carrier_momentum > 0.0) {
            return Err(Error::domain("carrier momentum must be positive"));
        }
        if !(self.source_width >= 0.0) {
            return Err(Error::domain("source width must be non-negative"));
        }
        if !(self.decay_fraction > 0.0 && self.decay_fraction < 1.0) {
            return Err(Error::domain("decay plane must lie between lens and aperture"));
        }
        if !(self.waist > 0.0) {
            return Err(Error::domain("beam waist must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub centers: Vec<f64>,
    pub counts: Vec<u64>,
    pub bin_width: f64,
    pub accepted: u64,
    pub attempts: u64,
    /// Mean of all accepted landing coordinates, inside the range or not.
    pub mean: f64,
    pub rms_width: f64,
    /// Smallest and largest accepted landing coordinate.
    pub support: [f64; 2],
}

impl Histogram {
    fn build(values: &[f64], bins: usize, [lo, hi]: [f64; 2], attempts: u64) -> Self {
        let bin_width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        for &v in values {
            if v >= lo && v < hi {
                let k = (((v - lo) / bin_width) as usize).min(bins - 1);
                counts[k] += 1;
            }
        }
        let m = Moments::of(values.iter().copied());
        Histogram {
            centers: (0..bins)
                .map(|k| lo + (k as f64 + 0.5) * bin_width)
                .collect(),
            counts,
            bin_width,
            accepted: values.len() as u64,
            attempts,
            mean: m.mean,
            rms_width: m.std_dev(),
            support: [
                values.iter().copied().fold(f64::INFINITY, f64::min),
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ],
        }
    }

    /// Midpoint of the support, the image of the aperture centre for a
    /// sharp image.
    pub fn support_center(&self) -> f64 {
        0.5 * (self.support[0] + self.support[1])
    }

    pub fn support_width(&self) -> f64 {
        self.support[1] - self.support[0]
    }

    /// Centres of local maxima of the counts, highest first, after merging
    /// plateaus; `min_fraction` of the tallest bin filters noise.
    pub fn peaks(&self, min_fraction: f64) -> Vec<f64> {
        let top = self.counts.iter().copied().max().unwrap_or(0) as f64;
        let mut found: Vec<(u64, f64)> = Vec::new();
        let n = self.counts.len();
        let mut k = 0;
        while k < n {
            let mut j = k;
            while j + 1 < n && self.counts[j + 1] == self.counts[k] {
                j += 1;
            }
            let c = self.counts[k];
            let left = if k == 0 { 0 } else { self.counts[k - 1] };
            let right = if j + 1 == n { 0 } else { self.counts[j + 1] };
            if c > left && c > right && c as f64 >= min_fraction * top {
                found.push((c, 0.5 * (self.centers[k] + self.centers[j])));
            }
            k = j + 1;
        }
        found.sort_by_key(|f| std::cmp::Reverse(f.0));
        found.into_iter().map(|(_, x)| x).collect()
    }
}

/// One simulated coincidence, in lens-frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coincidence {
    pub decay: Vec3,
    pub p1: Vec3,
    pub p2: Vec3,
    /// Detection point of particle 1 on the aperture plane.
    pub a: Vec3,
    /// Entry point of particle 2 on the lens plane.
    pub lens_entry: Vec3,
    /// Focus of the beam guiding particle 2.
    pub focus: Vec3,
    /// Arrival point of particle 2 on the scan plane.
    pub landing: Vec3,
}

struct Draw {
    decay_xy: [f64; 2],
    big_p: Vec3,
    q: Vec3,
}

fn draw(rng: &mut rand_chacha::ChaCha8Rng) -> Draw {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    Draw {
        decay_xy: [g(), g()],
        big_p: Vec3::new(g(), g(), g()),
        q: Vec3::new(g(), g(), g()),
    }
}

fn coincidence(
    lens: &LensSetup,
    mask: &ApertureMask,
    params: &DecayParams,
    opts: &ScanOptions,
    d: &Draw,
) -> Result<Option<Coincidence>> {
    let m = params.total_mass();
    let big_p = d.big_p * (params.sigma / 4.0).sqrt();
    let q = d.q * (1.0 / (4.0 * params.alpha)).sqrt() + Vec3::z() * opts.carrier_momentum;
    let p1 = big_p * (params.m1 / m) + q;
    let p2 = big_p * (params.m2 / m) - q;
    if !(p1.z > 0.0 && p2.z < 0.0) {
        return Ok(None);
    }
    let z_d = opts.decay_fraction * lens.s;
    let decay = Vec3::new(
        d.decay_xy[0] * opts.source_width,
        d.decay_xy[1] * opts.source_width,
        z_d,
    );
    let plane = lens.s + mask.plane_offset;
    let a = decay + p1 * ((plane - z_d) / p1.z);
    if !mask.transmits(a.x, a.y) {
        return Ok(None);
    }
    // particle 2 leaves radially from the point it appears to come from on
    // the aperture plane
    let c = decay + p2 * ((plane - z_d) / p2.z);
    let lens_entry = decay + p2 * (-z_d / p2.z);
    let focus = image_of_point(&c, lens.f)?;
    let speed = p2.z.abs() / params.m2;
    let tau = 2.0 * params.m2 * opts.waist * opts.waist;
    let t_focus = focus.z.abs() / speed;
    let t_after = (lens.s_prime - focus.z.abs()) / speed;
    let w_entry = opts.waist * (1.0 + (t_focus / tau).powi(2)).sqrt();
    let w_land = opts.waist * (1.0 + (t_after / tau).powi(2)).sqrt();
    let chief = focus * (lens.s_prime / focus.z.abs());
    let offset = Vec3::new(lens_entry.x, lens_entry.y, 0.0) * (w_land / w_entry);
    let landing = Vec3::new(chief.x + offset.x, chief.y + offset.y, -lens.s_prime);
    Ok(Some(Coincidence {
        decay,
        p1,
        p2,
        a,
        lens_entry,
        focus,
        landing,
    }))
}

fn check_geometry(lens: &LensSetup, mask: &ApertureMask, opts: &ScanOptions) -> Result<()> {
    opts.validate()?;
    mask.validate()?;
    let plane = lens.s + mask.plane_offset;
    if !(plane > opts.decay_fraction * lens.s) {
        return Err(Error::domain("aperture plane must lie beyond the decay plane"));
    }
    let conj = thin_lens_conjugate(plane, lens.f)?;
    if conj.virtual_image {
        return Err(Error::domain("aperture plane inside the focal length"));
    }
    Ok(())
}

/// Samples coincidences until `spec.n` pass the mask.
pub fn simulate_coincidences(
    lens: &LensSetup,
    mask: &ApertureMask,
    spec: &EnsembleSpec,
    opts: &ScanOptions,
) -> Result<(Vec<Coincidence>, u64)> {
    validate_regularized(&spec.params)?;
    check_geometry(lens, mask, opts)?;
    let cap = (spec.n as u64).saturating_mul(opts.attempts_per_coincidence);
    let mut rng = rng_for(spec.seed, 2);
    let mut events = Vec::with_capacity(spec.n);
    let mut attempts = 0u64;
    while events.len() < spec.n && attempts < cap {
        attempts += 1;
        let d = draw(&mut rng);
        if let Some(c) = coincidence(lens, mask, &spec.params, opts, &d)? {
            events.push(c);
        }
    }
    if events.is_empty() {
        return Err(Error::EmptyImage { attempts });
    }
    Ok((events, attempts))
}

/// Coincidence image: histogram of particle-2 arrivals on the scan plane
/// along `x`, counting only pairs whose partner passed the mask.
pub fn ghost_image_scan(
    lens: &LensSetup,
    mask: &ApertureMask,
    spec: &EnsembleSpec,
    scan_bins: usize,
) -> Result<Histogram> {
    let opts = ScanOptions {
        scan_bins,
        ..ScanOptions::default()
    };
    ghost_image_scan_with(lens, mask, spec, &opts)
}

pub fn ghost_image_scan_with(
    lens: &LensSetup,
    mask: &ApertureMask,
    spec: &EnsembleSpec,
    opts: &ScanOptions,
) -> Result<Histogram> {
    let (events, attempts) = simulate_coincidences(lens, mask, spec, opts)?;
    Ok(image_histogram(&events, attempts, opts))
}

/// Histogram of the landing `x` of already simulated coincidences.
pub fn image_histogram(events: &[Coincidence], attempts: u64, opts: &ScanOptions) -> Histogram {
    let xs: Vec<f64> = events.iter().map(|c| c.landing.x).collect();
    Histogram::build(&xs, opts.scan_bins, opts.scan_range, attempts)
}

/// Both particles of one coincidence, integrated with RK4 in the lens frame.
#[derive(Debug, Clone)]
pub struct CoincidenceTrace {
    pub particle1: ParticlePath,
    pub particle2: ParticlePath,
    /// Crossing of particle 2 with the scan plane `w = -S′`.
    pub landing: Vec3,
}

fn plane_crossing(path: &ParticlePath, w: f64) -> Option<Vec3> {
    path.positions.windows(2).find_map(|seg| {
        let (a, b) = (seg[0], seg[1]);
        let (fa, fb) = (a.z - w, b.z - w);
        if fa == 0.0 {
            Some(a)
        } else if fa * fb < 0.0 {
            Some(a + (b - a) * (fa / (fa - fb)))
        } else {
            None
        }
    })
}

/// Follows one pair emitted back to back from `decay` with relative
/// momentum `p0` towards the detection point `a` on the aperture plane.
///
/// Particle 1 runs straight to `a`. At that moment particle 2 is handed to
/// the spherical wave centred on `a` and integrated up to the lens plane,
/// then to the Gaussian beam focused on the image of `a`, and integrated
/// until it crosses the scan plane.
pub fn trace_coincidence(
    lens: &LensSetup,
    params: &DecayParams,
    decay: Vec3,
    a: Vec3,
    p0: f64,
    waist: f64,
    dt: f64,
) -> Result<CoincidenceTrace> {
    let dir = (a - decay).normalize();
    if !(dir.z > 0.0) || !(decay.z > 0.0) {
        return Err(Error::domain("detection point must lie beyond the decay plane"));
    }
    let t_detect = (a - decay).norm() * params.m1 / p0;
    let times: Vec<f64> = (0..=64).map(|k| t_detect * k as f64 / 64.0).collect();
    let particle1 = ParticlePath {
        positions: times
            .iter()
            .map(|t| decay + dir * (p0 / params.m1 * t))
            .collect(),
        times: times.clone(),
    };


    // particle 2 at detection time, back to back with particle 1
    let r2 = decay - dir * (p0 / params.m2 * t_detect);
    let wave = collapse_to_detection(a, params, t_detect)?;
    let mut seg = Vec::new();
    let mut t = t_detect;
    let mut x = r2;
    seg.push((t, x));
    let f = |t: f64, y: &State3| wave.velocity(y, t);
    let mut rhs = f;
    let max_steps = ode::MAX_STEPS;
    let mut steps = 0u64;
    while x.z > 0.0 {
        let next = ode::rk4_step(&mut rhs, t, &x, dt)?;
        t += dt;
        steps += 1;
        if steps > max_steps {
            return Err(Error::Resource("particle 2 never reaches the lens".into()));
        }
        if next.z <= 0.0 {
            let frac = x.z / (x.z - next.z);
            let hit = x + (next - x) * frac;
            t = t - dt + dt * frac;
            x = hit;
            seg.push((t, x));
            break;
        }
        x = next;
        seg.push((t, x));
    }
    let (t_lens, entry) = (t, x);
    let v_lens = wave.velocity(&entry, t_lens)?;

    let focus = lens_image_point(&lens.to_global(&a), lens).map(|g| lens.to_local(&g))?;
    let speed = v_lens.norm();
    let k = focus.normalize();
    // time the beam from the particle's own position along the chief ray,
    // since the beam only pulls transversally
    let t_focus = t_lens + (focus - entry).dot(&k) / speed;
    let beam = GaussianBeam {
        focus,
        waist_w0: waist,
        arrival_momentum: k * (speed * params.m2),
        focus_time: t_focus,
        mass: params.m2,
    };
    beam.validate()?;
    let t_end = t_focus + (t_focus - t_lens) * 0.05;
    let stage2 = integrate_path(|t, y| beam.velocity(y, t), entry, t_lens, t_end, dt)?;
    let landing = plane_crossing(&stage2, -lens.s_prime)
        .ok_or_else(|| Error::Numeric("particle 2 did not reach the scan plane".into()))?;

    // straight flight from the decay point up to the detection of particle 1
    let mut p2_times: Vec<f64> = times[..times.len() - 1].to_vec();
    let mut p2_pos: Vec<Vec3> = p2_times
        .iter()
        .map(|t| decay - dir * (p0 / params.m2 * t))
        .collect();
    p2_times.extend(seg.iter().map(|(t, _)| *t));
    p2_pos.extend(seg.iter().map(|(_, x)| *x));
    p2_times.extend(stage2.times.iter().skip(1));
    p2_pos.extend(stage2.positions.iter().skip(1));
    Ok(CoincidenceTrace {
        particle1,
        particle2: ParticlePath {
            times: p2_times,
            positions: p2_pos,
        },
        landing,
    })
}
