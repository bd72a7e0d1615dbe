//! Planar convolution `h ⊗ g` on a periodic grid by spectral multiplication.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::Serialize;

use super::{band_edges, g_value, h_value, EnergyBand, RadialProfile};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Minimum number of samples per period `2π/a₊` of the band oscillation.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvolutionReport {
    /// Annular average of `|h ⊗ g|`.
    pub conv: RadialProfile,
    pub dev_to_h: f64,
    pub dev_to_g: f64,
    pub samples_per_period: f64,
}

/// Signed coordinate of index `i` on an `n`-point periodic lattice with the
/// origin at index 0.
fn wrapped(i: usize, n: usize) -> f64 {
    if i < n.div_ceil(2) {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn fft2(data: &mut [Complex64], n: usize, dir: FftDirection) {
    let fft = FftPlanner::new().plan_fft(n, dir);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for _ in 0..2 {
        fft.process_with_scratch(data, &mut scratch);
        transpose(data, n);
    }
}

/// Circular convolution of two `n × n` fields (row-major), unscaled.
pub(crate) fn convolve2(mut a: Vec<Complex64>, mut b: Vec<Complex64>, n: usize) -> Vec<Complex64> {
    fft2(&mut a, n, FftDirection::Forward);
    fft2(&mut b, n, FftDirection::Forward);
    let norm = 1.0 / (n * n) as f64;
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y * norm;
    }
    drop(b);
    fft2(&mut a, n, FftDirection::Inverse);
    a
}

/// `sqrt(2 − 2|⟨u, v⟩|/(‖u‖‖v‖))`: distance between the normalized fields
/// after optimal global phase.
pub(crate) fn normalized_deviation(u: &[Complex64], v: &[Complex64]) -> f64 {
    let (mut uv, mut uu, mut vv) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        uv += a.conj() * b;
        uu += a.norm_sqr();
        vv += b.norm_sqr();
    }
    (2.0 - 2.0 * uv.norm() / (uu * vv).sqrt()).max(0.0).sqrt()
}

/// Convolves `h(·, t)` with the band profile `g` on the `n × n` lattice of
/// spacing `2·half_width/n` and compares the result with both factors over
/// the disc `|x| ≤ half_width`.
pub fn energy_band_convolution(
    band: &EnergyBand,
    alpha: f64,
    t: f64,
    grid: &GridSpec,
) -> Result<ConvolutionReport> {
    grid.validate()?;
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let edges = band_edges(band)?;
    let n = grid.n;
    if n < 2 {
        return Err(Error::domain("convolution grid needs at least 2 points"));
    }
    let dx = 2.0 * grid.half_width / n as f64;
    let samples = 2.0 * PI / edges.a_plus / dx;
    if samples < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::Resolution(format!(
            "{samples:.2} samples per oscillation period, need at least {MIN_SAMPLES_PER_PERIOD}"
        )));
    }

    let radius = |i: usize, j: usize| wrapped(i, n).hypot(wrapped(j, n)) * dx;
    let mut h = Vec::with_capacity(n * n);
    let mut g = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let r = radius(i, j);
            h.push(h_value(alpha, t, band.mu, r));
            g.push(g_value(&edges, r));
        }
    }
    let g_field: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut conv = convolve2(h.clone(), g_field, n);
    let cell = dx * dx;
    conv.iter_mut().for_each(|c| *c *= cell);

    let inside: Vec<usize> = (0..n * n)
        .filter(|&k| radius(k / n, k % n) <= grid.half_width)
        .collect();
    let pick = |f: &dyn Fn(usize) -> Complex64| inside.iter().map(|&k| f(k)).collect::<Vec<_>>();
    let c_in = pick(&|k| conv[k]);
    let dev_to_h = normalized_deviation(&c_in, &pick(&|k| h[k]));
    let dev_to_g = normalized_deviation(&c_in, &pick(&|k| Complex64::new(g[k], 0.0)));

    let bins = (grid.half_width / dx).floor() as usize + 1;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for &k in &inside {
        let b = ((radius(k / n, k % n) / dx).round() as usize).min(bins - 1);
        sums[b] += conv[k].norm();
        counts[b] += 1;
    }
    let (xs, values) = (0..bins)
        .filter(|&b| counts[b] > 0)
        .map(|b| (b as f64 * dx, sums[b] / counts[b] as f64))
        .unzip();

    Ok(ConvolutionReport {
        conv: RadialProfile { xs, values },
        dev_to_h,
        dev_to_g,
        samples_per_period: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n * n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn spectral_matches_direct_sum() {
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_field(&mut rng, n);
        let b = random_field(&mut rng, n);
        let fast = convolve2(a.clone(), b.clone(), n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    for l in 0..n {
                        s += a[k * n + l] * b[((i + n - k) % n) * n + (j + n - l) % n];
                    }
                }
                assert!((s - fast[i * n + j]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn swapping_kernel_and_field() {
        let n = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_field(&mut rng, n);
        let b = random_field(&mut rng, n);
        let ab = convolve2(a.clone(), b.clone(), n);
        let ba = convolve2(b, a, n);
        let scale = ab.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (x, y) in ab.iter().zip(&ba) {
            assert!((x - y).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = GridSpec::new(256, 200.0).unwrap();
        assert!(matches!(
            energy_band_convolution(&EnergyBand::reference(), 1.0, 0.0, &grid),
            Err(Error::Resolution(_))
        ));
    }

    // For t = 0 the spectrum of h is ∝ exp(−αk²) and that of g is the
    // indicator of the annulus a₋ ≤ k ≤ a₊, so by Parseval the overlap of
    // h ⊗ g with h is sqrt(exp(−2αa₋²) − exp(−2αa₊²)).
    fn spectral_dev(alpha: f64, am: f64, ap: f64) -> f64 {
        let overlap = ((-2.0 * alpha * am * am).exp() - (-2.0 * alpha * ap * ap).exp()).sqrt();
        (2.0 - 2.0 * overlap).sqrt()
    }

    #[test]
    fn disc_band_matches_spectral_oracle() {
        // a₊ = 1 for a full disc
        let e_plus = (1.0 / (4.0 * PI * PI)).powi(2);
        let band = EnergyBand::new(e_plus, 0.0, 0.5).unwrap();
        let alpha = 0.5;
        let grid = GridSpec::new(512, 80.0).unwrap();
        let r = energy_band_convolution(&band, alpha, 0.0, &grid).unwrap();
        let expected = spectral_dev(alpha, 0.0, 1.0);
        assert!((r.dev_to_h - expected).abs() < 1e-2, "{} vs {expected}", r.dev_to_h);
    }

    #[test]
    fn delta_like_h_reproduces_g() {
        let band = EnergyBand::new(0.02, 0.0, 0.5).unwrap();
        let grid = GridSpec::new(256, 8.0).unwrap();
        let dx: f64 = 2.0 * 8.0 / 256.0;
        let r = energy_band_convolution(&band, (0.05 * dx).powi(2), 0.0, &grid).unwrap();
        assert!(r.dev_to_g < 1e-6, "{}", r.dev_to_g);
    }
}
