//! Bessel functions of the first kind of integer order.
//!
//! Power series for `|x| ≤ 14`, Hankel asymptotic expansion beyond.

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 14.0;

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    // (x/2)^n / n!
    let mut term = (1..=n).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // P collects even k with alternating sign, Q odd k
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (n as f64 * 0.5 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_n(x)` for integer order `n ≥ 0`.
pub fn bessel_jn(n: u32, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(n, ax)
    } else {
        asymptotic(n, ax)
    };
    if x < 0.0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_jn(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_jn(1, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ; the integrand extends to a
    // smooth periodic function, so the trapezoid rule converges
    // exponentially once the node count exceeds |x| comfortably.
    fn integral_oracle(n: u32, x: f64) -> f64 {
        let m = 4000;
        let h = PI / m as f64;
        let f = |tau: f64| (n as f64 * tau - x * tau.sin()).cos();
        let inner: f64 = (1..m).map(|k| f(k as f64 * h)).sum();
        (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
    }

    #[test]
    fn reference_values() {
        assert_eq!(bessel_j1(0.0), 0.0);
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!((bessel_j1(1.0) - 0.4400505857).abs() < 1e-10);
        assert!((bessel_j1(5.0) + 0.3275791376).abs() < 1e-10);
        assert!((integral_oracle(1, 1.0) - 0.4400505857).abs() < 1e-10);
        assert!((integral_oracle(1, 5.0) + 0.3275791376).abs() < 1e-10);
    }

    #[test]
    fn agrees_with_integral_representation() {
        let mut x = -100.0;
        while x <= 100.0 {
            for n in 0..3 {
                let err = (bessel_jn(n, x) - integral_oracle(n, x)).abs();
                assert!(err < 1e-10, "J{n}({x}) off by {err:e}");
            }
            x += 0.37;
        }
        // both sides of the series/asymptotic switch
        for x in [13.999, 14.0, 14.001, 14.5] {
            assert!((bessel_j1(x) - integral_oracle(1, x)).abs() < 1e-10);
        }
    }

    #[test]
    fn odd_order_is_odd() {
        for x in [0.3, 7.0, 30.0] {
            assert_eq!(bessel_j1(-x), -bessel_j1(x));
            assert_eq!(bessel_j0(-x), bessel_j0(x));
        }
    }

    #[test]
    fn three_term_recurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let x: f64 = rng.random_range(0.05..100.0);
            let lhs = bessel_j0(x) + bessel_jn(2, x);
            let rhs = 2.0 * bessel_j1(x) / x;
            assert!((lhs - rhs).abs() < 1e-9, "x = {x}");
        }
    }
}
