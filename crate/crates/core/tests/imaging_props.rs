use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use pairdecay::ensemble::EnsembleSpec;
use pairdecay::imaging::{
    beam_trajectory, lens_image_point, max_deviation_from_line, simulate_coincidences,
    thin_lens_conjugate, ApertureMask, GaussianBeam, LensSetup, MaskShape, ScanOptions,
};
use pairdecay::{DecayParams, Vec3};
use proptest::prelude::*;

fn unit(th: f64, ph: f64) -> Vec3 {
    Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos())
}

proptest! {
    // Two rays from the source, each carried by ray-transfer matrices
    // through the gap, the lens and a trial distance; they meet where the
    // transverse heights agree.
    #[test]
    fn image_point_agrees_with_ray_matrices(
        f in 0.2f64..5.0, k in 1.05f64..10.0, x in -2.0f64..2.0, y in -2.0f64..2.0,
        th in 0.0f64..PI, ph in 0.0f64..TAU,
    ) {
        let s = k * f;
        let axis = unit(th, ph);
        let lens = LensSetup::new(f, s, None, axis).unwrap();
        let (e1, e2) = lens.transverse_basis();
        let source = e1 * x + e2 * y + axis * s;
        let img = lens_image_point(&source, &lens).unwrap();

        let gap = |d: f64| Matrix2::new(1.0, d, 0.0, 1.0);
        let thin = Matrix2::new(1.0, 0.0, -1.0 / f, 1.0);
        let system = thin * gap(s);
        for (h0, e) in [(x, e1), (y, e2)] {
            let a = system * nalgebra::Vector2::new(h0, 0.0);
            let b = system * nalgebra::Vector2::new(h0, 0.3);
            // heights a.0 + a.1 z and b.0 + b.1 z meet at z
            let z = (b[0] - a[0]) / (a[1] - b[1]);
            let h = a[0] + a[1] * z;
            let s_prime = thin_lens_conjugate(s, f).unwrap().s_prime;
            prop_assert!((z - s_prime).abs() <= 1e-9 * s_prime);
            prop_assert!((img.dot(&e) - h).abs() <= 1e-9 * (1.0 + h.abs()));
        }
        prop_assert!((img.dot(&axis) + lens.s_prime).abs() <= 1e-9 * lens.s_prime);
    }
}

fn beam(waist: f64) -> GaussianBeam {
    GaussianBeam {
        focus: Vec3::new(0.0, 0.0, -2.0),
        waist_w0: waist,
        arrival_momentum: Vec3::new(0.0, 0.3, -2.0),
        focus_time: 1.0,
        mass: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn narrower_waists_bend_paths_more(ox in -0.05f64..0.05, oy in -0.05f64..0.05) {
        prop_assume!(ox.hypot(oy) > 1e-3);
        let dev: Vec<f64> = [1.0, 0.1, 0.01]
            .iter()
            .map(|&w| {
                let b = beam(w);
                let dt = (b.tau() / 20.0).min(1e-3);
                let path = beam_trajectory(&b, [ox, oy], (0.0, 2.0), dt).unwrap();
                let p = &path.positions;
                max_deviation_from_line(p, &p[0], p.last().unwrap())
            })
            .collect();
        prop_assert!(dev[0] < dev[1] && dev[1] < dev[2], "{:?}", dev);
    }

    #[test]
    fn paths_follow_width_scaling(ox in -0.3f64..0.3, oy in -0.3f64..0.3, w in 0.05f64..1.0) {
        let b = beam(w);
        let dt = (b.tau() / 40.0).min(1e-3);
        let path = beam_trajectory(&b, [ox, oy], (0.0, 2.0), dt).unwrap();
        let (e1, e2) = b.transverse_basis();
        let start = e1 * ox + e2 * oy;
        for (t, r) in path.times.iter().zip(&path.positions).step_by(97) {
            let got = r - b.center(*t);
            let want = b.scaled_offset(&start, 0.0, *t);
            prop_assert!((got - want).norm() <= 1e-4 * want.norm().max(1e-12));
        }
    }
}

#[test]
fn double_slit_gives_two_inverted_lobes() {
    let (f, s) = (1.0, 1.5);
    let lens = LensSetup::new(f, s, None, Vec3::z()).unwrap();
    let centers = (-0.25, 0.25);
    let mask = ApertureMask::new(
        MaskShape::DoubleSlit {
            center: 0.0,
            width: 0.1,
            separation: 0.5,
        },
        0.0,
    )
    .unwrap();
    let spec = EnsembleSpec::new(20_000, 12, DecayParams::new(1.0, 1.0, 1.0, 1e-4).unwrap()).unwrap();
    let opts = ScanOptions {
        scan_range: [-2.0, 2.0],
        ..ScanOptions::default()
    };
    let bin = (opts.scan_range[1] - opts.scan_range[0]) / opts.scan_bins as f64;
    let (events, _) = simulate_coincidences(&lens, &mask, &spec, &opts).unwrap();
    let m = lens.magnification();
    for (sign, slit) in [(1.0, centers.0), (-1.0, centers.1)] {
        let xs: Vec<f64> = events
            .iter()
            .map(|c| c.landing.x)
            .filter(|x| x * sign > 0.0)
            .collect();
        assert!(xs.len() > 5_000);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (lo + hi);
        assert!((mid - m * slit).abs() < bin, "lobe at {mid}, expected {}", m * slit);
    }
}
