//! Executes a parsed scenario and writes its output files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{
    CommandParams, EnergyShellParams, EnsembleParams, Format, ImagingParams, RegimeParams,
    ScenarioConfig, TrajectoryParams,
};
use super::io::{save_json, save_text, Table};
use super::svg::{bar_plot, line_plot, path_plot, PlotStyle, Series};
use crate::energyshell::{
    alpha_for_fwhm, band_current_check, band_edges, energy_band_convolution, g_profile, EnergyBand,
};
use crate::ensemble::{Ensemble, EnsembleSpec, VarianceReport};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::imaging::{
    image_histogram, simulate_coincidences, trace_coincidence, ApertureMask, LensSetup,
    ScanOptions,
};
use crate::regime::{alignment_transition, RegimeInput, Transition};
use crate::trajectories::{closed_form_pair, integrate_pair_strided, ClosedFormSpec, ParticlePath};
use crate::wavecore::{DecayParams, PairState, PairWave, Vec3};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExitReport {
    pub exit_code: i32,
    pub files_written: Vec<PathBuf>,
}

struct Output<'a> {
    dir: &'a Path,
    format: Format,
    svg: bool,
    written: Vec<PathBuf>,
}

impl Output<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        save_json(value, &p)
    }

    /// Writes `stem.csv` or `stem.json` according to the configured format.
    fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        match self.format {
            Format::Csv => {
                let p = self.path(&format!("{stem}.csv"));
                table.save_csv(&p)
            }
            Format::Json => {
                let columns: serde_json::Map<String, serde_json::Value> = table
                    .headers
                    .iter()
                    .enumerate()
                    .map(|(k, h)| {
                        let col: Vec<f64> = table.rows.iter().map(|r| r[k]).collect();
                        (h.clone(), serde_json::json!(col))
                    })
                    .collect();
                self.json(&format!("{stem}.json"), &columns)
            }
        }
    }

    fn svg(&mut self, name: &str, doc: Result<String>) -> Result<()> {
        if !self.svg {
            return Ok(());
        }
        let doc = doc?;
        let p = self.path(name);
        save_text(&doc, &p)
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ExitReport> {
    std::fs::create_dir_all(&config.out_dir)?;
    let mut out = Output {
        dir: &config.out_dir,
        format: config.format,
        svg: config.emit_svg,
        written: Vec::new(),
    };
    match &config.params {
        CommandParams::Regime(p) => run_regime(p, &mut out)?,
        CommandParams::Trajectories(p) => run_trajectories(p, &mut out)?,
        CommandParams::Ensemble(p) => run_ensemble(p, config.seed, &mut out)?,
        CommandParams::Imaging(p) => run_imaging(p, config.seed, &mut out)?,
        CommandParams::Energyshell(p) => run_energyshell(p, &mut out)?,
    }
    Ok(ExitReport {
        exit_code: 0,
        files_written: out.written,
    })
}

fn run_regime(p: &RegimeParams, out: &mut Output) -> Result<()> {
    let t: Transition = alignment_transition(&RegimeInput::new(p.l0_meters, p.wavelength_meters)?);
    out.json("regime.json", &t)
}

#[derive(Serialize)]
struct TrajectorySummary {
    samples: usize,
    t_end: f64,
    straightness_1: f64,
    straightness_2: f64,
    /// Largest distance to the closed-form solution; only for `sigma = 0`.
    closed_form_max_deviation: Option<f64>,
}

fn run_trajectories(p: &TrajectoryParams, out: &mut Output) -> Result<()> {
    let params = DecayParams::new(p.m1, p.m2, p.alpha, p.sigma)?;
    let wave = PairWave::new(params)?;
    let initial = PairState::new(Vec3::from(p.r1), Vec3::from(p.r2), 0.0);
    let traj = integrate_pair_strided(&wave, &initial, p.t_end, p.dt, p.stride)?;
    let closed = if wave.is_limit() {
        let spec = ClosedFormSpec::from_state(&params, &initial);
        let mut worst: f64 = 0.0;
        for s in &traj.states {
            let c = closed_form_pair(&spec, &params, s.t)?;
            worst = worst.max((c.r1 - s.r1).norm()).max((c.r2 - s.r2).norm());
        }
        Some(worst)
    } else {
        None
    };
    let (path1, path2) = (traj.particle(1), traj.particle(2));

    let mut table = Table::new(&["t", "r1x", "r1y", "r1z", "r2x", "r2y", "r2z"]);
    for s in &traj.states {
        table.push(vec![s.t, s.r1.x, s.r1.y, s.r1.z, s.r2.x, s.r2.y, s.r2.z]);
    }
    out.table("trajectory", &table)?;
    out.json(
        "trajectories.json",
        &TrajectorySummary {
            samples: traj.len(),
            t_end: p.t_end,
            straightness_1: path1.straightness()?,
            straightness_2: path2.straightness()?,
            closed_form_max_deviation: closed,
        },
    )?;

    let sep = initial.separation();
    let axis = if sep.norm() > 0.0 { sep.normalize() } else { Vec3::x() };
    let proj = |path: &ParticlePath| -> Vec<f64> {
        path.positions.iter().map(|r| r.dot(&axis)).collect()
    };
    let (y1, y2) = (proj(&path1), proj(&path2));
    out.svg(
        "trajectories.svg",
        line_plot(
            &PlotStyle::new("pair trajectories", "t", "position along initial separation"),
            &[
                Series { xs: &traj.times, ys: &y1, color: "firebrick" },
                Series { xs: &traj.times, ys: &y2, color: "steelblue" },
            ],
        ),
    )
}

fn run_ensemble(p: &EnsembleParams, seed: u64, out: &mut Output) -> Result<()> {
    let params = DecayParams::new(p.m1, p.m2, p.alpha, p.sigma)?;
    let ens = Ensemble::sample(&EnsembleSpec::new(p.n, seed, params)?)?;
    let reports: Vec<VarianceReport> = p
        .times
        .iter()
        .map(|&t| {
            if t.is_finite() && t >= 0.0 {
                Ok(ens.collective_variance(t))
            } else {
                Err(Error::domain(format!("ensemble times must be non-negative, got {t}")))
            }
        })
        .collect::<Result<_>>()?;
    match out.format {
        Format::Csv => {
            let mut table = Table::new(&["t", "analytic", "empirical", "se"]);
            for r in &reports {
                table.push(vec![r.t, r.analytic, r.empirical, r.std_error]);
            }
            out.table("ensemble", &table)?;
        }
        Format::Json => out.json("ensemble.json", &reports)?,
    }
    let ts: Vec<f64> = reports.iter().map(|r| r.t).collect();
    let an: Vec<f64> = reports.iter().map(|r| r.analytic).collect();
    let em: Vec<f64> = reports.iter().map(|r| r.empirical).collect();
    out.svg(
        "ensemble.svg",
        line_plot(
            &PlotStyle::new("collective variance", "t", "variance"),
            &[
                Series { xs: &ts, ys: &an, color: "black" },
                Series { xs: &ts, ys: &em, color: "firebrick" },
            ],
        ),
    )
}

#[derive(Serialize)]
struct ImagingSummary {
    f: f64,
    #[serde(rename = "S")]
    s: f64,
    #[serde(rename = "S_prime")]
    s_prime: f64,
    magnification: f64,
    accepted: u64,
    attempts: u64,
    mean: f64,
    rms_width: f64,
    support: [f64; 2],
    support_center: f64,
    support_width: f64,
    /// Geometric images of the mask openings along `x`.
    expected_centers: Vec<f64>,
}

fn run_imaging(p: &ImagingParams, seed: u64, out: &mut Output) -> Result<()> {
    let params = DecayParams::new(p.m1, p.m2, p.alpha, p.sigma)?;
    let lens = LensSetup::new(p.f, p.s, Some(p.s_prime), Vec3::z())?;
    let mask = ApertureMask::new(p.mask, p.mask_plane_offset)?;
    // n = 0 is not rejected here: it yields an empty image downstream
    let spec = EnsembleSpec { n: p.n, seed, params };
    let opts = ScanOptions {
        scan_bins: p.scan_bins,
        scan_range: p.scan_range,
        carrier_momentum: p.carrier_momentum,
        source_width: p.source_width,
        decay_fraction: p.decay_fraction,
        waist: p.waist,
        ..ScanOptions::default()
    };
    let (events, attempts) = simulate_coincidences(&lens, &mask, &spec, &opts)?;
    let hist = image_histogram(&events, attempts, &opts);

    let mut image = Table::new(&["bin_center", "counts"]);
    for (c, n) in hist.centers.iter().zip(&hist.counts) {
        image.push(vec![*c, *n as f64]);
    }
    out.table("image", &image)?;

    let mut traced = Table::new(&["event", "particle", "t", "x", "y", "z"]);
    let mut bundle = Vec::new();
    let tau = 2.0 * params.m2 * p.waist * p.waist;
    for (k, c) in events.iter().take(p.trajectories).enumerate() {
        let p0 = c.p1.norm();
        let dt = (tau / 20.0).min(lens.s / (p0 / params.m1) / 400.0);
        let mut tr = trace_coincidence(&lens, &params, c.decay, c.a, p0, p.waist, dt)?;
        thin(&mut tr.particle1);
        thin(&mut tr.particle2);
        for (which, path) in [(1.0, &tr.particle1), (2.0, &tr.particle2)] {
            for (t, r) in path.times.iter().zip(&path.positions) {
                traced.push(vec![k as f64, which, *t, r.x, r.y, r.z]);
            }
        }
        bundle.push(tr);
    }
    out.table("image_trajectories", &traced)?;

    let m = lens.magnification();
    out.json(
        "imaging.json",
        &ImagingSummary {
            f: lens.f,
            s: lens.s,
            s_prime: lens.s_prime,
            magnification: m,
            accepted: hist.accepted,
            attempts: hist.attempts,
            mean: hist.mean,
            rms_width: hist.rms_width,
            support: hist.support,
            support_center: hist.support_center(),
            support_width: hist.support_width(),
            expected_centers: mask.open_centers().iter().map(|x| x * m).collect(),
        },
    )?;

    let counts: Vec<f64> = hist.counts.iter().map(|&n| n as f64).collect();
    out.svg(
        "image.svg",
        bar_plot(
            &PlotStyle::new("coincidence image", "x on scan plane", "counts"),
            &hist.centers,
            &counts,
            hist.bin_width,
        ),
    )?;
    if out.svg {
        // the axial coordinate goes on the horizontal axis
        let coords: Vec<(Vec<f64>, Vec<f64>)> = bundle
            .iter()
            .flat_map(|tr| [&tr.particle1, &tr.particle2])
            .map(|path| {
                (
                    path.positions.iter().map(|r| r.z).collect(),
                    path.positions.iter().map(|r| r.x).collect(),
                )
            })
            .collect();
        let series: Vec<Series> = coords
            .iter()
            .enumerate()
            .map(|(k, (w, x))| Series {
                xs: w,
                ys: x,
                color: if k % 2 == 0 { "firebrick" } else { "steelblue" },
            })
            .collect();
        out.svg(
            "fig1.svg",
            path_plot(
                &PlotStyle::new("coincidence trajectories", "w (optical axis)", "x"),
                &series,
                &[
                    (0.0, "lens"),
                    (lens.s + mask.plane_offset, "aperture"),
                    (-lens.s_prime, "scan plane"),
                ],
            ),
        )?;
    }
    Ok(())
}

/// Points kept per traced path in the written output.
const TRACE_POINTS: usize = 400;

fn thin(path: &mut ParticlePath) {
    let n = path.times.len();
    let step = n.div_ceil(TRACE_POINTS).max(1);
    if step == 1 {
        return;
    }
    let mut keep: Vec<usize> = (0..n).step_by(step).collect();
    if keep.last() != Some(&(n - 1)) {
        keep.push(n - 1);
    }
    path.times = keep.iter().map(|&k| path.times[k]).collect();
    path.positions = keep.iter().map(|&k| path.positions[k]).collect();
}

#[derive(Serialize)]
struct ConvolutionSummary {
    fwhm: f64,
    alpha: f64,
    t: f64,
    grid_n: usize,
    half_width: f64,
    dev_to_h: f64,
    dev_to_g: f64,
    samples_per_period: f64,
}

#[derive(Serialize)]
struct CurrentSummary {
    alpha: f64,
    t: f64,
    points: Vec<f64>,
    max_speed: f64,
}

#[derive(Serialize)]
struct EnergyShellSummary {
    #[serde(rename = "E_plus")]
    e_plus: f64,
    #[serde(rename = "E_minus")]
    e_minus: f64,
    mu: f64,
    lambda_c: f64,
    a_plus: f64,
    a_minus: f64,
    /// First sign change of `g`, located by linear interpolation.
    first_zero: Option<f64>,
    convolution: Option<ConvolutionSummary>,
    current: Option<CurrentSummary>,
}

fn run_energyshell(p: &EnergyShellParams, out: &mut Output) -> Result<()> {
    if p.samples == 0 || !(p.x_max > 0.0) {
        return Err(Error::domain("energyshell needs samples ≥ 1 and x_max > 0"));
    }
    let band = EnergyBand::new(p.e_plus, p.e_minus, p.mu)?;
    let edges = band_edges(&band)?;
    let xs: Vec<f64> = (1..=p.samples)
        .map(|k| p.x_max * k as f64 / p.samples as f64)
        .collect();
    let g = g_profile(&band, &xs)?;
    let g2: Vec<f64> = g.values.iter().map(|v| v * v).collect();

    let mut fig2 = Table::new(&["x", "g"]);
    let mut fig3 = Table::new(&["x", "g2"]);
    for ((x, v), v2) in xs.iter().zip(&g.values).zip(&g2) {
        fig2.push(vec![*x, *v]);
        fig3.push(vec![*x, *v2]);
    }
    out.table("fig2", &fig2)?;
    out.table("fig3", &fig3)?;

    let first_zero = xs.windows(2).zip(g.values.windows(2)).find_map(|(x, v)| {
        (v[0] * v[1] <= 0.0 && v[0] != v[1])
            .then(|| x[0] + (x[1] - x[0]) * v[0] / (v[0] - v[1]))
    });
    let convolution = p
        .convolution
        .as_ref()
        .map(|c| -> Result<ConvolutionSummary> {
            let alpha = alpha_for_fwhm(c.fwhm);
            let r = energy_band_convolution(&band, alpha, c.t, &GridSpec::new(c.grid_n, c.half_width)?)?;
            Ok(ConvolutionSummary {
                fwhm: c.fwhm,
                alpha,
                t: c.t,
                grid_n: c.grid_n,
                half_width: c.half_width,
                dev_to_h: r.dev_to_h,
                dev_to_g: r.dev_to_g,
                samples_per_period: r.samples_per_period,
            })
        })
        .transpose()?;
    let current = p
        .current
        .as_ref()
        .map(|c| -> Result<CurrentSummary> {
            Ok(CurrentSummary {
                alpha: c.alpha,
                t: c.t,
                points: c.points.clone(),
                max_speed: band_current_check(&band, c.alpha, c.t, &c.points)?,
            })
        })
        .transpose()?;
    out.json(
        "energyshell.json",
        &EnergyShellSummary {
            e_plus: band.e_plus,
            e_minus: band.e_minus,
            mu: band.mu,
            lambda_c: band.lambda_c,
            a_plus: edges.a_plus,
            a_minus: edges.a_minus,
            first_zero,
            convolution,
            current,
        },
    )?;

    out.svg(
        "fig2.svg",
        line_plot(
            &PlotStyle::new("band-limited profile g", "x [λ_c]", "g(x)"),
            &[Series { xs: &xs, ys: &g.values, color: "black" }],
        ),
    )?;
    out.svg(
        "fig3.svg",
        line_plot(
            &PlotStyle::new("squared profile g²", "x [λ_c]", "g(x)²"),
            &[Series { xs: &xs, ys: &g2, color: "black" }],
        ),
    )
}
