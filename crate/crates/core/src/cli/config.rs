//! Scenario files: TOML with a few top-level keys and one section named
//! after the command.
//!
//! ```toml
//! command = "regime"
//! seed = 7
//!
//! [regime]
//! L0 = "2mm"
//! wavelength = "351.1nm"
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{thin_lens_conjugate, MaskShape};
use crate::regime::parse_length;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Trajectories,
    Ensemble,
    Regime,
    Imaging,
    Energyshell,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Trajectories => "trajectories",
            Command::Ensemble => "ensemble",
            Command::Regime => "regime",
            Command::Imaging => "imaging",
            Command::Energyshell => "energyshell",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// SI length given either as meters or as text with a unit suffix.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum LengthInput {
    Meters(f64),
    Text(String),
}

impl LengthInput {
    pub fn meters(&self) -> Result<f64> {
        match self {
            LengthInput::Meters(v) => Ok(*v),
            LengthInput::Text(s) => parse_length(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegime {
    #[serde(rename = "L0")]
    l0: LengthInput,
    wavelength: LengthInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeParams {
    pub l0_meters: f64,
    pub wavelength_meters: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryParams {
    #[serde(default = "one")]
    pub m1: f64,
    #[serde(default = "one")]
    pub m2: f64,
    pub alpha: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "default_r1")]
    pub r1: [f64; 3],
    #[serde(default)]
    pub r2: [f64; 3],
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_r1() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}
fn default_t_end() -> f64 {
    10.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleParams {
    #[serde(default = "one")]
    pub m1: f64,
    #[serde(default = "one")]
    pub m2: f64,
    pub alpha: f64,
    pub sigma: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
}

fn default_n() -> usize {
    100_000
}
fn default_times() -> Vec<f64> {
    vec![0.0, 1.0, 10.0, 100.0]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImaging {
    f: f64,
    #[serde(rename = "S")]
    s: f64,
    #[serde(rename = "S_prime")]
    s_prime: Option<f64>,
    mask: MaskShape,
    #[serde(default)]
    mask_plane_offset: f64,
    #[serde(default = "default_imaging_sigma")]
    sigma: f64,
    #[serde(default = "one")]
    alpha: f64,
    #[serde(default = "one")]
    m1: f64,
    #[serde(default = "one")]
    m2: f64,
    #[serde(default = "default_imaging_n")]
    n: usize,
    #[serde(default = "default_bins")]
    scan_bins: usize,
    #[serde(default = "default_scan_range")]
    scan_range: [f64; 2],
    #[serde(default = "default_carrier")]
    carrier_momentum: f64,
    #[serde(default = "default_source_width")]
    source_width: f64,
    #[serde(default = "default_decay_fraction")]
    decay_fraction: f64,
    #[serde(default = "default_waist")]
    waist: f64,
    #[serde(default = "default_illustrative")]
    trajectories: usize,
}

fn default_imaging_sigma() -> f64 {
    1e-4
}
fn default_imaging_n() -> usize {
    10_000
}
fn default_bins() -> usize {
    200
}
fn default_scan_range() -> [f64; 2] {
    [-1.5, 1.5]
}
fn default_carrier() -> f64 {
    2.0
}
fn default_source_width() -> f64 {
    0.5
}
fn default_decay_fraction() -> f64 {
    0.5
}
fn default_waist() -> f64 {
    0.01
}
fn default_illustrative() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImagingParams {
    pub f: f64,
    pub s: f64,
    pub s_prime: f64,
    pub mask: MaskShape,
    pub mask_plane_offset: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub m1: f64,
    pub m2: f64,
    pub n: usize,
    pub scan_bins: usize,
    pub scan_range: [f64; 2],
    pub carrier_momentum: f64,
    pub source_width: f64,
    pub decay_fraction: f64,
    pub waist: f64,
    pub trajectories: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvolutionParams {
    #[serde(default = "default_fwhm")]
    pub fwhm: f64,
    #[serde(default)]
    pub t: f64,
    #[serde(default = "default_conv_n")]
    pub grid_n: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
}

fn default_fwhm() -> f64 {
    20.0
}
fn default_conv_n() -> usize {
    4096
}
fn default_half_width() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentParams {
    #[serde(default = "default_current_alpha")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "default_current_points")]
    pub points: Vec<f64>,
}

fn default_current_alpha() -> f64 {
    0.01
}
fn default_current_points() -> Vec<f64> {
    vec![0.25, 0.7, 1.25]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyShellParams {
    #[serde(rename = "E_plus", default = "default_e_plus")]
    pub e_plus: f64,
    #[serde(rename = "E_minus", default = "default_e_minus")]
    pub e_minus: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub convolution: Option<ConvolutionParams>,
    pub current: Option<CurrentParams>,
}

fn default_e_plus() -> f64 {
    0.02
}
fn default_e_minus() -> f64 {
    0.999 * 0.02
}
fn default_mu() -> f64 {
    0.5
}
fn default_x_max() -> f64 {
    100.0
}
fn default_samples() -> usize {
    4000
}

impl Default for EnergyShellParams {
    fn default() -> Self {
        EnergyShellParams {
            e_plus: default_e_plus(),
            e_minus: default_e_minus(),
            mu: default_mu(),
            x_max: default_x_max(),
            samples: default_samples(),
            convolution: None,
            current: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CommandParams {
    Trajectories(TrajectoryParams),
    Ensemble(EnsembleParams),
    Regime(RegimeParams),
    Imaging(ImagingParams),
    Energyshell(EnergyShellParams),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub command: Command,
    pub params: CommandParams,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub format: Format,
    pub emit_svg: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    format: Option<Format>,
    emit_svg: Option<bool>,
    trajectories: Option<TrajectoryParams>,
    ensemble: Option<EnsembleParams>,
    regime: Option<RawRegime>,
    imaging: Option<RawImaging>,
    energyshell: Option<EnergyShellParams>,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn require<T>(section: Option<T>, command: Command) -> Result<T> {
    section.ok_or_else(|| {
        Error::Config(format!(
            "missing section [{}] required by command {}",
            command.name(),
            command.name()
        ))
    })
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(config_err)?;
    let present = [
        ("trajectories", raw.trajectories.is_some()),
        ("ensemble", raw.ensemble.is_some()),
        ("regime", raw.regime.is_some()),
        ("imaging", raw.imaging.is_some()),
        ("energyshell", raw.energyshell.is_some()),
    ];
    if let Some((name, _)) = present
        .iter()
        .find(|(name, on)| *on && *name != raw.command.name())
    {
        return Err(Error::Config(format!(
            "section [{name}] does not belong to command {}",
            raw.command.name()
        )));
    }

    let params = match raw.command {
        Command::Regime => {
            let r = require(raw.regime, raw.command)?;
            CommandParams::Regime(RegimeParams {
                l0_meters: r.l0.meters()?,
                wavelength_meters: r.wavelength.meters()?,
            })
        }
        Command::Trajectories => {
            CommandParams::Trajectories(require(raw.trajectories, raw.command)?)
        }
        Command::Ensemble => CommandParams::Ensemble(require(raw.ensemble, raw.command)?),
        Command::Imaging => {
            let r = require(raw.imaging, raw.command)?;
            let s_prime = match r.s_prime {
                Some(v) => v,
                None => thin_lens_conjugate(r.s, r.f)
                    .map_err(|e| Error::Config(format!("cannot complete S_prime: {e}")))?
                    .s_prime,
            };
            CommandParams::Imaging(ImagingParams {
                f: r.f,
                s: r.s,
                s_prime,
                mask: r.mask,
                mask_plane_offset: r.mask_plane_offset,
                sigma: r.sigma,
                alpha: r.alpha,
                m1: r.m1,
                m2: r.m2,
                n: r.n,
                scan_bins: r.scan_bins,
                scan_range: r.scan_range,
                carrier_momentum: r.carrier_momentum,
                source_width: r.source_width,
                decay_fraction: r.decay_fraction,
                waist: r.waist,
                trajectories: r.trajectories,
            })
        }
        Command::Energyshell => CommandParams::Energyshell(raw.energyshell.unwrap_or_default()),
    };

    Ok(ScenarioConfig {
        command: raw.command,
        params,
        out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from("out")),
        seed: raw.seed.unwrap_or(0),
        format: raw.format.unwrap_or_default(),
        emit_svg: raw.emit_svg.unwrap_or(false),
    })
}
