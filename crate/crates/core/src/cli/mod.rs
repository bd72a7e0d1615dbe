//! Scenario-driven front end: config parsing, execution and file output.

pub mod config;
pub mod io;
pub mod run;
pub mod svg;

use std::path::{Path, PathBuf};

pub use config::{parse_config, Command, CommandParams, Format, ScenarioConfig};
pub use io::{format_float, Table};
pub use run::{run_scenario, ExitReport};
pub use svg::PlotStyle;

use crate::error::{Error, Result};

/// Values given on the command line that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub emit_svg: bool,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut c = parse_config(&text)?;
    if let Some(dir) = &overrides.out_dir {
        c.out_dir = dir.clone();
    }
    if let Some(seed) = overrides.seed {
        c.seed = seed;
    }
    if let Some(f) = overrides.format {
        c.format = f;
    }
    c.emit_svg |= overrides.emit_svg;
    Ok(c)
}
