//! Momentum-entangled decaying pairs: analytic pair waves, Bohmian
//! trajectories, ensemble statistics, coincidence imaging through a thin lens
//! and energy-shell restricted profiles.
//!
//! Natural units (`ħ = 1`) are used everywhere except in [`regime`].

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ensemble;
pub mod energyshell;
pub mod error;
pub mod grid;
pub mod imaging;
pub mod ode;
pub mod regime;
pub mod stats;
pub mod trajectories;
pub mod wavecore;

pub use error::{Error, Result};
pub use grid::GridSpec;
pub use wavecore::{
    density_peak_check, eval_pair_wave, pair_velocity, reduced_mass, ComplexAmp, DecayParams,
    FreePacket, PairState, PairWave, PeakReport, Vec3,
};
