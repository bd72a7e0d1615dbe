use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform symmetric grid `[-half_width, half_width]` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        let grid = GridSpec { n, half_width };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("grid has no points"));
        }
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return Err(Error::domain(format!(
                "grid half-width must be positive, got {}",
                self.half_width
            )));
        }
        Ok(())
    }

    /// Spacing between adjacent points (the full width for a single point).
    pub fn spacing(&self) -> f64 {
        if self.n < 2 {
            2.0 * self.half_width
        } else {
            2.0 * self.half_width / (self.n - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![0.0];
        }
        let h = self.spacing();
        (0..self.n)
            .map(|i| -self.half_width + i as f64 * h)
            .collect()
    }
}
