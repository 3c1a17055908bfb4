use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Delay sweep. The reported axis is `t_start + k * t_step`; the evolution
/// actually simulated at point `k` lasts `scale_factor` times that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_step: f64,
    pub n_points: usize,
    pub scale_factor: f64,
}

impl Default for TimeGrid {
    /// 0 to 296 us in 4 us steps.
    fn default() -> Self {
        Self { t_start: 0.0, t_step: 4.0, n_points: 75, scale_factor: 1.0 }
    }
}

impl TimeGrid {
    pub fn new(t_start: f64, t_step: f64, n_points: usize, scale_factor: f64) -> Result<Self> {
        let grid = Self { t_start, t_step, n_points, scale_factor };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_scale(self, scale_factor: f64) -> Self {
        Self { scale_factor, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_step > 0.0) || !self.t_step.is_finite() {
            return Err(Error::Config(format!("t_step must be > 0, got {}", self.t_step)));
        }
        if self.n_points < 2 {
            return Err(Error::Config(format!("need at least 2 grid points, got {}", self.n_points)));
        }
        if !(self.scale_factor > 0.0) || !self.scale_factor.is_finite() {
            return Err(Error::Config(format!(
                "scale_factor must be > 0, got {}",
                self.scale_factor
            )));
        }
        if !(self.t_start >= 0.0) || !self.t_start.is_finite() {
            return Err(Error::Config(format!("t_start must be >= 0, got {}", self.t_start)));
        }
        Ok(())
    }

    /// Reported (unscaled) delay of point `k`, us.
    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.t_step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.time(k)).collect()
    }

    /// Simulated delay of point `k`, us.
    pub fn evolution_time(&self, k: usize) -> f64 {
        self.scale_factor * self.time(k)
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_points - 1)
    }

    /// Same span with `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            t_step: self.t_step / factor as f64,
            n_points: (self.n_points - 1) * factor + 1,
            ..*self
        }
    }
}
