//! Central finite-difference gradients with a Richardson accuracy flag.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Relative central-difference step.
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-6;
/// Components whose estimate moves by more than this fraction when the step
/// is halved are flagged.
pub const RICHARDSON_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub gradient: Vec<f64>,
    /// Indices that failed the step-halving check.
    pub flagged: Vec<usize>,
}

/// Probe spacing of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRule {
    pub relative: f64,
    /// Used in place of `|x|` when `|x|` is smaller.
    pub floor: f64,
    /// Hard upper bound on the absolute step.
    pub cap: f64,
    /// The slot must stay non-negative; probes below zero are shortened.
    pub non_negative: bool,
}

impl Default for StepRule {
    fn default() -> Self {
        Self { relative: DEFAULT_RELATIVE_STEP, floor: 1e-3, cap: f64::INFINITY, non_negative: false }
    }
}

impl StepRule {
    pub fn step(&self, x: f64) -> f64 {
        (self.relative * x.abs().max(self.floor)).min(self.cap)
    }
}

/// Gradient of `f` at `x`, slots with `active[i] == false` left at zero.
/// With `richardson` set, each component is also estimated at half the step
/// and flagged if the two disagree beyond [`RICHARDSON_TOLERANCE`].
pub fn central_gradient<F>(
    f: F,
    x: &[f64],
    rules: &[StepRule],
    active: &[bool],
    richardson: bool,
) -> Result<GradientEstimate, usize>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let probe = |i: usize, h: f64| -> Result<f64, usize> {
        let rule = rules[i];
        let up = h;
        let down = if rule.non_negative { h.min(x[i].max(0.0)) } else { h };
        let eval = |delta: f64| -> Result<f64, usize> {
            if delta == 0.0 {
                return f(x).map_err(|_| i);
            }
            let mut y = x.to_vec();
            y[i] += delta;
            match f(&y) {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(i),
            }
        };
        let hi = eval(up)?;
        let lo = eval(-down)?;
        Ok((hi - lo) / (up + down))
    };

    let parts: Vec<(f64, bool)> = (0..x.len())
        .into_par_iter()
        .map(|i| {
            if !active[i] {
                return Ok((0.0, false));
            }
            let h = rules[i].step(x[i]);
            let g = probe(i, h)?;
            if !richardson {
                return Ok((g, false));
            }
            let g_half = probe(i, 0.5 * h)?;
            let diff = (g - g_half).abs();
            // Below this the difference is loss round-off, not truncation.
            let noise_floor = 1e-12 / h;
            Ok((g_half, diff > RICHARDSON_TOLERANCE * g_half.abs() && diff > noise_floor))
        })
        .collect::<Result<Vec<_>, usize>>()?;

    Ok(GradientEstimate {
        gradient: parts.iter().map(|p| p.0).collect(),
        flagged: parts.iter().enumerate().filter(|(_, p)| p.1).map(|(i, _)| i).collect(),
    })
}

/// Maps a failing slot index to the public error.
pub fn probe_error(slot_name: String) -> Error {
    Error::GradientProbe { slot: slot_name }
}
