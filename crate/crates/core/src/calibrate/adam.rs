//! Adam on nondimensionalised parameters.
//!
//! The optimiser sees `z_i = x_i / s_i` with `s_i = |x_i|` at the start (1
//! where that is zero), so a single step size suits slots whose magnitudes
//! differ by many orders. `log_t` keeps scale 1: a unit step in it is
//! already a relative change of the temperature. Frozen slots keep their
//! initial values.

use serde::{Deserialize, Serialize};

use super::gradient::{central_gradient, probe_error, StepRule, DEFAULT_RELATIVE_STEP};
use super::loss::{check_records, loss_fn};
use super::params::{ParameterVector, Slot};
use super::report::{DerivedReport, FitResult};
use crate::error::{Error, Result};
use crate::measurement::ExperimentRecord;
use crate::propagator::ExperimentKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub restarts: usize,
    /// Step size of restart `r` is `alpha * alpha_decay^r`.
    pub alpha_decay: f64,
    pub gradient_step: f64,
    /// Stop a run once the best loss improved by less than this over the
    /// last `patience` iterations.
    pub tolerance: f64,
    pub patience: usize,
    /// Freeze slots that the records cannot resolve (see [`free_slots`]).
    pub auto_freeze: bool,
    pub freeze_coupling: bool,
    /// Additional slots to hold fixed, by name (e.g. `"log_t[0]"`).
    pub frozen: Vec<String>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            max_iters: 300,
            restarts: 3,
            alpha_decay: 0.1,
            gradient_step: DEFAULT_RELATIVE_STEP,
            tolerance: 1e-10,
            patience: 20,
            auto_freeze: true,
            freeze_coupling: false,
            frozen: Vec::new(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::Config("max_iters and restarts must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.eps > 0.0) {
            return Err(Error::Config("need 0 <= beta < 1 and eps > 0".into()));
        }
        if !(self.alpha_decay > 0.0) || !(self.gradient_step > 0.0) {
            return Err(Error::Config("alpha_decay and gradient_step must be positive".into()));
        }
        Ok(())
    }
}

/// Bias-corrected first and second moments.
#[derive(Debug, Clone)]
pub struct AdamState {
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamState {
    pub fn new(dim: usize, cfg: &FitConfig) -> Self {
        Self { beta1: cfg.beta1, beta2: cfg.beta2, eps: cfg.eps, m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }

    /// The update `-alpha * m_hat / (sqrt(v_hat) + eps)` for gradient `g`.
    pub fn step(&mut self, g: &[f64], alpha: f64) -> Vec<f64> {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        g.iter()
            .enumerate()
            .map(|(i, &gi)| {
                self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * gi;
                self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * gi * gi;
                let m_hat = self.m[i] / c1;
                let v_hat = self.v[i] / c2;
                -alpha * m_hat / (v_hat.sqrt() + self.eps)
            })
            .collect()
    }
}

/// Longest simulated delay across the records, doubled for echo sequences.
fn longest_evolution(records: &[ExperimentRecord]) -> f64 {
    records
        .iter()
        .map(|r| {
            let t = r.grid.evolution_time(r.grid.n_points - 1);
            if r.kind.is_echo() { 2.0 * t } else { t }
        })
        .fold(0.0, f64::max)
}

/// Finite-difference spacing per slot. Frequency and coupling probes are
/// capped so the phase they add over the longest delay stays below 1e-4 rad.
pub fn step_rules(params: &ParameterVector, records: &[ExperimentRecord], relative: f64) -> Vec<StepRule> {
    let t_max = longest_evolution(records).max(1e-12);
    params
        .layout
        .slots()
        .iter()
        .map(|slot| match slot {
            Slot::Omega { .. } | Slot::Coupling { .. } | Slot::CouplingEntry { .. } => {
                StepRule { relative, floor: 1e-3, cap: 1e-4 / t_max, non_negative: false }
            }
            Slot::Gamma { .. } => StepRule { relative, floor: 1e-6, cap: f64::INFINITY, non_negative: true },
            Slot::LogTemperature { .. } => StepRule { relative, floor: 1.0, cap: f64::INFINITY, non_negative: false },
        })
        .collect()
}

/// Which slots a fit may move. Frequencies are held fixed unless some record
/// is a Ramsey-type sweep (relaxation sweeps never see the phase and the echo
/// refocuses it); couplings are held when asked; named slots are held; and
/// with `auto_freeze` any remaining slot whose population sensitivity is
/// linearly dependent on the others (see [`identifiable_slots`]) is held.
pub fn free_slots(params: &ParameterVector, records: &[ExperimentRecord], cfg: &FitConfig) -> Result<Vec<bool>> {
    let slots = params.layout.slots();
    let ramsey = records.iter().any(|r| {
        matches!(r.kind, ExperimentKind::T2Star | ExperimentKind::T2StarHX | ExperimentKind::T2StarHI)
    });
    let mut free: Vec<bool> = slots
        .iter()
        .map(|s| !(s.is_frequency() && !ramsey) && !(s.is_coupling() && cfg.freeze_coupling))
        .collect();
    for name in &cfg.frozen {
        let i = params
            .layout
            .index_by_name(name)
            .ok_or_else(|| Error::Config(format!("unknown slot '{name}'")))?;
        free[i] = false;
    }
    if cfg.auto_freeze {
        let resolved = identifiable_slots(params, records, &free, IDENTIFIABILITY_TOLERANCE)?;
        for (f, r) in free.iter_mut().zip(resolved) {
            *f &= r;
        }
    }
    Ok(free)
}

/// Relative residual below which a sensitivity column counts as dependent.
pub const IDENTIFIABILITY_TOLERANCE: f64 = 5e-2;

/// Greedy identifiability analysis on the Jacobian of all recorded
/// populations with respect to the relative change of each candidate slot.
///
/// Candidates are visited in the order `omega_z`, `gamma`, couplings,
/// transverse frequencies, `log_t`; a slot is kept when the part of its
/// column orthogonal to the kept columns has norm at least `tol` times the
/// largest column norm.
pub fn identifiable_slots(
    params: &ParameterVector,
    records: &[ExperimentRecord],
    candidates: &[bool],
    tol: f64,
) -> Result<Vec<bool>> {
    Ok(sensitivity_ratios(params, records, candidates, tol)?
        .into_iter()
        .map(|r| r.is_some_and(|r| r >= tol))
        .collect())
}

/// For each candidate slot, the norm of its sensitivity column orthogonal to
/// the slots kept before it (at threshold `tol`), relative to the largest
/// column norm. `None` for non-candidates.
pub fn sensitivity_ratios(
    params: &ParameterVector,
    records: &[ExperimentRecord],
    candidates: &[bool],
    tol: f64,
) -> Result<Vec<Option<f64>>> {
    use super::loss::model_populations;
    let slots = params.layout.slots();
    let rules = step_rules(params, records, 1e-5);
    let flat = |p: &ParameterVector| -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for r in records {
            out.extend(model_populations(p, r)?.into_iter().flatten());
        }
        Ok(out)
    };
    let columns: Vec<Option<Vec<f64>>> = (0..slots.len())
        .map(|i| {
            if !candidates[i] {
                return Ok(None);
            }
            let x = params.values[i];
            let h = rules[i].step(x);
            let down = if rules[i].non_negative { h.min(x.max(0.0)) } else { h };
            let mut up_p = params.clone();
            up_p.values[i] += h;
            let mut dn_p = params.clone();
            dn_p.values[i] -= down;
            let (a, b) = (flat(&up_p)?, flat(&dn_p)?);
            let scale = match slots[i] {
                Slot::LogTemperature { .. } => 1.0,
                _ if x != 0.0 => x.abs(),
                _ => 1.0,
            };
            Ok(Some(a.iter().zip(&b).map(|(u, d)| (u - d) / (h + down) * scale).collect()))
        })
        .collect::<Result<_>>()?;

    let mut ratios = vec![None; slots.len()];
    let max_norm = columns.iter().flatten().map(|c| norm(c)).fold(0.0, f64::max);
    if max_norm == 0.0 {
        for (r, c) in ratios.iter_mut().zip(&columns) {
            if c.is_some() {
                *r = Some(0.0);
            }
        }
        return Ok(ratios);
    }
    let priority = |s: &Slot| match s {
        Slot::Omega { axis: 2, .. } => 0,
        Slot::Gamma { .. } => 1,
        Slot::Coupling { .. } | Slot::CouplingEntry { .. } => 2,
        Slot::Omega { .. } => 3,
        Slot::LogTemperature { .. } => 4,
    };
    let mut order: Vec<usize> = (0..slots.len()).collect();
    order.sort_by_key(|&i| (priority(&slots[i]), i));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in order {
        let Some(col) = &columns[i] else { continue };
        let mut r = col.clone();
        // Two Gram-Schmidt passes for stability.
        for _ in 0..2 {
            for q in &basis {
                let d = dot(&r, q);
                r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= d * qi);
            }
        }
        let n = norm(&r);
        ratios[i] = Some(n / max_norm);
        if n >= tol * max_norm {
            basis.push(r.into_iter().map(|v| v / n).collect());
        }
    }
    Ok(ratios)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Fits `initial` to `records` with Adam and chained restarts, returning the
/// best iterate seen.
pub fn adam_fit(initial: &ParameterVector, records: &[ExperimentRecord], cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    check_records(&initial.layout, records)?;
    if records.is_empty() {
        return Err(Error::RecordMismatch("nothing to fit".into()));
    }
    let free = free_slots(initial, records, cfg)?;
    fit_with_mask(initial, records, cfg, &free)
}

/// [`adam_fit`] with an explicit free-slot mask.
pub fn fit_with_mask(
    initial: &ParameterVector,
    records: &[ExperimentRecord],
    cfg: &FitConfig,
    free: &[bool],
) -> Result<FitResult> {
    cfg.validate()?;
    check_records(&initial.layout, records)?;
    let slots = initial.layout.slots();
    let dim = slots.len();
    let scale: Vec<f64> = slots
        .iter()
        .zip(&initial.values)
        .map(|(s, &x)| match s {
            Slot::LogTemperature { .. } => 1.0,
            _ if x != 0.0 => x.abs(),
            _ => 1.0,
        })
        .collect();
    let rules = step_rules(initial, records, cfg.gradient_step);
    let to_x = |z: &[f64]| -> ParameterVector {
        ParameterVector { layout: initial.layout, values: z.iter().zip(&scale).map(|(zi, s)| zi * s).collect() }
    };
    let loss_z = |z: &[f64]| loss_fn(&to_x(z), records);
    let gradient_z = |z: &[f64], richardson: bool| {
        let x = to_x(z);
        let est = central_gradient(|v: &[f64]| loss_fn(&to_x_raw(initial, v), records), &x.values, &rules, free, richardson)
            .map_err(|slot| probe_error(slots[slot].to_string()))?;
        let g: Vec<f64> = est.gradient.iter().zip(&scale).map(|(g, s)| g * s).collect();
        Ok::<_, Error>((g, est.flagged))
    };
    let non_negative: Vec<bool> = slots.iter().map(|s| matches!(s, Slot::Gamma { .. })).collect();

    let z0: Vec<f64> = initial.values.iter().zip(&scale).map(|(x, s)| x / s).collect();
    let mut best_z = z0.clone();
    let mut best = loss_z(&z0)?;
    let mut history = vec![best];
    let mut restart_losses = Vec::with_capacity(cfg.restarts);
    let mut iterations = 0;
    let mut diverged_runs = 0;
    let mut last_error = String::new();

    for r in 0..cfg.restarts {
        let alpha = cfg.alpha * cfg.alpha_decay.powi(r as i32);
        let mut state = AdamState::new(dim, cfg);
        let mut z = best_z.clone();
        let mut best_track = vec![best];
        let mut diverged = false;
        for _ in 0..cfg.max_iters {
            let g = match gradient_z(&z, false) {
                Ok((g, _)) => g,
                Err(e) => {
                    diverged = true;
                    last_error = e.to_string();
                    break;
                }
            };
            let update = state.step(&g, alpha);
            for i in 0..dim {
                if free[i] {
                    z[i] += update[i];
                    if non_negative[i] && z[i] < 0.0 {
                        z[i] = 0.0;
                    }
                }
            }
            iterations += 1;
            let f = match loss_z(&z) {
                Ok(f) if f.is_finite() => f,
                Ok(_) => {
                    diverged = true;
                    last_error = "non-finite loss".into();
                    break;
                }
                Err(e) => {
                    diverged = true;
                    last_error = e.to_string();
                    break;
                }
            };
            history.push(f);
            if f < best {
                best = f;
                best_z = z.clone();
            }
            best_track.push(best);
            let n = best_track.len();
            if n > cfg.patience && best_track[n - 1 - cfg.patience] - best < cfg.tolerance {
                break;
            }
        }
        if diverged {
            diverged_runs += 1;
        }
        restart_losses.push(best);
    }
    if diverged_runs == cfg.restarts {
        return Err(Error::FitFailed { diagnostics: format!("{diverged_runs} run(s) diverged; last: {last_error}") });
    }

    let best_params = to_x(&best_z);
    let (_, flagged) = gradient_z(&best_z, true)?;
    let qubits = records[0].qubits.clone();
    Ok(FitResult {
        derived: DerivedReport::from_vector(&best_params, &qubits)?,
        parameters: FitResult::named_parameters(&best_params),
        qubits,
        loss: best,
        best_params,
        loss_history: history,
        restart_losses,
        iterations_used: iterations,
        restarts_used: cfg.restarts,
        frozen: slots.iter().zip(free).filter(|(_, f)| !**f).map(|(s, _)| s.to_string()).collect(),
        flagged_gradient: flagged.into_iter().map(|i| slots[i].to_string()).collect(),
    })
}

fn to_x_raw(template: &ParameterVector, values: &[f64]) -> ParameterVector {
    ParameterVector { layout: template.layout, values: values.to_vec() }
}
