use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use lindblad_calib::calibrate::{
    adam_fit, claimed_comparison, model_populations, DerivedReport, FitConfig, FitResult, ParameterSet,
    ParameterVector,
};
use lindblad_calib::measurement::{
    estimate_confusion, mitigate as mitigate_record, sample_counts_on_stream, synthesize_record, Acquisition,
    ConfusionMatrix, ExperimentRecord,
};
use lindblad_calib::propagator::{ExperimentKind, TimeGrid};
use lindblad_calib::qdyn::operators::bitstring;
use lindblad_calib::stitch::tables::{table_fits, CouplingMode};
use lindblad_calib::stitch::{consistency_check, predict_composite, Combine, SubsystemFit, Thresholds};
use serde::{Deserialize, Serialize};

use crate::config::DeviceConfig;
use crate::error::{exit, CliError};
use crate::svg::population_plot;
use crate::{FitArgs, MitigateArgs, PlotArgs, SimulateArgs, StitchArgs};

type CmdResult = Result<i32, CliError>;

/// Readout calibration runs: counts observed after preparing each basis
/// state, keyed by the prepared bitstring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCounts {
    pub qubits: Vec<usize>,
    pub shots: u64,
    pub seed: u64,
    pub counts: BTreeMap<String, Vec<u64>>,
}

impl CalibrationCounts {
    /// Calibration draws use RNG streams above those of any record row.
    const STREAM_OFFSET: u64 = 1 << 32;

    pub fn sample(qubits: Vec<usize>, m: &ConfusionMatrix, shots: u64, seed: u64) -> Result<Self, CliError> {
        let n = qubits.len();
        let mut counts = BTreeMap::new();
        for j in 0..m.dim() {
            let column: Vec<f64> = m.matrix().column(j).iter().copied().collect();
            let c = sample_counts_on_stream(&column, shots, seed, Self::STREAM_OFFSET + j as u64)?;
            counts.insert(bitstring(j, n), c);
        }
        Ok(Self { qubits, shots, seed, counts })
    }

    pub fn confusion(&self) -> Result<ConfusionMatrix, CliError> {
        let n = self.qubits.len();
        let mut by_index = BTreeMap::new();
        for (label, c) in &self.counts {
            let j = usize::from_str_radix(label, 2)
                .ok()
                .filter(|_| label.len() == n)
                .ok_or_else(|| CliError::input(format!("bad prepared-state label '{label}'")))?;
            by_index.insert(j, c.clone());
        }
        Ok(estimate_confusion(n, &by_index)?)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("invalid calibration {}: {e}", path.display())))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::new(exit::FAILURE, e.to_string())),
    }
}

fn say(out: &mut dyn Write, text: &str) {
    let _ = out.write_all(text.as_bytes());
}

pub fn load_record(path: &Path) -> Result<ExperimentRecord, CliError> {
    ExperimentRecord::from_csv(&read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn load_fit(path: &Path) -> Result<FitResult, CliError> {
    FitResult::from_json(&read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Ground truth written next to a simulated record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub qubits: Vec<usize>,
    pub params: ParameterVector,
    pub derived: DerivedReport,
}

pub fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = DeviceConfig::load(a.config.as_deref())?;
    let kind: ExperimentKind = a.kind.parse().map_err(CliError::from_core_config)?;
    let grid = TimeGrid::new(a.grid.t0_us, a.grid.dt_us, a.grid.steps, a.grid.scale).map_err(CliError::from_core_config)?;
    let truth = cfg.claimed(a.first_qubit, a.qubits)?;
    let (spec, noise) = truth.to_specs().map_err(CliError::from_core_config)?;
    let qubits: Vec<usize> = (a.first_qubit..a.first_qubit + a.qubits).collect();
    let confusion = cfg.confusion(a.first_qubit, a.qubits)?;
    let acq = Acquisition { shots: a.shots, seed: a.seed, confusion: confusion.clone() };
    let record = synthesize_record(kind, &spec, &noise, &grid, qubits.clone(), &acq)?;
    emit(a.out.as_deref(), &record.to_csv(), out)?;

    let truth_path = a.truth_out.clone().or_else(|| a.out.as_ref().map(|p| sidecar_path(p)));
    if let Some(p) = truth_path {
        let params = ParameterVector::pack(&truth)?;
        let side = TruthSidecar { derived: DerivedReport::from_vector(&params, &qubits)?, qubits: qubits.clone(), params };
        write(&p, &(to_json(&side)? + "\n"))?;
    }
    if let Some(p) = &a.calibration_out {
        let m = confusion.unwrap_or_else(|| ConfusionMatrix::identity(a.qubits));
        let shots = if a.shots == 0 { 8192 } else { a.shots };
        write(p, &(to_json(&CalibrationCounts::sample(qubits, &m, shots, a.seed)?)? + "\n"))?;
    }
    Ok(exit::SUCCESS)
}

fn sidecar_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::new(exit::FAILURE, e.to_string()))
}

pub fn fit(a: &FitArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = DeviceConfig::load(a.config.as_deref())?;
    let mut records = a.records.iter().map(|p| load_record(p)).collect::<Result<Vec<_>, _>>()?;
    let qubits = records[0].qubits.clone();
    for (r, p) in records.iter().zip(&a.records).skip(1) {
        if r.qubits != qubits {
            return Err(CliError::input(format!(
                "{} covers qubits {:?}, the first record covers {:?}",
                p.display(),
                r.qubits,
                qubits
            )));
        }
    }
    if let Some(path) = &a.confusion {
        let cal = CalibrationCounts::load(path)?;
        if cal.qubits != qubits {
            return Err(CliError::input(format!("calibration covers qubits {:?}, records cover {qubits:?}", cal.qubits)));
        }
        let m = cal.confusion()?;
        records = records.iter().map(|r| mitigate_record(r, &m)).collect::<Result<_, _>>()?;
    }
    let claimed = cfg.claimed(qubits[0], qubits.len())?;
    let initial = ParameterVector::pack(&claimed)?;
    let fit_cfg = FitConfig {
        alpha: a.alpha,
        max_iters: a.iters,
        restarts: a.restarts,
        freeze_coupling: a.freeze_coupling,
        frozen: a.freeze.clone(),
        auto_freeze: !a.no_auto_freeze,
        ..FitConfig::default()
    };
    fit_cfg.validate().map_err(CliError::from_core_config)?;
    let claimed_loss = claimed_comparison(&initial, &records)?;
    let result = adam_fit(&initial, &records, &fit_cfg)?;
    write(&a.out, &result.to_json()?)?;

    let claimed_report = DerivedReport::from_vector(&initial, &qubits)?;
    let mut table = result.derived.render(Some(&claimed_report));
    table.push_str(&format!("loss claimed {:.4e}  fit {:.4e}\n", claimed_loss, result.loss));
    if !result.frozen.is_empty() {
        table.push_str(&format!("held: {}\n", result.frozen.join(", ")));
    }
    if let Some(p) = &a.table_out {
        write(p, &table)?;
    }
    say(out, &table);
    Ok(exit::SUCCESS)
}

pub fn stitch(a: &StitchArgs, out: &mut dyn Write) -> CmdResult {
    let mut fits = Vec::new();
    if let Some(mode) = &a.canned {
        let mode = match mode.as_str() {
            "held" => CouplingMode::Held,
            "refit" => CouplingMode::Refit,
            other => return Err(CliError::config(format!("--canned expects 'held' or 'refit', got '{other}'"))),
        };
        fits.extend(table_fits(mode)?);
    }
    for p in &a.fits {
        fits.push(SubsystemFit::new(load_fit(p)?).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?);
    }
    if fits.len() < 2 {
        return Err(CliError::config("stitch needs at least two fit results"));
    }
    let defaults = Thresholds::default();
    let thresholds = Thresholds {
        omega: a.omega_tol.or(defaults.omega),
        t1: a.t1_tol.or(defaults.t1),
        gamma: a.gamma_tol.or(defaults.gamma),
        temperature: a.temperature_tol.or(defaults.temperature),
        j: a.j_tol.or(defaults.j),
        include_frozen: a.include_frozen,
    };
    let report = consistency_check(&fits, &thresholds)?;
    say(out, &report.render());
    if let Some(p) = &a.out {
        write(p, &report.to_json()?)?;
    }
    if !a.predict.is_empty() {
        let combine = if a.loss_weighted { Combine::LossWeighted } else { Combine::Mean };
        let set: ParameterSet = predict_composite(&fits, &a.predict, combine)?;
        let params = ParameterVector::pack(&set).or_else(|_| {
            // General-mode couplings do not pack into simple slots.
            ParameterVector::pack(&ParameterSet { mode: lindblad_calib::qdyn::HamiltonianMode::General, ..set.clone() })
        })?;
        let side = TruthSidecar { derived: DerivedReport::from_vector(&params, &a.predict)?, qubits: a.predict.clone(), params };
        say(out, &side.derived.render(None));
        if let Some(p) = &a.predict_out {
            write(p, &(to_json(&side)? + "\n"))?;
        }
    }
    Ok(if report.pass { exit::SUCCESS } else { exit::INCONSISTENT })
}

pub fn plot(a: &PlotArgs, _out: &mut dyn Write) -> CmdResult {
    let record = load_record(&a.record)?;
    let model = match &a.fit {
        None => None,
        Some(p) => {
            let fit = load_fit(p)?;
            if fit.qubits != record.qubits {
                return Err(CliError::input(format!(
                    "fit covers qubits {:?}, record covers {:?}",
                    fit.qubits, record.qubits
                )));
            }
            let mut shown = record.clone();
            if let Some(s) = a.scale {
                shown.grid = shown.grid.with_scale(s);
                shown.grid.validate().map_err(CliError::from_core_config)?;
            }
            Some(model_populations(&fit.best_params, &shown)?)
        }
    };
    let title = format!("{} on qubits {:?}", record.kind, record.qubits);
    write(&a.out, &population_plot(&record, model.as_deref(), &title))?;
    Ok(exit::SUCCESS)
}

pub fn mitigate(a: &MitigateArgs, out: &mut dyn Write) -> CmdResult {
    if a.confusion.is_none() && a.flips.is_empty() {
        return Err(CliError::config("mitigate needs --confusion or --flips"));
    }
    let record = load_record(&a.record)?;
    let m = match (&a.confusion, a.flips.is_empty()) {
        (Some(p), _) => {
            let cal = CalibrationCounts::load(p)?;
            if cal.qubits != record.qubits {
                return Err(CliError::input(format!(
                    "calibration covers qubits {:?}, record covers {:?}",
                    cal.qubits, record.qubits
                )));
            }
            cal.confusion()?
        }
        (None, false) => {
            if a.flips.len() != record.n_qubits() {
                return Err(CliError::input("one flip probability per record qubit is required"));
            }
            ConfusionMatrix::from_flips(&a.flips).map_err(CliError::from_core_config)?
        }
        (None, true) => unreachable!("checked above"),
    };
    let fixed = mitigate_record(&record, &m)?;
    emit(a.out.as_deref(), &fixed.to_csv(), out)?;
    Ok(exit::SUCCESS)
}
