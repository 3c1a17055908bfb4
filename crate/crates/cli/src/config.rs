use std::path::Path;

use lindblad_calib::calibrate::ParameterSet;
use lindblad_calib::measurement::ConfusionMatrix;
use lindblad_calib::stitch::tables::{CLAIMED_J_RAD_PER_NS, CLAIMED_OMEGA_RAD_PER_NS, CLAIMED_T1_US};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Claimed device parameters. Key names carry their units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub n_qubits: usize,
    #[serde(default)]
    pub omega_rad_per_ns: Vec<f64>,
    /// Ordinary frequencies, for devices quoted as nu rather than omega.
    /// Converted to `omega_rad_per_ns` on load; give one or the other.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_ghz: Option<Vec<f64>>,
    pub t1_us: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_us: Option<Vec<f64>>,
    /// One per neighbouring pair.
    #[serde(default)]
    pub j_rad_per_ns: Vec<f64>,
    /// Starting temperature for fits, and the temperature used by `simulate`.
    #[serde(default = "default_temperature")]
    pub temperature_mk: f64,
    /// Per-qubit readout flip probabilities; absent means ideal readout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_flip: Option<Vec<f64>>,
}

fn default_temperature() -> f64 {
    50.0
}

impl Default for DeviceConfig {
    /// Claimed values of qubits 0 to 2 of the reference device.
    fn default() -> Self {
        Self {
            n_qubits: 3,
            omega_rad_per_ns: CLAIMED_OMEGA_RAD_PER_NS.to_vec(),
            omega_ghz: None,
            t1_us: CLAIMED_T1_US.to_vec(),
            t2_us: None,
            j_rad_per_ns: CLAIMED_J_RAD_PER_NS.to_vec(),
            temperature_mk: default_temperature(),
            readout_flip: None,
        }
    }
}

impl DeviceConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
        if let Some(nu) = cfg.omega_ghz.take() {
            if !cfg.omega_rad_per_ns.is_empty() {
                return Err(CliError::config("give omega_rad_per_ns or omega_ghz, not both"));
            }
            cfg.omega_rad_per_ns = nu.iter().map(|f| std::f64::consts::TAU * f).collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.n_qubits;
        let len_ok = self.omega_rad_per_ns.len() == n
            && self.t1_us.len() == n
            && self.j_rad_per_ns.len() == n.saturating_sub(1)
            && self.t2_us.as_ref().is_none_or(|v| v.len() == n)
            && self.readout_flip.as_ref().is_none_or(|v| v.len() == n);
        if n == 0 || !len_ok {
            return Err(CliError::config("config arrays do not match n_qubits"));
        }
        let positive = |v: &[f64]| v.iter().all(|x| x.is_finite() && *x > 0.0);
        if !positive(&self.omega_rad_per_ns)
            || !positive(&self.t1_us)
            || !positive(&self.j_rad_per_ns)
            || !(self.temperature_mk.is_finite() && self.temperature_mk > 0.0)
            || self.t2_us.as_deref().is_some_and(|v| !positive(v))
        {
            return Err(CliError::config("claimed values must be positive and finite"));
        }
        if let Some(f) = &self.readout_flip {
            if f.iter().any(|p| !(0.0..0.5).contains(p)) {
                return Err(CliError::config("readout flip probabilities must lie in [0, 0.5)"));
            }
        }
        Ok(())
    }

    /// Claimed parameters of device qubits `first..first + n` in internal
    /// units, at the configured temperature.
    pub fn claimed(&self, first: usize, n: usize) -> Result<ParameterSet, CliError> {
        if n == 0 || first + n > self.n_qubits {
            return Err(CliError::config(format!(
                "qubits {first}..{} are not all in the {}-qubit config",
                first + n,
                self.n_qubits
            )));
        }
        let omegas: Vec<f64> = self.omega_rad_per_ns.iter().map(|w| w * 1e3).collect();
        let js: Vec<f64> = self.j_rad_per_ns.iter().map(|j| j * 1e3).collect();
        let temps = vec![self.temperature_mk * 1e-3; self.n_qubits];
        let full = ParameterSet::from_device(&omegas, &self.t1_us, &temps, &js).map_err(CliError::from_core_config)?;
        full.restrict(first, n).map_err(CliError::from_core_config)
    }

    pub fn confusion(&self, first: usize, n: usize) -> Result<Option<ConfusionMatrix>, CliError> {
        match &self.readout_flip {
            None => Ok(None),
            Some(f) => ConfusionMatrix::from_flips(&f[first..first + n]).map(Some).map_err(CliError::from_core_config),
        }
    }
}
