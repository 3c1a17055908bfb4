//! Thermal emission/absorption rates.

use serde::{Deserialize, Serialize};

use super::hamiltonian::HamiltonianSpec;
use crate::error::{Error, Result};

/// Reduced Planck constant, J s (CODATA 2018, exact by SI definition of h).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;

/// Above this value of `hbar w / k_B T` the Bose factor is reported as 0.
pub const BOSE_EXPONENT_CLAMP: f64 = 700.0;

/// rad/us to rad/s.
const PER_US: f64 = 1e6;

/// `hbar w / (k_B T)` for `w` in rad/us and `T` in kelvin.
pub fn bose_exponent(omega_rad_per_us: f64, temperature_k: f64) -> f64 {
    HBAR * omega_rad_per_us * PER_US / (K_B * temperature_k)
}

/// Mean thermal occupation `1 / (exp(hbar w / k_B T) - 1)`.
///
/// Exponents beyond [`BOSE_EXPONENT_CLAMP`] return exactly 0.
pub fn thermal_photon_number(omega_rad_per_us: f64, temperature_k: f64) -> Result<f64> {
    if !(temperature_k > 0.0) || !temperature_k.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be positive and finite, got {temperature_k} K"
        )));
    }
    if !(omega_rad_per_us > 0.0) || !omega_rad_per_us.is_finite() {
        return Err(Error::Domain(format!(
            "frequency norm must be positive and finite, got {omega_rad_per_us} rad/us"
        )));
    }
    let x = bose_exponent(omega_rad_per_us, temperature_k);
    if x > BOSE_EXPONENT_CLAMP {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

/// Temperature at which a mode of frequency `w` has mean occupation `n`.
pub fn temperature_for_photon_number(omega_rad_per_us: f64, n: f64) -> Result<f64> {
    if !(n > 0.0) || !(omega_rad_per_us > 0.0) {
        return Err(Error::Domain(format!(
            "need positive occupation and frequency, got n = {n}, w = {omega_rad_per_us}"
        )));
    }
    Ok(HBAR * omega_rad_per_us * PER_US / (K_B * (1.0 / n).ln_1p()))
}

/// Effective relaxation time `1 / (gamma (2n + 1))`, us.
pub fn relaxation_time(gamma_per_us: f64, photon_number: f64) -> f64 {
    1.0 / (gamma_per_us * (2.0 * photon_number + 1.0))
}

/// Emission coefficient giving relaxation time `t1_us` at occupation `n`.
pub fn gamma_from_relaxation_time(t1_us: f64, photon_number: f64) -> f64 {
    1.0 / (t1_us * (2.0 * photon_number + 1.0))
}

/// Per-qubit emission coefficient and effective temperature.
///
/// A temperature of exactly 0 is the zero-temperature limit: no absorption,
/// emission at rate `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// 1/us
    pub gamma: Vec<f64>,
    /// K
    pub temperature: Vec<f64>,
}

/// Rates multiplying `D[s-]` (emission) and `D[s+]` (absorption), 1/us.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalRates {
    pub emission: f64,
    pub absorption: f64,
}

impl ThermalRates {
    pub fn none() -> Self {
        Self { emission: 0.0, absorption: 0.0 }
    }
}

impl NoiseSpec {
    pub fn new(gamma: Vec<f64>, temperature: Vec<f64>) -> Self {
        Self { gamma, temperature }
    }

    pub fn noiseless(n_qubits: usize) -> Self {
        Self::zero_temperature(vec![0.0; n_qubits])
    }

    pub fn zero_temperature(gamma: Vec<f64>) -> Self {
        let n = gamma.len();
        Self { gamma, temperature: vec![0.0; n] }
    }

    pub fn n_qubits(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.gamma.len() != n_qubits || self.temperature.len() != n_qubits {
            return Err(Error::Config(format!(
                "noise spec has {} rates and {} temperatures for {n_qubits} qubits",
                self.gamma.len(),
                self.temperature.len()
            )));
        }
        for (q, (&g, &t)) in self.gamma.iter().zip(&self.temperature).enumerate() {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::Config(format!("qubit {q}: gamma must be >= 0, got {g}")));
            }
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::Config(format!(
                    "qubit {q}: temperature must be >= 0, got {t}"
                )));
            }
        }
        Ok(())
    }

    /// Mean thermal occupation of each qubit, using its frequency norm.
    pub fn photon_numbers(&self, spec: &HamiltonianSpec) -> Result<Vec<f64>> {
        self.validate(spec.n_qubits)?;
        self.temperature
            .iter()
            .zip(&spec.freqs)
            .map(|(&t, w)| {
                if t == 0.0 {
                    Ok(0.0)
                } else {
                    thermal_photon_number(w.norm(), t)
                }
            })
            .collect()
    }

    pub fn rates(&self, spec: &HamiltonianSpec) -> Result<Vec<ThermalRates>> {
        let ns = self.photon_numbers(spec)?;
        Ok(self
            .gamma
            .iter()
            .zip(ns)
            .map(|(&g, n)| ThermalRates {
                emission: g * (n + 1.0),
                absorption: g * n,
            })
            .collect())
    }
}
