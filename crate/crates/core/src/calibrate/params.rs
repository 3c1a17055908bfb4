//! Flat parameter vectors and their structured view.
//!
//! Per qubit the layout holds the frequency slot(s), then `gamma`, then
//! `log_t` (natural log of the temperature in kelvin). Coupling slots for
//! each neighbouring pair follow all qubit slots: one flip-flop `j` in simple
//! mode, nine `j_ab` entries in general mode.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qdyn::hamiltonian::MAX_QUBITS;
use crate::qdyn::noise::{gamma_from_relaxation_time, relaxation_time, thermal_photon_number};
use crate::qdyn::{CouplingMatrix, FrequencyVector, HamiltonianMode, HamiltonianSpec, NoiseSpec};

const AXES: [char; 3] = ['x', 'y', 'z'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    Omega { qubit: usize, axis: usize },
    Gamma { qubit: usize },
    LogTemperature { qubit: usize },
    /// Simple-mode flip-flop coefficient of pair `(pair, pair + 1)`.
    Coupling { pair: usize },
    CouplingEntry { pair: usize, a: usize, b: usize },
}

impl Slot {
    pub fn is_frequency(&self) -> bool {
        matches!(self, Slot::Omega { .. })
    }

    pub fn is_coupling(&self) -> bool {
        matches!(self, Slot::Coupling { .. } | Slot::CouplingEntry { .. })
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Slot::Omega { .. } | Slot::Coupling { .. } | Slot::CouplingEntry { .. } => "rad/us",
            Slot::Gamma { .. } => "1/us",
            Slot::LogTemperature { .. } => "ln(K)",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Slot::Omega { qubit, axis } => write!(f, "omega_{}[{qubit}]", AXES[axis]),
            Slot::Gamma { qubit } => write!(f, "gamma[{qubit}]"),
            Slot::LogTemperature { qubit } => write!(f, "log_t[{qubit}]"),
            Slot::Coupling { pair } => write!(f, "j[{pair}]"),
            Slot::CouplingEntry { pair, a, b } => write!(f, "j_{}{}[{pair}]", AXES[a], AXES[b]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterLayout {
    pub n_qubits: usize,
    pub mode: HamiltonianMode,
}

impl ParameterLayout {
    pub fn new(n_qubits: usize, mode: HamiltonianMode) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!("n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}")));
        }
        Ok(Self { n_qubits, mode })
    }

    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::with_capacity(self.len());
        for qubit in 0..self.n_qubits {
            match self.mode {
                HamiltonianMode::Simple => out.push(Slot::Omega { qubit, axis: 2 }),
                HamiltonianMode::General => out.extend((0..3).map(|axis| Slot::Omega { qubit, axis })),
            }
            out.push(Slot::Gamma { qubit });
            out.push(Slot::LogTemperature { qubit });
        }
        for pair in 0..self.n_qubits.saturating_sub(1) {
            match self.mode {
                HamiltonianMode::Simple => out.push(Slot::Coupling { pair }),
                HamiltonianMode::General => {
                    for a in 0..3 {
                        out.extend((0..3).map(|b| Slot::CouplingEntry { pair, a, b }));
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        let (per_qubit, per_pair) = match self.mode {
            HamiltonianMode::Simple => (3, 1),
            HamiltonianMode::General => (5, 9),
        };
        per_qubit * self.n_qubits + per_pair * self.n_qubits.saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index_of(&self, slot: Slot) -> Option<usize> {
        self.slots().iter().position(|s| *s == slot)
    }

    pub fn index_by_name(&self, name: &str) -> Option<usize> {
        self.slots().iter().position(|s| s.to_string() == name)
    }
}

/// Physical parameters of a chain in internal units (rad/us, 1/us, ln K).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub mode: HamiltonianMode,
    pub freqs: Vec<FrequencyVector>,
    pub couplings: Vec<CouplingMatrix>,
    pub gamma: Vec<f64>,
    pub log_temperature: Vec<f64>,
}

impl ParameterSet {
    /// Simple-mode parameters from device-style quantities: longitudinal
    /// frequencies (rad/us), relaxation times (us), temperatures (K) and
    /// flip-flop couplings (rad/us).
    pub fn from_device(omegas: &[f64], t1_us: &[f64], temperature_k: &[f64], js: &[f64]) -> Result<Self> {
        let n = omegas.len();
        if t1_us.len() != n || temperature_k.len() != n || js.len() != n.saturating_sub(1) {
            return Err(Error::Config("device arrays do not match the qubit count".into()));
        }
        let mut gamma = Vec::with_capacity(n);
        for q in 0..n {
            if !(t1_us[q] > 0.0) {
                return Err(Error::Config(format!("T1 of qubit {q} must be positive")));
            }
            let nbar = thermal_photon_number(omegas[q].abs(), temperature_k[q])?;
            gamma.push(gamma_from_relaxation_time(t1_us[q], nbar));
        }
        Ok(Self {
            mode: HamiltonianMode::Simple,
            freqs: omegas.iter().map(|&w| FrequencyVector::longitudinal(w)).collect(),
            couplings: js.iter().map(|&j| CouplingMatrix::flip_flop(j)).collect(),
            gamma,
            log_temperature: temperature_k.iter().map(|t| t.ln()).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.freqs.len()
    }

    /// The sub-chain of qubits `first..first + n`.
    pub fn restrict(&self, first: usize, n: usize) -> Result<Self> {
        if n == 0 || first + n > self.n_qubits() {
            return Err(Error::Config(format!(
                "qubits {first}..{} outside a {}-qubit chain",
                first + n,
                self.n_qubits()
            )));
        }
        Ok(Self {
            mode: self.mode,
            freqs: self.freqs[first..first + n].to_vec(),
            couplings: self.couplings[first..first + n - 1].to_vec(),
            gamma: self.gamma[first..first + n].to_vec(),
            log_temperature: self.log_temperature[first..first + n].to_vec(),
        })
    }

    pub fn layout(&self) -> Result<ParameterLayout> {
        ParameterLayout::new(self.n_qubits(), self.mode)
    }

    pub fn temperature(&self, qubit: usize) -> f64 {
        self.log_temperature[qubit].exp()
    }

    pub fn photon_number(&self, qubit: usize) -> Result<f64> {
        thermal_photon_number(self.freqs[qubit].norm(), self.temperature(qubit))
    }

    pub fn relaxation_time(&self, qubit: usize) -> Result<f64> {
        Ok(relaxation_time(self.gamma[qubit], self.photon_number(qubit)?))
    }

    pub fn hamiltonian(&self) -> HamiltonianSpec {
        HamiltonianSpec {
            n_qubits: self.n_qubits(),
            freqs: self.freqs.clone(),
            couplings: self.couplings.clone(),
            mode: self.mode,
        }
    }

    pub fn noise(&self) -> NoiseSpec {
        let temps = (0..self.n_qubits()).map(|q| self.temperature(q)).collect();
        NoiseSpec::new(self.gamma.clone(), temps)
    }

    pub fn to_specs(&self) -> Result<(HamiltonianSpec, NoiseSpec)> {
        let spec = self.hamiltonian();
        spec.validate()?;
        let noise = self.noise();
        noise.validate(spec.n_qubits)?;
        Ok((spec, noise))
    }
}

/// Flat real vector of fit parameters with its layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub layout: ParameterLayout,
    pub values: Vec<f64>,
}

impl ParameterVector {
    pub fn new(layout: ParameterLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), found: values.len() });
        }
        Ok(Self { layout, values })
    }

    pub fn pack(set: &ParameterSet) -> Result<Self> {
        let layout = set.layout()?;
        let n = set.n_qubits();
        if set.gamma.len() != n || set.log_temperature.len() != n || set.couplings.len() != n - 1 {
            return Err(Error::Config("parameter set arrays do not match the qubit count".into()));
        }
        let values = layout
            .slots()
            .into_iter()
            .map(|slot| match slot {
                Slot::Omega { qubit, axis } => Ok(set.freqs[qubit].components()[axis]),
                Slot::Gamma { qubit } => Ok(set.gamma[qubit]),
                Slot::LogTemperature { qubit } => Ok(set.log_temperature[qubit]),
                Slot::Coupling { pair } => set.couplings[pair].as_flip_flop().ok_or_else(|| {
                    Error::Config(format!("coupling of pair {pair} is not of flip-flop form"))
                }),
                Slot::CouplingEntry { pair, a, b } => Ok(set.couplings[pair].get(a, b)),
            })
            .collect::<Result<Vec<_>>>()?;
        if set.mode == HamiltonianMode::Simple
            && set.freqs.iter().any(|f| f.x != 0.0 || f.y != 0.0)
        {
            return Err(Error::Config("simple mode requires longitudinal frequencies".into()));
        }
        Ok(Self { layout, values })
    }

    pub fn unpack(&self) -> ParameterSet {
        let n = self.layout.n_qubits;
        let mut set = ParameterSet {
            mode: self.layout.mode,
            freqs: vec![FrequencyVector::default(); n],
            couplings: vec![CouplingMatrix::zero(); n.saturating_sub(1)],
            gamma: vec![0.0; n],
            log_temperature: vec![0.0; n],
        };
        for (slot, &v) in self.layout.slots().iter().zip(&self.values) {
            match *slot {
                Slot::Omega { qubit, axis } => match axis {
                    0 => set.freqs[qubit].x = v,
                    1 => set.freqs[qubit].y = v,
                    _ => set.freqs[qubit].z = v,
                },
                Slot::Gamma { qubit } => set.gamma[qubit] = v,
                Slot::LogTemperature { qubit } => set.log_temperature[qubit] = v,
                Slot::Coupling { pair } => set.couplings[pair] = CouplingMatrix::flip_flop(v),
                Slot::CouplingEntry { pair, a, b } => set.couplings[pair].0[a][b] = v,
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, slot: Slot) -> Option<f64> {
        self.layout.index_of(slot).map(|i| self.values[i])
    }

    pub fn named(&self) -> Vec<(String, f64, &'static str)> {
        self.layout
            .slots()
            .iter()
            .zip(&self.values)
            .map(|(s, &v)| (s.to_string(), v, s.unit()))
            .collect()
    }
}
