//! Qubit Hamiltonians on a linear chain.
//!
//! Each qubit contributes `1/2 (w . sigma)` and each neighbouring pair
//! `(i, i+1)` contributes `sum_ab J_ab sigma_i^a sigma_{i+1}^b`. The simple
//! mode restricts frequencies to the z axis and couplings to the flip-flop
//! form `J (s+ s- + s- s+) = J/2 (XX + YY)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operators::{embed, embed_pair, paulis, CMatrix};
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 3;

/// Angular frequency vector of one qubit, rad/us.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FrequencyVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Purely longitudinal frequency, the simple-mode form.
    pub fn longitudinal(z: f64) -> Self {
        Self { x: 0.0, y: 0.0, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }
}

/// 3x3 coupling between neighbouring qubits, rad/us, indexed `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CouplingMatrix(pub [[f64; 3]; 3]);

impl CouplingMatrix {
    /// Matrix of the flip-flop term with coefficient `j`.
    pub fn flip_flop(j: f64) -> Self {
        let mut m = [[0.0; 3]; 3];
        m[0][0] = 0.5 * j;
        m[1][1] = 0.5 * j;
        Self(m)
    }

    pub fn zero() -> Self {
        Self([[0.0; 3]; 3])
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }

    /// The flip-flop coefficient if the matrix has the simple-mode shape.
    pub fn as_flip_flop(&self) -> Option<f64> {
        let m = &self.0;
        let off_pattern = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .filter(|&(a, b)| !(a == b && a < 2))
            .all(|(a, b)| m[a][b] == 0.0);
        (off_pattern && m[0][0] == m[1][1]).then_some(2.0 * m[0][0])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `sqrt(2) * ||J||_F`; equals the flip-flop coefficient for simple-mode
    /// matrices.
    pub fn effective_strength(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.frobenius_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianMode {
    Simple,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n_qubits: usize,
    pub freqs: Vec<FrequencyVector>,
    /// `couplings[i]` couples qubits `i` and `i + 1`.
    pub couplings: Vec<CouplingMatrix>,
    pub mode: HamiltonianMode,
}

impl HamiltonianSpec {
    /// Simple-mode chain from longitudinal frequencies and flip-flop couplings.
    pub fn simple(omegas: &[f64], js: &[f64]) -> Self {
        Self {
            n_qubits: omegas.len(),
            freqs: omegas.iter().map(|&w| FrequencyVector::longitudinal(w)).collect(),
            couplings: js.iter().map(|&j| CouplingMatrix::flip_flop(j)).collect(),
            mode: HamiltonianMode::Simple,
        }
    }

    pub fn general(freqs: Vec<FrequencyVector>, couplings: Vec<CouplingMatrix>) -> Self {
        Self {
            n_qubits: freqs.len(),
            freqs,
            couplings,
            mode: HamiltonianMode::General,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        if self.freqs.len() != self.n_qubits {
            return Err(Error::Config(format!(
                "{} frequency vectors for {} qubits",
                self.freqs.len(),
                self.n_qubits
            )));
        }
        if self.couplings.len() != self.n_qubits - 1 {
            return Err(Error::Config(format!(
                "{} couplings for a {}-qubit chain (expected {})",
                self.couplings.len(),
                self.n_qubits,
                self.n_qubits - 1
            )));
        }
        if let Some(q) = self.freqs.iter().position(|f| !f.is_finite()) {
            return Err(Error::Config(format!("non-finite frequency on qubit {q}")));
        }
        if let Some(p) = self.couplings.iter().position(|c| !c.is_finite()) {
            return Err(Error::Config(format!("non-finite coupling on pair {p}")));
        }
        if self.mode == HamiltonianMode::Simple {
            if let Some(q) = self.freqs.iter().position(|f| f.x != 0.0 || f.y != 0.0) {
                return Err(Error::Config(format!(
                    "simple mode requires a longitudinal frequency on qubit {q}"
                )));
            }
            if let Some(p) = self.couplings.iter().position(|c| c.as_flip_flop().is_none()) {
                return Err(Error::Config(format!(
                    "simple mode requires a flip-flop coupling on pair {p}"
                )));
            }
        }
        Ok(())
    }

    /// Same physics with the mode flag lifted to general.
    pub fn to_general(&self) -> Self {
        Self {
            mode: HamiltonianMode::General,
            ..self.clone()
        }
    }

    /// Largest qubit frequency norm, rad/us.
    pub fn max_frequency(&self) -> f64 {
        self.freqs.iter().map(FrequencyVector::norm).fold(0.0, f64::max)
    }
}

/// Dense Hamiltonian in rad/us on the `2^n` dimensional register.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<CMatrix> {
    spec.validate()?;
    let n = spec.n_qubits;
    let dim = spec.dim();
    let sigma = paulis();
    let mut h = CMatrix::zeros(dim, dim);

    for (q, w) in spec.freqs.iter().enumerate() {
        for (axis, c) in w.components().into_iter().enumerate() {
            if c != 0.0 {
                h += embed(&sigma[axis], q, n) * Complex64::new(0.5 * c, 0.0);
            }
        }
    }
    for (first, j) in spec.couplings.iter().enumerate() {
        for a in 0..3 {
            for b in 0..3 {
                let c = j.get(a, b);
                if c != 0.0 {
                    h += embed_pair(&sigma[a], &sigma[b], first, n) * Complex64::new(c, 0.0);
                }
            }
        }
    }
    Ok((&h + h.adjoint()) * Complex64::new(0.5, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdyn::operators::{
        hermiticity_defect, identity, kron, max_abs_diff, sigma_minus, sigma_plus,
    };

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_qubit_longitudinal() {
        let w = 3.7;
        let h = build_hamiltonian(&HamiltonianSpec::simple(&[w], &[])).unwrap();
        assert_eq!(h[(0, 0)], c(w / 2.0));
        assert_eq!(h[(1, 1)], c(-w / 2.0));
        assert_eq!(h[(0, 1)], c(0.0));
    }

    #[test]
    fn single_qubit_transverse_is_real_off_diagonal() {
        let w = 2.0;
        let spec = HamiltonianSpec::general(vec![FrequencyVector::new(w, 0.0, 0.0)], vec![]);
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h[(0, 1)], c(w / 2.0));
        assert_eq!(h[(1, 0)], c(w / 2.0));
        assert_eq!(h[(0, 0)], c(0.0));
    }

    #[test]
    fn flip_flop_matches_ladder_operator_oracle() {
        // Reference built from ladder operators with explicit 4x4 Kronecker
        // products, independent of the Pauli-matrix route.
        let (w0, w1, j) = (31.42, 30.47, 8.31e-3);
        let z = crate::qdyn::operators::pauli_z();
        let oracle = kron(&z, &identity(2)) * c(w0 / 2.0)
            + kron(&identity(2), &z) * c(w1 / 2.0)
            + (kron(&sigma_plus(), &sigma_minus()) + kron(&sigma_minus(), &sigma_plus())) * c(j);
        let h = build_hamiltonian(&HamiltonianSpec::simple(&[w0, w1], &[j])).unwrap();
        assert!(max_abs_diff(&h, &oracle) < 1e-15);
        // <10|H|01> is the bare coupling.
        assert_eq!(h[(2, 1)], c(j));
        assert_eq!(h[(1, 2)], c(j));
        assert_eq!(h[(3, 0)], c(0.0));
    }

    #[test]
    fn simple_and_general_modes_agree() {
        let simple = HamiltonianSpec::simple(&[1.0, 2.0, 3.0], &[0.1, -0.2]);
        let mut j01 = [[0.0; 3]; 3];
        j01[0][0] = 0.05;
        j01[1][1] = 0.05;
        let mut j12 = [[0.0; 3]; 3];
        j12[0][0] = -0.1;
        j12[1][1] = -0.1;
        let general = HamiltonianSpec::general(
            vec![
                FrequencyVector::new(0.0, 0.0, 1.0),
                FrequencyVector::new(0.0, 0.0, 2.0),
                FrequencyVector::new(0.0, 0.0, 3.0),
            ],
            vec![CouplingMatrix(j01), CouplingMatrix(j12)],
        );
        let h1 = build_hamiltonian(&simple).unwrap();
        let h2 = build_hamiltonian(&general).unwrap();
        assert!(max_abs_diff(&h1, &h2) < 1e-15);
    }

    #[test]
    fn general_hamiltonian_is_hermitian() {
        let mut j = CouplingMatrix::zero();
        for a in 0..3 {
            for b in 0..3 {
                j.0[a][b] = 0.1 * (a as f64) - 0.07 * (b as f64) + 0.03;
            }
        }
        let spec = HamiltonianSpec::general(
            vec![FrequencyVector::new(0.3, -0.2, 5.0), FrequencyVector::new(-0.1, 0.4, 4.0)],
            vec![j],
        );
        let h = build_hamiltonian(&spec).unwrap();
        assert!(hermiticity_defect(&h) <= 1e-12);
    }

    #[test]
    fn rejects_inconsistent_specs() {
        let mut spec = HamiltonianSpec::simple(&[1.0, 2.0], &[0.1]);
        spec.n_qubits = 3;
        assert!(matches!(build_hamiltonian(&spec), Err(Error::Config(_))));

        let spec = HamiltonianSpec::simple(&[1.0, 2.0], &[]);
        assert!(matches!(build_hamiltonian(&spec), Err(Error::Config(_))));

        let mut spec = HamiltonianSpec::simple(&[1.0], &[]);
        spec.freqs[0].x = 0.5;
        assert!(matches!(build_hamiltonian(&spec), Err(Error::Config(_))));

        let spec = HamiltonianSpec::simple(&[1.0; 4], &[0.0; 3]);
        assert!(matches!(build_hamiltonian(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn flip_flop_round_trip() {
        assert_eq!(CouplingMatrix::flip_flop(0.25).as_flip_flop(), Some(0.25));
        assert!((CouplingMatrix::flip_flop(0.25).effective_strength() - 0.25).abs() < 1e-16);
        let mut m = CouplingMatrix::flip_flop(0.25);
        m.0[2][2] = 1.0;
        assert_eq!(m.as_flip_flop(), None);
    }
}
