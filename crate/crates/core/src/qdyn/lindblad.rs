//! GKSL generator with per-qubit thermal emission and absorption.
//!
//! `L(rho) = -i[H, rho] + sum_i g_i (n_i + 1) D[s_i-](rho) + g_i n_i D[s_i+](rho)`
//! with `D[A](rho) = A rho A^dagger - 1/2 {A^dagger A, rho}`.

use num_complex::Complex64;

use super::hamiltonian::{build_hamiltonian, HamiltonianSpec};
use super::noise::{NoiseSpec, ThermalRates};
use super::operators::{anticommutator, commutator, embed, identity, sigma_minus, sigma_plus, CMatrix};
use crate::error::{Error, Result};

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `A rho A^dagger - 1/2 {A^dagger A, rho}`.
pub fn dissipator(a: &CMatrix, rho: &CMatrix) -> CMatrix {
    let a_dag = a.adjoint();
    let n = &a_dag * a;
    a * rho * &a_dag - anticommutator(&n, rho) * real(0.5)
}

/// `d rho / dt` for Hamiltonian `h` (rad/us) and per-qubit thermal rates (1/us).
pub fn lindblad_rhs(rho: &CMatrix, h: &CMatrix, rates: &[ThermalRates]) -> Result<CMatrix> {
    let dim = rho.nrows();
    if rho.ncols() != dim || h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h.nrows() });
    }
    if dim != 1 << rates.len() {
        return Err(Error::DimensionMismatch { expected: dim, found: 1 << rates.len() });
    }
    let n = rates.len();
    let mut out = commutator(h, rho) * MINUS_I;
    for (q, r) in rates.iter().enumerate() {
        if r.emission != 0.0 {
            out += dissipator(&embed(&sigma_minus(), q, n), rho) * real(r.emission);
        }
        if r.absorption != 0.0 {
            out += dissipator(&embed(&sigma_plus(), q, n), rho) * real(r.absorption);
        }
    }
    Ok(out)
}

/// Time-independent generator assembled from a Hamiltonian and noise spec.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    n_qubits: usize,
    hamiltonian: CMatrix,
    rates: Vec<ThermalRates>,
}

impl Lindbladian {
    pub fn new(spec: &HamiltonianSpec, noise: &NoiseSpec) -> Result<Self> {
        let hamiltonian = build_hamiltonian(spec)?;
        let rates = noise.rates(spec)?;
        Ok(Self { n_qubits: spec.n_qubits, hamiltonian, rates })
    }

    pub fn from_parts(hamiltonian: CMatrix, rates: Vec<ThermalRates>) -> Result<Self> {
        let n_qubits = rates.len();
        if hamiltonian.nrows() != 1 << n_qubits || !hamiltonian.is_square() {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                found: hamiltonian.nrows(),
            });
        }
        Ok(Self { n_qubits, hamiltonian, rates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn rates(&self) -> &[ThermalRates] {
        &self.rates
    }

    pub fn rhs(&self, rho: &CMatrix) -> Result<CMatrix> {
        lindblad_rhs(rho, &self.hamiltonian, &self.rates)
    }

    /// Matrix of the generator acting on column-stacked `vec(rho)`, using
    /// `vec(A X B) = (B^T (x) A) vec(X)`.
    pub fn superoperator(&self) -> CMatrix {
        let d = self.dim();
        let id = identity(d);
        let h = &self.hamiltonian;
        let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * MINUS_I;
        for (q, r) in self.rates.iter().enumerate() {
            for (op, rate) in [
                (sigma_minus(), r.emission),
                (sigma_plus(), r.absorption),
            ] {
                if rate == 0.0 {
                    continue;
                }
                let a = embed(&op, q, self.n_qubits);
                let n = a.adjoint() * &a;
                let term = a.conjugate().kronecker(&a)
                    - (id.kronecker(&n) + n.transpose().kronecker(&id)) * real(0.5);
                l += term * real(rate);
            }
        }
        l
    }

    /// Largest modulus among the generator's Hamiltonian and rate scales,
    /// used to size explicit integrator substeps.
    pub fn fastest_rate(&self) -> f64 {
        let h_scale = self
            .hamiltonian
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            * 2.0;
        self.rates
            .iter()
            .map(|r| r.emission + r.absorption)
            .fold(h_scale, f64::max)
    }
}

/// Column-stacked `vec(rho)`.
pub fn vectorize(rho: &CMatrix) -> CMatrix {
    CMatrix::from_column_slice(rho.len(), 1, rho.as_slice())
}

pub fn unvectorize(v: &CMatrix, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}
