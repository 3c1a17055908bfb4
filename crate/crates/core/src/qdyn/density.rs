use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::operators::{hermiticity_defect, CMatrix};
use crate::error::{Error, Result};

/// Hermiticity and trace tolerance applied on construction.
pub const STATE_TOLERANCE: f64 = 1e-12;
/// Smallest eigenvalue accepted by [`DensityMatrix::check_positive`].
pub const POSITIVITY_TOLERANCE: f64 = 1e-9;

/// Hermitian, unit-trace state of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity and trace to [`STATE_TOLERANCE`]. Positivity is
    /// checked on demand.
    pub fn new(rho: CMatrix) -> Result<Self> {
        Self::with_tolerance(rho, STATE_TOLERANCE)
    }

    pub fn with_tolerance(rho: CMatrix, tol: f64) -> Result<Self> {
        let dim = rho.nrows();
        if rho.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidState(format!(
                "shape {}x{} is not a qubit register",
                rho.nrows(),
                rho.ncols()
            )));
        }
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = hermiticity_defect(&rho);
        if herm > tol {
            return Err(Error::InvalidState(format!("hermiticity defect {herm:e}")));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        Ok(Self { n_qubits: dim.trailing_zeros() as usize, rho })
    }

    /// Wraps an evolved state without re-checking invariants.
    pub(crate) fn from_evolved(rho: CMatrix) -> Self {
        let n_qubits = rho.nrows().trailing_zeros() as usize;
        Self { n_qubits, rho }
    }

    /// `|b><b|` for computational basis index `b`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let dim = 1 << n_qubits;
        assert!(index < dim, "basis index {index} out of range");
        let mut rho = CMatrix::zeros(dim, dim);
        rho[(index, index)] = Complex64::new(1.0, 0.0);
        Self { n_qubits, rho }
    }

    pub fn ground(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        let rho = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self { n_qubits, rho }
    }

    /// `|psi><psi|` for a normalised state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = CMatrix::from_column_slice(psi.len(), 1, psi);
        Self::new(&v * v.adjoint())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.rho)
    }

    /// Real parts of the diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_positive(&self) -> Result<()> {
        let lo = self.min_eigenvalue();
        if lo < -POSITIVITY_TOLERANCE {
            return Err(Error::InvalidState(format!("minimum eigenvalue {lo:e}")));
        }
        Ok(())
    }

    /// `U rho U^dagger`.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        Self {
            n_qubits: self.n_qubits,
            rho: u * &self.rho * u.adjoint(),
        }
    }
}
