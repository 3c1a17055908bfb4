use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qdyn::operators::{kron_all, pauli_x, pauli_y, identity, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateLabel {
    I,
    X,
    Y,
    H,
    /// Rotation `exp(-i theta Y / 2)`.
    Ry(f64),
}

impl GateLabel {
    pub fn matrix(&self) -> CMatrix {
        match *self {
            GateLabel::I => identity(2),
            GateLabel::X => pauli_x(),
            GateLabel::Y => pauli_y(),
            GateLabel::H => {
                let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
                CMatrix::from_row_slice(2, 2, &[s, s, s, -s])
            }
            GateLabel::Ry(theta) => {
                let (s, c) = (0.5 * theta).sin_cos();
                let (s, c) = (Complex64::new(s, 0.0), Complex64::new(c, 0.0));
                CMatrix::from_row_slice(2, 2, &[c, -s, s, c])
            }
        }
    }
}

/// A single-qubit gate placed on one qubit of the register.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub label: GateLabel,
    pub target: usize,
    pub matrix: CMatrix,
}

impl GateOp {
    pub fn new(label: GateLabel, target: usize) -> Self {
        Self { label, target, matrix: label.matrix() }
    }
}

/// One gate per qubit applied simultaneously; returns the register unitary.
pub fn layer_unitary(labels: &[GateLabel]) -> CMatrix {
    let factors: Vec<CMatrix> = labels.iter().map(GateLabel::matrix).collect();
    kron_all(&factors)
}
