//! Single-qubit operators and their embedding into an n-qubit register.
//!
//! Qubit 0 is the leftmost Kronecker factor, so basis index `b` reads as the
//! bitstring of `b` with qubit 0 as the most significant bit.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn mat2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    mat2(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> CMatrix {
    mat2(ZERO, -I, I, ZERO)
}

/// `|0><0| - |1><1|`; `|0>` is the +1 eigenstate.
pub fn pauli_z() -> CMatrix {
    mat2(ONE, ZERO, ZERO, -ONE)
}

/// `x`, `y`, `z` Pauli matrices in that order.
pub fn paulis() -> [CMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Lowering operator `|0><1|`, taking `|1>` to `|0>`.
pub fn sigma_minus() -> CMatrix {
    mat2(ZERO, ONE, ZERO, ZERO)
}

/// Raising operator `|1><0|`.
pub fn sigma_plus() -> CMatrix {
    mat2(ZERO, ZERO, ONE, ZERO)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of one 2x2 factor per qubit, qubit 0 first.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

/// Lifts a single-qubit operator onto qubit `target` of an `n`-qubit register.
pub fn embed(op: &CMatrix, target: usize, n: usize) -> CMatrix {
    assert!(target < n, "qubit {target} out of range for {n} qubits");
    let factors: Vec<CMatrix> = (0..n)
        .map(|q| if q == target { op.clone() } else { identity(2) })
        .collect();
    kron_all(&factors)
}

/// Lifts `a (x) b` acting on neighbouring qubits `first`, `first + 1`.
pub fn embed_pair(a: &CMatrix, b: &CMatrix, first: usize, n: usize) -> CMatrix {
    assert!(first + 1 < n, "pair ({first}, {}) out of range for {n} qubits", first + 1);
    let factors: Vec<CMatrix> = (0..n)
        .map(|q| {
            if q == first {
                a.clone()
            } else if q == first + 1 {
                b.clone()
            } else {
                identity(2)
            }
        })
        .collect();
    kron_all(&factors)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest elementwise modulus of `m - m^dagger`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    m.iter()
        .zip(adj.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Largest elementwise modulus of `u^dagger u - 1`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let d = u.adjoint() * u - identity(u.nrows());
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Bitstring label of basis index `index`, qubit 0 leftmost.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if (index >> (n_qubits - 1 - q)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`bitstring`]; `None` for anything but `0`/`1` characters.
pub fn bitstring_index(label: &str) -> Option<usize> {
    label.chars().try_fold(0usize, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}
