//! Master-equation integration over a delay grid.
//!
//! The generator is time independent, so the default route propagates with
//! the exact exponential of the Liouvillian superoperator, one matrix
//! exponential per grid spacing. A fixed-step RK4 route on the direct
//! right-hand side is kept as an independent reference.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::experiment::{Circuit, ExperimentKind};
use super::gates::layer_unitary;
use super::grid::TimeGrid;
use crate::error::{Error, Result};
use crate::qdyn::lindblad::{unvectorize, vectorize};
use crate::qdyn::operators::CMatrix;
use crate::qdyn::{DensityMatrix, HamiltonianSpec, Lindbladian, NoiseSpec};

/// Populations below this are treated as an integrator failure.
pub const POSITIVITY_FLOOR: f64 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// `exp(L dt)` per grid spacing, split into `substeps` equal factors.
    Exponential { substeps: usize },
    /// Classical RK4. Without an explicit step, uses
    /// `min(dt, 2 pi / (50 w_max))` so the fastest oscillation gets at least
    /// 50 substeps.
    RungeKutta4 { max_substep: Option<f64> },
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Exponential { substeps: 1 }
    }
}

/// States at each grid point.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn n_qubits(&self) -> usize {
        self.states.first().map_or(0, DensityMatrix::n_qubits)
    }
}

pub fn evolve(
    rho0: &DensityMatrix,
    spec: &HamiltonianSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let l = Lindbladian::new(spec, noise)?;
    evolve_with(rho0, &l, grid, Integrator::default())
}

/// Free evolution of `rho0`; no gates.
pub fn evolve_with(
    rho0: &DensityMatrix,
    l: &Lindbladian,
    grid: &TimeGrid,
    integrator: Integrator,
) -> Result<Trajectory> {
    let n = l.n_qubits();
    let identity_layer = Circuit {
        pre: vec![super::gates::GateLabel::I; n],
        echo: None,
        post: vec![super::gates::GateLabel::I; n],
    };
    run_circuit(rho0, &identity_layer, l, grid, integrator)
}

/// Final-state trajectory of `kind` started from `|0...0>`.
pub fn run_experiment(
    kind: ExperimentKind,
    spec: &HamiltonianSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let l = Lindbladian::new(spec, noise)?;
    run_experiment_with(kind, &l, grid, Integrator::default())
}

pub fn run_experiment_with(
    kind: ExperimentKind,
    l: &Lindbladian,
    grid: &TimeGrid,
    integrator: Integrator,
) -> Result<Trajectory> {
    let n = l.n_qubits();
    run_circuit(&DensityMatrix::ground(n), &kind.circuit(n), l, grid, integrator)
}

fn run_circuit(
    rho0: &DensityMatrix,
    circuit: &Circuit,
    l: &Lindbladian,
    grid: &TimeGrid,
    integrator: Integrator,
) -> Result<Trajectory> {
    grid.validate()?;
    if rho0.n_qubits() != l.n_qubits() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: rho0.dim() });
    }
    let pre = layer_unitary(&circuit.pre);
    let post = layer_unitary(&circuit.post);
    let echo = circuit.echo.as_deref().map(layer_unitary);
    let start = conjugate(&pre, rho0.matrix());

    let finals = match integrator {
        Integrator::Exponential { substeps } => {
            ExponentialFlow::new(l, grid, substeps.max(1)).run(&start, echo.as_ref(), grid)?
        }
        Integrator::RungeKutta4 { max_substep } => {
            let h = max_substep.unwrap_or_else(|| default_rk4_step(l, grid));
            RungeKuttaFlow { l, max_substep: h }.run(&start, echo.as_ref(), grid)?
        }
    };
    let states = finals
        .into_iter()
        .map(|rho| DensityMatrix::from_evolved(conjugate(&post, &rho)))
        .collect();
    Ok(Trajectory { grid: *grid, states })
}

fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u * rho * u.adjoint()
}

fn check_finite(rho: &CMatrix, time_us: f64) -> Result<()> {
    if rho.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::IntegrationDiverged { time_us })
    }
}

fn default_rk4_step(l: &Lindbladian, grid: &TimeGrid) -> f64 {
    let dt = grid.scale_factor * grid.t_step;
    let omega = l.fastest_rate();
    if omega > 0.0 {
        dt.min(TAU / (50.0 * omega))
    } else {
        dt
    }
}

struct ExponentialFlow {
    dim: usize,
    start: CMatrix,
    step: CMatrix,
}

impl ExponentialFlow {
    fn new(l: &Lindbladian, grid: &TimeGrid, substeps: usize) -> Self {
        let sup = l.superoperator();
        let blocks = BlockExponential::new(&sup);
        let propagator = |duration: f64| -> CMatrix {
            let piece = blocks.exp(duration / substeps as f64);
            (1..substeps).fold(piece.clone(), |acc, _| &piece * acc)
        };
        Self {
            dim: l.dim(),
            start: propagator(grid.evolution_time(0)),
            step: propagator(grid.scale_factor * grid.t_step),
        }
    }

    fn run(&self, rho: &CMatrix, echo: Option<&CMatrix>, grid: &TimeGrid) -> Result<Vec<CMatrix>> {
        let mut out = Vec::with_capacity(grid.n_points);
        let v0 = vectorize(rho);
        match echo {
            None => {
                let mut v = &self.start * v0;
                for k in 0..grid.n_points {
                    let rho_k = unvectorize(&v, self.dim);
                    check_finite(&rho_k, grid.evolution_time(k))?;
                    out.push(rho_k);
                    if k + 1 < grid.n_points {
                        v = &self.step * v;
                    }
                }
            }
            Some(u) => {
                let mut phi = self.start.clone();
                for k in 0..grid.n_points {
                    let half = unvectorize(&(&phi * &v0), self.dim);
                    let flipped = vectorize(&conjugate(u, &half));
                    let rho_k = unvectorize(&(&phi * flipped), self.dim);
                    check_finite(&rho_k, 2.0 * grid.evolution_time(k))?;
                    out.push(rho_k);
                    if k + 1 < grid.n_points {
                        phi = &self.step * phi;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Matrix exponential of a superoperator taken block by block.
///
/// The generator usually splits into uncoupled blocks (populations and each
/// coherence sector when the Hamiltonian conserves excitation number). Each
/// block `B` is exponentiated as `exp(c t) exp((B - c) t)` with `c` the mean
/// of its diagonal, which removes the fast common phase exactly and leaves
/// only the small residual for scaling and squaring.
struct BlockExponential {
    size: usize,
    blocks: Vec<(Vec<usize>, CMatrix, Complex64)>,
}

impl BlockExponential {
    fn new(sup: &CMatrix) -> Self {
        let size = sup.nrows();
        let mut parent: Vec<usize> = (0..size).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for r in 0..size {
            for c in 0..size {
                if r != c && sup[(r, c)] != Complex64::new(0.0, 0.0) {
                    let (a, b) = (root(&mut parent, r), root(&mut parent, c));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; size];
        for i in 0..size {
            let r = root(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        let blocks = groups
            .into_iter()
            .map(|idx| {
                let m = idx.len();
                let shift = idx.iter().map(|&i| sup[(i, i)]).sum::<Complex64>() / m as f64;
                let block = CMatrix::from_fn(m, m, |a, b| {
                    let v = sup[(idx[a], idx[b])];
                    if a == b { v - shift } else { v }
                });
                (idx, block, shift)
            })
            .collect();
        Self { size, blocks }
    }

    fn exp(&self, t: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.size, self.size);
        if t == 0.0 {
            out.fill_with_identity();
            return out;
        }
        let tc = Complex64::new(t, 0.0);
        for (idx, block, shift) in &self.blocks {
            let phase = (shift * tc).exp();
            let e = if block.len() == 1 {
                CMatrix::from_element(1, 1, (block[(0, 0)] * tc).exp())
            } else {
                (block * tc).exp()
            };
            for (a, &r) in idx.iter().enumerate() {
                for (b, &c) in idx.iter().enumerate() {
                    out[(r, c)] = e[(a, b)] * phase;
                }
            }
        }
        out
    }
}

struct RungeKuttaFlow<'a> {
    l: &'a Lindbladian,
    max_substep: f64,
}

impl RungeKuttaFlow<'_> {
    fn advance(&self, rho: &CMatrix, duration: f64) -> Result<CMatrix> {
        if duration == 0.0 {
            return Ok(rho.clone());
        }
        let steps = (duration / self.max_substep).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        let half = Complex64::new(0.5 * h, 0.0);
        let full = Complex64::new(h, 0.0);
        let sixth = Complex64::new(h / 6.0, 0.0);
        let two = Complex64::new(2.0, 0.0);
        let mut y = rho.clone();
        for _ in 0..steps {
            let k1 = self.l.rhs(&y)?;
            let k2 = self.l.rhs(&(&y + &k1 * half))?;
            let k3 = self.l.rhs(&(&y + &k2 * half))?;
            let k4 = self.l.rhs(&(&y + &k3 * full))?;
            y += (k1 + k2 * two + k3 * two + k4) * sixth;
        }
        Ok(y)
    }

    fn run(&self, rho: &CMatrix, echo: Option<&CMatrix>, grid: &TimeGrid) -> Result<Vec<CMatrix>> {
        let step = grid.scale_factor * grid.t_step;
        let mut out = Vec::with_capacity(grid.n_points);
        let mut first = self.advance(rho, grid.evolution_time(0))?;
        for k in 0..grid.n_points {
            let rho_k = match echo {
                None => first.clone(),
                Some(u) => self.advance(&conjugate(u, &first), grid.evolution_time(k))?,
            };
            check_finite(&rho_k, grid.evolution_time(k))?;
            out.push(rho_k);
            if k + 1 < grid.n_points {
                first = self.advance(&first, step)?;
            }
        }
        Ok(out)
    }
}

/// Row `k` holds the basis-state populations at grid point `k`, in bitstring
/// order with qubit 0 leftmost.
pub fn populations(traj: &Trajectory) -> Result<Vec<Vec<f64>>> {
    traj.states
        .iter()
        .enumerate()
        .map(|(step, rho)| {
            rho.diagonal()
                .into_iter()
                .enumerate()
                .map(|(index, p)| {
                    if p < POSITIVITY_FLOOR || !p.is_finite() {
                        Err(Error::PositivityViolation { step, index, value: p })
                    } else {
                        Ok(p.clamp(0.0, 1.0))
                    }
                })
                .collect()
        })
        .collect()
}
