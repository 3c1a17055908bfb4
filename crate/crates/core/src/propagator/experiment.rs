//! The eight delay-sweep circuits.
//!
//! Circuits defined for two qubits extend uniformly to 1 and 3 qubits: qubit 0
//! plays the "probe" role and every other qubit the "neighbour" role. For one
//! qubit QC4 and QC5 reduce to QC1, and QC7 and QC8 reduce to QC3. For three
//! qubits QC5 excites the last qubit only.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gates::GateLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentKind {
    /// QC1: X on every qubit, delay.
    #[serde(rename = "t1")]
    T1,
    /// QC2: Hahn echo, Ry(pi/2) - delay - Y - delay - Ry(pi/2).
    #[serde(rename = "t2e")]
    T2Echo,
    /// QC3: H - delay - H on every qubit.
    #[serde(rename = "t2s")]
    T2Star,
    /// QC4: X on qubit 0 only.
    #[serde(rename = "t1-10")]
    T1Excite10,
    /// QC5: X on the last qubit only.
    #[serde(rename = "t1-01")]
    T1Excite01,
    /// QC6: no gates, idle from the ground state.
    #[serde(rename = "t1-idle")]
    T1Idle,
    /// QC7: H - delay - H on qubit 0, X - delay - I on the others.
    #[serde(rename = "t2s-hx")]
    T2StarHX,
    /// QC8: H - delay - H on qubit 0, the others idle.
    #[serde(rename = "t2s-hi")]
    T2StarHI,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::T1,
        ExperimentKind::T2Echo,
        ExperimentKind::T2Star,
        ExperimentKind::T1Excite10,
        ExperimentKind::T1Excite01,
        ExperimentKind::T1Idle,
        ExperimentKind::T2StarHX,
        ExperimentKind::T2StarHI,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::T1 => "t1",
            ExperimentKind::T2Echo => "t2e",
            ExperimentKind::T2Star => "t2s",
            ExperimentKind::T1Excite10 => "t1-10",
            ExperimentKind::T1Excite01 => "t1-01",
            ExperimentKind::T1Idle => "t1-idle",
            ExperimentKind::T2StarHX => "t2s-hx",
            ExperimentKind::T2StarHI => "t2s-hi",
        }
    }

    /// Circuit number QC1..QC8.
    pub fn circuit_number(&self) -> usize {
        match self {
            ExperimentKind::T1 => 1,
            ExperimentKind::T2Echo => 2,
            ExperimentKind::T2Star => 3,
            ExperimentKind::T1Excite10 => 4,
            ExperimentKind::T1Excite01 => 5,
            ExperimentKind::T1Idle => 6,
            ExperimentKind::T2StarHX => 7,
            ExperimentKind::T2StarHI => 8,
        }
    }

    /// Relaxation-type sweeps whose states stay diagonal under a diagonal
    /// Hamiltonian.
    pub fn is_relaxation(&self) -> bool {
        matches!(
            self,
            ExperimentKind::T1
                | ExperimentKind::T1Excite10
                | ExperimentKind::T1Excite01
                | ExperimentKind::T1Idle
        )
    }

    pub fn is_echo(&self) -> bool {
        matches!(self, ExperimentKind::T2Echo)
    }

    pub fn circuit(&self, n_qubits: usize) -> Circuit {
        use GateLabel::*;
        let last = n_qubits - 1;
        let per_qubit = |probe: GateLabel, neighbour: GateLabel| -> Vec<GateLabel> {
            (0..n_qubits).map(|q| if q == 0 { probe } else { neighbour }).collect()
        };
        let uniform = |g: GateLabel| vec![g; n_qubits];
        match self {
            ExperimentKind::T1 => Circuit::delay(uniform(X), uniform(I)),
            ExperimentKind::T2Echo => Circuit {
                pre: uniform(Ry(FRAC_PI_2)),
                echo: Some(uniform(Y)),
                post: uniform(Ry(FRAC_PI_2)),
            },
            ExperimentKind::T2Star => Circuit::delay(uniform(H), uniform(H)),
            ExperimentKind::T1Excite10 => Circuit::delay(per_qubit(X, I), uniform(I)),
            ExperimentKind::T1Excite01 => Circuit::delay(
                (0..n_qubits).map(|q| if q == last { X } else { I }).collect(),
                uniform(I),
            ),
            ExperimentKind::T1Idle => Circuit::delay(uniform(I), uniform(I)),
            ExperimentKind::T2StarHX => Circuit::delay(per_qubit(H, X), per_qubit(H, I)),
            ExperimentKind::T2StarHI => Circuit::delay(per_qubit(H, I), per_qubit(H, I)),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown experiment kind '{s}'")))
    }
}

/// Gate layers around the delay. With `echo` set the delay is split into two
/// equal halves around that layer, each as long as the grid delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub pre: Vec<GateLabel>,
    pub echo: Option<Vec<GateLabel>>,
    pub post: Vec<GateLabel>,
}

impl Circuit {
    fn delay(pre: Vec<GateLabel>, post: Vec<GateLabel>) -> Self {
        Self { pre, echo: None, post }
    }
}
