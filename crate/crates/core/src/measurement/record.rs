//! Delay-sweep records and their CSV form.
//!
//! ```text
//! # kind=t1
//! # qubits=0,1
//! # t_start_us=0
//! # t_step_us=4
//! # n_points=75
//! # scale_factor=1
//! # shots=8192
//! # seed=7
//! # mitigated=false
//! t_us,00,01,10,11
//! 0,0.000976563,0.0192871,0.0197754,0.960083
//! ...
//! #counts,8,158,162,7864
//! ...
//! ```
//!
//! Floats carry nine significant digits. Count rows follow the table when
//! the record came from sampled shots.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::confusion::{apply_confusion, ConfusionMatrix};
use super::sampling::sample_counts_on_stream;
use crate::error::{Error, Result};
use crate::propagator::{populations, run_experiment, ExperimentKind, TimeGrid};
use crate::qdyn::operators::bitstring;
use crate::qdyn::{HamiltonianSpec, NoiseSpec};

/// Row sums of stored probabilities are checked to this tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;
/// Looser row-sum tolerance for probabilities read back from nine-digit text.
const TEXT_ROW_SUM_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub kind: ExperimentKind,
    /// Device qubits measured, in register order.
    pub qubits: Vec<usize>,
    pub grid: TimeGrid,
    /// 0 for exact (noiseless) populations.
    pub shots: u64,
    pub seed: Option<u64>,
    /// Empty when `shots == 0`.
    pub counts: Vec<Vec<u64>>,
    pub mitigated: bool,
    pub probs: Vec<Vec<f64>>,
}

impl ExperimentRecord {
    /// Exact populations with no shot noise.
    pub fn exact(kind: ExperimentKind, qubits: Vec<usize>, grid: TimeGrid, probs: Vec<Vec<f64>>) -> Result<Self> {
        let rec = Self { kind, qubits, grid, shots: 0, seed: None, counts: Vec::new(), mitigated: false, probs };
        rec.validate()?;
        Ok(rec)
    }

    /// Empirical frequencies from shot counts.
    pub fn from_counts(
        kind: ExperimentKind,
        qubits: Vec<usize>,
        grid: TimeGrid,
        counts: Vec<Vec<u64>>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let shots = counts.first().map_or(0, |row| row.iter().sum());
        if shots == 0 {
            return Err(Error::RecordMismatch("count rows must be non-empty with positive shots".into()));
        }
        let probs = counts.iter().map(|row| frequencies(row, shots)).collect();
        let rec = Self { kind, qubits, grid, shots, seed, counts, mitigated: false, probs };
        rec.validate()?;
        Ok(rec)
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn bitstrings(&self) -> Vec<String> {
        (0..self.dim()).map(|i| bitstring(i, self.n_qubits())).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(ROW_SUM_TOLERANCE)
    }

    fn validate_with(&self, tol: f64) -> Result<()> {
        let n = self.n_qubits();
        if n == 0 || n > crate::qdyn::hamiltonian::MAX_QUBITS {
            return Err(Error::RecordMismatch(format!("unsupported register of {n} qubits")));
        }
        if self.qubits.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::RecordMismatch(format!("qubits {:?} are not a contiguous run", self.qubits)));
        }
        self.grid.validate()?;
        let dim = self.dim();
        if self.probs.len() != self.grid.n_points {
            return Err(Error::RecordMismatch(format!(
                "{} probability rows for {} grid points",
                self.probs.len(),
                self.grid.n_points
            )));
        }
        for (k, row) in self.probs.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidProbabilities(format!("row {k} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::InvalidProbabilities(format!("row {k} sums to {s}")));
            }
        }
        if self.shots > 0 {
            if self.counts.len() != self.grid.n_points {
                return Err(Error::RecordMismatch(format!(
                    "{} count rows for {} grid points",
                    self.counts.len(),
                    self.grid.n_points
                )));
            }
            for (k, row) in self.counts.iter().enumerate() {
                if row.len() != dim || row.iter().sum::<u64>() != self.shots {
                    return Err(Error::RecordMismatch(format!("count row {k} does not sum to {} shots", self.shots)));
                }
            }
        } else if !self.counts.is_empty() {
            return Err(Error::RecordMismatch("counts present on a zero-shot record".into()));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let qubits: Vec<String> = self.qubits.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "# kind={}", self.kind);
        let _ = writeln!(out, "# qubits={}", qubits.join(","));
        let _ = writeln!(out, "# t_start_us={}", format_float(self.grid.t_start));
        let _ = writeln!(out, "# t_step_us={}", format_float(self.grid.t_step));
        let _ = writeln!(out, "# n_points={}", self.grid.n_points);
        let _ = writeln!(out, "# scale_factor={}", format_float(self.grid.scale_factor));
        let _ = writeln!(out, "# shots={}", self.shots);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed={seed}");
        }
        let _ = writeln!(out, "# mitigated={}", self.mitigated);
        let _ = writeln!(out, "t_us,{}", self.bitstrings().join(","));
        for (k, row) in self.probs.iter().enumerate() {
            out.push_str(&format_float(self.grid.time(k)));
            for p in row {
                out.push(',');
                out.push_str(&format_float(*p));
            }
            out.push('\n');
        }
        for row in &self.counts {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "#counts,{}", cells.join(","));
        }
        out
    }

    /// Parses the CSV form. Grid metadata may be omitted, in which case the
    /// grid is inferred from an evenly spaced `t_us` column.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut counts = Vec::new();
        let mut header: Option<Vec<String>> = None;
        let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let at = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#counts,") {
                let row = rest
                    .split(',')
                    .map(|c| c.trim().parse::<u64>().map_err(|e| at(format!("bad count '{c}': {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                counts.push(row);
            } else if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
            } else if header.is_none() {
                let cols: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
                if cols.first().map(String::as_str) != Some("t_us") {
                    return Err(at("header must start with t_us".into()));
                }
                header = Some(cols);
            } else {
                let mut cells = line.split(',').map(|c| {
                    c.trim().parse::<f64>().map_err(|e| at(format!("bad number '{c}': {e}")))
                });
                let t = cells.next().ok_or_else(|| at("empty row".into()))??;
                rows.push((t, cells.collect::<Result<Vec<_>>>()?));
            }
        }

        let header = header.ok_or_else(|| Error::Parse("missing t_us header".into()))?;
        let n_qubits = header.get(1).map_or(0, String::len);
        if n_qubits == 0 {
            return Err(Error::Parse("no bitstring columns".into()));
        }
        let expected: Vec<String> = (0..1usize << n_qubits).map(|i| bitstring(i, n_qubits)).collect();
        if header[1..] != expected[..] {
            return Err(Error::Parse(format!(
                "bitstring columns must be {} in that order",
                expected.join(",")
            )));
        }

        let get = |key: &str| meta.get(key).map(String::as_str);
        let parse_f = |key: &str, v: &str| {
            v.parse::<f64>().map_err(|e| Error::Parse(format!("metadata {key}='{v}': {e}")))
        };
        let parse_u = |key: &str, v: &str| {
            v.parse::<u64>().map_err(|e| Error::Parse(format!("metadata {key}='{v}': {e}")))
        };
        let kind: ExperimentKind = get("kind")
            .ok_or_else(|| Error::Parse("missing '# kind=' metadata".into()))?
            .parse()?;
        let qubits = match get("qubits") {
            Some(v) => v
                .split(',')
                .map(|q| q.trim().parse::<usize>().map_err(|e| Error::Parse(format!("qubits '{v}': {e}"))))
                .collect::<Result<Vec<_>>>()?,
            None => (0..n_qubits).collect(),
        };
        if qubits.len() != n_qubits {
            return Err(Error::RecordMismatch(format!(
                "metadata lists {} qubits but columns imply {n_qubits}",
                qubits.len()
            )));
        }
        let times: Vec<f64> = rows.iter().map(|(t, _)| *t).collect();
        let grid = match (get("t_start_us"), get("t_step_us")) {
            (Some(a), Some(b)) => TimeGrid::new(
                parse_f("t_start_us", a)?,
                parse_f("t_step_us", b)?,
                rows.len(),
                get("scale_factor").map_or(Ok(1.0), |v| parse_f("scale_factor", v))?,
            )?,
            _ => infer_grid(&times, get("scale_factor").map_or(Ok(1.0), |v| parse_f("scale_factor", v))?)?,
        };
        if let Some(v) = get("n_points") {
            let n = parse_u("n_points", v)? as usize;
            if n != rows.len() {
                return Err(Error::RecordMismatch(format!("n_points={n} but {} data rows", rows.len())));
            }
        }
        for (k, t) in times.iter().enumerate() {
            if (t - grid.time(k)).abs() > 1e-6 * grid.time(k).abs().max(1.0) {
                return Err(Error::RecordMismatch(format!("t_us {t} at row {k} is off the grid")));
            }
        }

        let shots = get("shots").map_or(Ok(0), |v| parse_u("shots", v))?;
        let seed = get("seed").map(|v| parse_u("seed", v)).transpose()?;
        let mitigated = match get("mitigated") {
            None | Some("false") => false,
            Some("true") => true,
            Some(v) => return Err(Error::Parse(format!("mitigated='{v}'"))),
        };
        let mut probs: Vec<Vec<f64>> = rows.into_iter().map(|(_, p)| p).collect();
        if shots > 0 && !mitigated && counts.len() == probs.len() {
            probs = counts.iter().map(|row| frequencies(row, shots)).collect();
        }
        let rec = Self { kind, qubits, grid, shots, seed, counts, mitigated, probs };
        rec.validate_with(TEXT_ROW_SUM_TOLERANCE)?;
        Ok(rec)
    }
}

fn frequencies(counts: &[u64], shots: u64) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / shots as f64).collect()
}

fn infer_grid(times: &[f64], scale_factor: f64) -> Result<TimeGrid> {
    if times.len() < 2 {
        return Err(Error::RecordMismatch("need at least two time rows".into()));
    }
    TimeGrid::new(times[0], times[1] - times[0], times.len(), scale_factor)
}

/// Nine significant digits, plain notation where that stays short.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// How synthetic measurement data are produced from exact populations.
#[derive(Debug, Clone, PartialEq)]
pub struct Acquisition {
    /// 0 keeps exact populations.
    pub shots: u64,
    pub seed: u64,
    pub confusion: Option<ConfusionMatrix>,
}

impl Default for Acquisition {
    fn default() -> Self {
        Self { shots: 8192, seed: 0, confusion: None }
    }
}

/// Simulates `kind` and turns its populations into a record: readout
/// confusion first, then one multinomial draw per grid point on its own
/// RNG stream.
pub fn synthesize_record(
    kind: ExperimentKind,
    spec: &HamiltonianSpec,
    noise: &NoiseSpec,
    grid: &TimeGrid,
    qubits: Vec<usize>,
    acq: &Acquisition,
) -> Result<ExperimentRecord> {
    if qubits.len() != spec.n_qubits {
        return Err(Error::DimensionMismatch { expected: spec.n_qubits, found: qubits.len() });
    }
    let mut probs = populations(&run_experiment(kind, spec, noise, grid)?)?;
    for row in &mut probs {
        // Clamping may leave the row a few ulps off; renormalise.
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= s);
    }
    if let Some(m) = &acq.confusion {
        probs = probs.iter().map(|row| apply_confusion(row, m)).collect::<Result<_>>()?;
    }
    if acq.shots == 0 {
        return ExperimentRecord::exact(kind, qubits, *grid, probs);
    }
    let counts = probs
        .iter()
        .enumerate()
        .map(|(k, row)| sample_counts_on_stream(row, acq.shots, acq.seed, k as u64))
        .collect::<Result<Vec<_>>>()?;
    ExperimentRecord::from_counts(kind, qubits, *grid, counts, Some(acq.seed))
}
