use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::SubsystemFit;
use crate::calibrate::Slot;
use crate::error::{Error, Result};

/// Quantities compared between fits, in the units of the device tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    /// rad/ns
    Omega,
    /// us
    T1,
    /// 1/us
    Gamma,
    /// mK
    Temperature,
    /// rad/ns
    J,
}

impl Symbol {
    pub fn unit(&self) -> &'static str {
        match self {
            Symbol::Omega | Symbol::J => "rad/ns",
            Symbol::T1 => "us",
            Symbol::Gamma => "1/us",
            Symbol::Temperature => "mK",
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::Omega => "omega",
            Symbol::T1 => "T1",
            Symbol::Gamma => "gamma",
            Symbol::Temperature => "T",
            Symbol::J => "J",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Qubit(usize),
    Pair(usize, usize),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Qubit(q) => write!(f, "q{q}"),
            Target::Pair(a, b) => write!(f, "q{a}{b}"),
        }
    }
}

/// Relative spread limits, `None` meaning reported but not gated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub omega: Option<f64>,
    pub t1: Option<f64>,
    pub gamma: Option<f64>,
    pub temperature: Option<f64>,
    pub j: Option<f64>,
    /// Count estimates of slots that were held fixed during their fit.
    pub include_frozen: bool,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { omega: Some(0.01), t1: Some(0.10), gamma: None, temperature: None, j: Some(0.25), include_frozen: false }
    }
}

impl Thresholds {
    pub fn limit(&self, symbol: Symbol) -> Option<f64> {
        match symbol {
            Symbol::Omega => self.omega,
            Symbol::T1 => self.t1,
            Symbol::Gamma => self.gamma,
            Symbol::Temperature => self.temperature,
            Symbol::J => self.j,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Label of the contributing fit.
    pub source: String,
    pub value: f64,
    /// False when the underlying slots were held fixed.
    pub fitted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRow {
    pub symbol: Symbol,
    pub target: Target,
    pub estimates: Vec<Estimate>,
    /// `(max - min) / mean` over the counted estimates; `None` with fewer
    /// than two.
    pub spread: Option<f64>,
    pub threshold: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rows: Vec<SymbolRow>,
    pub max_spread: BTreeMap<Symbol, f64>,
    pub pass: bool,
}

impl ConsistencyReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Text table, one line per shared qubit (or pair) and symbol. Estimates
    /// of held slots carry a trailing `*`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} {:<14} {:>9} {:>9} {:>6}  estimates", "target", "symbol", "spread", "limit", "");
        for row in &self.rows {
            let pct = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{:.2}%", v * 100.0));
            let est: Vec<String> = row
                .estimates
                .iter()
                .map(|e| format!("{}={}{}", e.source, format_value(row.symbol, e.value), if e.fitted { "" } else { "*" }))
                .collect();
            let _ = writeln!(
                out,
                "{:<6} {:<14} {:>9} {:>9} {:>6}  {}",
                row.target.to_string(),
                format!("{} ({})", row.symbol, row.symbol.unit()),
                pct(row.spread),
                pct(row.threshold),
                if row.pass { "ok" } else { "FAIL" },
                est.join("  ")
            );
        }
        let _ = writeln!(out, "verdict: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}

fn format_value(symbol: Symbol, v: f64) -> String {
    match symbol {
        Symbol::Omega => format!("{v:.4}"),
        Symbol::T1 | Symbol::Temperature => format!("{v:.2}"),
        Symbol::Gamma | Symbol::J => format!("{v:.3e}"),
    }
}

/// Compares every qubit and pair covered by two or more fits.
pub fn consistency_check(fits: &[SubsystemFit], thresholds: &Thresholds) -> Result<ConsistencyReport> {
    for f in fits {
        f.validate()?;
    }
    let mut qubit_hits: BTreeMap<usize, usize> = BTreeMap::new();
    let mut pair_hits: BTreeMap<usize, usize> = BTreeMap::new();
    for f in fits {
        for &q in &f.qubit_indices {
            *qubit_hits.entry(q).or_default() += 1;
            if f.contains(q + 1) {
                *pair_hits.entry(q).or_default() += 1;
            }
        }
    }
    let shared: BTreeSet<usize> = qubit_hits.into_iter().filter(|&(_, c)| c >= 2).map(|(q, _)| q).collect();
    if fits.len() < 2 || shared.is_empty() {
        return Err(Error::NothingToCompare);
    }

    let mut rows = Vec::new();
    for &q in &shared {
        let mut per_symbol: BTreeMap<Symbol, Vec<Estimate>> = BTreeMap::new();
        for f in fits {
            let Some(i) = f.local(q) else { continue };
            let set = f.params();
            let report = &f.result.derived.qubits[i];
            let omega = f.fitted(|s| matches!(s, Slot::Omega { qubit, .. } if *qubit == i));
            let gamma = f.fitted(|s| matches!(s, Slot::Gamma { qubit } if *qubit == i));
            let temp = f.fitted(|s| matches!(s, Slot::LogTemperature { qubit } if *qubit == i));
            let source = f.label();
            let mut push = |symbol, value, fitted| {
                per_symbol.entry(symbol).or_default().push(Estimate { source: source.clone(), value, fitted })
            };
            push(Symbol::Omega, set.freqs[i].norm() * 1e-3, omega);
            push(Symbol::T1, report.t1_us, gamma || temp);
            push(Symbol::Gamma, set.gamma[i], gamma);
            push(Symbol::Temperature, set.temperature(i) * 1e3, temp);
        }
        for (symbol, estimates) in per_symbol {
            rows.push(make_row(symbol, Target::Qubit(q), estimates, thresholds));
        }
    }
    for (&a, _) in pair_hits.iter().filter(|&(_, &c)| c >= 2) {
        let estimates = fits
            .iter()
            .filter_map(|f| {
                let p = f.local_pair(a)?;
                let fitted = f.fitted(|s| match s {
                    Slot::Coupling { pair } | Slot::CouplingEntry { pair, .. } => *pair == p,
                    _ => false,
                });
                Some(Estimate { source: f.label(), value: f.params().couplings[p].effective_strength() * 1e-3, fitted })
            })
            .collect();
        rows.push(make_row(Symbol::J, Target::Pair(a, a + 1), estimates, thresholds));
    }

    let mut max_spread: BTreeMap<Symbol, f64> = BTreeMap::new();
    for row in &rows {
        if let Some(s) = row.spread {
            let m = max_spread.entry(row.symbol).or_insert(0.0);
            *m = m.max(s);
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ConsistencyReport { rows, max_spread, pass })
}

fn make_row(symbol: Symbol, target: Target, estimates: Vec<Estimate>, thresholds: &Thresholds) -> SymbolRow {
    let counted: Vec<f64> = estimates
        .iter()
        .filter(|e| e.fitted || thresholds.include_frozen)
        .map(|e| e.value)
        .collect();
    let spread = relative_spread(&counted);
    let threshold = thresholds.limit(symbol);
    let pass = match (spread, threshold) {
        (Some(s), Some(t)) => s <= t,
        _ => true,
    };
    SymbolRow { symbol, target, estimates, spread, threshold, pass }
}

/// `(max - min) / mean`, or `None` for fewer than two values.
pub(crate) fn relative_spread(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[sorted.len() - 1] - sorted[0];
    if range == 0.0 {
        return Some(0.0);
    }
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Some(range / mean.abs())
}
