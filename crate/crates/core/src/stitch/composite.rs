use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SubsystemFit;
use crate::calibrate::{ParameterSet, Slot};
use crate::error::{Error, Result};
use crate::qdyn::{CouplingMatrix, FrequencyVector, HamiltonianMode};

/// How estimates of the same quantity from several fits are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    #[default]
    Mean,
    /// Weights proportional to the inverse final loss of each fit.
    LossWeighted,
}

/// Parameter set for the contiguous device qubits `target`, built from the
/// fits that cover them. Each coupling comes from the smallest fits that
/// contain its pair and actually fitted it (falling back to fits that held
/// it fixed).
pub fn predict_composite(fits: &[SubsystemFit], target: &[usize], combine: Combine) -> Result<ParameterSet> {
    check_target(target)?;
    let mut sources: BTreeMap<usize, Vec<&SubsystemFit>> = BTreeMap::new();
    for &a in &target[..target.len() - 1] {
        let covering: Vec<&SubsystemFit> = fits.iter().filter(|f| f.local_pair(a).is_some()).collect();
        let fitted: Vec<&SubsystemFit> =
            covering.iter().copied().filter(|f| pair_fitted(f, a)).collect();
        let pool = if fitted.is_empty() { covering } else { fitted };
        let smallest = pool.iter().map(|f| f.qubit_indices.len()).min();
        let chosen: Vec<&SubsystemFit> =
            pool.into_iter().filter(|f| Some(f.qubit_indices.len()) == smallest).collect();
        if chosen.is_empty() {
            return Err(Error::MissingCoupling(a, a + 1));
        }
        sources.insert(a, chosen);
    }
    assemble(fits, target, &sources, combine)
}

/// As [`predict_composite`], with the coupling of device pair `(a, a + 1)`
/// taken from `coupling_source[&a]`.
pub fn predict_composite_with(
    fits: &[SubsystemFit],
    target: &[usize],
    coupling_source: &BTreeMap<usize, SubsystemFit>,
    combine: Combine,
) -> Result<ParameterSet> {
    check_target(target)?;
    let mut sources = BTreeMap::new();
    for &a in &target[..target.len() - 1] {
        match coupling_source.get(&a) {
            Some(f) if f.local_pair(a).is_some() => {
                sources.insert(a, vec![f]);
            }
            _ => return Err(Error::MissingCoupling(a, a + 1)),
        }
    }
    assemble(fits, target, &sources, combine)
}

fn check_target(target: &[usize]) -> Result<()> {
    if target.is_empty() || target.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Config(format!("target qubits {target:?} are not a contiguous ascending run")));
    }
    Ok(())
}

fn pair_fitted(f: &SubsystemFit, a: usize) -> bool {
    let p = f.local_pair(a).expect("pair covered");
    f.fitted(|s| match s {
        Slot::Coupling { pair } | Slot::CouplingEntry { pair, .. } => *pair == p,
        _ => false,
    })
}

fn assemble(
    fits: &[SubsystemFit],
    target: &[usize],
    coupling_sources: &BTreeMap<usize, Vec<&SubsystemFit>>,
    combine: Combine,
) -> Result<ParameterSet> {
    for f in fits {
        f.validate()?;
    }
    let general = fits.iter().any(|f| f.result.best_params.layout.mode == HamiltonianMode::General);
    let mut set = ParameterSet {
        mode: if general { HamiltonianMode::General } else { HamiltonianMode::Simple },
        freqs: Vec::with_capacity(target.len()),
        couplings: Vec::with_capacity(target.len() - 1),
        gamma: Vec::with_capacity(target.len()),
        log_temperature: Vec::with_capacity(target.len()),
    };
    for &q in target {
        let covering: Vec<(&SubsystemFit, usize)> =
            fits.iter().filter_map(|f| f.local(q).map(|i| (f, i))).collect();
        if covering.is_empty() {
            return Err(Error::Config(format!("qubit {q} is not covered by any fit")));
        }
        // Prefer estimates that were fitted; fall back to held values.
        let pick = |pred: &dyn Fn(&Slot, usize) -> bool| -> Vec<(&SubsystemFit, usize)> {
            let fitted: Vec<_> =
                covering.iter().copied().filter(|(f, i)| f.fitted(|s| pred(s, *i))).collect();
            if fitted.is_empty() { covering.clone() } else { fitted }
        };
        let omega_src = pick(&|s, i| matches!(s, Slot::Omega { qubit, .. } if *qubit == i));
        let gamma_src = pick(&|s, i| matches!(s, Slot::Gamma { qubit } if *qubit == i));
        let temp_src = pick(&|s, i| matches!(s, Slot::LogTemperature { qubit } if *qubit == i));

        let omegas: Vec<(FrequencyVector, f64)> =
            omega_src.iter().map(|(f, i)| (f.params().freqs[*i], f.result.loss)).collect();
        let axis = |k: usize| merge(omegas.iter().map(|(w, l)| (w.components()[k], *l)).collect(), combine);
        set.freqs.push(FrequencyVector::new(axis(0), axis(1), axis(2)));
        set.gamma.push(merge(gamma_src.iter().map(|(f, i)| (f.params().gamma[*i], f.result.loss)).collect(), combine));
        set.log_temperature
            .push(merge(temp_src.iter().map(|(f, i)| (f.params().log_temperature[*i], f.result.loss)).collect(), combine));
    }
    for &a in &target[..target.len() - 1] {
        let src = &coupling_sources[&a];
        let mats: Vec<(CouplingMatrix, f64)> = src
            .iter()
            .map(|f| (f.params().couplings[f.local_pair(a).expect("pair covered")], f.result.loss))
            .collect();
        let mut m = CouplingMatrix::zero();
        for (r, row) in m.0.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = merge(mats.iter().map(|(j, l)| (j.get(r, c), *l)).collect(), combine);
            }
        }
        set.couplings.push(m);
    }
    Ok(set)
}

/// Merges `(value, loss)` pairs. A single value passes through untouched;
/// otherwise values are summed in sorted order so input order never matters.
fn merge(mut items: Vec<(f64, f64)>, combine: Combine) -> f64 {
    if items.len() == 1 {
        return items[0].0;
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    match combine {
        Combine::Mean => items.iter().map(|(v, _)| v).sum::<f64>() / items.len() as f64,
        Combine::LossWeighted => {
            let w = |l: f64| 1.0 / l.max(f64::MIN_POSITIVE);
            let total: f64 = items.iter().map(|(_, l)| w(*l)).sum();
            items.iter().map(|(v, l)| v * (w(*l) / total)).sum()
        }
    }
}
