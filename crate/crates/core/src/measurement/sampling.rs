use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Multinomial draw of `shots` outcomes from `probs`.
///
/// The generator is ChaCha8 keyed by `seed`, on stream 0.
pub fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    sample_counts_on_stream(probs, shots, seed, 0)
}

/// Same as [`sample_counts`] on an explicit ChaCha stream, so row `k` of a
/// record can be drawn independently of every other row.
pub fn sample_counts_on_stream(probs: &[f64], shots: u64, seed: u64, stream: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidProbabilities("shots must be positive".into()));
    }
    let clean = checked_distribution(probs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    // Conditional binomials: n_i ~ Bin(remaining, p_i / mass_left).
    let mut counts = vec![0u64; clean.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0;
    for (i, &p) in clean.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == clean.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q)
            .map_err(|e| Error::InvalidProbabilities(e.to_string()))?
            .sample(&mut rng);
        counts[i] = draw;
        remaining -= draw;
        mass_left -= p;
    }
    Ok(counts)
}

/// Validates a probability row and clamps round-off negatives to zero.
pub fn checked_distribution(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidProbabilities("empty distribution".into()));
    }
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < -SUM_TOLERANCE) {
        return Err(Error::InvalidProbabilities(format!("entry {i} is {p}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidProbabilities(format!("distribution sums to {sum}")));
    }
    Ok(probs.iter().map(|p| p.max(0.0)).collect())
}
