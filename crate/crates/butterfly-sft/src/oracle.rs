//! Ground truth and measurement: direct `O(P^2)` evaluation, the sampled
//! relative error metric, and direct-time extrapolation for speedup figures.

use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::lowrank::kernel_eval;
use crate::{Error, Result};

/// Seed for the 200-target error sample, fixed so reports are reproducible.
pub const SAMPLE_SEED: u64 = 200;

/// Default error-sample size.
pub const SAMPLE_SIZE: usize = 200;

/// Exact double sum `u_i = sum_j kernel(x_i, k_j) f_j`, source order fixed.
pub fn direct_transform<const D: usize>(
    sources: &[[f64; D]],
    charges: &[Complex64],
    targets: &[[f64; D]],
    n: u64,
) -> Result<Vec<Complex64>> {
    if sources.len() != charges.len() {
        return Err(Error::ChargeCountMismatch {
            charges: charges.len(),
            points: sources.len(),
        });
    }
    Ok(targets
        .iter()
        .map(|x| direct_one(sources, charges, x, n))
        .collect())
}

/// Same sum parallelized over targets; each target's summation order is
/// unchanged, so results are bit-identical to the serial version.
pub fn direct_transform_parallel<const D: usize>(
    sources: &[[f64; D]],
    charges: &[Complex64],
    targets: &[[f64; D]],
    n: u64,
) -> Result<Vec<Complex64>> {
    if sources.len() != charges.len() {
        return Err(Error::ChargeCountMismatch {
            charges: charges.len(),
            points: sources.len(),
        });
    }
    Ok(targets
        .par_iter()
        .map(|x| direct_one(sources, charges, x, n))
        .collect())
}

#[inline]
fn direct_one<const D: usize>(
    sources: &[[f64; D]],
    charges: &[Complex64],
    x: &[f64; D],
    n: u64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, f) in sources.iter().zip(charges.iter()) {
        acc += kernel_eval(x, k, n) * f;
    }
    acc
}

/// Relative sampled error report.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub sample_indices: Vec<usize>,
    pub eps_a: f64,
    pub exact_values: Vec<Complex64>,
    pub approx_values: Vec<Complex64>,
}

/// Uniform sample of `count` target indices without replacement.
pub fn sample_indices(total: usize, count: usize, seed: u64) -> Vec<usize> {
    let count = count.min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, total, count).into_vec();
    picked.sort_unstable();
    picked
}

/// `eps_a = sqrt( sum |exact - approx|^2 / sum |exact|^2 )` on a sample.
pub fn estimate_error(
    sample_indices: Vec<usize>,
    exact_on_sample: Vec<Complex64>,
    approx_on_sample: Vec<Complex64>,
) -> Result<ErrorReport> {
    assert_eq!(exact_on_sample.len(), approx_on_sample.len());
    let den: f64 = exact_on_sample.iter().map(|v| v.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num: f64 = exact_on_sample
        .iter()
        .zip(approx_on_sample.iter())
        .map(|(e, a)| (e - a).norm_sqr())
        .sum();
    Ok(ErrorReport {
        sample_indices,
        eps_a: (num / den).sqrt(),
        exact_values: exact_on_sample,
        approx_values: approx_on_sample,
    })
}

/// Estimates the full direct-evaluation time by timing `probe_count` random
/// targets and scaling linearly to the whole target set.
pub fn estimate_direct_time<const D: usize>(
    sources: &[[f64; D]],
    charges: &[Complex64],
    targets: &[[f64; D]],
    n: u64,
    probe_count: usize,
) -> f64 {
    let probe_count = probe_count.min(targets.len()).max(1);
    let picked = sample_indices(targets.len(), probe_count, SAMPLE_SEED ^ 0x7d);
    let probe: Vec<[f64; D]> = picked.iter().map(|&i| targets[i]).collect();
    let start = Instant::now();
    let out = direct_transform(sources, charges, &probe, n).expect("aligned inputs");
    let elapsed = start.elapsed().as_secs_f64();
    std::hint::black_box(out);
    elapsed * targets.len() as f64 / probe.len().max(1) as f64
}
