//! Estimator-to-detector reduction and the MSE/tail identity.

use rayon::prelude::*;

use super::{ExperimentConfig, GridCode, Scheme};
use crate::error::{domain, Result};

/// One trial of the scalar grid scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSample {
    pub u: f64,
    pub u_hat: f64,
    pub sent: u64,
    pub decoded: u64,
}

/// Per-trial outcomes of the scalar scheme, in trial order.
pub fn sample_scalar_scheme(cfg: &ExperimentConfig) -> Result<Vec<SchemeSample>> {
    if cfg.dimension() > 1 {
        return domain("scalar experiment needs exactly one rate");
    }
    let scheme = Scheme::new(cfg)?;
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let t = scheme.trial(cfg.seed, i);
            SchemeSample {
                u: t.u,
                u_hat: t.u_hat,
                sent: t.sent,
                decoded: t.decoded,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorReport {
    pub trials: u64,
    pub detector_errors: u64,
    /// Error rate of the detector that picks the grid point nearest to û.
    pub detector_error: f64,
    /// (1/M)·Σᵢ P(|Û − U| > Δ/2 | U in cell i), averaged over observed cells.
    pub mean_conditional_excess: f64,
    pub cells_observed: u64,
}

/// Turns an estimator into an M-ary detector: hypothesis i is the cell that
/// holds U, and the decision is the cell whose grid point is nearest to û.
///
/// `samples` are (u, û) pairs generated on a grid with spacing `delta` and
/// `count` cells.
pub fn estimator_to_detector(
    samples: &[(f64, f64)],
    delta: f64,
    count: u64,
) -> Result<DetectorReport> {
    if samples.is_empty() {
        return domain("no samples");
    }
    if count < 2 || !(delta > 0.0) || (delta * count as f64 - 1.0).abs() > 1e-9 {
        return domain("spacing and cell count disagree (need delta = 1/M)");
    }
    let grid = GridCode::with_count(count, 1.0)?;
    let half = delta / 2.0;
    let mut hits = vec![0u64; count as usize];
    let mut excess = vec![0u64; count as usize];
    let mut errors = 0u64;
    for &(u, u_hat) in samples {
        let truth = grid.quantize(u)?;
        let decision = grid.cell_of(u_hat.clamp(-0.5, 0.5));
        if decision != truth {
            errors += 1;
        }
        hits[truth as usize] += 1;
        if (u_hat - u).abs() > half {
            excess[truth as usize] += 1;
        }
    }
    let observed: Vec<f64> = hits
        .iter()
        .zip(&excess)
        .filter(|(&h, _)| h > 0)
        .map(|(&h, &e)| e as f64 / h as f64)
        .collect();
    let n = samples.len() as u64;
    Ok(DetectorReport {
        trials: n,
        detector_errors: errors,
        detector_error: errors as f64 / n as f64,
        mean_conditional_excess: observed.iter().sum::<f64>() / observed.len() as f64,
        cells_observed: observed.len() as u64,
    })
}

/// Mean squared error computed directly and as 2∫₀¹ Δ·P(|e| ≥ Δ) dΔ on the
/// empirical distribution of the absolute errors.
///
/// With sorted errors e₍₁₎ ≤ … ≤ e₍ₙ₎ the tail is (n − k + 1)/n on
/// (e₍ₖ₋₁₎, e₍ₖ₎], so the integral is Σₖ (n − k + 1)/n·(e₍ₖ₎² − e₍ₖ₋₁₎²).
pub fn mse_from_tail(errors: &[f64]) -> Result<(f64, f64)> {
    if errors.is_empty() {
        return domain("no errors");
    }
    if errors.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return domain("errors must lie in [0, 1]");
    }
    let n = errors.len() as f64;
    let direct = errors.iter().map(|e| e * e).sum::<f64>() / n;
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut prev = 0.0;
    let mut tail = 0.0;
    for (k, &e) in sorted.iter().enumerate() {
        let survivors = (sorted.len() - k) as f64;
        tail += survivors * (e * e - prev * prev);
        prev = e;
    }
    Ok((direct, tail / n))
}
