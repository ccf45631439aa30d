//! Monte Carlo realization of the quantize-and-signal scheme.
//!
//! The parameter U is quantized to a grid cell, the cell index selects one of
//! M orthogonal signals, and the receiver picks the largest of M correlator
//! statistics. Everything is simulated in signal space: the true statistic is
//! N(μ, 1) with μ = √(2𝓔/N0), the others are N(0, 1).
//!
//! Trial `i` draws from stream `(seed, i)`, so counts depend only on the seed
//! and the trial count, never on how trials are spread over threads.

mod grid;
mod harness;

pub use grid::{build_grid, build_grid_capped, quantize, GridCode, DEFAULT_CELL_CAP};
pub use harness::{
    estimator_to_detector, mse_from_tail, sample_scalar_scheme, DetectorReport, SchemeSample,
};

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::exponents::{snapped_ceil, ChannelSpec, FadingSpec};
use crate::numerics::{normal_quantile, q_tail_inverse, RandomStream, StreamCursor};

/// Above this many signals the decoder samples the largest wrong statistic
/// from its order-statistic law instead of drawing all of them.
pub const EXPLICIT_DECODE_LIMIT: u64 = 1024;

/// Default confidence level of [`TailEstimate`] intervals.
pub const DEFAULT_CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel: ChannelSpec,
    pub duration: f64,
    /// Per-dimension rates in nats/s; one entry for scalar experiments.
    pub rates: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub fading: Option<FadingSpec>,
    /// Fixed error threshold Δ for zero-rate experiments. The grid then has
    /// ⌈1/Δ⌉ cells signalled with a simplex and the rates are ignored.
    pub fixed_threshold: Option<f64>,
    pub cell_cap: u64,
    pub ci_level: f64,
}

impl ExperimentConfig {
    pub fn scalar(channel: ChannelSpec, duration: f64, rate: f64, trials: u64, seed: u64) -> Self {
        Self::multidim(channel, duration, vec![rate], trials, seed)
    }

    pub fn multidim(
        channel: ChannelSpec,
        duration: f64,
        rates: Vec<f64>,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            channel,
            duration,
            rates,
            trials,
            seed,
            fading: None,
            fixed_threshold: None,
            cell_cap: DEFAULT_CELL_CAP,
            ci_level: DEFAULT_CI_LEVEL,
        }
    }

    /// Rayleigh fading with scale `sigma` over this config's channel.
    pub fn with_fading(mut self, sigma: f64) -> Result<Self> {
        self.fading = Some(FadingSpec::new(sigma, self.channel)?);
        Ok(self)
    }

    pub fn with_fixed_threshold(mut self, delta: f64) -> Self {
        self.fixed_threshold = Some(delta);
        self
    }

    pub fn with_cell_cap(mut self, cap: u64) -> Self {
        self.cell_cap = cap;
        self
    }

    pub fn with_ci_level(mut self, level: f64) -> Self {
        self.ci_level = level;
        self
    }

    pub fn dimension(&self) -> usize {
        self.rates.len()
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return domain("duration must be positive and finite");
        }
        if self.trials == 0 {
            return domain("trials must be at least 1");
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return domain("confidence level must lie in (0, 1)");
        }
        match self.fixed_threshold {
            Some(delta) => {
                if !(delta > 0.0 && delta < 1.0) {
                    return domain("fixed threshold must lie in (0, 1)");
                }
                if self.rates.len() > 1 {
                    return domain("fixed-threshold mode is scalar only");
                }
            }
            None => {
                if self.rates.is_empty() {
                    return domain("at least one rate is required");
                }
                if self.rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return domain("rates must be positive and finite");
                }
            }
        }
        if let Some(f) = &self.fading {
            if f.channel() != self.channel {
                return domain("fading spec must use the experiment's channel");
            }
        }
        Ok(())
    }
}

/// Monte Carlo estimate of an event probability with a Wilson score interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub k: u64,
    pub n: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub level: f64,
    pub event: String,
}

impl TailEstimate {
    pub fn new(k: u64, n: u64, level: f64, event: impl Into<String>) -> Result<Self> {
        if n == 0 || k > n {
            return domain("need 0 <= k <= n and n >= 1");
        }
        if !(level > 0.0 && level < 1.0) {
            return domain("confidence level must lie in (0, 1)");
        }
        let (ci_lo, ci_hi) = wilson_interval(k, n, level);
        Ok(Self {
            k,
            n,
            p_hat: k as f64 / n as f64,
            ci_lo,
            ci_hi,
            level,
            event: event.into(),
        })
    }

    /// Binomial standard deviation √(p(1−p)/n) at a reference probability.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n as f64).sqrt()
    }
}

/// Wilson score interval for k successes in n trials.
pub fn wilson_interval(k: u64, n: u64, level: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z = normal_quantile(0.5 + 0.5 * level);
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let hi = if k == n {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    (lo, hi)
}

/// ML decision among `count` orthogonal signals when `index` was sent.
///
/// Up to [`EXPLICIT_DECODE_LIMIT`] signals, all statistics are drawn in index
/// order and the first maximum wins. Beyond that the largest wrong statistic
/// is drawn directly: its CDF is Φ(w)^{M−1}, so w = Q⁻¹(1 − V^{1/(M−1)}), and
/// a wrong decision picks one of the other M − 1 indices uniformly.
pub fn transmit_decode(index: u64, count: u64, mu: f64, rng: &mut StreamCursor) -> Result<u64> {
    if count < 2 || index >= count {
        return domain("need count >= 2 and index < count");
    }
    if !(mu >= 0.0) {
        return domain("mean shift must be non-negative");
    }
    Ok(decode(index, count, mu, rng))
}

fn decode(index: u64, count: u64, mu: f64, rng: &mut StreamCursor) -> u64 {
    if count <= EXPLICIT_DECODE_LIMIT {
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for j in 0..count {
            let mut y = rng.normal();
            if j == index {
                y += mu;
            }
            if y > best_value {
                best = j;
                best_value = y;
            }
        }
        return best;
    }
    let own = mu + rng.normal();
    let others = (count - 1) as f64;
    let v = rng.open_uniform();
    let rival = q_tail_inverse(-(v.ln() / others).exp_m1());
    if own > rival {
        return index;
    }
    let j = rng.below(count - 1);
    if j >= index {
        j + 1
    } else {
        j
    }
}

/// Draws a Rayleigh gain with density (a/σ²)·e^{−a²/(2σ²)} by inversion.
fn rayleigh(sigma: f64, rng: &mut StreamCursor) -> f64 {
    sigma * (-2.0 * rng.open_uniform().ln()).sqrt()
}

/// Monte Carlo error rate of ML detection among `count` orthogonal signals
/// with mean shift `mu`.
pub fn simulate_detection(
    count: u64,
    mu: f64,
    trials: u64,
    seed: u64,
    level: f64,
) -> Result<TailEstimate> {
    if count < 2 {
        return domain("need at least two signals");
    }
    if !(mu >= 0.0) {
        return domain("mean shift must be non-negative");
    }
    if trials == 0 {
        return domain("trials must be at least 1");
    }
    let k = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = RandomStream::new(seed, i).cursor();
            let sent = rng.below(count);
            decode(sent, count, mu, &mut rng) != sent
        })
        .count() as u64;
    TailEstimate::new(k, trials, level, "decoded != sent")
}

/// Per-trial outcome of the grid scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Trial {
    pub sent: u64,
    pub decoded: u64,
    /// Union over dimensions of |û_i − U_i| > threshold_i.
    pub excess: bool,
    /// First-dimension parameter and estimate.
    pub u: f64,
    pub u_hat: f64,
}

/// Resolved scheme: per-dimension grids, thresholds and signal energy.
#[derive(Debug, Clone)]
pub(crate) struct Scheme {
    grids: Vec<GridCode>,
    thresholds: Vec<f64>,
    total: u64,
    mu: f64,
    sigma: Option<f64>,
}

impl Scheme {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let snr2 = 2.0 * cfg.channel.energy_ratio(cfg.duration);
        if let Some(delta) = cfg.fixed_threshold {
            let count = snapped_ceil(1.0 / delta).max(2);
            if count > cfg.cell_cap {
                return Err(Error::GridTooLarge {
                    cells: count as f64,
                    cap: cfg.cell_cap,
                });
            }
            let m = count as f64;
            return Ok(Self {
                grids: vec![GridCode::with_count(count, cfg.duration)?],
                thresholds: vec![delta / 2.0],
                total: count,
                mu: (snr2 * m / (m - 1.0)).sqrt(),
                sigma: cfg.fading.map(|f| f.sigma()),
            });
        }
        let mut cells = 1.0f64;
        for &r in &cfg.rates {
            cells *= grid::cell_count(r, cfg.duration)?;
        }
        if cells > cfg.cell_cap as f64 {
            return Err(Error::GridTooLarge {
                cells,
                cap: cfg.cell_cap,
            });
        }
        let grids = cfg
            .rates
            .iter()
            .map(|&r| build_grid_capped(r, cfg.duration, cfg.cell_cap))
            .collect::<Result<Vec<_>>>()?;
        let thresholds = grids.iter().map(|g| g.threshold()).collect();
        let total = grids.iter().map(|g| g.count()).product();
        Ok(Self {
            grids,
            thresholds,
            total,
            mu: snr2.sqrt(),
            sigma: cfg.fading.map(|f| f.sigma()),
        })
    }

    pub fn trial(&self, seed: u64, id: u64) -> Trial {
        let mut rng = RandomStream::new(seed, id).cursor();
        let us: Vec<f64> = self.grids.iter().map(|_| rng.uniform() - 0.5).collect();
        let mu = match self.sigma {
            Some(s) => self.mu * rayleigh(s, &mut rng),
            None => self.mu,
        };
        // Mixed radix with dimension 0 least significant.
        let mut sent = 0u64;
        let mut stride = 1u64;
        let mut cells = Vec::with_capacity(self.grids.len());
        for (g, &u) in self.grids.iter().zip(&us) {
            let c = g.cell_of(u);
            cells.push(c);
            sent += c * stride;
            stride *= g.count();
        }
        let decoded = decode(sent, self.total, mu, &mut rng);
        let mut rest = decoded;
        let mut excess = false;
        let mut u_hat = 0.0;
        for (d, (g, &u)) in self.grids.iter().zip(&us).enumerate() {
            let c = rest % g.count();
            rest /= g.count();
            let est = g.point(c);
            if d == 0 {
                u_hat = est;
            }
            excess |= (est - u).abs() > self.thresholds[d];
        }
        Trial {
            sent,
            decoded,
            excess,
            u: us[0],
            u_hat,
        }
    }

    fn count_excess(&self, seed: u64, trials: u64) -> u64 {
        (0..trials)
            .into_par_iter()
            .filter(|&i| self.trial(seed, i).excess)
            .count() as u64
    }
}

fn run(cfg: &ExperimentConfig, event: &str) -> Result<TailEstimate> {
    let scheme = Scheme::new(cfg)?;
    let k = scheme.count_excess(cfg.seed, cfg.trials);
    TailEstimate::new(k, cfg.trials, cfg.ci_level, event)
}

/// P(|Û − U| > Δ/2) for the scalar scheme with μ = √(2CT).
pub fn run_excess_error(cfg: &ExperimentConfig) -> Result<TailEstimate> {
    if cfg.dimension() > 1 {
        return domain("scalar experiment needs exactly one rate");
    }
    if cfg.fading.is_some() {
        return domain("use run_fading for faded experiments");
    }
    run(cfg, "|u_hat - u| > delta/2")
}

/// P(∪_i |Û_i − U_i| > Δ_i/2) for a Cartesian product grid with one
/// orthogonal signal per cell.
pub fn run_multidim(cfg: &ExperimentConfig) -> Result<TailEstimate> {
    if cfg.fading.is_some() {
        return domain("multidimensional experiments are unfaded");
    }
    if cfg.fixed_threshold.is_some() {
        return domain("fixed-threshold mode is scalar only");
    }
    run(cfg, "any |u_hat_i - u_i| > delta_i/2")
}

/// The scalar scheme under Rayleigh fading: μ is scaled by a fresh gain per
/// trial while the decoder is unchanged.
pub fn run_fading(cfg: &ExperimentConfig) -> Result<TailEstimate> {
    if cfg.fading.is_none() {
        return domain("fading experiment needs a fading spec");
    }
    if cfg.dimension() > 1 {
        return domain("fading experiment is scalar only");
    }
    run(cfg, "|u_hat - u| > delta/2 under Rayleigh fading")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::{exact_mary_error, SignalSetSpec};
    use crate::exponents::outage_probability;

    fn chan(c: f64) -> ChannelSpec {
        ChannelSpec::from_capacity(c).unwrap()
    }

    fn within_3_sigma(est: &TailEstimate, p: f64) -> bool {
        (est.p_hat - p).abs() <= 3.0 * est.sigma_at(p)
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100, 0.95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_993_498_206_985_68).abs() < 1e-9);
        let (lo, hi) = wilson_interval(50, 100, 0.95);
        assert!((lo - 0.403_831_530_365_995_6).abs() < 1e-9);
        assert!((hi - 0.596_168_469_634_004_4).abs() < 1e-9);
        let (lo, hi) = wilson_interval(100, 100, 0.95);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0);
    }

    #[test]
    fn overwhelming_mean_never_errs() {
        let e = simulate_detection(8, 1e6, 100_000, 1, 0.95).unwrap();
        assert_eq!(e.k, 0);
        let e = simulate_detection(1 << 20, 1e6, 100_000, 1, 0.95).unwrap();
        assert_eq!(e.k, 0);
    }

    #[test]
    fn zero_mean_decodes_uniformly() {
        let m = 8u64;
        let n = 100_000u64;
        let mut counts = vec![0u64; m as usize];
        for i in 0..n {
            let mut rng = RandomStream::new(3, i).cursor();
            counts[transmit_decode(2, m, 0.0, &mut rng).unwrap() as usize] += 1;
        }
        let expect = n as f64 / m as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        // χ²(7) 0.999 quantile.
        assert!(chi2 < 24.32, "chi2 = {chi2}");
    }

    #[test]
    fn order_statistic_decoder_is_uniform_over_wrong_indices() {
        let m = 5000u64;
        let mut low = 0u64;
        let mut n_wrong = 0u64;
        for i in 0..20_000 {
            let mut rng = RandomStream::new(4, i).cursor();
            let d = transmit_decode(10, m, 0.0, &mut rng).unwrap();
            if d != 10 {
                n_wrong += 1;
                if d < 2500 {
                    low += 1;
                }
            }
        }
        let frac = low as f64 / n_wrong as f64;
        assert!((frac - 2499.0 / 4999.0).abs() < 4.0 * (0.25 / n_wrong as f64).sqrt());
    }

    #[test]
    fn transmit_decode_rejects_bad_input() {
        let mut rng = RandomStream::new(0, 0).cursor();
        assert!(transmit_decode(4, 4, 1.0, &mut rng).is_err());
        assert!(transmit_decode(0, 1, 1.0, &mut rng).is_err());
        assert!(transmit_decode(0, 4, -1.0, &mut rng).is_err());
    }

    #[test]
    fn oracle_matrix() {
        for &(m, snr2) in &[(2u64, 4.0), (4, 8.0), (16, 16.0), (64, 32.0), (4096, 36.0)] {
            let p = exact_mary_error(&SignalSetSpec::orthogonal(m as f64, snr2 / 2.0).unwrap())
                .unwrap();
            let e = simulate_detection(m, f64::sqrt(snr2), 100_000, 11, 0.95).unwrap();
            assert!(within_3_sigma(&e, p), "M={m}: {} vs {p}", e.p_hat);
        }
    }

    #[test]
    fn scalar_run_matches_exact_error() {
        // C = 2, T = 4, R = 0.5: M = round(e²/2) = 4, 2𝓔/N0 = 2CT = 16.
        let cfg = ExperimentConfig::scalar(chan(2.0), 4.0, 0.5, 100_000, 7);
        let e = run_excess_error(&cfg).unwrap();
        let p = exact_mary_error(&SignalSetSpec::orthogonal(4.0, 8.0).unwrap()).unwrap();
        assert!(within_3_sigma(&e, p), "{} vs {p}", e.p_hat);
        assert!(e.ci_lo <= e.p_hat && e.p_hat <= e.ci_hi);
    }

    #[test]
    fn excess_event_is_decode_error_per_trial() {
        for cfg in [
            ExperimentConfig::scalar(chan(1.0), 6.0, 0.6, 5000, 1),
            ExperimentConfig::multidim(chan(1.0), 6.0, vec![0.4, 0.3], 5000, 2),
            ExperimentConfig::scalar(chan(1.0), 20.0, 0.7, 5000, 3),
            ExperimentConfig::scalar(chan(1.0), 4.0, 0.5, 5000, 4)
                .with_fading(1.0)
                .unwrap(),
        ] {
            let scheme = Scheme::new(&cfg).unwrap();
            for i in 0..cfg.trials {
                let t = scheme.trial(cfg.seed, i);
                assert_eq!(t.excess, t.decoded != t.sent);
            }
        }
    }

    #[test]
    fn rate_above_capacity_almost_always_errs() {
        let cfg = ExperimentConfig::scalar(chan(1.0), 20.0, 2.0, 10_000, 5);
        assert!(run_excess_error(&cfg).unwrap().p_hat > 0.9);
    }

    #[test]
    fn single_dimension_multidim_is_scalar() {
        let a = ExperimentConfig::scalar(chan(1.0), 10.0, 0.5, 20_000, 9);
        let b = ExperimentConfig::multidim(chan(1.0), 10.0, vec![0.5], 20_000, 9);
        let sa = Scheme::new(&a).unwrap();
        let sb = Scheme::new(&b).unwrap();
        for i in 0..2000 {
            assert_eq!(sa.trial(9, i), sb.trial(9, i));
        }
        assert_eq!(run_excess_error(&a).unwrap().k, run_multidim(&b).unwrap().k);
    }

    #[test]
    fn product_grid_matches_exact_error() {
        // M = 4 per dimension, 16 signals in total.
        let t = 4.0;
        let r = 8f64.ln() / t;
        let cfg = ExperimentConfig::multidim(chan(2.0), t, vec![r, r], 100_000, 13);
        let e = run_multidim(&cfg).unwrap();
        let p = exact_mary_error(&SignalSetSpec::orthogonal(16.0, 8.0).unwrap()).unwrap();
        assert!(within_3_sigma(&e, p), "{} vs {p}", e.p_hat);
    }

    #[test]
    fn multidim_matches_scalar_at_total_rate() {
        let t = 4.0;
        let r = 8f64.ln() / t;
        let two = ExperimentConfig::multidim(chan(1.5), t, vec![r, r], 50_000, 21);
        let one = ExperimentConfig::scalar(chan(1.5), t, 32f64.ln() / t, 50_000, 22);
        let a = run_multidim(&two).unwrap();
        let b = run_excess_error(&one).unwrap();
        let p = 0.5 * (a.p_hat + b.p_hat);
        let s = (p * (1.0 - p) * (1.0 / a.n as f64 + 1.0 / b.n as f64)).sqrt();
        assert!((a.p_hat - b.p_hat).abs() <= 3.0 * s);
    }

    #[test]
    fn multidim_above_critical_dimension_fails() {
        let cfg = ExperimentConfig::multidim(chan(1.0), 20.0, vec![0.5; 4], 10_000, 3);
        assert!(run_multidim(&cfg).unwrap().p_hat > 0.9);
    }

    #[test]
    fn fading_approaches_outage() {
        let cfg = ExperimentConfig::scalar(chan(1.0), 40.0, 0.5, 50_000, 17)
            .with_fading(1.0)
            .unwrap();
        let e = run_fading(&cfg).unwrap();
        let outage = outage_probability(cfg.fading.as_ref().unwrap(), 0.5).unwrap();
        // Finite T leaves the estimate slightly below outage.
        assert!(e.p_hat < outage && e.p_hat > outage - 0.05, "{}", e.p_hat);
    }

    #[test]
    fn strong_fading_scale_removes_errors() {
        let cfg = ExperimentConfig::scalar(chan(1.0), 10.0, 0.5, 20_000, 2)
            .with_fading(30.0)
            .unwrap();
        assert!(run_fading(&cfg).unwrap().p_hat < 0.01);
    }

    #[test]
    fn fixed_threshold_fading_decays_algebraically() {
        for ct in [10.0, 30.0, 100.0] {
            let cfg = ExperimentConfig::scalar(chan(1.0), ct, 1.0, 50_000, 31)
                .with_fading(1.0)
                .unwrap()
                .with_fixed_threshold(0.25);
            let e = run_fading(&cfg).unwrap();
            let scaled = e.p_hat * 4.0 * ct;
            assert!((0.5..=2.0).contains(&scaled), "C̄T = {ct}: {scaled}");
        }
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let cfg = ExperimentConfig::scalar(chan(1.0), 12.0, 0.5, 20_000, 77);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap();
        let a = one.install(|| run_excess_error(&cfg)).unwrap();
        let b = many.install(|| run_excess_error(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_errors() {
        let base = ExperimentConfig::scalar(chan(1.0), 1.0, 0.5, 10, 0);
        let mut c = base.clone();
        c.trials = 0;
        assert!(run_excess_error(&c).is_err());
        let mut c = base.clone();
        c.rates = vec![0.0];
        assert!(run_excess_error(&c).is_err());
        assert!(run_fading(&base).is_err());
        let c = ExperimentConfig::scalar(chan(1.0), 40.0, 1.0, 10, 0).with_cell_cap(1 << 24);
        assert!(matches!(
            run_excess_error(&c),
            Err(Error::GridTooLarge { .. })
        ));
        let c = ExperimentConfig::multidim(chan(1.0), 40.0, vec![0.6, 0.6], 10, 0);
        assert!(matches!(run_multidim(&c), Err(Error::GridTooLarge { .. })));
    }
}
