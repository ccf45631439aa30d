//! Error probability of M-ary equal-energy detection in white Gaussian noise.
//!
//! With orthogonal signals the ML receiver compares M correlator outputs.
//! Normalizing each by √(N0/2) leaves M independent unit-variance statistics,
//! the transmitted one shifted by μ = √(2𝓔/N0), so
//!
//! ```text
//! P_e = ∫ φ(t)·[1 − Φ(t + μ)^{M−1}] dt.
//! ```
//!
//! A simplex set (pairwise correlation −1/(M−1)) has the same error
//! probability as an orthogonal set with energy 𝓔·M/(M−1).

use crate::error::{domain, Error, Result};
use crate::exponents::{reliability, snapped_ceil, snapped_floor};
use crate::numerics::{
    integrate_with_breaks, log_normal_cdf, log_q_tail, normal_pdf, q_tail, q_tail_inverse,
    QuadratureSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Orthogonal,
    Simplex,
}

/// M equal-energy signals with energy-to-noise ratio 𝓔/N0.
///
/// M is held as a float so that exponentially large sets (up to about e^700)
/// can be evaluated; it must be at least 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSetSpec {
    count: f64,
    energy_ratio: f64,
    geometry: Geometry,
}

impl SignalSetSpec {
    pub fn new(count: f64, energy_ratio: f64, geometry: Geometry) -> Result<Self> {
        if !(count >= 2.0 && count.is_finite()) {
            return domain("a signal set needs at least two signals");
        }
        if !(energy_ratio >= 0.0 && energy_ratio.is_finite()) {
            return domain("energy ratio must be non-negative and finite");
        }
        Ok(Self {
            count,
            energy_ratio,
            geometry,
        })
    }

    pub fn orthogonal(count: f64, energy_ratio: f64) -> Result<Self> {
        Self::new(count, energy_ratio, Geometry::Orthogonal)
    }

    pub fn simplex(count: f64, energy_ratio: f64) -> Result<Self> {
        Self::new(count, energy_ratio, Geometry::Simplex)
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    pub fn energy_ratio(&self) -> f64 {
        self.energy_ratio
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// The orthogonal-equivalent mean shift √(2𝓔/N0), including the simplex boost.
    pub fn mean_shift(&self) -> f64 {
        let e = match self.geometry {
            Geometry::Orthogonal => self.energy_ratio,
            Geometry::Simplex => self.energy_ratio * self.count / (self.count - 1.0),
        };
        (2.0 * e).sqrt()
    }
}

/// Boosted energy 𝓔·M/(M−1) that makes an orthogonal set error-equivalent to
/// an M-point simplex.
pub fn simplex_energy(count: f64, energy: f64) -> Result<f64> {
    if !(count >= 2.0) {
        return domain("a simplex needs at least two signals");
    }
    if count.is_infinite() {
        return Ok(energy);
    }
    Ok(energy * count / (count - 1.0))
}

/// Integration window for the detection integral; beyond ±40 the Gaussian
/// weight is below the smallest positive double.
const T_LIMIT: f64 = 40.0;

fn detection_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_depth: 60,
    }
}

/// Exact symbol error probability of ML detection for the given set.
pub fn exact_mary_error(set: &SignalSetSpec) -> Result<f64> {
    let mu = set.mean_shift();
    let others = set.count - 1.0;
    let ln_others = others.ln();

    // 1 − Φ(x)^{M−1} = −expm1((M−1)·lnΦ(x)), with (M−1)·lnΦ(x) taken through
    // ln Q when Q(x) is small so huge M neither overflows nor cancels.
    let miss = |x: f64| -> f64 {
        let log_power = if x > 0.0 {
            let lq = log_q_tail(x);
            let q = lq.exp();
            let log1p_ratio = if q < 1e-8 {
                1.0 + 0.5 * q
            } else {
                -(-q).ln_1p() / q
            };
            -(ln_others + lq).exp() * log1p_ratio
        } else {
            others * log_normal_cdf(x)
        };
        -log_power.exp_m1()
    };
    let integrand = |t: f64| normal_pdf(t) * miss(t + mu);

    // Breakpoints: the density peak, the transition where (M−1)Q(t+μ) = 1,
    // and the saddle −μ/2 of φ(t)·Q(t+μ) that carries the mass when P_e is small.
    let transition = if others > 1.0 {
        q_tail_inverse(1.0 / others) - mu
    } else {
        -mu
    };
    let mut points = vec![-T_LIMIT, T_LIMIT];
    for p in [
        0.0,
        transition - 4.0,
        transition,
        transition + 4.0,
        -mu / 2.0,
    ] {
        if p.is_finite() && p > -T_LIMIT + 1e-9 && p < T_LIMIT - 1e-9 {
            points.push(p);
        }
    }
    points.sort_by(|a, b| a.total_cmp(b));
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let p = integrate_with_breaks(integrand, &points, &detection_quadrature())?;
    Ok(p.clamp(0.0, 1.0 - 1.0 / set.count))
}

fn check_threshold(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain("error threshold must lie in (0, 1)");
    }
    Ok(())
}

/// Zero-rate lower bound on P(|Û − U| > Δ/2):
/// ½(1 + Δ − Δ⌊1/Δ⌋)·Q(√((𝓔/N0)·⌊1/Δ⌋/(⌊1/Δ⌋ − 2))).
///
/// Defined while ⌊1/Δ⌋ ≥ 3, i.e. Δ ≤ 1/3.
pub fn zero_rate_lower_bound(delta: f64, energy_ratio: f64) -> Result<f64> {
    check_threshold(delta)?;
    if !(energy_ratio >= 0.0) {
        return domain("energy ratio must be non-negative");
    }
    let n = snapped_floor(1.0 / delta);
    if n <= 2 {
        return domain("bound undefined at this threshold (needs floor(1/delta) > 2)");
    }
    let n = n as f64;
    let prefactor = 0.5 * (1.0 + delta - delta * n);
    Ok(prefactor * q_tail((energy_ratio * n / (n - 2.0)).sqrt()))
}

/// Union-bound upper bound for M = ⌈1/Δ⌉ simplex signals:
/// (M − 1)·Q(√((𝓔/N0)·M/(M − 1))), clamped to [0, 1].
pub fn zero_rate_upper_bound(delta: f64, energy_ratio: f64) -> Result<f64> {
    check_threshold(delta)?;
    if !(energy_ratio >= 0.0) {
        return domain("energy ratio must be non-negative");
    }
    let m = snapped_ceil(1.0 / delta) as f64;
    Ok(((m - 1.0) * q_tail((energy_ratio * m / (m - 1.0)).sqrt())).clamp(0.0, 1.0))
}

/// The number of simplex signals, ⌈1/Δ⌉, behind [`zero_rate_upper_bound`].
pub fn zero_rate_signal_count(delta: f64) -> Result<u64> {
    check_threshold(delta)?;
    Ok(snapped_ceil(1.0 / delta))
}

/// Smallest duration above which e^{−T·E(R, S)} is convex in S for every
/// S with S/N0 ≥ C_min: √R / [2√C_min·(√C_min − √R)²].
pub fn convexity_threshold(rate: f64, min_capacity: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return domain("rate must be positive");
    }
    if !(rate < min_capacity) {
        return domain("rate must be below the capacity of the weakest power");
    }
    let d = min_capacity.sqrt() - rate.sqrt();
    Ok(rate.sqrt() / (2.0 * min_capacity.sqrt() * d * d))
}

/// Samples of a power law S(u) on a uniform grid over [−1/2, +1/2), the power
/// bin width δ, and the average-power cap S.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    samples: Vec<f64>,
    bin_width: f64,
    cap: f64,
}

impl PowerProfile {
    pub fn new(samples: Vec<f64>, bin_width: f64, cap: f64) -> Result<Self> {
        if samples.is_empty() {
            return domain("power profile needs at least one sample");
        }
        if samples.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return domain("power samples must be positive and finite");
        }
        if !(bin_width > 0.0) {
            return domain("bin width must be positive");
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        if mean > cap * (1.0 + 1e-12) {
            return domain(format!(
                "profile mean {mean} exceeds the average-power cap {cap}"
            ));
        }
        Ok(Self {
            samples,
            bin_width,
            cap,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }
}

/// ε = δ = 1/√T.
pub fn default_slack(duration: f64) -> f64 {
    1.0 / duration.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBin {
    pub index: usize,
    /// Bin power S_min + (i + ½)δ.
    pub power: f64,
    /// Share of profile samples falling in the bin.
    pub share: f64,
    /// Weight among retained bins.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariablePowerBound {
    /// Σ πᵢ·e^{−T·E(R − 2ε, Sᵢ)} over retained bins.
    pub mixture: f64,
    /// e^{−T·E(R − 2ε, Σ πᵢ Sᵢ)}.
    pub convexified: f64,
    pub slack: f64,
    pub threshold: f64,
    pub above_threshold: bool,
    pub ordering_holds: bool,
    pub retained: Vec<PowerBin>,
}

/// Binned lower-bound machinery for modulators whose power varies with u.
///
/// Powers are partitioned into r = ⌈(S_max − S_min)/δ⌉ bins whose width is
/// shrunk to (S_max − S_min)/r so it divides the range. A bin is retained when
/// it holds at least an e^{−εT} share of the samples. Every signal of a bin is
/// treated as having the bin's center power; the exponent change this causes
/// is ignored, as in the underlying argument.
///
/// Above the convexity threshold (evaluated at the weakest retained bin power)
/// the mixture must dominate the convexified value; a violation there is an
/// error. Below it the ordering is only reported.
pub fn variable_power_bound(
    profile: &PowerProfile,
    rate: f64,
    duration: f64,
    slack: Option<f64>,
    noise: f64,
) -> Result<VariablePowerBound> {
    if !(duration > 0.0) {
        return domain("duration must be positive");
    }
    if !(noise > 0.0) {
        return domain("noise density must be positive");
    }
    let slack = slack.unwrap_or_else(|| default_slack(duration));
    if !(slack >= 0.0) {
        return domain("slack must be non-negative");
    }
    let reduced = rate - 2.0 * slack;
    if !(reduced > 0.0) {
        return domain("R - 2*epsilon must be positive");
    }

    let samples = &profile.samples;
    let s_min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let s_max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = s_max - s_min;
    let bins = snapped_ceil(range / profile.bin_width).max(1) as usize;
    let width = range / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let i = if width > 0.0 {
            (((s - s_min) / width).floor() as usize).min(bins - 1)
        } else {
            0
        };
        counts[i] += 1;
    }

    let n = samples.len() as f64;
    let cutoff = (-slack * duration).exp();
    let kept: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0 && k as f64 / n >= cutoff)
        .map(|(i, &k)| (i, k))
        .collect();
    if kept.is_empty() {
        return Err(Error::AllBinsFiltered { cutoff });
    }
    let kept_total: usize = kept.iter().map(|(_, k)| k).sum();
    let retained: Vec<PowerBin> = kept
        .iter()
        .map(|&(i, k)| PowerBin {
            index: i,
            power: s_min + (i as f64 + 0.5) * width,
            share: k as f64 / n,
            weight: k as f64 / kept_total as f64,
        })
        .collect();

    let weakest = retained
        .iter()
        .map(|b| b.power)
        .fold(f64::INFINITY, f64::min);
    let min_capacity = weakest / noise;
    if !(rate < min_capacity) {
        return domain("rate must be below the capacity of every retained power bin");
    }

    let bound = |power: f64| (-duration * reliability(power / noise, reduced)).exp();
    let mixture: f64 = retained.iter().map(|b| b.weight * bound(b.power)).sum();
    let mean_power: f64 = retained.iter().map(|b| b.weight * b.power).sum();
    let convexified = bound(mean_power);
    let threshold = convexity_threshold(rate, min_capacity)?;
    let above_threshold = duration >= threshold;
    let ordering_holds = mixture >= convexified * (1.0 - 1e-12);
    if above_threshold && !ordering_holds {
        return Err(Error::ConvexityViolated {
            mixture,
            convexified,
            duration,
        });
    }
    Ok(VariablePowerBound {
        mixture,
        convexified,
        slack,
        threshold,
        above_threshold,
        ordering_holds,
        retained,
    })
}
