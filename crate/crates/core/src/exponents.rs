//! Closed-form error exponents for the infinite-bandwidth AWGN channel and
//! its band-limited and Rayleigh-faded variants.
//!
//! Rates and exponents are in nats per second, logarithms are natural.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::numerics::{integrate_1d, maximize_concave_1d, minimize_convex_1d, QuadratureSpec};

/// Signal power `S` and noise density `N0` (two-sided spectral density N0/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    power: f64,
    noise: f64,
}

impl ChannelSpec {
    pub fn new(power: f64, noise: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return domain("signal power must be positive and finite");
        }
        if !(noise > 0.0 && noise.is_finite()) {
            return domain("noise density must be positive and finite");
        }
        Ok(Self { power, noise })
    }

    /// A channel with the given capacity, normalized to N0 = 1.
    pub fn from_capacity(capacity: f64) -> Result<Self> {
        Self::new(capacity, 1.0)
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// C = S/N0.
    pub fn capacity(&self) -> f64 {
        self.power / self.noise
    }

    /// 𝓔/N0 = C·T for a transmission of the given duration.
    pub fn energy_ratio(&self, duration: f64) -> f64 {
        self.capacity() * duration
    }
}

/// Rayleigh fading with scale `sigma` on top of an AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    sigma: f64,
    channel: ChannelSpec,
}

impl FadingSpec {
    pub fn new(sigma: f64, channel: ChannelSpec) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return domain("Rayleigh scale must be positive and finite");
        }
        Ok(Self { sigma, channel })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn channel(&self) -> ChannelSpec {
        self.channel
    }

    /// C̄ = σ²·C.
    pub fn average_capacity(&self) -> f64 {
        self.sigma * self.sigma * self.channel.capacity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    bandwidth: f64,
    channel: ChannelSpec,
}

impl BandSpec {
    pub fn new(bandwidth: f64, channel: ChannelSpec) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return domain("bandwidth must be positive and finite");
        }
        Ok(Self { bandwidth, channel })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn channel(&self) -> ChannelSpec {
        self.channel
    }

    /// W·ln(1 + S/(N0·W)).
    pub fn capacity(&self) -> f64 {
        let w = self.bandwidth;
        w * (self.channel.capacity() / w).ln_1p()
    }
}

/// Value of the reliability function together with the strong-converse flag.
///
/// `strong_converse` is set only for R > C, where the error probability tends
/// to one; at R = C exactly the exponent is zero without the flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    pub value: f64,
    pub strong_converse: bool,
}

/// E(R) for capacity `c`, without argument checks.
pub(crate) fn reliability(c: f64, rate: f64) -> f64 {
    if rate <= c / 4.0 {
        c / 2.0 - rate
    } else if rate <= c {
        let d = c.sqrt() - rate.sqrt();
        d * d
    } else {
        0.0
    }
}

/// Reliability function of the infinite-bandwidth AWGN channel:
/// C/2 − R up to C/4, (√C − √R)² up to C, zero beyond.
pub fn awgn_reliability(channel: &ChannelSpec, rate: f64) -> Result<Exponent> {
    if !(rate >= 0.0) {
        return domain("rate must be non-negative");
    }
    let c = channel.capacity();
    Ok(Exponent {
        value: reliability(c, rate),
        strong_converse: rate > c,
    })
}

/// Reliability function for a fixed fading gain `gain`, written as a function
/// of the gain: a²C/2 − R above 2√(R/C), (a√C − √R)² down to √(R/C), then 0.
pub fn fading_reliability(gain: f64, channel: &ChannelSpec, rate: f64) -> Result<f64> {
    if !(gain >= 0.0) {
        return domain("fading gain must be non-negative");
    }
    if !(rate >= 0.0) {
        return domain("rate must be non-negative");
    }
    let c = channel.capacity();
    let knee = (rate / c).sqrt();
    Ok(if gain >= 2.0 * knee {
        gain * gain * c / 2.0 - rate
    } else if gain >= knee {
        let d = gain * c.sqrt() - rate.sqrt();
        d * d
    } else {
        0.0
    })
}

/// Default upper end of the ρ bracket for the sphere-packing maximization.
///
/// The maximizer lies in [0, 1] only above the critical rate; sub-critical
/// rates push it higher.
pub const DEFAULT_RHO_MAX: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePacking {
    pub value: f64,
    pub rho: f64,
}

/// Band-limited sphere-packing exponent
/// max_ρ≥0 { ρW·ln[1 + S/(N0·W·(1+ρ))] − ρR }.
///
/// It coincides with the reliability function only for R ≥ `critical_rate`.
pub fn sphere_packing_exponent(band: &BandSpec, rate: f64) -> Result<SpherePacking> {
    sphere_packing_exponent_with(band, rate, DEFAULT_RHO_MAX)
}

pub fn sphere_packing_exponent_with(
    band: &BandSpec,
    rate: f64,
    rho_max: f64,
) -> Result<SpherePacking> {
    if !(rate > 0.0) {
        return domain("rate must be positive");
    }
    if !(rho_max > 0.0) {
        return domain("rho bracket must be positive");
    }
    let w = band.bandwidth;
    let snr = band.channel.capacity() / w;
    let objective = |rho: f64| rho * w * (snr / (1.0 + rho)).ln_1p() - rho * rate;
    let (rho, value) = maximize_concave_1d(objective, 0.0, rho_max, 1e-10)?;
    Ok(SpherePacking { value, rho })
}

/// R_c(W) = W·[ln(1 + S/(2N0W)) − ½·S/(S + 2N0W)], the ρ = 1 slope of the
/// sphere-packing objective.
pub fn critical_rate(band: &BandSpec) -> f64 {
    let w = band.bandwidth;
    let s = band.channel.power;
    let n0 = band.channel.noise;
    w * ((s / (2.0 * n0 * w)).ln_1p() - 0.5 * s / (s + 2.0 * n0 * w))
}

/// Minimizer and minimum of E(R) + α·R over R ∈ [0, C]: the exponent of the
/// lower bound on E|Û − U|^α obtained from the excess-error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBound {
    pub rate: f64,
    pub exponent: f64,
}

const MOMENT_GRID: usize = 4096;

pub fn moment_bound_exponent(channel: &ChannelSpec, alpha: f64) -> Result<MomentBound> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return domain("moment order must be positive");
    }
    let c = channel.capacity();
    let g = |r: f64| reliability(c, r) + alpha * r;
    let step = c / MOMENT_GRID as f64;
    let mut best = (0usize, g(0.0));
    for k in 1..=MOMENT_GRID {
        let v = g(k as f64 * step);
        if v < best.1 {
            best = (k, v);
        }
    }
    let lo = best.0.saturating_sub(1) as f64 * step;
    let hi = ((best.0 + 1).min(MOMENT_GRID)) as f64 * step;
    let (rate, exponent) = minimize_convex_1d(g, lo, hi, 1e-13 * c)?;
    Ok(MomentBound { rate, exponent })
}

/// Closed form of [`moment_bound_exponent`]: (C/(1+α)², αC/(1+α)) for α < 1,
/// (0, C/2) for α ≥ 1.
pub fn moment_bound_closed_form(channel: &ChannelSpec, alpha: f64) -> Result<MomentBound> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return domain("moment order must be positive");
    }
    let c = channel.capacity();
    Ok(if alpha < 1.0 {
        MomentBound {
            rate: c / ((1.0 + alpha) * (1.0 + alpha)),
            exponent: alpha * c / (1.0 + alpha),
        }
    } else {
        MomentBound {
            rate: 0.0,
            exponent: c / 2.0,
        }
    })
}

/// ⌊C/R⌋, the largest dimension whose total rate d·R may stay below capacity.
///
/// Quotients within 1e-12 (relative) of an integer snap to it, so C = 0.3,
/// R = 0.1 gives 3. At exact divisibility d = C/R has total rate C and is
/// classified as non-decaying; see [`dimension_decays`].
pub fn critical_dimension(channel: &ChannelSpec, rate: f64) -> Result<u64> {
    if !(rate > 0.0) {
        return domain("per-dimension rate must be positive");
    }
    Ok(snapped_floor(channel.capacity() / rate))
}

/// Whether the excess-error probability for `dimension` coordinates at
/// per-dimension rate `rate` decays with T, i.e. d·R < C.
pub fn dimension_decays(channel: &ChannelSpec, rate: f64, dimension: u64) -> Result<bool> {
    let dc = critical_dimension(channel, rate)?;
    let q = channel.capacity() / rate;
    let exact = (q - q.round()).abs() <= 1e-12 * q.round().max(1.0);
    Ok(if exact {
        dimension < dc
    } else {
        dimension <= dc
    })
}

pub(crate) fn snapped_floor(q: f64) -> u64 {
    let r = q.round();
    if (q - r).abs() <= 1e-12 * r.max(1.0) {
        r as u64
    } else {
        q.floor() as u64
    }
}

pub(crate) fn snapped_ceil(q: f64) -> u64 {
    let r = q.round();
    if (q - r).abs() <= 1e-12 * r.max(1.0) {
        r as u64
    } else {
        q.ceil() as u64
    }
}

/// Probability that a Rayleigh gain puts the channel in outage at rate R:
/// P(A²C < R) = 1 − e^{−R/(2C̄)}.
pub fn outage_probability(fading: &FadingSpec, rate: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return domain("rate must be non-negative");
    }
    Ok(-(-rate / (2.0 * fading.average_capacity())).exp_m1())
}

/// E{Q(A√(CT))} under Rayleigh fading and the bounds obtained by replacing
/// sin²θ in the denominator of its Craig-form integral by 0 and by 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadedTail {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// (1/π)∫₀^{π/2} sin²θ/(C̄T + sin²θ) dθ by quadrature.
pub fn fading_zero_rate_value(fading: &FadingSpec, duration: f64) -> Result<FadedTail> {
    if !(duration > 0.0) {
        return domain("duration must be positive");
    }
    let k = fading.average_capacity() * duration;
    let integrand = |theta: f64| {
        let s2 = theta.sin().powi(2);
        s2 / (k + s2)
    };
    let spec = QuadratureSpec::new(1e-300, 1e-13, 60)?;
    let value = integrate_1d(integrand, 0.0, PI / 2.0, &spec)? / PI;
    Ok(FadedTail {
        value,
        lower: 1.0 / (4.0 * (k + 1.0)),
        upper: 1.0 / (4.0 * k),
    })
}
