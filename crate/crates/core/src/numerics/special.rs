//! Gaussian tail function, its logarithm, and the standard normal quantile.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// ln √(2π)
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this point `log_q_tail` switches from `ln(q_tail)` to the Mills-ratio
/// continued fraction.
const LOG_Q_SWITCH: f64 = 5.0;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Gaussian tail Q(x) = P(Z > x) for standard normal Z.
///
/// Computed from the complementary error function; the result is clamped to
/// [0, 1] and saturates to 0 once the tail underflows (x ≳ 38.5).
pub fn q_tail(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    (0.5 * libm::erfc(x * FRAC_1_SQRT_2)).clamp(0.0, 1.0)
}

/// Standard normal CDF Φ(x) = Q(−x).
pub fn normal_cdf(x: f64) -> f64 {
    q_tail(-x)
}

/// ln Q(x), finite for all finite x.
///
/// For x ≥ 5 this uses ln φ(x) + ln R(x), where R is the Mills ratio evaluated
/// by its continued fraction, so it stays accurate far past the point where
/// Q(x) itself underflows.
pub fn log_q_tail(x: f64) -> f64 {
    if x >= LOG_Q_SWITCH {
        -0.5 * x * x - LN_SQRT_2PI + mills_ratio(x).ln()
    } else if x > 0.0 {
        q_tail(x).ln()
    } else {
        (-q_tail(-x)).ln_1p()
    }
}

/// ln Φ(x).
pub fn log_normal_cdf(x: f64) -> f64 {
    log_q_tail(-x)
}

/// Mills ratio Q(x)/φ(x) for x > 0 via the continued fraction
/// 1/(x + 1/(x + 2/(x + 3/(x + ...)))), evaluated with modified Lentz.
fn mills_ratio(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

// AS 241 coefficients, lowest order first.
const A: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1_971.590_950_306_551_4,
    13_731.693_765_509_461,
    45_921.953_931_549_87,
    67_265.770_927_008_7,
    33_430.575_583_588_13,
    2_509.080_928_730_122_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_91,
    687.187_007_492_057_9,
    5_394.196_021_424_751,
    21_213.794_301_586_597,
    39_307.895_800_092_71,
    28_729.085_735_721_943,
    5_226.495_278_852_546,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_545,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    0.022_723_844_989_269_184,
    7.745_450_142_783_414e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    0.689_767_334_985_1,
    0.148_103_976_427_480_07,
    0.015_198_666_563_616_457,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_8e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_9,
    0.026_532_189_526_576_124,
    0.001_242_660_947_388_078_4,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_888,
    0.136_929_880_922_735_8,
    0.014_875_361_290_850_615,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

fn horner(c: &[f64; 8], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * r + k)
}

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1).
///
/// Wichura's AS 241 (PPND16), relative accuracy about 1e-16. Returns ∓∞ at
/// p = 0 and p = 1, NaN outside [0, 1].
pub fn normal_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let z = tail_quantile(tail);
    if q < 0.0 {
        -z
    } else {
        z
    }
}

/// Upper-tail quantile: the x with Q(x) = tail.
///
/// Taking the tail probability directly avoids the cancellation in 1 − p
/// when the tail is tiny.
pub fn q_tail_inverse(tail: f64) -> f64 {
    if tail <= 0.0 {
        return f64::INFINITY;
    }
    if tail >= 0.075 {
        return -normal_quantile(tail);
    }
    tail_quantile(tail)
}

/// AS 241 outer regions: the positive quantile magnitude for a tail
/// probability below 0.075.
fn tail_quantile(tail: f64) -> f64 {
    let r = (-tail.ln()).sqrt();
    if r <= 5.0 {
        let r = r - 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        let r = r - 5.0;
        horner(&E, r) / horner(&F, r)
    }
}

/// Craig's representation Q(x) = (1/π)∫₀^{π/2} exp(−x²/(2 sin²θ)) dθ, x ≥ 0.
/// Used only as an independent cross-check of `q_tail`.
pub fn craig_integrand(x: f64, theta: f64) -> f64 {
    let s = theta.sin();
    if s == 0.0 {
        return 0.0;
    }
    (-(x * x) / (2.0 * s * s)).exp() / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values computed with mpmath at 40 digits.
    const Q_REF: &[(f64, f64, f64)] = &[
        (-3.0, 0.998_650_101_968_369_9, -0.001_350_809_964_748_193_8),
        (-1.0, 0.841_344_746_068_542_9, -0.172_753_779_023_449_9),
        (0.5, 0.308_537_538_725_986_9, -1.175_911_761_593_618_6),
        (1.0, 0.158_655_253_931_457_05, -1.841_021_645_009_263_5),
        (2.0, 0.022_750_131_948_179_207, -3.783_184_333_682_032),
        (3.5, 2.326_290_790_355_250_4e-4, -8.366_065_308_344_093),
        (5.0, 2.866_515_718_791_939e-7, -15.064_998_393_988_726),
        (6.0, 9.865_876_450_376_981e-10, -20.736_768_949_974_706),
        (8.0, 6.220_960_574_271_784e-16, -35.013_437_159_914_55),
        (10.0, 7.619_853_024_160_526e-24, -53.231_285_150_512_47),
        (20.0, 2.753_624_118_606_233_7e-89, -203.917_155_371_097_26),
        (30.0, 4.906_713_927_148_187e-198, -454.321_243_956_343_2),
        (37.0, 5.725_571_222_524_577e-300, -689.030_585_576_890_6),
    ];

    #[test]
    fn q_tail_matches_reference() {
        for &(x, q, lq) in Q_REF {
            if x.abs() <= 8.0 {
                assert!(rel(q_tail(x), q) < 1e-12, "Q({x}) = {}", q_tail(x));
            }
            assert!(
                rel(log_q_tail(x), lq) < 1e-13,
                "lnQ({x}) = {}",
                log_q_tail(x)
            );
        }
    }

    #[test]
    fn q_tail_anchors() {
        assert_eq!(q_tail(0.0), 0.5);
        assert!((q_tail(1.0) - 0.158_655_3).abs() < 5e-8);
        assert!((q_tail(-20.0) - 1.0).abs() <= 1e-15);
        assert_eq!(q_tail(60.0), 0.0);
        assert_eq!(q_tail(-60.0), 1.0);
    }

    #[test]
    fn log_q_is_continuous_at_switch() {
        let below = log_q_tail(LOG_Q_SWITCH - 1e-12);
        let above = log_q_tail(LOG_Q_SWITCH);
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn craig_form_agrees_with_erfc_path() {
        // Composite Simpson on a smooth, bounded integrand.
        for &x in &[0.3, 1.0, 2.5] {
            let n = 2000;
            let h = std::f64::consts::FRAC_PI_2 / n as f64;
            let mut s = craig_integrand(x, 0.0) + craig_integrand(x, std::f64::consts::FRAC_PI_2);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * craig_integrand(x, i as f64 * h);
            }
            let craig = s * h / 3.0;
            assert!(rel(craig, q_tail(x)) < 1e-10);
        }
    }

    #[test]
    fn quantile_matches_reference() {
        let cases = [
            (1e-300, -37.047_096_299_361_2),
            (1e-100, -21.273_453_560_965_324),
            (1e-20, -9.262_340_089_798_408),
            (1e-10, -6.361_340_902_404_056),
            (0.001, -3.090_232_306_167_813_5),
            (0.025, -1.959_963_984_540_054),
            (0.3, -0.524_400_512_708_040_8),
            (0.9, 1.281_551_565_544_600_5),
        ];
        for (p, x) in cases {
            assert!(
                rel(normal_quantile(p), x) < 1e-14,
                "p={p}: {}",
                normal_quantile(p)
            );
        }
        // 1 − p carries the representation error of 0.999999 (≈1e-10 relative).
        assert!(rel(normal_quantile(0.999_999), 4.753_424_308_822_899) < 1e-10);
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((q_tail_inverse(1e-20) - 9.262_340_089_798_408).abs() < 1e-13);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-14);
        }
        for k in 1..30 {
            let t = 10f64.powi(-k * 10);
            let x = q_tail_inverse(t);
            assert!((log_q_tail(x) - t.ln()).abs() < 1e-12 * t.ln().abs());
        }
    }
}
