//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use modest::detection::{
    exact_mary_error, variable_power_bound, zero_rate_lower_bound, zero_rate_signal_count,
    zero_rate_upper_bound, PowerProfile, SignalSetSpec,
};
use modest::exponents::{
    awgn_reliability, critical_rate, fading_zero_rate_value, moment_bound_exponent,
    outage_probability, sphere_packing_exponent, BandSpec, ChannelSpec, FadingSpec,
};
use modest::jscc::{uniform_source_equality, DEFAULT_GRID_POINTS};
use modest::numerics::{integrate_1d, q_tail, QuadratureSpec, RandomStream};
use modest::simulator::{
    estimator_to_detector, mse_from_tail, run_excess_error, run_fading, run_multidim,
    sample_scalar_scheme, ExperimentConfig, TailEstimate,
};

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new() -> Self {
        Self {
            pass: true,
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        if !ok {
            self.pass = false;
        }
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(what.as_ref());
        if !ok {
            self.detail.push_str(" [x]");
        }
    }
}

fn channel(c: f64) -> ChannelSpec {
    ChannelSpec::from_capacity(c).unwrap()
}

fn orthogonal_error(count: f64, energy_ratio: f64) -> f64 {
    exact_mary_error(&SignalSetSpec::orthogonal(count, energy_ratio).unwrap()).unwrap()
}

fn three_sigma(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

fn reliability_anchors() -> Verdict {
    let mut v = Verdict::new();
    let ch = channel(1.0);
    let e = |r: f64| awgn_reliability(&ch, r).unwrap().value;
    for (r, want) in [(0.0, 0.5), (0.25, 0.25), (1.0, 0.0), (1.0 / 6.0, 1.0 / 3.0)] {
        let got = e(r);
        v.check((got - want).abs() <= 1e-12, format!("E({r:.4}) = {got}"));
    }
    let n = 1000;
    let h = 1.0 / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|i| e(i as f64 * h)).collect();
    // |E'| ≤ 1 on [0, C] for C = 1.
    let max_jump = vals
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    v.check(
        max_jump <= h * (1.0 + 1e-9),
        format!("max step {max_jump:.3e}"),
    );
    let min_second = vals
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::INFINITY, f64::min);
    v.check(
        min_second >= -1e-10,
        format!("min second difference {min_second:.3e}"),
    );
    v
}

fn moment_exponents() -> Verdict {
    let mut v = Verdict::new();
    let ch = channel(1.0);
    let mut worst: f64 = 0.0;
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        let b = moment_bound_exponent(&ch, alpha).unwrap();
        let err = (b.exponent - alpha / (1.0 + alpha))
            .abs()
            .max((b.rate - 1.0 / (1.0 + alpha).powi(2)).abs());
        worst = worst.max(err);
    }
    v.check(worst <= 1e-6, format!("alpha<1 worst error {worst:.2e}"));
    for alpha in [1.0, 2.0] {
        let b = moment_bound_exponent(&ch, alpha).unwrap();
        v.check(
            (b.exponent - 0.5).abs() <= 1e-6,
            format!("alpha={alpha}: {:.9}", b.exponent),
        );
    }
    v
}

fn band_limited_limits() -> Verdict {
    let mut v = Verdict::new();
    let ch = channel(1.0);
    let wide = BandSpec::new(1e4, ch).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=12 {
        let r = 0.3 + 0.05 * i as f64;
        let sp = sphere_packing_exponent(&wide, r).unwrap().value;
        let limit = (1.0 - r.sqrt()).powi(2);
        worst = worst.max((sp / limit - 1.0).abs());
    }
    v.check(
        worst <= 0.005,
        format!("E_sp worst relative gap {worst:.2e}"),
    );
    let rc = critical_rate(&wide);
    v.check(
        (rc / 0.25 - 1.0).abs() <= 0.01,
        format!("R_c(W=1e4) = {rc:.6}"),
    );
    // ln(3/2) − 1/6, evaluated independently.
    let want = 1.5f64.ln() - 1.0 / 6.0;
    let rc1 = critical_rate(&BandSpec::new(1.0, ch).unwrap());
    v.check((rc1 - want).abs() <= 1e-7, format!("R_c(1,1,1) = {rc1:.9}"));
    v
}

fn oracle_agreement() -> Verdict {
    let mut v = Verdict::new();
    // (M, 2𝓔/N0) realized by C = 1 and T = 2𝓔/N0 / 2 with R = ln(2M)/T.
    for (m, snr2) in [(4u64, 8.0), (16, 16.0), (64, 32.0)] {
        let t = snr2 / 2.0;
        let rate = (2.0 * m as f64).ln() / t;
        let cfg = ExperimentConfig::scalar(channel(1.0), t, rate, 100_000, 1000 + m);
        let est = run_excess_error(&cfg).unwrap();
        let p = orthogonal_error(m as f64, snr2 / 2.0);
        let tol = three_sigma(p, est.n);
        v.check(
            (est.p_hat - p).abs() <= tol,
            format!("M={m}: p_hat {:.5} vs {p:.5} (tol {tol:.1e})", est.p_hat),
        );
    }
    v
}

fn exponent_slope() -> Verdict {
    let mut v = Verdict::new();
    let rate: f64 = 0.4;
    let target = (1.0 - rate.sqrt()).powi(2);
    let times: Vec<f64> = (0..8).map(|i| 60.0 + 20.0 * i as f64).collect();
    let logs: Vec<f64> = times
        .iter()
        .map(|&t| orthogonal_error(((rate * t).exp() / 2.0).round(), t).ln())
        .collect();
    let slopes: Vec<f64> = logs
        .windows(2)
        .zip(times.windows(2))
        .map(|(l, t)| (l[0] - l[1]) / (t[1] - t[0]))
        .collect();
    let last = *slopes.last().unwrap();
    v.check(
        (last / target - 1.0).abs() <= 0.10,
        format!(
            "slopes {:?}, last {last:.4} vs {target:.7}",
            slopes
                .iter()
                .map(|s| (s * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        ),
    );
    v
}

fn zero_rate_sandwich() -> Verdict {
    let mut v = Verdict::new();
    for delta in [0.1, 0.05] {
        for energy in [1.0, 4.0] {
            let m = zero_rate_signal_count(delta).unwrap() as f64;
            let exact = exact_mary_error(&SignalSetSpec::simplex(m, energy).unwrap()).unwrap();
            let lo = zero_rate_lower_bound(delta, energy).unwrap();
            let hi = zero_rate_upper_bound(delta, energy).unwrap();
            v.check(
                lo <= exact && exact <= hi,
                format!("delta={delta} E/N0={energy}: {lo:.3e} <= {exact:.3e} <= {hi:.3e}"),
            );
        }
    }
    let lb = zero_rate_lower_bound(0.25, 1.0).unwrap();
    v.check(
        (lb - 0.0098312).abs() <= 1e-6,
        format!("LB(0.25, 1) = {lb:.7}"),
    );
    // 3·Q(√(4/3)) to 16 digits (mpmath).
    let ub = zero_rate_upper_bound(0.25, 1.0).unwrap();
    v.check(
        (ub - 0.372_319_618_484_885_4).abs() <= 1e-6,
        format!("UB(0.25, 1) = {ub:.7} (3*Q(sqrt(4/3)))"),
    );
    v
}

fn threshold_effect() -> Verdict {
    let mut v = Verdict::new();
    let t: f64 = 200.0;
    let below = orthogonal_error(((0.7 * t).exp() / 2.0).round(), t);
    v.check(below < 1e-2, format!("rate 0.7: P_e {below:.3e}"));
    let above = orthogonal_error(((1.2 * t).exp() / 2.0).round(), t);
    v.check(above > 0.95, format!("rate 1.2: P_e {above:.4}"));

    let run = |d: usize| -> TailEstimate {
        let cfg =
            ExperimentConfig::multidim(channel(1.0), 30.0, vec![0.35; d], 10_000, 70 + d as u64);
        run_multidim(&cfg).unwrap()
    };
    let two = run(2);
    let four = run(4);
    let margin = three_sigma(two.p_hat, two.n) + three_sigma(four.p_hat, four.n);
    v.check(
        four.p_hat - two.p_hat > margin,
        format!(
            "d=2 {:.4}, d=4 {:.4}, margin {margin:.4}",
            two.p_hat, four.p_hat
        ),
    );
    v
}

/// E_A[P_e(M, A²·2CT)] for Rayleigh A, by nested quadrature.
fn faded_exact_error(sigma: f64, capacity: f64, duration: f64, rate: f64) -> f64 {
    let m = ((rate * duration).exp() / 2.0).round();
    let energy = capacity * duration;
    let density = |a: f64| a / (sigma * sigma) * (-a * a / (2.0 * sigma * sigma)).exp();
    let spec = QuadratureSpec::new(1e-12, 1e-8, 40).unwrap();
    integrate_1d(
        |a| density(a) * orthogonal_error(m, a * a * energy),
        0.0,
        12.0 * sigma,
        &spec,
    )
    .unwrap()
}

fn fading() -> Verdict {
    let mut v = Verdict::new();
    for k in [1.0, 10.0, 100.0] {
        let f = FadingSpec::new(1.0, channel(1.0)).unwrap();
        let tail = fading_zero_rate_value(&f, k).unwrap();
        let closed = 0.5 * (1.0 - (k / (k + 1.0)).sqrt());
        v.check(
            (tail.value - closed).abs() <= 1e-10
                && tail.value >= 1.0 / (4.0 * (k + 1.0))
                && tail.value <= 1.0 / (4.0 * k),
            format!("K={k}: {:.10}", tail.value),
        );
    }
    let cfg = ExperimentConfig::scalar(channel(1.0), 40.0, 0.5, 100_000, 8)
        .with_fading(1.0)
        .unwrap();
    let est = run_fading(&cfg).unwrap();
    let outage = outage_probability(cfg.fading.as_ref().unwrap(), 0.5).unwrap();
    let tol = 0.02f64.max(three_sigma(outage, est.n));
    let finite_t = faded_exact_error(1.0, 1.0, 40.0, 0.5);
    v.check(
        (est.p_hat - outage).abs() <= tol,
        format!(
            "MC p_hat {:.4} vs outage {outage:.7} (tol {tol:.3}); exact finite-T mean {finite_t:.4}",
            est.p_hat
        ),
    );
    v
}

fn detector_harness() -> Verdict {
    let mut v = Verdict::new();
    // M = 16, 2𝓔/N0 = 16.
    let t = 8.0;
    let cfg = ExperimentConfig::scalar(channel(1.0), t, 32f64.ln() / t, 100_000, 9);
    let samples = sample_scalar_scheme(&cfg).unwrap();
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.u, s.u_hat)).collect();
    let report = estimator_to_detector(&pairs, 1.0 / 16.0, 16).unwrap();
    let optimal = orthogonal_error(16.0, 8.0);
    let slack = three_sigma(optimal, report.trials);
    v.check(
        optimal <= report.detector_error + slack,
        format!(
            "optimal {optimal:.5} <= detector {:.5}",
            report.detector_error
        ),
    );
    v.check(
        report.detector_error <= report.mean_conditional_excess + slack,
        format!(
            "detector <= mean conditional excess {:.5}",
            report.mean_conditional_excess
        ),
    );
    v
}

fn identities() -> Verdict {
    let mut v = Verdict::new();
    let mut rng = RandomStream::new(10, 0).cursor();
    let mut worst: f64 = 0.0;
    for n in [1usize, 7, 100, 10_000] {
        let errors: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let (direct, tail) = mse_from_tail(&errors).unwrap();
        worst = worst.max((direct - tail).abs() / direct);
    }
    v.check(worst <= 1e-12, format!("MSE identity worst {worst:.1e}"));

    for frac in [0.25, 0.5, 0.9] {
        let r = uniform_source_equality(frac, &channel(1.0), DEFAULT_GRID_POINTS).unwrap();
        let e = awgn_reliability(&channel(1.0), frac).unwrap().value;
        v.check(
            (r.joint - e).abs() <= 1e-6 && (r.separation - e).abs() <= 1e-6,
            format!(
                "R*={frac}C: joint {:.7} separation {:.7}",
                r.joint, r.separation
            ),
        );
    }

    let (rate, t, eps) = (0.6, 30.0, 0.05);
    let flat = PowerProfile::new(vec![2.0; 32], 0.1, 2.0).unwrap();
    let b = variable_power_bound(&flat, rate, t, Some(eps), 1.0).unwrap();
    let direct = (-t
        * awgn_reliability(&channel(2.0), rate - 2.0 * eps)
            .unwrap()
            .value)
        .exp();
    v.check(
        b.mixture == direct && b.convexified == direct,
        "constant profile reduces to one power",
    );

    let mut two_level = vec![0.8; 50];
    two_level.extend(vec![1.2; 50]);
    let profile = PowerProfile::new(two_level, 0.1, 1.0).unwrap();
    let b = variable_power_bound(&profile, 0.3, 20.0, Some(0.05), 1.0).unwrap();
    v.check(
        b.above_threshold && b.mixture >= b.convexified,
        format!(
            "two-level: T=20 >= {:.3}, mixture {:.4e} >= convexified {:.4e}",
            b.threshold, b.mixture, b.convexified
        ),
    );
    v
}

fn determinism() -> Verdict {
    let mut v = Verdict::new();
    let runs: [&[&str]; 3] = [
        &[
            "simulate",
            "scalar",
            "--capacity",
            "2",
            "--time",
            "4",
            "--rate",
            "0.5",
            "--trials",
            "100000",
            "--seed",
            "7",
        ],
        &[
            "simulate",
            "multidim",
            "--capacity",
            "1",
            "--time",
            "20",
            "--rates",
            "0.3,0.3",
            "--trials",
            "50000",
            "--seed",
            "3",
        ],
        &[
            "simulate",
            "fading",
            "--capacity",
            "1",
            "--sigma",
            "1",
            "--time",
            "20",
            "--rate",
            "0.5",
            "--trials",
            "50000",
            "--seed",
            "5",
        ],
    ];
    for args in runs {
        let out = |workers: &str| {
            let o = Command::new(env!("CARGO_BIN_EXE_modest"))
                .args(args)
                .args(["--workers", workers])
                .output()
                .expect("run binary");
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            o.stdout
        };
        let a = out("1");
        let b = out("8");
        v.check(a == b && !a.is_empty(), format!("{} {}", args[0], args[1]));
    }
    v
}

fn main() {
    type Criterion = (u32, &'static str, u64, fn() -> Verdict);
    let criteria: [Criterion; 11] = [
        (1, "reliability-function anchors", 1, reliability_anchors),
        (2, "moment exponents", 1, moment_exponents),
        (3, "band-limited limits", 5, band_limited_limits),
        (4, "oracle agreement", 10, oracle_agreement),
        (5, "exponent slope", 30, exponent_slope),
        (6, "zero-rate sandwich", 1, zero_rate_sandwich),
        (7, "threshold effect", 60, threshold_effect),
        (8, "fading", 30, fading),
        (9, "estimator-to-detector chain", 10, detector_harness),
        (10, "identities and algebra", 5, identities),
        (11, "determinism", 20, determinism),
    ];
    let mut failed = 0;
    for (n, name, budget, run) in criteria {
        let start = Instant::now();
        let mut verdict = run();
        let elapsed = start.elapsed();
        verdict.check(
            elapsed <= Duration::from_secs(budget),
            format!("{:.2}s of {budget}s", elapsed.as_secs_f64()),
        );
        let status = if verdict.pass { "PASS" } else { "FAIL" };
        if !verdict.pass {
            failed += 1;
        }
        println!("criterion {n:>2} {status} {name}: {}", verdict.detail);
    }
    // Guard against a broken Q implementation silently shifting every check.
    assert!((q_tail(1.0) - 0.158_655_253_931_457).abs() < 1e-14);
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
